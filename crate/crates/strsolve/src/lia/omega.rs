//! Shadow-based variable elimination for integer inequality systems: the
//! completeness backstop behind branch-and-bound.
//!
//! For each eliminated variable the real/dark shadow combinations are taken
//! over all lower/upper bound pairs; when some pair has both coefficients
//! above 1 the dark shadow is incomplete and the residual "splinter"
//! equalities are enumerated and recursively solved.

use std::collections::BTreeMap;

use num::{Integer, Signed, Zero};

use crate::automata::Int;
use crate::error::Result;
use crate::preimage::LinearTerm;

use super::{check_deadline, solve_norm, NormAtom, SolveLimits, Var};

fn ceil_div(a: &Int, b: &Int) -> Int {
    debug_assert!(b.is_positive());
    a.div_ceil(b)
}

fn floor_div(a: &Int, b: &Int) -> Int {
    debug_assert!(b.is_positive());
    a.div_floor(b)
}

/// Complete decision for `ineqs` (each `t >= 0`) over the integers.
pub(crate) fn solve_ineqs(
    ineqs: Vec<LinearTerm>,
    limits: &SolveLimits,
    depth: usize,
) -> Result<Option<BTreeMap<Var, Int>>> {
    check_deadline(limits)?;
    // Constant rows decide themselves.
    let mut system: Vec<LinearTerm> = Vec::with_capacity(ineqs.len());
    for t in ineqs {
        if t.is_constant() {
            if t.constant.is_negative() {
                return Ok(None);
            }
        } else {
            system.push(t);
        }
    }
    let Some(x) = pick_var(&system) else {
        return Ok(Some(BTreeMap::new()));
    };

    // Split on x: lower bounds a*x >= alpha (written t = a*x + rest >= 0,
    // alpha = -rest), upper bounds b*x <= beta (t = -b*x + rest, beta = rest).
    let mut lowers: Vec<(Int, LinearTerm)> = Vec::new(); // (a, alpha)
    let mut uppers: Vec<(Int, LinearTerm)> = Vec::new(); // (b, beta)
    let mut rest: Vec<LinearTerm> = Vec::new();
    for t in &system {
        let c = t.coeff(&x);
        if c.is_zero() {
            rest.push(t.clone());
        } else {
            let mut others = t.clone();
            others.coeffs.remove(&x);
            if c.is_positive() {
                lowers.push((c, others.scale(&Int::from(-1))));
            } else {
                uppers.push((-c, others));
            }
        }
    }

    if lowers.is_empty() || uppers.is_empty() {
        // x unbounded on one side: drop its constraints, solve the rest,
        // then pick x at the surviving bounds.
        let sub = solve_ineqs(rest, limits, depth)?;
        let Some(mut model) = sub else { return Ok(None) };
        let value = extend_unbounded(&lowers, &uppers, &mut model)?;
        model.insert(x, value);
        return Ok(Some(model));
    }

    // Every lower/upper pair with a unit coefficient eliminates exactly.
    let exact = lowers.iter().all(|(a, _)| *a == Int::from(1))
        || uppers.iter().all(|(b, _)| *b == Int::from(1));

    // Shadow system: for every pair, a*beta - b*alpha >= delta with delta = 0
    // (real) or (a-1)(b-1) (dark).
    let shadow = |dark: bool| -> Vec<LinearTerm> {
        let mut out = rest.clone();
        for (a, alpha) in &lowers {
            for (b, beta) in &uppers {
                let mut t = beta.scale(a).sub(&alpha.scale(b));
                if dark {
                    t.constant -= (a - Int::from(1)) * (b - Int::from(1));
                }
                out.push(t);
            }
        }
        out
    };

    if exact {
        let sub = solve_ineqs(shadow(false), limits, depth)?;
        let Some(mut model) = sub else { return Ok(None) };
        let value = choose_in_range(&lowers, &uppers, &mut model)?
            .expect("real shadow is exact for unit coefficient pairs");
        model.insert(x, value);
        return Ok(Some(model));
    }

    // Dark shadow: sufficient.
    if let Some(mut model) = solve_ineqs(shadow(true), limits, depth)? {
        if let Some(value) = choose_in_range(&lowers, &uppers, &mut model)? {
            model.insert(x, value);
            return Ok(Some(model));
        }
        // Dark shadow guarantees a value exists; not finding one means the
        // guarantee did not apply numerically. Fall through to splinters.
    }

    // Splinters: if a solution exists outside the dark shadow then for some
    // lower bound a*x >= alpha, a*x = alpha + j for a small j.
    let b_max = uppers.iter().map(|(b, _)| b.clone()).max().unwrap();
    for (a, alpha) in &lowers {
        if *a == Int::from(1) {
            continue;
        }
        let hi = (a * &b_max - a - &b_max).div_floor(&b_max);
        let mut j = Int::from(0);
        while j <= hi {
            check_deadline(limits)?;
            // a*x - alpha - j = 0 joined with the full system.
            let mut eq = LinearTerm::constant_term(0)
                .add_var(x.clone(), a.clone())
                .sub(alpha);
            eq.constant -= &j;
            let mut atoms: Vec<NormAtom> = system.iter().cloned().map(NormAtom::Ge).collect();
            atoms.push(NormAtom::Eq(eq));
            if let Some(model) = solve_norm(atoms, limits, depth + 1)? {
                return Ok(Some(model));
            }
            j += 1;
        }
    }
    Ok(None)
}

/// Heuristic: the variable with the fewest lower*upper combinations.
fn pick_var(system: &[LinearTerm]) -> Option<Var> {
    let mut counts: BTreeMap<&Var, (usize, usize)> = BTreeMap::new();
    for t in system {
        for (v, c) in &t.coeffs {
            let e = counts.entry(v).or_insert((0, 0));
            if c.is_positive() {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    counts
        .into_iter()
        .min_by_key(|(_, (lo, up))| lo * up)
        .map(|(v, _)| v.clone())
}

fn extend_unbounded(
    lowers: &[(Int, LinearTerm)],
    uppers: &[(Int, LinearTerm)],
    model: &mut BTreeMap<Var, Int>,
) -> Result<Int> {
    default_missing(lowers, model);
    default_missing(uppers, model);
    if !lowers.is_empty() {
        let mut best: Option<Int> = None;
        for (a, alpha) in lowers {
            let v = ceil_div(&alpha.evaluate(model)?, a);
            best = Some(best.map_or(v.clone(), |b: Int| b.max(v)));
        }
        Ok(best.unwrap())
    } else if !uppers.is_empty() {
        let mut best: Option<Int> = None;
        for (b, beta) in uppers {
            let v = floor_div(&beta.evaluate(model)?, b);
            best = Some(best.map_or(v.clone(), |x: Int| x.min(v)));
        }
        Ok(best.unwrap())
    } else {
        Ok(Int::from(0))
    }
}

/// Largest lower bound, checked against every upper bound.
fn choose_in_range(
    lowers: &[(Int, LinearTerm)],
    uppers: &[(Int, LinearTerm)],
    model: &mut BTreeMap<Var, Int>,
) -> Result<Option<Int>> {
    default_missing(lowers, model);
    default_missing(uppers, model);
    let mut low: Option<Int> = None;
    for (a, alpha) in lowers {
        let v = ceil_div(&alpha.evaluate(model)?, a);
        low = Some(low.map_or(v.clone(), |b: Int| b.max(v)));
    }
    let x = low.expect("nonempty lowers");
    for (b, beta) in uppers {
        if &x * b > beta.evaluate(model)? {
            return Ok(None);
        }
    }
    Ok(Some(x))
}

fn default_missing(bounds: &[(Int, LinearTerm)], model: &mut BTreeMap<Var, Int>) {
    for (_, t) in bounds {
        for v in t.vars() {
            model.entry(v.clone()).or_insert_with(Int::zero);
        }
    }
}
