//! Quantifier-free linear integer arithmetic: atoms, conjunctions, models,
//! and a complete satisfiability decision.
//!
//! The decision pipeline per conjunction: normalize atoms to `t = 0` /
//! `t >= 0` form with GCD tightening, eliminate equalities integer-exactly
//! (introducing auxiliary variables when no unit coefficient exists), then
//! decide the inequality system by exact rational simplex plus
//! branch-and-bound, falling back to shadow-based variable elimination with
//! splinters when the branching budget runs out. Disequalities are split
//! into strict alternatives before solving.

pub mod external;
pub mod omega;
pub mod parikh;
pub mod simplex;

use std::collections::{BTreeMap, BTreeSet};

use num::{Integer, Signed};

use crate::automata::Int;
use crate::error::{Error, Result};
use crate::ids::RegisterId;
use crate::preimage::LinearTerm;
use crate::program::Rel;

pub type Var = RegisterId;

#[derive(Debug, Clone)]
pub struct LiaAtom {
    pub lhs: LinearTerm,
    pub rel: Rel,
    pub rhs: LinearTerm,
}

impl LiaAtom {
    pub fn new(lhs: LinearTerm, rel: Rel, rhs: LinearTerm) -> Self {
        LiaAtom { lhs, rel, rhs }
    }

    pub fn holds(&self, values: &BTreeMap<Var, Int>) -> Result<bool> {
        Ok(self
            .rel
            .eval(&self.lhs.evaluate(values)?, &self.rhs.evaluate(values)?))
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.lhs.vars().chain(self.rhs.vars()).cloned().collect()
    }
}

/// A conjunction of atoms. Disequalities are split away by
/// [`LiaConjunction::split_disequalities`] before solving.
#[derive(Debug, Clone, Default)]
pub struct LiaConjunction {
    pub atoms: Vec<LiaAtom>,
}

impl LiaConjunction {
    pub fn new(atoms: Vec<LiaAtom>) -> Self {
        LiaConjunction { atoms }
    }

    /// Expands every `!=` atom into `<` / `>` alternatives; the result
    /// contains no disequalities.
    pub fn split_disequalities(&self) -> Vec<LiaConjunction> {
        let mut alternatives = vec![Vec::new()];
        for atom in &self.atoms {
            if atom.rel == Rel::Ne {
                let lt = LiaAtom::new(atom.lhs.clone(), Rel::Lt, atom.rhs.clone());
                let gt = LiaAtom::new(atom.lhs.clone(), Rel::Gt, atom.rhs.clone());
                let mut next = Vec::with_capacity(alternatives.len() * 2);
                for alt in alternatives {
                    let mut with_lt = alt.clone();
                    with_lt.push(lt.clone());
                    let mut with_gt = alt;
                    with_gt.push(gt.clone());
                    next.push(with_lt);
                    next.push(with_gt);
                }
                alternatives = next;
            } else {
                for alt in &mut alternatives {
                    alt.push(atom.clone());
                }
            }
        }
        alternatives.into_iter().map(LiaConjunction::new).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LiaModel {
    pub values: BTreeMap<Var, Int>,
}

impl LiaModel {
    pub fn value(&self, v: &Var) -> Int {
        self.values.get(v).cloned().unwrap_or_else(|| Int::from(0))
    }

    pub fn satisfies(&self, atoms: &[LiaAtom]) -> Result<bool> {
        for a in atoms {
            if !a.holds(&self.values)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Normalized atom: `term = 0` or `term >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum NormAtom {
    Eq(LinearTerm),
    Ge(LinearTerm),
}

impl NormAtom {
    fn term(&self) -> &LinearTerm {
        match self {
            NormAtom::Eq(t) | NormAtom::Ge(t) => t,
        }
    }
}

/// Divides an inequality `t >= 0` by the GCD of its coefficients, rounding
/// the constant down (valid and strengthening over the integers); reports
/// divisibility failure for equalities.
fn tighten(atom: NormAtom) -> Result<NormAtom> {
    let term = atom.term();
    let mut g = Int::from(0);
    for c in term.coeffs.values() {
        g = g.gcd(c);
    }
    if g <= Int::from(1) {
        return Ok(atom);
    }
    let coeffs: BTreeMap<Var, Int> = term
        .coeffs
        .iter()
        .map(|(r, c)| (r.clone(), c / &g))
        .collect();
    match atom {
        NormAtom::Eq(t) => {
            if !(&t.constant % &g).is_zero() {
                return Err(Error::Input("gcd-infeasible equality".into()));
            }
            Ok(NormAtom::Eq(LinearTerm {
                constant: &t.constant / &g,
                coeffs,
            }))
        }
        NormAtom::Ge(t) => Ok(NormAtom::Ge(LinearTerm {
            constant: t.constant.div_floor(&g),
            coeffs,
        })),
    }
}

use num::Zero;

pub(crate) fn normalize_atom(atom: &LiaAtom) -> Result<Vec<NormAtom>> {
    let one = LinearTerm::constant_term(1);
    let d = atom.lhs.sub(&atom.rhs);
    let atoms = match atom.rel {
        Rel::Eq => vec![NormAtom::Eq(d)],
        Rel::Le => vec![NormAtom::Ge(d.scale(&Int::from(-1)))],
        Rel::Lt => vec![NormAtom::Ge(d.scale(&Int::from(-1)).sub(&one))],
        Rel::Ge => vec![NormAtom::Ge(d)],
        Rel::Gt => vec![NormAtom::Ge(d.sub(&one))],
        Rel::Ne => {
            return Err(Error::internal(
                "disequality reached the solver; split alternatives first",
            ))
        }
    };
    atoms
        .into_iter()
        .map(|a| match tighten(a) {
            Ok(a) => Ok(Some(a)),
            Err(Error::Input(_)) => Ok(None), // gcd-infeasible: unsatisfiable atom
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<Option<NormAtom>>>>()
        .map(|v| {
            v.into_iter()
                .map(|a| a.unwrap_or_else(|| NormAtom::Ge(LinearTerm::constant_term(-1))))
                .collect()
        })
}

/// Limits for a single solve.
#[derive(Debug, Clone)]
pub struct SolveLimits {
    /// Branch-and-bound node budget before falling back to elimination.
    pub bnb_nodes: usize,
    /// Recursion depth cap for the elimination fallback.
    pub omega_depth: usize,
    pub deadline: Option<std::time::Instant>,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            bnb_nodes: 2000,
            omega_depth: 64,
            deadline: None,
        }
    }
}

pub(crate) fn check_deadline(limits: &SolveLimits) -> Result<()> {
    if let Some(d) = limits.deadline {
        if std::time::Instant::now() > d {
            return Err(Error::ResourceLimit("timeout".into()));
        }
    }
    Ok(())
}

/// Complete decision for a list of alternative conjunctions: returns the
/// first model found, or `None` when every alternative is unsatisfiable.
pub fn lia_solve(alternatives: &[LiaConjunction]) -> Result<Option<LiaModel>> {
    lia_solve_with(alternatives, &SolveLimits::default())
}

pub fn lia_solve_with(
    alternatives: &[LiaConjunction],
    limits: &SolveLimits,
) -> Result<Option<LiaModel>> {
    for alt in alternatives {
        for split in alt.split_disequalities() {
            let mut norm = Vec::new();
            for atom in &split.atoms {
                norm.extend(normalize_atom(atom)?);
            }
            if let Some(values) = solve_norm(norm, limits, 0)? {
                let model = LiaModel { values };
                debug_assert!(model.satisfies(&split.atoms)?);
                return Ok(Some(model));
            }
        }
    }
    Ok(None)
}

/// Decides a normalized system. Complete; errors only on resource limits.
///
/// The fast path hands equalities straight to the simplex (double-bounded
/// slack rows) and branches on fractional values; only when the branching
/// budget runs out does the integer-exact elimination pipeline take over.
pub(crate) fn solve_norm(
    atoms: Vec<NormAtom>,
    limits: &SolveLimits,
    depth: usize,
) -> Result<Option<BTreeMap<Var, Int>>> {
    check_deadline(limits)?;
    if depth > limits.omega_depth {
        return Err(Error::ResourceLimit(
            "arithmetic elimination recursion limit".into(),
        ));
    }
    let mut eqs: Vec<LinearTerm> = Vec::new();
    let mut ineqs: Vec<LinearTerm> = Vec::new();
    for a in &atoms {
        match a {
            NormAtom::Eq(t) => eqs.push(t.clone()),
            NormAtom::Ge(t) => ineqs.push(t.clone()),
        }
    }
    match simplex::solve_system_bnb(&eqs, &ineqs, limits)? {
        simplex::BnbOutcome::Sat(m) => Ok(Some(m)),
        simplex::BnbOutcome::Unsat => Ok(None),
        simplex::BnbOutcome::BudgetExceeded => solve_norm_by_elimination(atoms, limits, depth),
    }
}

/// Stage A (integer-exact equality elimination) + Stage C (shadow
/// elimination): the completeness backstop.
fn solve_norm_by_elimination(
    atoms: Vec<NormAtom>,
    limits: &SolveLimits,
    depth: usize,
) -> Result<Option<BTreeMap<Var, Int>>> {
    let (ineqs, subst) = match eliminate_equalities(atoms)? {
        Some(x) => x,
        None => return Ok(None),
    };
    let base = omega::solve_ineqs(ineqs, limits, depth)?;
    let Some(mut model) = base else {
        return Ok(None);
    };
    // Back-substitute eliminated variables, most recent first.
    for (var, term) in subst.iter().rev() {
        // Variables the term mentions but nothing constrained default to 0.
        for v in term.vars() {
            model.entry(v.clone()).or_insert_with(|| Int::from(0));
        }
        let value = term.evaluate(&model)?;
        model.insert(var.clone(), value);
    }
    Ok(Some(model))
}

/// Eliminates all equalities, returning the residual inequalities and the
/// substitution stack, or `None` when an equality is infeasible.
#[allow(clippy::type_complexity)]
fn eliminate_equalities(
    atoms: Vec<NormAtom>,
) -> Result<Option<(Vec<LinearTerm>, Vec<(Var, LinearTerm)>)>> {
    let mut eqs: Vec<LinearTerm> = Vec::new();
    let mut ineqs: Vec<LinearTerm> = Vec::new();
    for a in atoms {
        match a {
            NormAtom::Eq(t) => eqs.push(t),
            NormAtom::Ge(t) => ineqs.push(t),
        }
    }
    let mut subst: Vec<(Var, LinearTerm)> = Vec::new();
    let mut aux = 0u64;
    while let Some(eq) = eqs.pop() {
        let t = match tighten(NormAtom::Eq(eq)) {
            Ok(NormAtom::Eq(t)) => t,
            Ok(_) => unreachable!(),
            Err(Error::Input(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        if t.is_constant() {
            if t.constant.is_zero() {
                continue;
            }
            return Ok(None);
        }
        // Prefer a unit coefficient; otherwise shrink coefficients by the
        // balanced-modulus step until one appears.
        let unit = t
            .coeffs
            .iter()
            .find(|(_, c)| c.abs() == Int::from(1))
            .map(|(r, c)| (r.clone(), c.clone()));
        if let Some((var, coeff)) = unit {
            // coeff * var + rest = 0  =>  var = -rest / coeff.
            let mut rest = t.clone();
            rest.coeffs.remove(&var);
            let replacement = rest.scale(&-coeff);
            for e in eqs.iter_mut() {
                if e.coeffs.contains_key(&var) {
                    *e = e.substitute(&var, &replacement);
                }
            }
            for i in ineqs.iter_mut() {
                if i.coeffs.contains_key(&var) {
                    *i = i.substitute(&var, &replacement);
                }
            }
            subst.push((var, replacement));
        } else {
            // Balanced-modulus reduction with a fresh auxiliary variable.
            let (var, coeff) = t
                .coeffs
                .iter()
                .min_by_key(|(_, c)| c.abs())
                .map(|(r, c)| (r.clone(), c.clone()))
                .expect("nonconstant equality has a variable");
            let m = coeff.abs() + 1;
            aux += 1;
            let sigma = SIGMA_SESSION.fresh(format!("sigma{aux}"));
            // With m = |coeff| + 1 the balanced residue of coeff is
            // -sign(coeff), so the derived congruence
            //   m*sigma = sum_i bmod(a_i, m) x_i + bmod(c, m)
            // solves for var with a unit coefficient:
            //   var = sign(coeff) * (-m*sigma + sum_{i != k} bmod(a_i) x_i
            //                        + bmod(c)).
            // Substituting shrinks the equality's coefficients.
            let sign = if coeff >= Int::from(0) {
                Int::from(1)
            } else {
                Int::from(-1)
            };
            let mut repl = LinearTerm::constant_term(0).add_var(sigma, -&m);
            repl.constant = balanced_mod(&t.constant, &m);
            for (r, c) in &t.coeffs {
                if *r == var {
                    continue;
                }
                let bc = balanced_mod(c, &m);
                if !bc.is_zero() {
                    repl = repl.add_var(r.clone(), bc);
                }
            }
            let replacement = repl.scale(&sign);
            let new_eq = t.substitute(&var, &replacement);
            eqs.push(new_eq);
            for e in eqs.iter_mut() {
                if e.coeffs.contains_key(&var) {
                    *e = e.substitute(&var, &replacement);
                }
            }
            for i in ineqs.iter_mut() {
                if i.coeffs.contains_key(&var) {
                    *i = i.substitute(&var, &replacement);
                }
            }
            subst.push((var, replacement));
        }
    }
    // Re-tighten inequalities after substitution.
    let mut out = Vec::with_capacity(ineqs.len());
    for t in ineqs {
        match tighten(NormAtom::Ge(t))? {
            NormAtom::Ge(t) => out.push(t),
            NormAtom::Eq(_) => unreachable!(),
        }
    }
    Ok(Some((out, subst)))
}

/// Session for solver-internal auxiliary variables; ids are process-unique,
/// so this cannot collide with caller registers.
static SIGMA_SESSION: crate::ids::Session = crate::ids::Session {};

/// Residue of `a` modulo `m` in the balanced range [-m/2, m/2).
fn balanced_mod(a: &Int, m: &Int) -> Int {
    let r = a.mod_floor(m);
    if &r * 2 >= *m {
        r - m
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::Session;

    fn var(s: &Session, name: &str) -> Var {
        s.fresh(name)
    }

    fn atom(lhs: LinearTerm, rel: Rel, rhs: LinearTerm) -> LiaAtom {
        LiaAtom::new(lhs, rel, rhs)
    }

    #[test]
    fn solves_simple_diophantine() {
        // 2x + 3y = 7, x >= 0, y >= 0.
        let s = Session::new();
        let x = var(&s, "x");
        let y = var(&s, "y");
        let c = LiaConjunction::new(vec![
            atom(
                LinearTerm::constant_term(0)
                    .add_var(x.clone(), 2)
                    .add_var(y.clone(), 3),
                Rel::Eq,
                LinearTerm::constant_term(7),
            ),
            atom(LinearTerm::var(x.clone()), Rel::Ge, LinearTerm::constant_term(0)),
            atom(LinearTerm::var(y.clone()), Rel::Ge, LinearTerm::constant_term(0)),
        ]);
        let m = lia_solve(&[c.clone()]).unwrap().expect("sat");
        assert!(m.satisfies(&c.atoms).unwrap());
        assert_eq!(m.value(&x) * 2 + m.value(&y) * 3, Int::from(7));
    }

    #[test]
    fn detects_trivial_unsat() {
        let s = Session::new();
        let x = var(&s, "x");
        let c = LiaConjunction::new(vec![
            atom(LinearTerm::var(x.clone()), Rel::Ge, LinearTerm::constant_term(1)),
            atom(LinearTerm::var(x.clone()), Rel::Le, LinearTerm::constant_term(0)),
        ]);
        assert!(lia_solve(&[c]).unwrap().is_none());
    }

    #[test]
    fn detects_parity_unsat() {
        // 2x = 3 has no integer solution.
        let s = Session::new();
        let x = var(&s, "x");
        let c = LiaConjunction::new(vec![atom(
            LinearTerm::constant_term(0).add_var(x, 2),
            Rel::Eq,
            LinearTerm::constant_term(3),
        )]);
        assert!(lia_solve(&[c]).unwrap().is_none());
    }

    #[test]
    fn alternatives_and_disequalities() {
        let s = Session::new();
        let x = var(&s, "x");
        // (x != 0) together with 0 <= x <= 0 is unsat.
        let c = LiaConjunction::new(vec![
            atom(LinearTerm::var(x.clone()), Rel::Ne, LinearTerm::constant_term(0)),
            atom(LinearTerm::var(x.clone()), Rel::Ge, LinearTerm::constant_term(0)),
            atom(LinearTerm::var(x.clone()), Rel::Le, LinearTerm::constant_term(0)),
        ]);
        assert!(lia_solve(&[c]).unwrap().is_none());
        // Second alternative satisfiable.
        let unsat = LiaConjunction::new(vec![atom(
            LinearTerm::constant_term(1),
            Rel::Eq,
            LinearTerm::constant_term(2),
        )]);
        let sat = LiaConjunction::new(vec![atom(
            LinearTerm::var(x.clone()),
            Rel::Gt,
            LinearTerm::constant_term(5),
        )]);
        let m = lia_solve(&[unsat, sat]).unwrap().expect("sat");
        assert!(m.value(&x) > Int::from(5));
    }

    #[test]
    fn empty_conjunction_is_sat() {
        let m = lia_solve(&[LiaConjunction::default()]).unwrap();
        assert!(m.is_some());
    }

    #[test]
    fn agrees_with_brute_force_on_random_small_systems() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x11a);
        let s = Session::new();
        let vars: Vec<Var> = (0..3).map(|i| var(&s, &format!("v{i}"))).collect();
        let rels = [Rel::Eq, Rel::Ne, Rel::Le, Rel::Lt, Rel::Ge, Rel::Gt];
        for _ in 0..300 {
            let n_atoms = rng.gen_range(1..=5);
            let atoms: Vec<LiaAtom> = (0..n_atoms)
                .map(|_| {
                    let mut lhs = LinearTerm::constant_term(rng.gen_range(-5..=5));
                    for v in &vars {
                        let c = rng.gen_range(-3..=3);
                        if c != 0 {
                            lhs = lhs.add_var(v.clone(), c);
                        }
                    }
                    let rhs = LinearTerm::constant_term(rng.gen_range(-5..=5));
                    LiaAtom::new(lhs, rels[rng.gen_range(0..rels.len())], rhs)
                })
                .collect();
            let conj = LiaConjunction::new(atoms);
            // Brute force over the box [-10, 10]^3.
            let mut brute: Option<BTreeMap<Var, Int>> = None;
            'outer: for a in -10i64..=10 {
                for b in -10i64..=10 {
                    for c in -10i64..=10 {
                        let m: BTreeMap<Var, Int> = vars
                            .iter()
                            .cloned()
                            .zip([Int::from(a), Int::from(b), Int::from(c)])
                            .collect();
                        if conj.atoms.iter().all(|at| at.holds(&m).unwrap()) {
                            brute = Some(m);
                            break 'outer;
                        }
                    }
                }
            }
            let solved = lia_solve(&[conj.clone()]).unwrap();
            match (&brute, &solved) {
                // Brute force found a model: solver must report sat.
                (Some(_), None) => panic!("solver unsat but box model exists: {conj:?}"),
                (_, Some(m)) => assert!(m.satisfies(&conj.atoms).unwrap()),
                // Solver unsat and no box model: consistent.
                (None, None) => {}
            }
        }
    }
}
