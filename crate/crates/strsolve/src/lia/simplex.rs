//! Exact rational simplex (general form, free variables, Bland's rule) and
//! branch-and-bound on top of it.
//!
//! Variables are kept in general form with optional lower/upper bounds; each
//! input inequality `t >= 0` becomes a slack variable defined by the linear
//! part of `t` with lower bound `-constant`. The feasibility loop is the
//! standard bound-repair simplex used in SMT solvers; Bland's rule (always
//! pick the smallest eligible index) guarantees termination.

use std::collections::BTreeMap;

use num::{BigRational, Signed, Zero};

use crate::automata::Int;
use crate::error::Result;
use crate::preimage::LinearTerm;

use super::{check_deadline, SolveLimits, Var};

type Rat = BigRational;

fn rat(i: &Int) -> Rat {
    BigRational::from_integer(i.clone())
}

#[derive(Debug, Clone, Default)]
struct Bounds {
    lower: Option<Rat>,
    upper: Option<Rat>,
}

#[derive(Debug, Clone)]
pub(crate) struct Simplex {
    /// Tableau rows: basic column -> (nonbasic column -> coefficient).
    rows: BTreeMap<usize, BTreeMap<usize, Rat>>,
    bounds: Vec<Bounds>,
    values: Vec<Rat>,
    is_basic: Vec<bool>,
}

pub(crate) enum SimplexOutcome {
    Sat,
    Unsat,
}

impl Simplex {
    /// Builds the tableau from equalities `t = 0` and inequalities `t >= 0`
    /// over the given variable order. Single-variable constraints become
    /// plain bounds; an equality pins its slack from both sides.
    pub(crate) fn new(
        eqs: &[LinearTerm],
        ineqs: &[LinearTerm],
        var_index: &BTreeMap<Var, usize>,
    ) -> Simplex {
        let n = var_index.len();
        let mut sx = Simplex {
            rows: BTreeMap::new(),
            bounds: vec![Bounds::default(); n],
            values: vec![Rat::zero(); n],
            is_basic: vec![false; n],
        };
        let mut infeasible = false;
        let mut add = |sx: &mut Simplex, t: &LinearTerm, equality: bool, infeasible: &mut bool| {
            match t.coeffs.len() {
                0 => {
                    if t.constant.is_negative() || (equality && !t.constant.is_zero()) {
                        *infeasible = true;
                    }
                }
                1 => {
                    let (v, c) = t.coeffs.iter().next().unwrap();
                    let col = var_index[v];
                    // c*x + k (= or >=) 0  =>  x (= or >=/<=) -k/c.
                    let bound = -rat(&t.constant) / rat(c);
                    if equality {
                        tighten_lower(&mut sx.bounds[col].lower, bound.clone());
                        tighten_upper(&mut sx.bounds[col].upper, bound);
                    } else if c.is_positive() {
                        tighten_lower(&mut sx.bounds[col].lower, bound);
                    } else {
                        tighten_upper(&mut sx.bounds[col].upper, bound);
                    }
                }
                _ => {
                    let col = sx.push_var();
                    let row: BTreeMap<usize, Rat> = t
                        .coeffs
                        .iter()
                        .map(|(v, c)| (var_index[v], rat(c)))
                        .collect();
                    sx.rows.insert(col, row);
                    sx.is_basic[col] = true;
                    sx.bounds[col].lower = Some(-rat(&t.constant));
                    if equality {
                        sx.bounds[col].upper = Some(-rat(&t.constant));
                    }
                }
            }
        };
        for t in eqs {
            add(&mut sx, t, true, &mut infeasible);
        }
        for t in ineqs {
            add(&mut sx, t, false, &mut infeasible);
        }
        if infeasible {
            let col = sx.push_var();
            sx.rows.insert(col, BTreeMap::new());
            sx.is_basic[col] = true;
            sx.bounds[col].lower = Some(rat(&Int::from(1)));
        }
        // A nonbasic bound conflict never surfaces in the violation scan;
        // encode it as an unsatisfiable slack row instead.
        let conflict = (0..sx.values.len()).any(|col| {
            matches!(
                (&sx.bounds[col].lower, &sx.bounds[col].upper),
                (Some(l), Some(u)) if l > u
            )
        });
        if conflict {
            let col = sx.push_var();
            sx.rows.insert(col, BTreeMap::new());
            sx.is_basic[col] = true;
            sx.bounds[col].lower = Some(rat(&Int::from(1)));
        }
        // Clamp nonbasic values into their bounds, then evaluate basics.
        for col in 0..sx.values.len() {
            if sx.is_basic[col] {
                continue;
            }
            let b = &sx.bounds[col];
            let v = match (&b.lower, &b.upper) {
                (Some(l), _) if *l > Rat::zero() => l.clone(),
                (_, Some(u)) if *u < Rat::zero() => u.clone(),
                _ => Rat::zero(),
            };
            sx.values[col] = v;
        }
        sx.recompute_basics();
        sx
    }

    fn push_var(&mut self) -> usize {
        self.bounds.push(Bounds::default());
        self.values.push(Rat::zero());
        self.is_basic.push(false);
        self.values.len() - 1
    }

    fn recompute_basics(&mut self) {
        let updates: Vec<(usize, Rat)> = self
            .rows
            .iter()
            .map(|(&b, row)| {
                let v = row
                    .iter()
                    .map(|(&c, coeff)| coeff * &self.values[c])
                    .fold(Rat::zero(), |a, x| a + x);
                (b, v)
            })
            .collect();
        for (b, v) in updates {
            self.values[b] = v;
        }
    }

    /// Adds a bound on a column; returns false on an immediately empty box.
    pub(crate) fn assert_bound(&mut self, col: usize, lower: bool, v: Rat) -> bool {
        if lower {
            tighten_lower(&mut self.bounds[col].lower, v);
        } else {
            tighten_upper(&mut self.bounds[col].upper, v);
        }
        let b = &self.bounds[col];
        if let (Some(l), Some(u)) = (&b.lower, &b.upper) {
            if l > u {
                return false;
            }
        }
        // Move a nonbasic variable inside its bounds immediately.
        if !self.is_basic[col] {
            let v = self.values[col].clone();
            let b = &self.bounds[col];
            let target = match (&b.lower, &b.upper) {
                (Some(l), _) if v < *l => Some(l.clone()),
                (_, Some(u)) if v > *u => Some(u.clone()),
                _ => None,
            };
            if let Some(t) = target {
                self.update_nonbasic(col, t);
            }
        }
        true
    }

    fn update_nonbasic(&mut self, col: usize, v: Rat) {
        let delta = &v - &self.values[col];
        if delta.is_zero() {
            return;
        }
        let updates: Vec<(usize, Rat)> = self
            .rows
            .iter()
            .filter_map(|(&b, row)| row.get(&col).map(|c| (b, c * &delta)))
            .collect();
        for (b, d) in updates {
            self.values[b] += d;
        }
        self.values[col] = v;
    }

    fn violation(&self) -> Option<(usize, bool)> {
        // Smallest basic variable out of bounds; bool = needs increase.
        for (&b, _) in &self.rows {
            let v = &self.values[b];
            if let Some(l) = &self.bounds[b].lower {
                if v < l {
                    return Some((b, true));
                }
            }
            if let Some(u) = &self.bounds[b].upper {
                if v > u {
                    return Some((b, false));
                }
            }
        }
        None
    }

    fn pivot(&mut self, basic: usize, nonbasic: usize) {
        let mut row = self.rows.remove(&basic).expect("basic row");
        let a = row.remove(&nonbasic).expect("pivot coefficient");
        // basic = a*nonbasic + rest  =>  nonbasic = basic/a - rest/a.
        let mut new_row: BTreeMap<usize, Rat> = BTreeMap::new();
        new_row.insert(basic, Rat::new(1.into(), 1.into()) / &a);
        for (c, coeff) in row {
            new_row.insert(c, -coeff / &a);
        }
        self.is_basic[basic] = false;
        self.is_basic[nonbasic] = true;
        // Substitute into the other rows.
        let cols: Vec<usize> = self.rows.keys().copied().collect();
        for b in cols {
            let row_b = self.rows.get_mut(&b).unwrap();
            if let Some(c) = row_b.remove(&nonbasic) {
                for (col, coeff) in &new_row {
                    let entry = row_b.entry(*col).or_insert_with(Rat::zero);
                    *entry += coeff * &c;
                    if entry.is_zero() {
                        row_b.remove(col);
                    }
                }
            }
        }
        self.rows.insert(nonbasic, new_row);
    }

    fn pivot_and_update(&mut self, basic: usize, nonbasic: usize, target: Rat) {
        let a = self.rows[&basic][&nonbasic].clone();
        let theta = (&target - &self.values[basic]) / &a;
        self.values[basic] = target;
        let new_nb = &self.values[nonbasic] + &theta;
        // Adjust the other basics for the nonbasic's move.
        let updates: Vec<(usize, Rat)> = self
            .rows
            .iter()
            .filter(|(&b, _)| b != basic)
            .filter_map(|(&b, row)| row.get(&nonbasic).map(|c| (b, c * &theta)))
            .collect();
        for (b, d) in updates {
            self.values[b] += d;
        }
        self.values[nonbasic] = new_nb;
        self.pivot(basic, nonbasic);
    }

    pub(crate) fn check(&mut self, limits: &SolveLimits) -> Result<SimplexOutcome> {
        let mut iter = 0usize;
        loop {
            iter += 1;
            if iter % 256 == 0 {
                check_deadline(limits)?;
            }
            let Some((b, increase)) = self.violation() else {
                return Ok(SimplexOutcome::Sat);
            };
            let target = if increase {
                self.bounds[b].lower.clone().unwrap()
            } else {
                self.bounds[b].upper.clone().unwrap()
            };
            let row = &self.rows[&b];
            // Bland: smallest eligible nonbasic column.
            let mut chosen: Option<usize> = None;
            for (&c, coeff) in row {
                let can_increase = self.bounds[c]
                    .upper
                    .as_ref()
                    .map_or(true, |u| self.values[c] < *u);
                let can_decrease = self.bounds[c]
                    .lower
                    .as_ref()
                    .map_or(true, |l| self.values[c] > *l);
                let useful = if increase {
                    (coeff.is_positive() && can_increase) || (coeff.is_negative() && can_decrease)
                } else {
                    (coeff.is_positive() && can_decrease) || (coeff.is_negative() && can_increase)
                };
                if useful {
                    chosen = Some(c);
                    break;
                }
            }
            match chosen {
                Some(c) => self.pivot_and_update(b, c, target),
                None => return Ok(SimplexOutcome::Unsat),
            }
        }
    }

    fn value(&self, col: usize) -> &Rat {
        &self.values[col]
    }
}

fn tighten_lower(slot: &mut Option<Rat>, v: Rat) {
    if slot.as_ref().map_or(true, |cur| v > *cur) {
        *slot = Some(v);
    }
}

fn tighten_upper(slot: &mut Option<Rat>, v: Rat) {
    if slot.as_ref().map_or(true, |cur| v < *cur) {
        *slot = Some(v);
    }
}

pub(crate) enum BnbOutcome {
    Sat(BTreeMap<Var, Int>),
    Unsat,
    BudgetExceeded,
}

/// Branch-and-bound over the rational relaxation. Complete whenever it
/// terminates within the node budget; the caller falls back to elimination
/// otherwise.
pub(crate) fn solve_system_bnb(
    eqs: &[LinearTerm],
    ineqs: &[LinearTerm],
    limits: &SolveLimits,
) -> Result<BnbOutcome> {
    let mut var_index: BTreeMap<Var, usize> = BTreeMap::new();
    for t in eqs.iter().chain(ineqs) {
        for v in t.vars() {
            let next = var_index.len();
            var_index.entry(v.clone()).or_insert(next);
        }
    }
    let root = Simplex::new(eqs, ineqs, &var_index);
    let n_vars = var_index.len();
    let mut stack: Vec<Simplex> = vec![root];
    let mut nodes = 0usize;
    while let Some(mut node) = stack.pop() {
        nodes += 1;
        if nodes > limits.bnb_nodes {
            return Ok(BnbOutcome::BudgetExceeded);
        }
        check_deadline(limits)?;
        match node.check(limits)? {
            SimplexOutcome::Unsat => continue,
            SimplexOutcome::Sat => {
                // Find a fractional variable among the original columns.
                let frac = (0..n_vars).find(|&c| !node.value(c).is_integer());
                match frac {
                    None => {
                        let model: BTreeMap<Var, Int> = var_index
                            .iter()
                            .map(|(v, &c)| (v.clone(), node.value(c).to_integer()))
                            .collect();
                        return Ok(BnbOutcome::Sat(model));
                    }
                    Some(c) => {
                        let v = node.value(c).clone();
                        let fl = v.floor();
                        let mut le = node.clone();
                        let mut ge = node;
                        let le_alive = le.assert_bound(c, false, fl.clone());
                        let ge_alive =
                            ge.assert_bound(c, true, fl + Rat::new(1.into(), 1.into()));
                        if ge_alive {
                            stack.push(ge);
                        }
                        if le_alive {
                            stack.push(le);
                        }
                    }
                }
            }
        }
    }
    Ok(BnbOutcome::Unsat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::Session;

    fn term(consts: i64, vars: &[(&Var, i64)]) -> LinearTerm {
        let mut t = LinearTerm::constant_term(consts);
        for (v, c) in vars {
            t = t.add_var((*v).clone(), *c);
        }
        t
    }

    #[test]
    fn feasible_box() {
        let s = Session::new();
        let x = s.fresh("x");
        let y = s.fresh("y");
        // x >= 1, y >= 2, x + y <= 10 (as 10 - x - y >= 0).
        let ineqs = vec![
            term(-1, &[(&x, 1)]),
            term(-2, &[(&y, 1)]),
            term(10, &[(&x, -1), (&y, -1)]),
        ];
        match solve_system_bnb(&[], &ineqs, &SolveLimits::default()).unwrap() {
            BnbOutcome::Sat(m) => {
                assert!(m[&x] >= Int::from(1));
                assert!(m[&y] >= Int::from(2));
                assert!(&m[&x] + &m[&y] <= Int::from(10));
            }
            _ => panic!("expected sat"),
        }
    }

    #[test]
    fn infeasible_strips() {
        let s = Session::new();
        let x = s.fresh("x");
        // 2x >= 3 and 2x <= 3 i.e. 2x - 3 >= 0 and 3 - 2x >= 0 (tightening
        // happens upstream; raw here, so rational-feasible at 3/2).
        let ineqs = vec![term(-3, &[(&x, 2)]), term(3, &[(&x, -2)])];
        match solve_system_bnb(&[], &ineqs, &SolveLimits::default()).unwrap() {
            BnbOutcome::Unsat => {}
            _ => panic!("expected unsat"),
        }
    }

    #[test]
    fn unbounded_is_sat() {
        let s = Session::new();
        let x = s.fresh("x");
        let y = s.fresh("y");
        // x + y >= 100, no upper bounds.
        let ineqs = vec![term(-100, &[(&x, 1), (&y, 1)])];
        assert!(matches!(
            solve_system_bnb(&[], &ineqs, &SolveLimits::default()).unwrap(),
            BnbOutcome::Sat(_)
        ));
    }

    #[test]
    fn constant_infeasibility() {
        let ineqs = vec![LinearTerm::constant_term(-1)];
        assert!(matches!(
            solve_system_bnb(&[], &ineqs, &SolveLimits::default()).unwrap(),
            BnbOutcome::Unsat
        ));
        // Parity-infeasible equality: 2x = 3.
        let s = Session::new();
        let x = s.fresh("x");
        let eqs = vec![term(-3, &[(&x, 2)])];
        assert!(matches!(
            solve_system_bnb(&eqs, &[], &SolveLimits::default()).unwrap(),
            BnbOutcome::Unsat
        ));
    }
}
