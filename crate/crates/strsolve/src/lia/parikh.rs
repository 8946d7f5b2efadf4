//! Parikh-image flow encoding of CEFAs, monotonic register splitting,
//! witness extraction from flow solutions, and the joint
//! CEFA-membership/LIA satisfiability check.
//!
//! The encoding introduces one nonnegative flow variable per transition and
//! 0/1 selector variables for the run's source (initial) and sink (final)
//! state, with flow conservation at every state and register totals equal to
//! the flow-weighted update sums. Connectivity of the flow support is not
//! encoded up front: candidate models are checked, and a disconnected
//! support triggers a refinement into two alternatives (the run either
//! enters the disconnected part, or avoids it entirely).

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num::{Signed, ToPrimitive, Zero};

use crate::automata::{Cefa, CostString, Int, StateId};
use crate::error::{Error, Result};
use crate::ids::Session;
use crate::preimage::LinearTerm;
use crate::program::Rel;

use super::{check_deadline, external, lia_solve_with, LiaAtom, LiaConjunction, LiaModel, SolveLimits, Var};

/// Splits every register `r` into nonnegative parts `(r+, r-)` with
/// `r = r+ - r-`; the returned CEFA has only nonnegative updates.
pub fn monotonic_split(a: &Cefa, session: &Session) -> (Cefa, Vec<(Var, Var, Var)>) {
    let mut substitution = Vec::with_capacity(a.registers.len());
    let mut registers = Vec::with_capacity(a.registers.len() * 2);
    for r in &a.registers {
        let plus = session.fresh(format!("{}+", r.name()));
        let minus = session.fresh(format!("{}-", r.name()));
        registers.push(plus.clone());
        registers.push(minus.clone());
        substitution.push((r.clone(), plus, minus));
    }
    let transitions = a
        .transitions
        .iter()
        .map(|t| {
            let mut update = Vec::with_capacity(t.update.len() * 2);
            for c in &t.update {
                if c.is_negative() {
                    update.push(Int::from(0));
                    update.push(-c.clone());
                } else {
                    update.push(c.clone());
                    update.push(Int::from(0));
                }
            }
            crate::automata::CefaTransition {
                src: t.src,
                label: t.label.clone(),
                dst: t.dst,
                update,
            }
        })
        .collect();
    let split = Cefa {
        num_states: a.num_states,
        registers,
        transitions,
        initial: a.initial.clone(),
        final_states: a.final_states.clone(),
    };
    (split, substitution)
}

/// Rewrites a term by `r := r+ - r-` for every split register.
pub fn apply_split_to_term(t: &LinearTerm, substitution: &[(Var, Var, Var)]) -> LinearTerm {
    let mut out = t.clone();
    for (r, plus, minus) in substitution {
        let repl = LinearTerm::var(plus.clone()).add_var(minus.clone(), -1);
        out = out.substitute(r, &repl);
    }
    out
}

pub fn apply_split_to_atom(a: &LiaAtom, substitution: &[(Var, Var, Var)]) -> LiaAtom {
    LiaAtom::new(
        apply_split_to_term(&a.lhs, substitution),
        a.rel,
        apply_split_to_term(&a.rhs, substitution),
    )
}

/// The existential flow encoding of one CEFA.
#[derive(Debug, Clone)]
pub struct ParikhEncoding {
    pub atoms: Vec<LiaAtom>,
    /// Flow variable per transition, positionally aligned.
    pub flow_vars: Vec<Var>,
    pub source_vars: Vec<(Var, StateId)>,
    pub sink_vars: Vec<(Var, StateId)>,
}

/// Encodes: some accepting run exists whose per-register update sums equal
/// the register variables. Satisfiable together with the connectivity
/// refinement loop iff some `(w, n̄)` is accepted with those totals.
pub fn parikh_encode(a: &Cefa, session: &Session) -> ParikhEncoding {
    let mut atoms = Vec::new();
    let zero = || LinearTerm::constant_term(0);
    let one = || LinearTerm::constant_term(1);
    let flow_vars: Vec<Var> = (0..a.transitions.len())
        .map(|i| session.fresh(format!("y{i}")))
        .collect();
    for y in &flow_vars {
        atoms.push(LiaAtom::new(LinearTerm::var(y.clone()), Rel::Ge, zero()));
    }
    let source_vars: Vec<(Var, StateId)> = a
        .initial
        .iter()
        .map(|&q| (session.fresh(format!("src{q}")), q))
        .collect();
    let sink_vars: Vec<(Var, StateId)> = a
        .final_states
        .iter()
        .map(|&q| (session.fresh(format!("snk{q}")), q))
        .collect();
    for (v, _) in source_vars.iter().chain(&sink_vars) {
        atoms.push(LiaAtom::new(LinearTerm::var(v.clone()), Rel::Ge, zero()));
        atoms.push(LiaAtom::new(LinearTerm::var(v.clone()), Rel::Le, one()));
    }
    // Exactly one source and one sink (unsatisfiable when I or F is empty).
    let sum = |vars: &[(Var, StateId)]| {
        let mut t = LinearTerm::constant_term(0);
        for (v, _) in vars {
            t = t.add_var(v.clone(), 1);
        }
        t
    };
    atoms.push(LiaAtom::new(sum(&source_vars), Rel::Eq, one()));
    atoms.push(LiaAtom::new(sum(&sink_vars), Rel::Eq, one()));
    // Flow conservation: inflow - outflow = sink - source at each state.
    for q in 0..a.num_states {
        let mut t = LinearTerm::constant_term(0);
        for (i, tr) in a.transitions.iter().enumerate() {
            if tr.dst == q {
                t = t.add_var(flow_vars[i].clone(), 1);
            }
            if tr.src == q {
                t = t.add_var(flow_vars[i].clone(), -1);
            }
        }
        for (v, state) in &sink_vars {
            if *state == q {
                t = t.add_var(v.clone(), -1);
            }
        }
        for (v, state) in &source_vars {
            if *state == q {
                t = t.add_var(v.clone(), 1);
            }
        }
        atoms.push(LiaAtom::new(t, Rel::Eq, zero()));
    }
    // Register totals.
    for (i, r) in a.registers.iter().enumerate() {
        let mut t = LinearTerm::var(r.clone());
        for (k, tr) in a.transitions.iter().enumerate() {
            let c = &tr.update[i];
            if !c.is_zero() {
                t = t.add_var(flow_vars[k].clone(), -c.clone());
            }
        }
        atoms.push(LiaAtom::new(t, Rel::Eq, zero()));
    }
    ParikhEncoding {
        atoms,
        flow_vars,
        source_vars,
        sink_vars,
    }
}

/// Per-transition multiplicities of an accepting-run candidate.
#[derive(Debug, Clone)]
pub struct FlowSolution {
    pub multiplicities: Vec<Int>,
    pub source: StateId,
    pub sink: StateId,
}

impl ParikhEncoding {
    pub fn extract_flow(&self, model: &LiaModel) -> Result<FlowSolution> {
        let multiplicities = self
            .flow_vars
            .iter()
            .map(|v| model.value(v))
            .collect::<Vec<_>>();
        let pick = |vars: &[(Var, StateId)]| -> Result<StateId> {
            vars.iter()
                .find(|(v, _)| model.value(v) == Int::from(1))
                .map(|(_, q)| *q)
                .ok_or_else(|| Error::internal("no selected source/sink in model"))
        };
        Ok(FlowSolution {
            multiplicities,
            source: pick(&self.source_vars)?,
            sink: pick(&self.sink_vars)?,
        })
    }
}

/// States touched by positive flow but unreachable from the source through
/// the support; empty iff the flow is realizable as a run.
pub fn disconnected_states(a: &Cefa, flow: &FlowSolution) -> BTreeSet<StateId> {
    let support: Vec<usize> = (0..a.transitions.len())
        .filter(|&i| flow.multiplicities[i].is_positive())
        .collect();
    let mut touched: BTreeSet<StateId> = BTreeSet::new();
    for &i in &support {
        touched.insert(a.transitions[i].src);
        touched.insert(a.transitions[i].dst);
    }
    let mut reached: BTreeSet<StateId> = BTreeSet::from([flow.source]);
    let mut work = vec![flow.source];
    while let Some(q) = work.pop() {
        for &i in &support {
            if a.transitions[i].src == q && reached.insert(a.transitions[i].dst) {
                work.push(a.transitions[i].dst);
            }
        }
    }
    touched.difference(&reached).copied().collect()
}

/// Drops disconnected circulations whose register contribution is zero.
///
/// The disconnected part of a conservation-respecting flow is a closed
/// circulation (no support edge crosses between it and the reachable part),
/// so removing it keeps conservation; when its update sums are all zero the
/// register totals are unchanged and the model stays valid. Returns the
/// remaining genuinely-violating states, if any.
pub fn strip_zero_circulations(a: &Cefa, flow: &mut FlowSolution) -> BTreeSet<StateId> {
    loop {
        let bad = disconnected_states(a, flow);
        if bad.is_empty() {
            return bad;
        }
        let mut sums = vec![Int::zero(); a.registers.len()];
        let mut edges = Vec::new();
        for (i, t) in a.transitions.iter().enumerate() {
            if flow.multiplicities[i].is_positive() && (bad.contains(&t.src) || bad.contains(&t.dst)) {
                for (s, u) in sums.iter_mut().zip(&t.update) {
                    *s += u * &flow.multiplicities[i];
                }
                edges.push(i);
            }
        }
        if sums.iter().all(Int::is_zero) {
            for i in edges {
                flow.multiplicities[i] = Int::zero();
            }
            // Re-check: stripping may reveal further components.
            continue;
        }
        return bad;
    }
}

/// Rebuilds an accepting run from a connected flow by Euler-path stitching
/// and returns its label word, choosing the least code point from each
/// class.
pub fn decompose_flow_to_witness(a: &Cefa, flow: &FlowSolution, max_len: usize) -> Result<String> {
    // Invariants: conservation and connectivity.
    if !disconnected_states(a, flow).is_empty() {
        return Err(Error::internal("flow support is not connected"));
    }
    let total: Int = flow.multiplicities.iter().fold(Int::zero(), |s, m| s + m);
    if total > Int::from(max_len) {
        return Err(Error::ResourceLimit(format!(
            "witness length {total} exceeds the limit {max_len}"
        )));
    }
    let mut remaining: Vec<u64> = flow
        .multiplicities
        .iter()
        .map(|m| m.to_u64().expect("bounded by max_len"))
        .collect();
    for q in 0..a.num_states {
        let mut degree: i64 = 0;
        for (i, t) in a.transitions.iter().enumerate() {
            if t.dst == q {
                degree += remaining[i] as i64;
            }
            if t.src == q {
                degree -= remaining[i] as i64;
            }
        }
        let expected = i64::from(q == flow.sink) - i64::from(q == flow.source);
        if degree != expected {
            return Err(Error::internal(format!(
                "flow conservation violated at state {q}"
            )));
        }
    }
    // Base path source -> sink, then splice cycles at visited states.
    let mut out_by_state: BTreeMap<StateId, Vec<usize>> = BTreeMap::new();
    for (i, t) in a.transitions.iter().enumerate() {
        out_by_state.entry(t.src).or_default().push(i);
    }
    let walk = |from: StateId, remaining: &mut [u64]| -> Vec<usize> {
        let mut path = Vec::new();
        let mut at = from;
        loop {
            let next = out_by_state
                .get(&at)
                .and_then(|is| is.iter().find(|&&i| remaining[i] > 0).copied());
            match next {
                Some(i) => {
                    remaining[i] -= 1;
                    path.push(i);
                    at = a.transitions[i].dst;
                }
                None => return path,
            }
        }
    };
    let mut path = walk(flow.source, &mut remaining);
    loop {
        // Find a state on the path with unused outgoing flow.
        let mut splice_at: Option<(usize, StateId)> = None;
        let mut states_on_path = vec![flow.source];
        for &i in &path {
            states_on_path.push(a.transitions[i].dst);
        }
        'search: for (pos, &q) in states_on_path.iter().enumerate() {
            if let Some(is) = out_by_state.get(&q) {
                if is.iter().any(|&i| remaining[i] > 0) {
                    splice_at = Some((pos, q));
                    break 'search;
                }
            }
        }
        let Some((pos, q)) = splice_at else { break };
        let cycle = walk(q, &mut remaining);
        if cycle.is_empty() {
            return Err(Error::internal("euler stitching made no progress"));
        }
        let tail = path.split_off(pos);
        path.extend(cycle);
        path.extend(tail);
    }
    if remaining.iter().any(|&r| r > 0) {
        return Err(Error::internal("flow decomposition left unused edges"));
    }
    let mut word = String::new();
    for &i in &path {
        let c = a.transitions[i]
            .label
            .min_letter()
            .ok_or_else(|| Error::internal("empty class label on flow edge"))?;
        word.push(c);
    }
    Ok(word)
}

/// Outcome of the joint CEFA/LIA satisfiability check.
#[derive(Debug, Clone)]
pub enum CefaLiaOutcome {
    Sat {
        model: LiaModel,
        strings: BTreeMap<String, String>,
    },
    Unsat,
    Unknown(String),
}

/// Limits for the joint check.
#[derive(Debug, Clone)]
pub struct CefaLiaLimits {
    pub solve: SolveLimits,
    pub max_product_states: usize,
    pub max_witness_len: usize,
    pub max_refinements: usize,
    pub external_smt: Option<String>,
}

/// Counters reported back to the caller.
#[derive(Debug, Clone, Default)]
pub struct StepVStats {
    pub max_product_states: usize,
    pub lia_queries: usize,
}

impl Default for CefaLiaLimits {
    fn default() -> Self {
        CefaLiaLimits {
            solve: SolveLimits::default(),
            max_product_states: 200_000,
            max_witness_len: 1_000_000,
            max_refinements: 4000,
            external_smt: None,
        }
    }
}

struct VarInstance {
    name: String,
    product: Cefa,
    split: Cefa,
    encoding: ParikhEncoding,
    originals: Vec<Arc<Cefa>>,
}

/// Decides whether `phi` is satisfiable jointly with the CEFA memberships:
/// some assignment of the registers and strings `w_x` with
/// `(w_x, θ(R(A)))` accepted by every automaton attached to `x` and `phi[θ]`
/// true. On sat the witnesses are extracted from the flows and re-checked
/// against every original automaton before returning.
pub fn check_cefa_lia_sat(
    constraints: &[(String, Vec<Arc<Cefa>>)],
    phi: &[LiaAtom],
    session: &Session,
    limits: &CefaLiaLimits,
) -> Result<CefaLiaOutcome> {
    check_cefa_lia_sat_with_stats(constraints, phi, session, limits, &mut StepVStats::default())
}

pub fn check_cefa_lia_sat_with_stats(
    constraints: &[(String, Vec<Arc<Cefa>>)],
    phi: &[LiaAtom],
    session: &Session,
    limits: &CefaLiaLimits,
    stats: &mut StepVStats,
) -> Result<CefaLiaOutcome> {
    // Register vectors must be pairwise disjoint across all automata.
    let mut seen: BTreeSet<Var> = BTreeSet::new();
    for (_, cefas) in constraints {
        for c in cefas {
            for r in &c.registers {
                if !seen.insert(r.clone()) {
                    return Err(Error::input(format!(
                        "register {r} appears in two membership constraints"
                    )));
                }
            }
        }
    }

    let mut instances: Vec<VarInstance> = Vec::new();
    let mut base_atoms: Vec<LiaAtom> = Vec::new();
    for (name, cefas) in constraints {
        if cefas.is_empty() {
            continue;
        }
        // Multiply small automata first and prune between steps: the
        // reachable product is usually far smaller than the full grid.
        let mut ordered: Vec<&Arc<Cefa>> = cefas.iter().collect();
        ordered.sort_by_key(|c| c.num_states);
        let mut product = (*ordered[0]).as_ref().clone();
        for c in &ordered[1..] {
            product = product.product(c)?.trim();
            if product.num_states > limits.max_product_states {
                return Ok(CefaLiaOutcome::Unknown(format!(
                    "product for {name} exceeded {} states",
                    limits.max_product_states
                )));
            }
        }
        let product = product.trim();
        stats.max_product_states = stats.max_product_states.max(product.num_states);
        if product.string_empty() {
            return Ok(CefaLiaOutcome::Unsat);
        }
        let (split, substitution) = monotonic_split(&product, session);
        // Keep the original registers in the model: r = r+ - r-.
        for (r, plus, minus) in &substitution {
            base_atoms.push(LiaAtom::new(
                LinearTerm::var(r.clone()),
                Rel::Eq,
                LinearTerm::var(plus.clone()).add_var(minus.clone(), -1),
            ));
        }
        let encoding = parikh_encode(&split, session);
        base_atoms.extend(encoding.atoms.iter().cloned());
        instances.push(VarInstance {
            name: name.clone(),
            product,
            split,
            encoding,
            originals: cefas.clone(),
        });
    }
    base_atoms.extend(phi.iter().cloned());

    // Alternatives from disequality splits, each refined independently.
    let alternatives = LiaConjunction::new(base_atoms).split_disequalities();
    let mut worklist: Vec<LiaConjunction> = alternatives.into_iter().rev().collect();
    let mut refinements = 0usize;
    let mut unknown: Option<String> = None;
    let debug = std::env::var_os("STRSOLVE_DEBUG").is_some();
    while let Some(conj) = worklist.pop() {
        check_deadline(&limits.solve)?;
        stats.lia_queries += 1;
        let query_start = std::time::Instant::now();
        if debug {
            eprintln!(
                "  [step5 query {}] {} atoms, worklist {}",
                stats.lia_queries,
                conj.atoms.len(),
                worklist.len()
            );
        }
        let solved = match &limits.external_smt {
            Some(cmd) => match external::solve_external(cmd, &conj) {
                Ok(m) => m,
                Err(Error::ResourceLimit(msg)) => {
                    unknown = Some(msg);
                    continue;
                }
                Err(e) => return Err(e),
            },
            None => match lia_solve_with(&[conj.clone()], &limits.solve) {
                Ok(m) => m,
                Err(Error::ResourceLimit(msg)) => {
                    unknown = Some(msg);
                    continue;
                }
                Err(e) => return Err(e),
            },
        };
        if debug {
            eprintln!(
                "  [step5 query] solved={} in {:?}",
                solved.is_some(),
                query_start.elapsed()
            );
        }
        let Some(model) = solved else { continue };
        // Extract all flows, strip dispensable disconnected circulations,
        // and refine on the first genuine violation.
        let mut flows: Vec<FlowSolution> = Vec::with_capacity(instances.len());
        let mut violation: Option<(usize, BTreeSet<StateId>)> = None;
        for (idx, inst) in instances.iter().enumerate() {
            let mut flow = inst.encoding.extract_flow(&model)?;
            let bad = strip_zero_circulations(&inst.split, &mut flow);
            flows.push(flow);
            if !bad.is_empty() && violation.is_none() {
                violation = Some((idx, bad));
            }
        }
        match violation {
            None => {
                let mut strings = BTreeMap::new();
                let mut too_long = false;
                for (inst, flow) in instances.iter().zip(&flows) {
                    let word =
                        decompose_flow_to_witness(&inst.split, flow, limits.max_witness_len);
                    let word = match word {
                        Ok(w) => w,
                        Err(Error::ResourceLimit(msg)) => {
                            unknown = Some(msg);
                            too_long = true;
                            break;
                        }
                        Err(e) => return Err(e),
                    };
                    strings.insert(inst.name.clone(), word);
                }
                if too_long {
                    continue;
                }
                verify_outcome(&instances, phi, &model, &strings)?;
                return Ok(CefaLiaOutcome::Sat { model, strings });
            }
            Some((idx, bad)) => {
                refinements += 1;
                if refinements > limits.max_refinements {
                    unknown = Some("connectivity refinement limit".into());
                    continue;
                }
                let inst = &instances[idx];
                // (a) some flow enters the disconnected set from outside;
                let mut enter = LinearTerm::constant_term(0);
                for (i, t) in inst.split.transitions.iter().enumerate() {
                    if bad.contains(&t.dst) && !bad.contains(&t.src) {
                        enter = enter.add_var(inst.encoding.flow_vars[i].clone(), 1);
                    }
                }
                let mut with_enter = conj.clone();
                with_enter.atoms.push(LiaAtom::new(
                    enter,
                    Rel::Ge,
                    LinearTerm::constant_term(1),
                ));
                // (b) or nothing touches it at all.
                let mut touch = LinearTerm::constant_term(0);
                for (i, t) in inst.split.transitions.iter().enumerate() {
                    if bad.contains(&t.dst) || bad.contains(&t.src) {
                        touch = touch.add_var(inst.encoding.flow_vars[i].clone(), 1);
                    }
                }
                for (v, q) in inst.encoding.source_vars.iter().chain(&inst.encoding.sink_vars) {
                    if bad.contains(q) {
                        touch = touch.add_var(v.clone(), 1);
                    }
                }
                let mut without = conj;
                without
                    .atoms
                    .push(LiaAtom::new(touch, Rel::Eq, LinearTerm::constant_term(0)));
                // Junk circulations are usually dispensable: try the
                // all-zero branch first.
                worklist.push(with_enter);
                worklist.push(without);
            }
        }
    }
    match unknown {
        Some(msg) => Ok(CefaLiaOutcome::Unknown(msg)),
        None => Ok(CefaLiaOutcome::Unsat),
    }
}

/// Round-trip validation of a sat answer: every witness re-checked against
/// every original automaton at the model's register values, and `phi`
/// re-evaluated. Failures are internal errors, not wrong verdicts.
fn verify_outcome(
    instances: &[VarInstance],
    phi: &[LiaAtom],
    model: &LiaModel,
    strings: &BTreeMap<String, String>,
) -> Result<()> {
    for inst in instances {
        let w = &strings[&inst.name];
        for original in &inst.originals {
            let costs: Vec<Int> = original.registers.iter().map(|r| model.value(r)).collect();
            let ok = original.accepts(&CostString {
                word: w.clone(),
                costs,
            })?;
            if !ok {
                return Err(Error::internal(format!(
                    "witness {w:?} for {} rejected by an original constraint \
                     (product had {} states)",
                    inst.name, inst.product.num_states
                )));
            }
        }
    }
    if !model.satisfies(phi)? {
        return Err(Error::internal("model does not satisfy the arithmetic part"));
    }
    Ok(())
}

/// Testing helper: whether some `w` exists with `(w, targets)` accepted.
pub fn parikh_sat(a: &Cefa, targets: &[Int], limits: &CefaLiaLimits) -> Result<bool> {
    let session = Session::new();
    if targets.len() != a.registers.len() {
        return Err(Error::input("target vector arity mismatch"));
    }
    let phi: Vec<LiaAtom> = a
        .registers
        .iter()
        .zip(targets)
        .map(|(r, n)| {
            LiaAtom::new(
                LinearTerm::var(r.clone()),
                Rel::Eq,
                LinearTerm {
                    constant: n.clone(),
                    coeffs: BTreeMap::new(),
                },
            )
        })
        .collect();
    let constraints = vec![("x".to_string(), vec![Arc::new(a.clone())])];
    match check_cefa_lia_sat(&constraints, &phi, &session, limits)? {
        CefaLiaOutcome::Sat { .. } => Ok(true),
        CefaLiaOutcome::Unsat => Ok(false),
        CefaLiaOutcome::Unknown(msg) => Err(Error::ResourceLimit(msg)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{Alphabet, CharClass};
    use crate::builders::{build_indexof_cefa, build_len_cefa};

    fn aa_star_len(session: &Session) -> Cefa {
        // {(w, |w|) | w in (aa)*}.
        Cefa::new(
            2,
            vec![session.fresh("r")],
            vec![
                (0, CharClass::singleton('a'), 1, vec![Int::from(1)]),
                (1, CharClass::singleton('a'), 0, vec![Int::from(1)]),
            ],
            [0],
            [0],
        )
        .unwrap()
    }

    #[test]
    fn monotonic_split_examples() {
        let s = Session::new();
        let a = Cefa::new(
            1,
            vec![s.fresh("r")],
            vec![(0, CharClass::singleton('a'), 0, vec![Int::from(-2)])],
            [0],
            [0],
        )
        .unwrap();
        let (split, subst) = monotonic_split(&a, &s);
        assert_eq!(split.registers.len(), 2);
        assert_eq!(split.transitions[0].update, vec![Int::from(0), Int::from(2)]);
        assert_eq!(subst.len(), 1);
        // Round trip: a accepts (w, n) iff split accepts (w, (p, m)) with
        // n = p - m for some p, m.
        for w in ["", "a", "aa", "aaa", "aaaa"] {
            let orig = a.accepted_costs(w);
            let sp = split.accepted_costs(w);
            let reconstructed: BTreeSet<Vec<Int>> = sp
                .iter()
                .map(|v| vec![&v[0] - &v[1]])
                .collect();
            assert_eq!(orig, reconstructed, "w={w}");
        }
    }

    #[test]
    fn monotonic_split_on_already_monotonic() {
        let s = Session::new();
        let ab = Alphabet::explicit("ab".chars()).unwrap();
        let a = build_len_cefa(&s, &ab);
        let (split, _) = monotonic_split(&a, &s);
        // Minus registers never move.
        for costs in split.accepted_costs("ab") {
            assert_eq!(costs[1], Int::from(0));
        }
        assert!(split
            .accepts(&CostString::new("ab", vec![2, 0]))
            .unwrap());
    }

    #[test]
    fn parikh_matches_enumeration_on_aa_star() {
        let s = Session::new();
        let a = aa_star_len(&s);
        let limits = CefaLiaLimits::default();
        assert!(parikh_sat(&a, &[Int::from(4)], &limits).unwrap());
        assert!(parikh_sat(&a, &[Int::from(0)], &limits).unwrap());
        assert!(!parikh_sat(&a, &[Int::from(3)], &limits).unwrap());
    }

    #[test]
    fn parikh_epsilon_only() {
        let s = Session::new();
        let eps = Cefa::new(1, vec![s.fresh("r")], vec![], [0], [0]).unwrap();
        let limits = CefaLiaLimits::default();
        assert!(parikh_sat(&eps, &[Int::from(0)], &limits).unwrap());
        assert!(!parikh_sat(&eps, &[Int::from(1)], &limits).unwrap());
    }

    #[test]
    fn parikh_indexof_pairs() {
        let s = Session::new();
        let ab = Alphabet::explicit("ab".chars()).unwrap();
        let a = build_indexof_cefa("ab", &s, &ab).unwrap();
        let limits = CefaLiaLimits::default();
        assert!(parikh_sat(&a, &[Int::from(0), Int::from(1)], &limits).unwrap());
        assert!(!parikh_sat(&a, &[Int::from(2), Int::from(1)], &limits).unwrap());
    }

    #[test]
    fn witness_decomposition() {
        let s = Session::new();
        let a = aa_star_len(&s);
        // Flow: both transitions twice = "aaaa".
        let flow = FlowSolution {
            multiplicities: vec![Int::from(2), Int::from(2)],
            source: 0,
            sink: 0,
        };
        let w = decompose_flow_to_witness(&a, &flow, 100).unwrap();
        assert_eq!(w, "aaaa");
        // Zero flow with initial = final: the empty witness.
        let flow = FlowSolution {
            multiplicities: vec![Int::from(0), Int::from(0)],
            source: 0,
            sink: 0,
        };
        assert_eq!(decompose_flow_to_witness(&a, &flow, 100).unwrap(), "");
    }

    #[test]
    fn witness_for_indexof_flow() {
        let s = Session::new();
        let ab = Alphabet::explicit("ab".chars()).unwrap();
        let a = build_indexof_cefa("ab", &s, &ab).unwrap();
        let session = Session::new();
        let limits = CefaLiaLimits::default();
        let phi = vec![
            LiaAtom::new(
                LinearTerm::var(a.registers[0].clone()),
                Rel::Eq,
                LinearTerm::constant_term(1),
            ),
            LiaAtom::new(
                LinearTerm::var(a.registers[1].clone()),
                Rel::Eq,
                LinearTerm::constant_term(1),
            ),
        ];
        let constraints = vec![("x".to_string(), vec![Arc::new(a.clone())])];
        match check_cefa_lia_sat(&constraints, &phi, &session, &limits).unwrap() {
            CefaLiaOutcome::Sat { strings, .. } => {
                let w = &strings["x"];
                // Any witness accepted with costs (1,1) is fine.
                assert!(a
                    .accepts(&CostString {
                        word: w.clone(),
                        costs: vec![Int::from(1), Int::from(1)],
                    })
                    .unwrap());
            }
            other => panic!("expected sat, got {other:?}"),
        }
    }

    #[test]
    fn joint_check_with_two_automata_and_phi() {
        // x in A_len[i] and x in lift((aa)*) with length j; i = j and
        // i >= 2 is sat with witness "aa"; i = 3 is unsat.
        let s = Session::new();
        let ab = Alphabet::explicit("ab".chars()).unwrap();
        let len = build_len_cefa(&s, &ab);
        let aa = aa_star_len(&s);
        let i = len.registers[0].clone();
        let j = aa.registers[0].clone();
        let constraints = vec![(
            "x".to_string(),
            vec![Arc::new(len.clone()), Arc::new(aa.clone())],
        )];
        let session = Session::new();
        let limits = CefaLiaLimits::default();
        let phi_sat = vec![
            LiaAtom::new(LinearTerm::var(i.clone()), Rel::Eq, LinearTerm::var(j.clone())),
            LiaAtom::new(LinearTerm::var(i.clone()), Rel::Ge, LinearTerm::constant_term(2)),
        ];
        match check_cefa_lia_sat(&constraints, &phi_sat, &session, &limits).unwrap() {
            CefaLiaOutcome::Sat { strings, model } => {
                let w = &strings["x"];
                assert_eq!(w.len() % 2, 0);
                assert!(model.value(&i) >= Int::from(2));
            }
            other => panic!("expected sat, got {other:?}"),
        }
        let phi_unsat = vec![
            LiaAtom::new(LinearTerm::var(i.clone()), Rel::Eq, LinearTerm::var(j.clone())),
            LiaAtom::new(LinearTerm::var(i.clone()), Rel::Eq, LinearTerm::constant_term(3)),
        ];
        assert!(matches!(
            check_cefa_lia_sat(&constraints, &phi_unsat, &session, &limits).unwrap(),
            CefaLiaOutcome::Unsat
        ));
        // Empty constraint map with a trivially true phi.
        let empty: Vec<(String, Vec<Arc<Cefa>>)> = Vec::new();
        assert!(matches!(
            check_cefa_lia_sat(&empty, &[], &session, &limits).unwrap(),
            CefaLiaOutcome::Sat { .. }
        ));
    }
}
