//! The decision procedure for path feasibility: assertion atomization,
//! indexOf/substring case splits, length/indexOf compilation into CEFAs,
//! backward pre-image elimination of assignments with depth-first
//! backtracking, and final joint CEFA/arithmetic satisfiability.
//!
//! Verdicts are three-valued. A `sat` answer always carries a model of the
//! original program's input variables that has been re-validated by the
//! reference interpreter; resource limits surface as `unknown`, never as a
//! wrong verdict.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};



use crate::alphabet::Alphabet;
use crate::automata::{Cefa, Int};
use crate::builders;
use crate::error::{Error, Result};
use crate::ids::{RegisterId, Session};
use crate::lia::parikh::{
    check_cefa_lia_sat_with_stats, CefaLiaLimits, CefaLiaOutcome, StepVStats,
};
use crate::lia::{LiaAtom, SolveLimits};
use crate::oracle;
use crate::preimage::{self, CerrRepresentation, LinearTerm};
use crate::program::{
    Atom, ConcreteAssignment, Formula, IntTerm, Rel, SlintProgram, Statement, StrAutomaton,
    StrFun, VarName,
};

/// Solver configuration. The default alphabet is printable ASCII.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub alphabet: Alphabet,
    pub timeout: Option<Duration>,
    /// Abort to unknown when a Step-V product exceeds this many states.
    pub max_product_states: usize,
    /// Abort to unknown when a witness would exceed this many letters.
    pub max_witness_len: usize,
    /// Bound on transducer outputs when summing register paths.
    pub max_transducer_output_len: usize,
    /// Accept transducers not declared functional (unsat degrades to
    /// unknown: the backward elimination is only complete for functions).
    pub allow_nonfunctional: bool,
    /// SMT-LIB-strict indexOf: negative start positions return -1 instead
    /// of clamping to 0.
    pub smtlib_strict: bool,
    /// External SMT-LIB process for the final integer queries.
    pub external_smt: Option<String>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            alphabet: Alphabet::ascii_printable(),
            timeout: None,
            max_product_states: 200_000,
            max_witness_len: 1_000_000,
            max_transducer_output_len: 64,
            allow_nonfunctional: false,
            smtlib_strict: false,
            external_smt: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Sat => write!(f, "sat"),
            Verdict::Unsat => write!(f, "unsat"),
            Verdict::Unknown => write!(f, "unknown"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub branches_explored: u64,
    pub max_product_states: usize,
    pub lia_queries: usize,
    pub wall: Duration,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub verdict: Verdict,
    /// Input-variable model; present exactly for sat.
    pub model: Option<ConcreteAssignment>,
    pub stats: SolveStats,
    pub diagnostics: Vec<String>,
}

// Internal pipeline state for one fully case-split branch.
#[derive(Debug, Clone, Default)]
struct Pipeline {
    funapps: Vec<(VarName, StrFun)>,
    /// Atomic assertions, in order.
    atoms: Vec<Atom>,
}

struct Ctx {
    cfg: SolverConfig,
    session: Session,
    deadline: Option<Instant>,
    /// Program integer variables and solver-introduced ones, by name.
    vars: BTreeMap<String, RegisterId>,
    stats: SolveStats,
    /// Set when a non-functional transducer's pre-image was used: unsat
    /// then degrades to unknown.
    nonfunctional_used: bool,
    any_unknown: Option<String>,
}

impl Ctx {
    fn check_deadline(&self) -> Result<()> {
        if let Some(d) = self.deadline {
            if Instant::now() > d {
                return Err(Error::ResourceLimit("timeout".into()));
            }
        }
        Ok(())
    }

    fn var(&mut self, name: &str) -> RegisterId {
        if let Some(v) = self.vars.get(name) {
            return v.clone();
        }
        let v = self.session.fresh(name.to_string());
        self.vars.insert(name.to_string(), v.clone());
        v
    }

    // Solver-introduced names start with '#', which cannot appear in parsed
    // program identifiers.
    fn fresh_int(&mut self, hint: &str) -> (String, RegisterId) {
        let v = self.session.fresh_numbered(&format!("#{hint}"));
        let name = v.name().to_string();
        self.vars.insert(name.clone(), v.clone());
        (name, v)
    }

    fn fresh_string_var(&mut self, hint: &str) -> String {
        self.session.fresh_numbered(&format!("#{hint}")).name().to_string()
    }
}

/// Minimal models of a positive boolean formula: the inclusion-minimal atom
/// sets whose truth forces the formula.
pub fn minimal_models(f: &Formula) -> Vec<Vec<Atom>> {
    // Atoms are identified positionally within the formula tree.
    fn go(f: &Formula, atoms: &mut Vec<Atom>) -> Vec<Vec<usize>> {
        match f {
            Formula::Atom(a) => {
                atoms.push(a.clone());
                vec![vec![atoms.len() - 1]]
            }
            Formula::Or(fs) => fs.iter().flat_map(|g| go(g, atoms)).collect(),
            Formula::And(fs) => {
                let mut acc: Vec<Vec<usize>> = vec![vec![]];
                for g in fs {
                    let models = go(g, atoms);
                    let mut next = Vec::new();
                    for base in &acc {
                        for m in &models {
                            let mut set = base.clone();
                            set.extend(m.iter().copied());
                            set.sort_unstable();
                            set.dedup();
                            next.push(set);
                        }
                    }
                    acc = next;
                }
                acc
            }
        }
    }
    let mut atoms = Vec::new();
    let mut sets = go(f, &mut atoms);
    sets.sort();
    sets.dedup();
    // Keep only inclusion-minimal sets.
    let minimal: Vec<Vec<usize>> = sets
        .iter()
        .filter(|s| {
            !sets
                .iter()
                .any(|t| t.len() < s.len() && t.iter().all(|i| s.contains(i)))
        })
        .cloned()
        .collect();
    minimal
        .into_iter()
        .map(|set| set.into_iter().map(|i| atoms[i].clone()).collect())
        .collect()
}

/// Step I: one program per combination of per-assertion minimal models,
/// streamed lazily.
fn normalize_assertions(p: &SlintProgram) -> impl Iterator<Item = Pipeline> + '_ {
    let per_statement: Vec<Vec<Vec<Atom>>> = p
        .statements
        .iter()
        .map(|st| match st {
            Statement::Assert(f) => minimal_models(f),
            Statement::Assign { .. } => vec![vec![]],
        })
        .collect();
    let statements: Vec<&Statement> = p.statements.iter().collect();
    OdometerIter::new(per_statement).map(move |choice| {
        let mut out = Pipeline::default();
        for (st, atoms) in statements.iter().zip(choice) {
            match st {
                Statement::Assign { var, fun } => {
                    out.funapps.push((var.clone(), fun.clone()));
                    // Assertions seen so far stay ordered relative to
                    // assignments only through SSA; atom order is free.
                }
                Statement::Assert(_) => out.atoms.extend(atoms),
            }
        }
        out
    })
}

/// Cartesian product iterator over index choices.
struct OdometerIter<T> {
    options: Vec<Vec<T>>,
    idx: Vec<usize>,
    done: bool,
}

impl<T: Clone> OdometerIter<T> {
    fn new(options: Vec<Vec<T>>) -> Self {
        let done = options.iter().any(Vec::is_empty);
        OdometerIter {
            idx: vec![0; options.len()],
            options,
            done,
        }
    }
}

impl<T: Clone> Iterator for OdometerIter<T> {
    type Item = Vec<T>;

    fn next(&mut self) -> Option<Vec<T>> {
        if self.done {
            return None;
        }
        let item: Vec<T> = self
            .options
            .iter()
            .zip(&self.idx)
            .map(|(opts, &i)| opts[i].clone())
            .collect();
        // Advance; a full wrap ends the iteration.
        let mut k = self.idx.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.idx[k] += 1;
            if self.idx[k] < self.options[k].len() {
                break;
            }
            self.idx[k] = 0;
        }
        Some(item)
    }
}

fn cmp(lhs: IntTerm, rel: Rel, rhs: IntTerm) -> Atom {
    Atom::Cmp { lhs, rel, rhs }
}

fn has_indexof(t: &IntTerm) -> bool {
    match t {
        IntTerm::IndexOf { .. } => true,
        IntTerm::Const(_) | IntTerm::Var(_) | IntTerm::Length(_) => false,
        IntTerm::Mul(_, inner) => has_indexof(inner),
        IntTerm::Add(a, b) => has_indexof(a) || has_indexof(b),
    }
}

/// Replaces the first (innermost-leftmost) indexOf occurrence using
/// `replace`; returns the occurrence found.
fn take_first_indexof(
    t: &IntTerm,
    replacement: &IntTerm,
) -> Option<(IntTerm, (String, VarName, IntTerm))> {
    match t {
        IntTerm::IndexOf { pattern, arg, start } => {
            if has_indexof(start) {
                let (new_start, occ) = take_first_indexof(start, replacement)?;
                Some((
                    IntTerm::IndexOf {
                        pattern: pattern.clone(),
                        arg: arg.clone(),
                        start: Box::new(new_start),
                    },
                    occ,
                ))
            } else {
                Some((
                    replacement.clone(),
                    (pattern.clone(), arg.clone(), (**start).clone()),
                ))
            }
        }
        IntTerm::Const(_) | IntTerm::Var(_) | IntTerm::Length(_) => None,
        IntTerm::Mul(c, inner) => take_first_indexof(inner, replacement)
            .map(|(t2, occ)| (IntTerm::Mul(c.clone(), Box::new(t2)), occ)),
        IntTerm::Add(a, b) => {
            if let Some((a2, occ)) = take_first_indexof(a, replacement) {
                Some((IntTerm::Add(Box::new(a2), b.clone()), occ))
            } else {
                take_first_indexof(b, replacement)
                    .map(|(b2, occ)| (IntTerm::Add(a.clone(), Box::new(b2)), occ))
            }
        }
    }
}

enum FoundIndexof {
    None,
    /// (statement-ish location, pattern, haystack var, start term)
    InAtom(usize),
    InSubstring(usize),
}

impl Pipeline {
    fn find_indexof(&self) -> FoundIndexof {
        for (i, atom) in self.atoms.iter().enumerate() {
            if let Atom::Cmp { lhs, rhs, .. } = atom {
                if has_indexof(lhs) || has_indexof(rhs) {
                    return FoundIndexof::InAtom(i);
                }
            }
        }
        for (i, (_, fun)) in self.funapps.iter().enumerate() {
            if let StrFun::Substring { start, len, .. } = fun {
                if has_indexof(start) || has_indexof(len) {
                    return FoundIndexof::InSubstring(i);
                }
            }
        }
        FoundIndexof::None
    }

    /// Rewrites the located occurrence with `replacement`, returning the
    /// occurrence's (pattern, haystack, start).
    fn rewrite_indexof(
        &mut self,
        loc: &FoundIndexof,
        replacement: &IntTerm,
    ) -> (String, VarName, IntTerm) {
        match loc {
            FoundIndexof::None => unreachable!("rewrite requires a located occurrence"),
            FoundIndexof::InAtom(i) => {
                let Atom::Cmp { lhs, rel, rhs } = self.atoms[*i].clone() else {
                    unreachable!()
                };
                if let Some((lhs2, occ)) = take_first_indexof(&lhs, replacement) {
                    self.atoms[*i] = cmp(lhs2, rel, rhs);
                    occ
                } else {
                    let (rhs2, occ) =
                        take_first_indexof(&rhs, replacement).expect("occurrence located");
                    self.atoms[*i] = cmp(lhs, rel, rhs2);
                    occ
                }
            }
            FoundIndexof::InSubstring(i) => {
                let (var, fun) = self.funapps[*i].clone();
                let StrFun::Substring { arg, start, len } = fun else {
                    unreachable!()
                };
                if let Some((start2, occ)) = take_first_indexof(&start, replacement) {
                    self.funapps[*i] = (
                        var,
                        StrFun::Substring {
                            arg,
                            start: start2,
                            len,
                        },
                    );
                    occ
                } else {
                    let (len2, occ) =
                        take_first_indexof(&len, replacement).expect("occurrence located");
                    self.funapps[*i] = (
                        var,
                        StrFun::Substring {
                            arg,
                            start,
                            len: len2,
                        },
                    );
                    occ
                }
            }
        }
    }
}

/// A constant-only comparison that is false makes the branch vacuous.
fn obviously_false(atom: &Atom) -> bool {
    fn const_value(t: &IntTerm) -> Option<Int> {
        match t {
            IntTerm::Const(c) => Some(c.clone()),
            IntTerm::Mul(c, inner) => Some(c * const_value(inner)?),
            IntTerm::Add(a, b) => Some(const_value(a)? + const_value(b)?),
            _ => None,
        }
    }
    if let Atom::Cmp { lhs, rel, rhs } = atom {
        if let (Some(l), Some(r)) = (const_value(lhs), const_value(rhs)) {
            return !rel.eval(&l, &r);
        }
    }
    false
}

// The five indexOf options and five substring branches of the case-split
// step. Option numbering follows the construction; 4 and 5 for substring
// close the gaps t1 >= |x| and t2 <= 0.

fn indexof_options(ctx: &mut Ctx, p: &Pipeline, loc: &FoundIndexof) -> Result<Vec<Pipeline>> {
    let mut out = Vec::with_capacity(5);
    let zero = IntTerm::constant(0);
    let minus_one = IntTerm::constant(-1);

    // (1) start < 0: restart the search at 0. Not taken under
    // SMT-LIB-strict semantics, where a negative start is -1 outright.
    if !ctx.cfg.smtlib_strict {
        let mut probe = p.clone();
        let (pattern, arg, start) = probe.rewrite_indexof(loc, &zero);
        let mut q = p.clone();
        let _ = q.rewrite_indexof(
            loc,
            &IntTerm::IndexOf {
                pattern,
                arg,
                start: Box::new(zero.clone()),
            },
        );
        q.atoms.push(cmp(start, Rel::Lt, zero.clone()));
        out.push(q);
    }
    // (2) start < 0, no occurrence anywhere: -1. Under SMT-LIB-strict
    // semantics a negative start is -1 unconditionally.
    {
        let mut q = p.clone();
        let (pattern, arg, start) = q.rewrite_indexof(loc, &minus_one);
        q.atoms.push(cmp(start, Rel::Lt, zero.clone()));
        if !ctx.cfg.smtlib_strict {
            let avoid = builders::build_avoid_substring_nfa(&pattern, &ctx.cfg.alphabet)?;
            q.atoms.push(Atom::InAutomaton {
                var: arg,
                automaton: StrAutomaton::Nfa(Arc::new(avoid)),
            });
        }
        out.push(q);
    }
    // (3) start >= length(x): -1.
    {
        let mut q = p.clone();
        let (_, arg, start) = q.rewrite_indexof(loc, &minus_one);
        q.atoms
            .push(cmp(start, Rel::Ge, IntTerm::Length(arg.clone())));
        out.push(q);
    }
    // (4) 0 <= start < length(x), occurrence found: compile to the indexOf
    // CEFA right away (fresh start/result variables).
    {
        let mut q = p.clone();
        let (i2_name, i2) = ctx.fresh_int("idxout");
        let (pattern, arg, start) = q.rewrite_indexof(loc, &IntTerm::var(&i2_name));
        let (i1_name, i1) = ctx.fresh_int("idxin");
        q.atoms.push(cmp(start.clone(), Rel::Ge, zero.clone()));
        q.atoms
            .push(cmp(start.clone(), Rel::Lt, IntTerm::Length(arg.clone())));
        q.atoms
            .push(cmp(start, Rel::Eq, IntTerm::var(&i1_name)));
        let cefa = builders::build_indexof_cefa(&pattern, &ctx.session, &ctx.cfg.alphabet)?
            .rename(vec![i1, i2])?;
        q.atoms.push(Atom::InAutomaton {
            var: arg,
            automaton: StrAutomaton::Cefa(Arc::new(cefa)),
        });
        out.push(q);
    }
    // (5) 0 <= start < length(x), no occurrence in the suffix: -1.
    {
        let mut q = p.clone();
        let (pattern, arg, start) = q.rewrite_indexof(loc, &minus_one);
        let (j_name, _) = ctx.fresh_int("sublen");
        let y: VarName = ctx.fresh_string_var("suffix");
        q.atoms.push(cmp(start.clone(), Rel::Ge, zero.clone()));
        q.atoms
            .push(cmp(start.clone(), Rel::Lt, IntTerm::Length(arg.clone())));
        q.atoms.push(cmp(
            IntTerm::var(&j_name),
            Rel::Eq,
            IntTerm::Add(
                Box::new(IntTerm::Length(arg.clone())),
                Box::new(IntTerm::Mul(Int::from(-1), Box::new(start.clone()))),
            ),
        ));
        q.funapps.push((
            y.clone(),
            StrFun::Substring {
                arg: arg.clone(),
                start,
                len: IntTerm::var(&j_name),
            },
        ));
        let avoid = builders::build_avoid_substring_nfa(&pattern, &ctx.cfg.alphabet)?;
        q.atoms.push(Atom::InAutomaton {
            var: y,
            automaton: StrAutomaton::Nfa(Arc::new(avoid)),
        });
        out.push(q);
    }
    Ok(out)
}

fn substring_branches(ctx: &mut Ctx, p: &Pipeline, assign_idx: usize) -> Vec<Pipeline> {
    let (y, fun) = p.funapps[assign_idx].clone();
    let StrFun::Substring { arg, start, len } = fun else {
        unreachable!()
    };
    let zero = IntTerm::constant(0);
    let length = IntTerm::Length(arg.clone());
    let eps = Arc::new(builders::build_const_nfa(""));
    let mut out = Vec::with_capacity(5);
    // (1) 0 <= start and start + len <= length(x): window inside.
    {
        let mut q = p.clone();
        q.atoms.push(cmp(start.clone(), Rel::Ge, zero.clone()));
        q.atoms.push(cmp(
            IntTerm::Add(Box::new(start.clone()), Box::new(len.clone())),
            Rel::Le,
            length.clone(),
        ));
        out.push(q);
    }
    // (2) window overruns: take the rest of the string.
    {
        let mut q = p.clone();
        let (i2_name, _) = ctx.fresh_int("restlen");
        q.atoms.push(cmp(start.clone(), Rel::Ge, zero.clone()));
        q.atoms.push(cmp(start.clone(), Rel::Le, length.clone()));
        q.atoms.push(cmp(
            IntTerm::Add(Box::new(start.clone()), Box::new(len.clone())),
            Rel::Gt,
            length.clone(),
        ));
        q.atoms.push(cmp(
            IntTerm::var(&i2_name),
            Rel::Eq,
            IntTerm::Add(
                Box::new(length.clone()),
                Box::new(IntTerm::Mul(Int::from(-1), Box::new(start.clone()))),
            ),
        ));
        q.funapps[assign_idx] = (
            y.clone(),
            StrFun::Substring {
                arg: arg.clone(),
                start: start.clone(),
                len: IntTerm::var(&i2_name),
            },
        );
        out.push(q);
    }
    // (3) start < 0: the empty string.
    // (4) start >= length(x): the empty string.
    // (5) len <= 0 with start in range: the empty string.
    let empty_cases: Vec<Vec<Atom>> = vec![
        vec![cmp(start.clone(), Rel::Lt, zero.clone())],
        vec![cmp(start.clone(), Rel::Ge, length.clone())],
        vec![
            cmp(start.clone(), Rel::Ge, zero.clone()),
            cmp(len.clone(), Rel::Le, zero.clone()),
        ],
    ];
    for case in empty_cases {
        let mut q = p.clone();
        q.atoms.extend(case);
        q.atoms.push(Atom::InAutomaton {
            var: y.clone(),
            automaton: StrAutomaton::Nfa(eps.clone()),
        });
        q.funapps.remove(assign_idx);
        out.push(q);
    }
    out
}

/// IndexOf case splits to fixpoint (option 1 introduces a restarted
/// occurrence, which is split again; its start is the literal 0, so the
/// vacuous branch prunes and the recursion bottoms out).
fn split_indexofs(ctx: &mut Ctx, p: Pipeline) -> Result<Vec<Pipeline>> {
    match p.find_indexof() {
        FoundIndexof::None => Ok(vec![p]),
        loc => {
            let mut done = Vec::new();
            for q in indexof_options(ctx, &p, &loc)? {
                if q.atoms.iter().any(obviously_false) {
                    continue;
                }
                done.extend(split_indexofs(ctx, q)?);
            }
            Ok(done)
        }
    }
}

/// Step III (length removal) and lowering of atoms to LIA form.
struct Lowered {
    funapps: Vec<(VarName, StrFun)>,
    memberships: Vec<(VarName, Arc<Cefa>)>,
    arith: Vec<LiaAtom>,
}

fn strip_lengths_term(ctx: &mut Ctx, t: &IntTerm, extra: &mut Vec<Atom>) -> IntTerm {
    match t {
        IntTerm::Length(x) => {
            let (name, var) = ctx.fresh_int("len");
            let cefa = builders::build_len_cefa(&ctx.session, &ctx.cfg.alphabet)
                .rename(vec![var])
                .expect("fresh register");
            extra.push(Atom::InAutomaton {
                var: x.clone(),
                automaton: StrAutomaton::Cefa(Arc::new(cefa)),
            });
            IntTerm::var(&name)
        }
        IntTerm::Const(_) | IntTerm::Var(_) => t.clone(),
        IntTerm::IndexOf { .. } => {
            unreachable!("indexOf occurrences are eliminated by the case split")
        }
        IntTerm::Mul(c, inner) => {
            IntTerm::Mul(c.clone(), Box::new(strip_lengths_term(ctx, inner, extra)))
        }
        IntTerm::Add(a, b) => IntTerm::Add(
            Box::new(strip_lengths_term(ctx, a, extra)),
            Box::new(strip_lengths_term(ctx, b, extra)),
        ),
    }
}

fn lower_term(ctx: &mut Ctx, t: &IntTerm) -> LinearTerm {
    match t {
        IntTerm::Const(c) => LinearTerm {
            constant: c.clone(),
            coeffs: BTreeMap::new(),
        },
        IntTerm::Var(name) => LinearTerm::var(ctx.var(name)),
        IntTerm::Mul(c, inner) => lower_term(ctx, inner).scale(c),
        IntTerm::Add(a, b) => lower_term(ctx, a).add(&lower_term(ctx, b)),
        IntTerm::Length(_) | IntTerm::IndexOf { .. } => {
            unreachable!("length/indexOf are removed before lowering")
        }
    }
}

fn lower(ctx: &mut Ctx, p: Pipeline) -> Result<Lowered> {
    // Replace every length occurrence (atoms and substring arguments) by a
    // fresh variable tied to the length CEFA.
    let mut extra: Vec<Atom> = Vec::new();
    let mut atoms: Vec<Atom> = Vec::new();
    for atom in &p.atoms {
        match atom {
            Atom::Cmp { lhs, rel, rhs } => {
                let l = strip_lengths_term(ctx, lhs, &mut extra);
                let r = strip_lengths_term(ctx, rhs, &mut extra);
                atoms.push(cmp(l, *rel, r));
            }
            Atom::InAutomaton { .. } => atoms.push(atom.clone()),
        }
    }
    let mut funapps = Vec::with_capacity(p.funapps.len());
    for (var, fun) in &p.funapps {
        let fun = match fun {
            StrFun::Substring { arg, start, len } => StrFun::Substring {
                arg: arg.clone(),
                start: strip_lengths_term(ctx, start, &mut extra),
                len: strip_lengths_term(ctx, len, &mut extra),
            },
            other => other.clone(),
        };
        funapps.push((var.clone(), fun));
    }
    atoms.extend(extra);

    let mut memberships: Vec<(VarName, Arc<Cefa>)> = Vec::new();
    let mut arith: Vec<LiaAtom> = Vec::new();
    for atom in atoms {
        match atom {
            Atom::InAutomaton { var, automaton } => {
                let cefa = match automaton {
                    StrAutomaton::Nfa(nfa) => Arc::new(Cefa::from_nfa(&nfa)),
                    StrAutomaton::Cefa(c) => c,
                };
                memberships.push((var, cefa));
            }
            Atom::Cmp { lhs, rel, rhs } => {
                let l = lower_term(ctx, &lhs);
                let r = lower_term(ctx, &rhs);
                arith.push(LiaAtom::new(l, rel, r));
            }
        }
    }
    // A transducer assignment with an unconstrained target still restricts
    // its argument to the transducer's domain.
    for (var, fun) in &funapps {
        if matches!(fun, StrFun::Transduce { .. })
            && !memberships.iter().any(|(v, _)| v == var)
        {
            let full = crate::regex::regex_to_nfa(
                &crate::regex::Regex::Star(Box::new(crate::regex::Regex::Class(
                    ctx.cfg.alphabet.full_class(),
                ))),
                &ctx.cfg.alphabet,
            );
            memberships.push((var.clone(), Arc::new(Cefa::from_nfa(&full))));
        }
    }
    Ok(Lowered {
        funapps,
        memberships,
        arith,
    })
}

// Step IV state: membership constraints split into active and passive.
struct DfsState {
    funapps: Vec<(VarName, StrFun)>,
    active: Vec<(VarName, Arc<Cefa>)>,
    passive: Vec<(VarName, Arc<Cefa>)>,
    arith: Vec<LiaAtom>,
}

enum DfsOutcome {
    Sat {
        model: crate::lia::LiaModel,
        strings: BTreeMap<String, String>,
    },
    Unsat,
}

fn back_dfs(ctx: &mut Ctx, state: &mut DfsState) -> Result<DfsOutcome> {
    ctx.check_deadline()?;
    // Pick an active constraint on the variable defined latest; input
    // variables (no defining assignment) go to passive one at a time.
    let choice = state
        .active
        .iter()
        .enumerate()
        .filter_map(|(i, (v, _))| {
            state
                .funapps
                .iter()
                .rposition(|(def, _)| def == v)
                .map(|pos| (pos, i))
        })
        .max_by_key(|&(pos, _)| pos);
    let Some((assign_pos, active_idx)) = choice else {
        if !state.active.is_empty() {
            let constraint = state.active.remove(0);
            state.passive.push(constraint);
            let out = back_dfs(ctx, state);
            let constraint = state.passive.pop().expect("pushed above");
            state.active.insert(0, constraint);
            return out;
        }
        // Step V.
        let mut grouped: BTreeMap<String, Vec<Arc<Cefa>>> = BTreeMap::new();
        for (v, c) in &state.passive {
            let entry = grouped.entry(v.clone()).or_default();
            // Identical constraint listed twice contributes once.
            if !entry.iter().any(|e| Arc::ptr_eq(e, c)) {
                entry.push(c.clone());
            }
        }
        let constraints: Vec<(String, Vec<Arc<Cefa>>)> = grouped.into_iter().collect();
        let limits = CefaLiaLimits {
            solve: SolveLimits {
                deadline: ctx.deadline,
                ..SolveLimits::default()
            },
            max_product_states: ctx.cfg.max_product_states,
            max_witness_len: ctx.cfg.max_witness_len,
            max_refinements: 4000,
            external_smt: ctx.cfg.external_smt.clone(),
        };
        let mut stats = StepVStats::default();
        let outcome =
            check_cefa_lia_sat_with_stats(&constraints, &state.arith, &ctx.session, &limits, &mut stats);
        ctx.stats.max_product_states = ctx.stats.max_product_states.max(stats.max_product_states);
        ctx.stats.lia_queries += stats.lia_queries;
        return match outcome? {
            CefaLiaOutcome::Sat { model, strings } => Ok(DfsOutcome::Sat { model, strings }),
            CefaLiaOutcome::Unsat => Ok(DfsOutcome::Unsat),
            CefaLiaOutcome::Unknown(msg) => {
                ctx.any_unknown = Some(msg);
                Ok(DfsOutcome::Unsat)
            }
        };
    };

    let (x, cefa) = state.active.remove(active_idx);
    let (_, fun) = state.funapps[assign_pos].clone();
    let rep = compute_preimage(ctx, &fun, &cefa)?;
    state.passive.push((x.clone(), cefa.clone()));

    let arg_names: Vec<VarName> = fun.string_args().into_iter().cloned().collect();
    let int_args: Vec<Vec<IntTerm>> = match &fun {
        StrFun::Substring { start, len, .. } => vec![vec![start.clone(), len.clone()]],
        _ => vec![Vec::new(); arg_names.len()],
    };

    for disjunct in &rep.disjuncts {
        ctx.stats.branches_explored += 1;
        ctx.check_deadline()?;
        let mut added_arith = 0usize;
        let mut added_active = 0usize;
        // Argument memberships.
        for (slot, b) in disjunct.iter().enumerate() {
            state
                .active
                .push((arg_names[slot].clone(), Arc::new(b.clone())));
            added_active += 1;
        }
        // Integer-argument links: i_{j,k} = input register.
        for (slot, terms) in int_args.iter().enumerate() {
            for (k, term) in terms.iter().enumerate() {
                let reg = rep.int_inputs[slot][k].clone();
                let lowered = lower_term(ctx, term);
                state
                    .arith
                    .push(LiaAtom::new(lowered, Rel::Eq, LinearTerm::var(reg)));
                added_arith += 1;
            }
        }
        // Original registers equal the reconstruction terms.
        for (reg, term) in cefa.registers.iter().zip(&rep.terms) {
            state
                .arith
                .push(LiaAtom::new(LinearTerm::var(reg.clone()), Rel::Eq, term.clone()));
            added_arith += 1;
        }
        // Cheap register-blind inconsistency pruning on the touched
        // variables.
        let consistent = arg_names.iter().all(|arg| {
            string_level_consistent(state, arg)
        });
        let outcome = if consistent {
            back_dfs(ctx, state)?
        } else {
            DfsOutcome::Unsat
        };
        for _ in 0..added_active {
            state.active.pop();
        }
        for _ in 0..added_arith {
            state.arith.pop();
        }
        match outcome {
            DfsOutcome::Sat { model, strings } => {
                state.passive.pop();
                state.active.insert(active_idx, (x, cefa));
                return Ok(DfsOutcome::Sat { model, strings });
            }
            DfsOutcome::Unsat => continue,
        }
    }
    state.passive.pop();
    state.active.insert(active_idx, (x, cefa));
    Ok(DfsOutcome::Unsat)
}

/// Register-blind string-level emptiness of the product of all constraints
/// on `var`; a sound, incomplete inconsistency test. Skipped when the
/// product would be large.
fn string_level_consistent(state: &DfsState, var: &str) -> bool {
    let mut automata: Vec<&Arc<Cefa>> = Vec::new();
    for (v, c) in state.active.iter().chain(&state.passive) {
        if v == var {
            automata.push(c);
        }
    }
    if automata.len() < 2 {
        return true;
    }
    let mut product = automata[0].to_nfa();
    for c in &automata[1..] {
        let lifted = Cefa::from_nfa(&product);
        let other = Cefa::from_nfa(&c.to_nfa());
        match lifted.product(&other) {
            Ok(p) => {
                if p.num_states > 20_000 {
                    return true; // too big to prune cheaply
                }
                product = p.trim().to_nfa();
            }
            Err(_) => return true,
        }
        if product.is_empty() {
            return false;
        }
    }
    !product.is_empty()
}

fn compute_preimage(ctx: &mut Ctx, fun: &StrFun, cefa: &Cefa) -> Result<CerrRepresentation> {
    match fun {
        StrFun::Concat(_, _) => Ok(preimage::preimage_concat(cefa, &ctx.session)),
        StrFun::Reverse(_) => Ok(preimage::preimage_reverse(cefa, &ctx.session)),
        StrFun::Substring { .. } => Ok(preimage::preimage_substring(
            cefa,
            &ctx.session,
            &ctx.cfg.alphabet,
        )),
        StrFun::Transduce { transducer, .. } => {
            if !transducer.functional {
                if !ctx.cfg.allow_nonfunctional {
                    return Err(Error::Unsupported(
                        "transducer not declared functional (set allow-nonfunctional to \
                         proceed; unsat answers then degrade to unknown)"
                            .into(),
                    ));
                }
                ctx.nonfunctional_used = true;
            }
            preimage::preimage_transducer_with(
                transducer,
                cefa,
                &ctx.session,
                ctx.cfg.max_transducer_output_len,
            )
        }
        StrFun::ReplaceAll {
            pattern,
            replacement,
            arg: _,
        } => preimage::preimage_replaceall(
            pattern,
            replacement,
            cefa,
            &ctx.session,
            &ctx.cfg.alphabet,
        ),
        StrFun::Replace {
            pattern,
            replacement,
            arg: _,
        } => preimage::preimage_replace(
            pattern,
            replacement,
            cefa,
            &ctx.session,
            &ctx.cfg.alphabet,
        ),
    }
}

/// Decides path feasibility of `p` under `cfg`.
pub fn check_sat(p: &SlintProgram, cfg: &SolverConfig) -> Result<SolveResult> {
    let start = Instant::now();
    p.validate_ssa()?;
    let mut ctx = Ctx {
        deadline: cfg.timeout.map(|t| start + t),
        cfg: cfg.clone(),
        session: Session::new(),
        vars: BTreeMap::new(),
        stats: SolveStats::default(),
        nonfunctional_used: false,
        any_unknown: None,
    };

    let outcome = run_branches(p, &mut ctx);
    let mut diagnostics = Vec::new();
    let verdict = match outcome {
        Ok(Some(assignment)) => {
            // Hard validation: a sat model must replay through the
            // reference interpreter.
            let feasible =
                oracle::interpret_program_with(p, &assignment, cfg.smtlib_strict)?.is_feasible();
            if !feasible {
                if ctx.nonfunctional_used {
                    diagnostics.push(
                        "model validation failed under a non-functional transducer".into(),
                    );
                    ctx.stats.wall = start.elapsed();
                    return Ok(SolveResult {
                        verdict: Verdict::Unknown,
                        model: None,
                        stats: ctx.stats,
                        diagnostics,
                    });
                }
                return Err(Error::internal(
                    "sat model failed reference-interpreter validation",
                ));
            }
            ctx.stats.wall = start.elapsed();
            return Ok(SolveResult {
                verdict: Verdict::Sat,
                model: Some(assignment),
                stats: ctx.stats,
                diagnostics,
            });
        }
        Ok(None) => {
            if let Some(msg) = &ctx.any_unknown {
                diagnostics.push(msg.clone());
                Verdict::Unknown
            } else if ctx.nonfunctional_used {
                diagnostics
                    .push("unsat degraded to unknown: non-functional transducer".into());
                Verdict::Unknown
            } else {
                Verdict::Unsat
            }
        }
        Err(Error::ResourceLimit(msg)) => {
            diagnostics.push(msg);
            Verdict::Unknown
        }
        Err(e) => return Err(e),
    };
    ctx.stats.wall = start.elapsed();
    Ok(SolveResult {
        verdict,
        model: None,
        stats: ctx.stats,
        diagnostics,
    })
}

fn run_branches(p: &SlintProgram, ctx: &mut Ctx) -> Result<Option<ConcreteAssignment>> {
    let debug = std::env::var_os("STRSOLVE_DEBUG").is_some();
    let input_strings = p.input_string_vars();
    let input_ints = p.int_vars();
    for pipeline in normalize_assertions(p) {
        ctx.check_deadline()?;
        for split in case_split_all(ctx, pipeline)? {
            ctx.stats.branches_explored += 1;
            ctx.check_deadline()?;
            if split.atoms.iter().any(obviously_false) {
                continue;
            }
            let branch_start = Instant::now();
            if debug {
                eprintln!(
                    "[branch {}] funapps={} atoms={}",
                    ctx.stats.branches_explored,
                    split.funapps.len(),
                    split.atoms.len()
                );
            }
            let lowered = lower(ctx, split)?;
            let mut state = DfsState {
                funapps: lowered.funapps,
                active: lowered.memberships,
                passive: Vec::new(),
                arith: lowered.arith,
            };
            let outcome = back_dfs(ctx, &mut state)?;
            if debug {
                eprintln!(
                    "[branch {}] done in {:?} (sat={})",
                    ctx.stats.branches_explored,
                    branch_start.elapsed(),
                    matches!(outcome, DfsOutcome::Sat { .. })
                );
            }
            match outcome {
                DfsOutcome::Sat { model, strings } => {
                    let mut assignment = ConcreteAssignment::default();
                    for v in &input_strings {
                        assignment
                            .strings
                            .insert(v.clone(), strings.get(v).cloned().unwrap_or_default());
                    }
                    for v in &input_ints {
                        let var = ctx.var(v);
                        assignment.ints.insert(v.clone(), model.value(&var));
                    }
                    return Ok(Some(assignment));
                }
                DfsOutcome::Unsat => continue,
            }
        }
    }
    Ok(None)
}

/// Step II in full: indexOf splits to fixpoint, then substring splits for
/// every substring assignment (including those the indexOf split added).
fn case_split_all(ctx: &mut Ctx, p: Pipeline) -> Result<Vec<Pipeline>> {
    let after_indexof = split_indexofs(ctx, p)?;
    let mut out = Vec::new();
    for q in after_indexof {
        split_substrings(ctx, q, 0, &mut out)?;
    }
    Ok(out)
}

fn split_substrings(
    ctx: &mut Ctx,
    p: Pipeline,
    from: usize,
    out: &mut Vec<Pipeline>,
) -> Result<()> {
    let next = p.funapps[from..]
        .iter()
        .position(|(_, f)| matches!(f, StrFun::Substring { .. }))
        .map(|i| i + from);
    match next {
        None => out.push(p),
        Some(idx) => {
            for (branch_no, q) in substring_branches(ctx, &p, idx).into_iter().enumerate() {
                if q.atoms.iter().any(obviously_false) {
                    continue;
                }
                // Branches 1 and 2 keep the assignment (continue after it);
                // 3-5 removed it (continue at the same index).
                let resume = if branch_no <= 1 { idx + 1 } else { idx };
                split_substrings(ctx, q, resume, out)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{Formula, Statement};
    use crate::regex::{parse_regex, regex_to_nfa};

    fn ab() -> Alphabet {
        Alphabet::explicit("ab".chars()).unwrap()
    }

    fn in_regex(var: &str, re: &str, alphabet: &Alphabet) -> Formula {
        Formula::Atom(Atom::InAutomaton {
            var: var.into(),
            automaton: StrAutomaton::Nfa(Arc::new(regex_to_nfa(
                &parse_regex(re).unwrap(),
                alphabet,
            ))),
        })
    }

    fn cfg() -> SolverConfig {
        SolverConfig {
            alphabet: ab(),
            ..SolverConfig::default()
        }
    }

    #[test]
    fn minimal_models_examples() {
        let a = ab();
        let fa = in_regex("x", "a", &a);
        let fb = in_regex("x", "b", &a);
        let fc = in_regex("x", "ab", &a);
        // a or b: two branches.
        let or = Formula::Or(vec![fa.clone(), fb.clone()]);
        assert_eq!(minimal_models(&or).len(), 2);
        // a and b: one branch with both atoms.
        let and = Formula::And(vec![fa.clone(), fb.clone()]);
        let m = minimal_models(&and);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].len(), 2);
        // (a or b) and c: branches {a, c}, {b, c}.
        let mixed = Formula::And(vec![Formula::Or(vec![fa, fb]), fc]);
        let m = minimal_models(&mixed);
        assert_eq!(m.len(), 2);
        assert!(m.iter().all(|s| s.len() == 2));
    }

    #[test]
    fn concat_regular_sat() {
        // x := y . z; assert(y in a*); assert(z in b*); assert(x in a*b*).
        let a = ab();
        let p = SlintProgram::new(vec![
            Statement::Assign {
                var: "x".into(),
                fun: StrFun::Concat("y".into(), "z".into()),
            },
            Statement::Assert(in_regex("y", "a*", &a)),
            Statement::Assert(in_regex("z", "b*", &a)),
            Statement::Assert(in_regex("x", "a*b*", &a)),
        ]);
        let r = check_sat(&p, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Sat);
        assert!(r.model.is_some());
    }

    #[test]
    fn concat_length_unsat() {
        // x := y . z; assert(x in ab); assert(y in b*); assert(length(y)=1).
        let a = ab();
        let p = SlintProgram::new(vec![
            Statement::Assign {
                var: "x".into(),
                fun: StrFun::Concat("y".into(), "z".into()),
            },
            Statement::Assert(in_regex("x", "ab", &a)),
            Statement::Assert(in_regex("y", "b*", &a)),
            Statement::Assert(Formula::Atom(Atom::Cmp {
                lhs: IntTerm::Length("y".into()),
                rel: Rel::Eq,
                rhs: IntTerm::constant(1),
            })),
        ]);
        let r = check_sat(&p, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Unsat);
    }

    #[test]
    fn reverse_elimination() {
        // y := reverse(x); assert(y in ab) => x = "ba".
        let a = ab();
        let p = SlintProgram::new(vec![
            Statement::Assign {
                var: "y".into(),
                fun: StrFun::Reverse("x".into()),
            },
            Statement::Assert(in_regex("y", "ab", &a)),
        ]);
        let r = check_sat(&p, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Sat);
        assert_eq!(r.model.unwrap().strings["x"], "ba");
    }

    #[test]
    fn replaceall_with_length() {
        // y := replaceall_{ab,c}(x); assert(y in c); assert(length(x) = 2).
        let alpha = Alphabet::explicit("abc".chars()).unwrap();
        let p = SlintProgram::new(vec![
            Statement::Assign {
                var: "y".into(),
                fun: StrFun::ReplaceAll {
                    pattern: parse_regex("ab").unwrap(),
                    replacement: "c".into(),
                    arg: "x".into(),
                },
            },
            Statement::Assert(in_regex("y", "c", &alpha)),
            Statement::Assert(Formula::Atom(Atom::Cmp {
                lhs: IntTerm::Length("x".into()),
                rel: Rel::Eq,
                rhs: IntTerm::constant(2),
            })),
        ]);
        let mut c = cfg();
        c.alphabet = alpha;
        let r = check_sat(&p, &c).unwrap();
        assert_eq!(r.verdict, Verdict::Sat);
        assert_eq!(r.model.unwrap().strings["x"], "ab");
    }

    #[test]
    fn assert_epsilon_and_length_unsat() {
        let p = SlintProgram::new(vec![
            Statement::Assert(Formula::Atom(Atom::InAutomaton {
                var: "x".into(),
                automaton: StrAutomaton::Nfa(Arc::new(builders::build_const_nfa(""))),
            })),
            Statement::Assert(Formula::Atom(Atom::Cmp {
                lhs: IntTerm::Length("x".into()),
                rel: Rel::Eq,
                rhs: IntTerm::constant(1),
            })),
        ]);
        let r = check_sat(&p, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Unsat);
    }

    #[test]
    fn ssa_violation_is_rejected() {
        let p = SlintProgram::new(vec![
            Statement::Assign {
                var: "x".into(),
                fun: StrFun::Concat("y".into(), "y".into()),
            },
            Statement::Assign {
                var: "x".into(),
                fun: StrFun::Concat("y".into(), "y".into()),
            },
        ]);
        assert!(check_sat(&p, &cfg()).is_err());
    }

    #[test]
    fn substring_with_indexof() {
        // qpos = indexof_b(x, 0); y := substring(x, 0, qpos);
        // assert(y in a+); assert(qpos >= 1).
        let a = ab();
        let p = SlintProgram::new(vec![
            Statement::Assert(Formula::Atom(Atom::Cmp {
                lhs: IntTerm::var("qpos"),
                rel: Rel::Eq,
                rhs: IntTerm::IndexOf {
                    pattern: "b".into(),
                    arg: "x".into(),
                    start: Box::new(IntTerm::constant(0)),
                },
            })),
            Statement::Assign {
                var: "y".into(),
                fun: StrFun::Substring {
                    arg: "x".into(),
                    start: IntTerm::constant(0),
                    len: IntTerm::var("qpos"),
                },
            },
            Statement::Assert(in_regex("y", "aa*", &a)),
        ]);
        let r = check_sat(&p, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Sat);
        let m = r.model.unwrap();
        let x = &m.strings["x"];
        // x must start with at least one 'a' and contain a 'b'.
        assert!(x.starts_with('a'));
        assert!(x.contains('b'));
    }

    #[test]
    fn timeout_yields_unknown() {
        let a = ab();
        let p = SlintProgram::new(vec![
            Statement::Assign {
                var: "x".into(),
                fun: StrFun::Concat("y".into(), "z".into()),
            },
            Statement::Assert(in_regex("x", "(a|b)*", &a)),
        ]);
        let mut c = cfg();
        c.timeout = Some(Duration::from_nanos(1));
        let r = check_sat(&p, &c).unwrap();
        assert_eq!(r.verdict, Verdict::Unknown);
    }
}
