//! Straight-line string programs: statements, assertions, integer terms.
//!
//! A program is an ordered list of SSA assignments over string variables and
//! assertions built from positive boolean combinations of regular-membership
//! and linear-arithmetic atoms. String variables never assigned are the
//! program's string inputs; every integer variable is an input.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::automata::{Cefa, Int, Nfa, Nft};
use crate::error::{Error, Result};
use crate::regex::Regex;

pub type VarName = String;

#[derive(Debug, Clone)]
pub enum StrFun {
    /// y · z
    Concat(VarName, VarName),
    ReplaceAll {
        pattern: Regex,
        replacement: String,
        arg: VarName,
    },
    /// First leftmost-longest occurrence only.
    Replace {
        pattern: Regex,
        replacement: String,
        arg: VarName,
    },
    Reverse(VarName),
    Transduce {
        transducer: Arc<Nft>,
        arg: VarName,
    },
    Substring {
        arg: VarName,
        start: IntTerm,
        len: IntTerm,
    },
}

impl StrFun {
    pub fn string_args(&self) -> Vec<&VarName> {
        match self {
            StrFun::Concat(y, z) => vec![y, z],
            StrFun::ReplaceAll { arg, .. }
            | StrFun::Replace { arg, .. }
            | StrFun::Reverse(arg)
            | StrFun::Transduce { arg, .. }
            | StrFun::Substring { arg, .. } => vec![arg],
        }
    }
}

#[derive(Debug, Clone)]
pub enum Statement {
    Assign { var: VarName, fun: StrFun },
    Assert(Formula),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntTerm {
    Const(Int),
    Var(VarName),
    Length(VarName),
    IndexOf {
        /// Constant pattern; nonempty.
        pattern: String,
        arg: VarName,
        start: Box<IntTerm>,
    },
    /// Multiplication by an integer constant.
    Mul(Int, Box<IntTerm>),
    Add(Box<IntTerm>, Box<IntTerm>),
}

impl IntTerm {
    pub fn constant(c: i64) -> IntTerm {
        IntTerm::Const(Int::from(c))
    }

    pub fn var(name: impl Into<String>) -> IntTerm {
        IntTerm::Var(name.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Eq,
    Ne,
    Le,
    Lt,
    Ge,
    Gt,
}

impl Rel {
    pub fn eval(&self, l: &Int, r: &Int) -> bool {
        match self {
            Rel::Eq => l == r,
            Rel::Ne => l != r,
            Rel::Le => l <= r,
            Rel::Lt => l < r,
            Rel::Ge => l >= r,
            Rel::Gt => l > r,
        }
    }
}

/// Membership target of a string assertion. Plain NFAs come from the
/// frontend; CEFAs appear once length/indexOf removal has run.
#[derive(Debug, Clone)]
pub enum StrAutomaton {
    Nfa(Arc<Nfa>),
    Cefa(Arc<Cefa>),
}

#[derive(Debug, Clone)]
pub enum Atom {
    InAutomaton {
        var: VarName,
        automaton: StrAutomaton,
    },
    Cmp {
        lhs: IntTerm,
        rel: Rel,
        rhs: IntTerm,
    },
}

/// Positive boolean combination of atoms; no negation nodes.
#[derive(Debug, Clone)]
pub enum Formula {
    Atom(Atom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

#[derive(Debug, Clone, Default)]
pub struct SlintProgram {
    pub statements: Vec<Statement>,
}

impl SlintProgram {
    pub fn new(statements: Vec<Statement>) -> Self {
        SlintProgram { statements }
    }

    /// Validates SSA form: every string variable is assigned at most once and
    /// never read (in an assignment argument or assertion) before its
    /// assignment. Also rejects names used both as string and integer
    /// variables.
    pub fn validate_ssa(&self) -> Result<()> {
        let mut assigned_at: BTreeMap<&str, usize> = BTreeMap::new();
        for (k, st) in self.statements.iter().enumerate() {
            if let Statement::Assign { var, .. } = st {
                if assigned_at.insert(var, k).is_some() {
                    return Err(Error::input(format!(
                        "not in SSA form: string variable '{var}' assigned twice"
                    )));
                }
            }
        }
        let check_read = |var: &str, k: usize| -> Result<()> {
            match assigned_at.get(var) {
                Some(&j) if k <= j => Err(Error::input(format!(
                    "not in SSA form: '{var}' read at statement {k} before its assignment at {j}"
                ))),
                _ => Ok(()),
            }
        };
        let mut int_vars: BTreeSet<&str> = BTreeSet::new();
        for (k, st) in self.statements.iter().enumerate() {
            match st {
                Statement::Assign { fun, .. } => {
                    for arg in fun.string_args() {
                        check_read(arg, k)?;
                    }
                    if let StrFun::Substring { start, len, .. } = fun {
                        collect_int_term(start, &mut int_vars, &mut |v| check_read(v, k))?;
                        collect_int_term(len, &mut int_vars, &mut |v| check_read(v, k))?;
                    }
                }
                Statement::Assert(f) => {
                    visit_formula(f, &mut |atom| match atom {
                        Atom::InAutomaton { var, .. } => check_read(var, k),
                        Atom::Cmp { lhs, rhs, .. } => {
                            collect_int_term(lhs, &mut int_vars, &mut |v| check_read(v, k))?;
                            collect_int_term(rhs, &mut int_vars, &mut |v| check_read(v, k))
                        }
                    })?;
                }
            }
        }
        for v in &int_vars {
            if assigned_at.contains_key(*v) {
                return Err(Error::input(format!(
                    "'{v}' used both as a string and an integer variable"
                )));
            }
        }
        Ok(())
    }

    /// String variables never assigned (read-only inputs), in first-use order.
    pub fn input_string_vars(&self) -> Vec<VarName> {
        let assigned: BTreeSet<&str> = self
            .statements
            .iter()
            .filter_map(|st| match st {
                Statement::Assign { var, .. } => Some(var.as_str()),
                _ => None,
            })
            .collect();
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        let mut push = |v: &str| {
            if !assigned.contains(v) && seen.insert(v.to_string()) {
                out.push(v.to_string());
            }
        };
        for st in &self.statements {
            match st {
                Statement::Assign { fun, .. } => {
                    for arg in fun.string_args() {
                        push(arg);
                    }
                }
                Statement::Assert(f) => {
                    let _ = visit_formula(f, &mut |atom| {
                        match atom {
                            Atom::InAutomaton { var, .. } => push(var),
                            Atom::Cmp { lhs, rhs, .. } => {
                                for t in [lhs, rhs] {
                                    visit_string_vars_of_term(t, &mut push);
                                }
                            }
                        }
                        Ok(())
                    });
                }
            }
        }
        out
    }

    /// All integer variables, in first-use order.
    pub fn int_vars(&self) -> Vec<VarName> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        let mut push = |v: &str| {
            if seen.insert(v.to_string()) {
                out.push(v.to_string());
            }
        };
        for st in &self.statements {
            match st {
                Statement::Assign { fun, .. } => {
                    if let StrFun::Substring { start, len, .. } = fun {
                        visit_int_vars_of_term(start, &mut push);
                        visit_int_vars_of_term(len, &mut push);
                    }
                }
                Statement::Assert(f) => {
                    let _ = visit_formula(f, &mut |atom| {
                        if let Atom::Cmp { lhs, rhs, .. } = atom {
                            visit_int_vars_of_term(lhs, &mut push);
                            visit_int_vars_of_term(rhs, &mut push);
                        }
                        Ok(())
                    });
                }
            }
        }
        out
    }
}

pub fn visit_formula<'a>(
    f: &'a Formula,
    visit: &mut impl FnMut(&'a Atom) -> Result<()>,
) -> Result<()> {
    match f {
        Formula::Atom(a) => visit(a),
        Formula::And(fs) | Formula::Or(fs) => {
            for g in fs {
                visit_formula(g, visit)?;
            }
            Ok(())
        }
    }
}

fn collect_int_term<'a>(
    t: &'a IntTerm,
    int_vars: &mut BTreeSet<&'a str>,
    check_string_read: &mut impl FnMut(&str) -> Result<()>,
) -> Result<()> {
    match t {
        IntTerm::Const(_) => Ok(()),
        IntTerm::Var(v) => {
            int_vars.insert(v);
            Ok(())
        }
        IntTerm::Length(x) => check_string_read(x),
        IntTerm::IndexOf { arg, start, .. } => {
            check_string_read(arg)?;
            collect_int_term(start, int_vars, check_string_read)
        }
        IntTerm::Mul(_, inner) => collect_int_term(inner, int_vars, check_string_read),
        IntTerm::Add(a, b) => {
            collect_int_term(a, int_vars, check_string_read)?;
            collect_int_term(b, int_vars, check_string_read)
        }
    }
}

fn visit_string_vars_of_term(t: &IntTerm, push: &mut impl FnMut(&str)) {
    match t {
        IntTerm::Const(_) | IntTerm::Var(_) => {}
        IntTerm::Length(x) => push(x),
        IntTerm::IndexOf { arg, start, .. } => {
            push(arg);
            visit_string_vars_of_term(start, push);
        }
        IntTerm::Mul(_, inner) => visit_string_vars_of_term(inner, push),
        IntTerm::Add(a, b) => {
            visit_string_vars_of_term(a, push);
            visit_string_vars_of_term(b, push);
        }
    }
}

fn visit_int_vars_of_term(t: &IntTerm, push: &mut impl FnMut(&str)) {
    match t {
        IntTerm::Const(_) | IntTerm::Length(_) => {}
        IntTerm::Var(v) => push(v),
        IntTerm::IndexOf { start, .. } => visit_int_vars_of_term(start, push),
        IntTerm::Mul(_, inner) => visit_int_vars_of_term(inner, push),
        IntTerm::Add(a, b) => {
            visit_int_vars_of_term(a, push);
            visit_int_vars_of_term(b, push);
        }
    }
}

/// Concrete values for a program's input variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConcreteAssignment {
    pub strings: BTreeMap<VarName, String>,
    pub ints: BTreeMap<VarName, Int>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn concat(x: &str, y: &str, z: &str) -> Statement {
        Statement::Assign {
            var: x.into(),
            fun: StrFun::Concat(y.into(), z.into()),
        }
    }

    #[test]
    fn ssa_rejects_double_assignment() {
        let p = SlintProgram::new(vec![concat("x", "y", "z"), concat("x", "y", "y")]);
        assert!(p.validate_ssa().is_err());
    }

    #[test]
    fn ssa_rejects_read_before_assign_and_cycles() {
        let p = SlintProgram::new(vec![concat("x", "x", "y")]);
        assert!(p.validate_ssa().is_err());
        let p = SlintProgram::new(vec![concat("x", "y", "z"), concat("y", "w", "w")]);
        assert!(p.validate_ssa().is_err());
        let p = SlintProgram::new(vec![concat("y", "w", "w"), concat("x", "y", "z")]);
        assert!(p.validate_ssa().is_ok());
    }

    #[test]
    fn input_variables() {
        let p = SlintProgram::new(vec![
            concat("x", "y", "z"),
            Statement::Assert(Formula::Atom(Atom::Cmp {
                lhs: IntTerm::Length("x".into()),
                rel: Rel::Eq,
                rhs: IntTerm::var("i"),
            })),
        ]);
        assert_eq!(p.input_string_vars(), vec!["y".to_string(), "z".to_string()]);
        assert_eq!(p.int_vars(), vec!["i".to_string()]);
    }
}
