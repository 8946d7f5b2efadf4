//! Optional delegation of the final integer queries to an external SMT-LIB
//! solver process.
//!
//! The query is emitted as `QF_LIA` text on the child's stdin; the reply's
//! first word must be `sat`, `unsat`, or `unknown`, optionally followed by a
//! `get-model` result with `define-fun` integer values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::process::{Command, Stdio};

use num::BigInt;

use crate::automata::Int;
use crate::error::{Error, Result};
use crate::program::Rel;

use super::{LiaAtom, LiaConjunction, LiaModel, Var};

fn smt_var(v: &Var) -> String {
    format!("v{}", v.raw())
}

fn smt_int(i: &Int) -> String {
    if i < &Int::from(0) {
        format!("(- {})", -i)
    } else {
        i.to_string()
    }
}

fn smt_term(t: &crate::preimage::LinearTerm) -> String {
    let mut parts: Vec<String> = Vec::new();
    if t.constant != Int::from(0) || t.coeffs.is_empty() {
        parts.push(smt_int(&t.constant));
    }
    for (v, c) in &t.coeffs {
        if *c == Int::from(1) {
            parts.push(smt_var(v));
        } else {
            parts.push(format!("(* {} {})", smt_int(c), smt_var(v)));
        }
    }
    match parts.len() {
        1 => parts.pop().unwrap(),
        _ => format!("(+ {})", parts.join(" ")),
    }
}

fn smt_atom(a: &LiaAtom) -> String {
    let op = match a.rel {
        Rel::Eq => "=",
        Rel::Ne => "distinct",
        Rel::Le => "<=",
        Rel::Lt => "<",
        Rel::Ge => ">=",
        Rel::Gt => ">",
    };
    format!("({op} {} {})", smt_term(&a.lhs), smt_term(&a.rhs))
}

/// Renders one conjunction as a complete SMT-LIB script.
pub fn render_query(conj: &LiaConjunction) -> String {
    let mut vars: BTreeMap<Var, ()> = BTreeMap::new();
    for a in &conj.atoms {
        for v in a.vars() {
            vars.insert(v, ());
        }
    }
    let mut out = String::from("(set-logic QF_LIA)\n");
    for v in vars.keys() {
        writeln!(out, "(declare-fun {} () Int)", smt_var(v)).unwrap();
    }
    let body = if conj.atoms.is_empty() {
        "true".to_string()
    } else {
        format!(
            "(and {})",
            conj.atoms.iter().map(smt_atom).collect::<Vec<_>>().join(" ")
        )
    };
    writeln!(out, "(assert {body})").unwrap();
    out.push_str("(check-sat)\n(get-model)\n");
    out
}

/// Parses `sat`/`unsat` plus `define-fun` integer values. Returns
/// `Ok(None)` for unsat; `unknown` or garbage is an error the caller
/// reports as an unknown verdict.
pub fn parse_reply(reply: &str, vars: &[Var]) -> Result<Option<LiaModel>> {
    let mut words = reply.split_whitespace();
    match words.next() {
        Some("unsat") => return Ok(None),
        Some("sat") => {}
        Some(other) => {
            return Err(Error::ResourceLimit(format!(
                "external solver replied {other:?}"
            )))
        }
        None => return Err(Error::ResourceLimit("external solver replied nothing".into())),
    }
    let by_name: BTreeMap<String, Var> =
        vars.iter().map(|v| (smt_var(v), v.clone())).collect();
    let mut values: BTreeMap<Var, Int> = BTreeMap::new();
    // Scan for (define-fun NAME () Int VALUE) with VALUE = N or (- N).
    let spaced = reply.replace('(', " ( ").replace(')', " ) ");
    let tokens: Vec<&str> = spaced.split_whitespace().collect();
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i] == "define-fun" && i + 1 < tokens.len() {
            let name = tokens[i + 1];
            if let Some(var) = by_name.get(name) {
                // Skip to after "Int".
                let mut j = i + 2;
                while j < tokens.len() && tokens[j] != "Int" {
                    j += 1;
                }
                if j + 1 < tokens.len() {
                    let value = if tokens[j + 1] == "(" && j + 3 < tokens.len() && tokens[j + 2] == "-" {
                        tokens[j + 3].parse::<BigInt>().ok().map(|n| -n)
                    } else {
                        tokens[j + 1].parse::<BigInt>().ok()
                    };
                    if let Some(n) = value {
                        values.insert(var.clone(), n);
                    }
                }
            }
        }
        i += 1;
    }
    for v in vars {
        values.entry(v.clone()).or_insert_with(|| Int::from(0));
    }
    Ok(Some(LiaModel { values }))
}

/// Runs the configured command (split on whitespace), feeding the query on
/// stdin.
pub fn solve_external(cmd: &str, conj: &LiaConjunction) -> Result<Option<LiaModel>> {
    let mut parts = cmd.split_whitespace();
    let program = parts
        .next()
        .ok_or_else(|| Error::input("empty external solver command"))?;
    let mut child = Command::new(program)
        .args(parts)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| Error::ResourceLimit(format!("cannot launch external solver: {e}")))?;
    let query = render_query(conj);
    child
        .stdin
        .take()
        .expect("piped stdin")
        .write_all(query.as_bytes())?;
    let out = child
        .wait_with_output()
        .map_err(|e| Error::ResourceLimit(format!("external solver failed: {e}")))?;
    let reply = String::from_utf8_lossy(&out.stdout);
    let vars: Vec<Var> = conj
        .atoms
        .iter()
        .flat_map(|a| a.vars())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let model = parse_reply(&reply, &vars)?;
    if let Some(m) = &model {
        // The external answer is only trusted when it checks out.
        if !m.satisfies(&conj.atoms)? {
            return Err(Error::ResourceLimit(
                "external solver model does not satisfy the query".into(),
            ));
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::Session;
    use crate::preimage::LinearTerm;

    #[test]
    fn renders_declarations_assert_and_commands() {
        let s = Session::new();
        let x = s.fresh("x");
        let conj = LiaConjunction::new(vec![LiaAtom::new(
            LinearTerm::constant_term(0).add_var(x.clone(), 2),
            Rel::Ge,
            LinearTerm::constant_term(-3),
        )]);
        let q = render_query(&conj);
        assert!(q.starts_with("(set-logic QF_LIA)\n"));
        assert!(q.contains(&format!("(declare-fun v{} () Int)", x.raw())));
        assert!(q.contains("(>= (* 2 v"));
        assert!(q.contains("(- 3)"));
        assert!(q.ends_with("(check-sat)\n(get-model)\n"));
    }

    #[test]
    fn parses_sat_model_and_unsat() {
        let s = Session::new();
        let x = s.fresh("x");
        let vars = vec![x.clone()];
        let reply = format!(
            "sat\n(model\n  (define-fun v{} () Int (- 7))\n)\n",
            x.raw()
        );
        let m = parse_reply(&reply, &vars).unwrap().unwrap();
        assert_eq!(m.value(&x), Int::from(-7));
        assert!(parse_reply("unsat\n", &vars).unwrap().is_none());
        assert!(parse_reply("unknown\n", &vars).is_err());
    }

    #[test]
    fn runs_a_real_process() {
        use std::io::Write as _;
        use std::os::unix::fs::PermissionsExt;
        // A blunt but legitimate external decision procedure for an
        // unsatisfiable query: always answer unsat.
        let dir = std::env::temp_dir();
        let path = dir.join(format!("strsolve-ext-{}.sh", std::process::id()));
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "#!/bin/sh\ncat > /dev/null\necho unsat").unwrap();
        drop(f);
        std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
        let s = Session::new();
        let x = s.fresh("x");
        let conj = LiaConjunction::new(vec![
            LiaAtom::new(LinearTerm::var(x.clone()), Rel::Ge, LinearTerm::constant_term(1)),
            LiaAtom::new(LinearTerm::var(x), Rel::Le, LinearTerm::constant_term(0)),
        ]);
        let out = solve_external(path.to_str().unwrap(), &conj).unwrap();
        assert!(out.is_none());
        let _ = std::fs::remove_file(&path);
    }
}
