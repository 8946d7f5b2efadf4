//! The arithmetic backend: monotonic register splitting, the Parikh flow
//! encoding, joint CEFA/LIA satisfiability, and witness extraction.
//!
//! Run with `cargo run --example parikh_solving`.

use std::sync::Arc;

use strsolve::alphabet::{Alphabet, CharClass};
use strsolve::automata::{Cefa, Int};
use strsolve::builders::build_len_cefa;
use strsolve::lia::parikh::{check_cefa_lia_sat, monotonic_split, CefaLiaLimits, CefaLiaOutcome};
use strsolve::lia::LiaAtom;
use strsolve::preimage::LinearTerm;
use strsolve::program::Rel;
use strsolve::Session;

fn main() -> strsolve::Result<()> {
    let session = Session::new();
    let alphabet = Alphabet::explicit("ab".chars())?;

    // Splitting a register with mixed-sign updates into nonnegative parts.
    let counter = Cefa::new(
        1,
        vec![session.fresh("delta")],
        vec![
            (0, CharClass::singleton('a'), 0, vec![Int::from(1)]),
            (0, CharClass::singleton('b'), 0, vec![Int::from(-1)]),
        ],
        [0],
        [0],
    )?;
    let (split, substitution) = monotonic_split(&counter, &session);
    println!(
        "monotonic split: {} registers -> {}, substitution {} -> {} - {}",
        counter.registers.len(),
        split.registers.len(),
        substitution[0].0,
        substitution[0].1,
        substitution[0].2,
    );

    // Joint satisfiability: x must be in (aa)* with length register j, and
    // in Sigma* with length register i, under i = j and i >= 2.
    let len = build_len_cefa(&session, &alphabet);
    let even = Cefa::new(
        2,
        vec![session.fresh("j")],
        vec![
            (0, alphabet.full_class(), 1, vec![Int::from(1)]),
            (1, alphabet.full_class(), 0, vec![Int::from(1)]),
        ],
        [0],
        [0],
    )?;
    let i = len.registers[0].clone();
    let j = even.registers[0].clone();
    let constraints = vec![("x".to_string(), vec![Arc::new(len), Arc::new(even)])];
    let phi = vec![
        LiaAtom::new(LinearTerm::var(i.clone()), Rel::Eq, LinearTerm::var(j.clone())),
        LiaAtom::new(LinearTerm::var(i.clone()), Rel::Ge, LinearTerm::constant_term(2)),
    ];
    match check_cefa_lia_sat(&constraints, &phi, &session, &CefaLiaLimits::default())? {
        CefaLiaOutcome::Sat { model, strings } => {
            println!(
                "sat: x = {:?} with i = {}, j = {}",
                strings["x"],
                model.value(&i),
                model.value(&j)
            );
        }
        other => println!("unexpected: {other:?}"),
    }

    // i = 3 clashes with the even-length constraint.
    let phi_odd = vec![
        LiaAtom::new(LinearTerm::var(i.clone()), Rel::Eq, LinearTerm::var(j)),
        LiaAtom::new(LinearTerm::var(i), Rel::Eq, LinearTerm::constant_term(3)),
    ];
    match check_cefa_lia_sat(&constraints, &phi_odd, &session, &CefaLiaLimits::default())? {
        CefaLiaOutcome::Unsat => println!("odd length over (aa)*: unsat"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
