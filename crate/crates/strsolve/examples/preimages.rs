//! Cost-enriched pre-images: given a CEFA constraint on the output of a
//! string operation, compute CEFA constraints on its inputs together with
//! terms reconstructing the output registers.
//!
//! Run with `cargo run --example preimages`.

use strsolve::alphabet::{Alphabet, CharClass};
use strsolve::automata::{Cefa, CostString, Int};
use strsolve::preimage::{preimage_concat, preimage_reverse, preimage_substring};
use strsolve::Session;

fn main() -> strsolve::Result<()> {
    let session = Session::new();
    let alphabet = Alphabet::explicit("a".chars())?;

    // L = {(w, |w|) | w in (aa)*}: an even-length language with a length
    // register.
    let even_len = Cefa::new(
        2,
        vec![session.fresh("r1")],
        vec![
            (0, CharClass::singleton('a'), 1, vec![Int::from(1)]),
            (1, CharClass::singleton('a'), 0, vec![Int::from(1)]),
        ],
        [0],
        [0],
    )?;

    // Pre-image under substring: the result reads (w, start, length,
    // copied-registers); the window w[start .. start+length-1] must land in
    // the original language.
    let rep = preimage_substring(&even_len, &session, &alphabet);
    let b = &rep.disjuncts[0][0];
    println!("substring pre-image: {} states", b.num_states);
    for (w, costs) in [
        ("aaaa", vec![1, 2, 2]), // window "aa" starting at 1
        ("aaa", vec![2, 0, 0]),  // empty window at position 2
        ("aaa", vec![1, 3, 3]),  // would overrun the string
    ] {
        println!(
            "  accepts ({w:?}, {costs:?}): {}",
            b.accepts(&CostString::new(w, costs))?
        );
    }

    // Pre-image under concatenation: one disjunct per split state; the
    // reconstruction terms are the pairwise register sums.
    let rep = preimage_concat(&even_len, &session);
    println!(
        "\nconcat pre-image: {} disjuncts, terms = register sums",
        rep.disjuncts.len()
    );
    let d = &rep.disjuncts[1];
    println!(
        "  split \"aa\"|\"aa\" of \"aaaa\" covered by disjunct 1: {} and {}",
        d[0].accepts(&CostString::new("aa", vec![2]))?,
        d[1].accepts(&CostString::new("aa", vec![2]))?,
    );

    // Pre-image under reverse: transitions reversed, initials and finals
    // swapped.
    let rep = preimage_reverse(&even_len, &session);
    println!(
        "\nreverse pre-image accepts (\"aaaa\", 4): {}",
        rep.disjuncts[0][0].accepts(&CostString::new("aaaa", vec![4]))?
    );
    Ok(())
}
