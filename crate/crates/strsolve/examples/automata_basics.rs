//! Cost-enriched finite automata from the ground up: build a CEFA by hand,
//! check cost-string acceptance, rename registers, take a product, and
//! print the diffable dump format.
//!
//! Run with `cargo run --example automata_basics`.

use strsolve::alphabet::{Alphabet, CharClass};
use strsolve::automata::{Cefa, CostString, Int};
use strsolve::builders::build_len_cefa;
use strsolve::Session;

fn main() -> strsolve::Result<()> {
    let session = Session::new();
    let alphabet = Alphabet::explicit("ab".chars())?;

    // The length CEFA: one state, a full-alphabet self-loop adding 1.
    // It accepts exactly the pairs (w, |w|).
    let len = build_len_cefa(&session, &alphabet);
    println!("A_len accepts (\"aba\", 3): {}", len.accepts(&CostString::new("aba", vec![3]))?);
    println!("A_len accepts (\"a\", 2):   {}", len.accepts(&CostString::new("a", vec![2]))?);

    // A CEFA counting occurrences of 'b' in words of (ab)*.
    let b_counter = Cefa::new(
        2,
        vec![session.fresh("bs")],
        vec![
            (0, CharClass::singleton('a'), 1, vec![Int::from(0)]),
            (1, CharClass::singleton('b'), 0, vec![Int::from(1)]),
        ],
        [0],
        [0],
    )?;
    println!("\nb-counter over (ab)*:");
    for (w, n) in [("abab", 2), ("abab", 1), ("", 0)] {
        println!("  accepts ({w:?}, {n}): {}", b_counter.accepts(&CostString::new(w, vec![n]))?);
    }

    // Products require disjoint registers; rename first when needed.
    let len2 = len.rename(vec![session.fresh("len")])?;
    let product = len2.product(&b_counter)?;
    println!("\nproduct of A_len and the b-counter:");
    println!(
        "  accepts (\"abab\", (4, 2)): {}",
        product.accepts(&CostString::new("abab", vec![4, 2]))?
    );
    println!(
        "  accepts (\"abab\", (4, 1)): {}",
        product.accepts(&CostString::new("abab", vec![4, 1]))?
    );

    // The dump format is sorted and diffable.
    println!("\ndump of the product:\n{}", product.dump());

    // All accepted cost vectors of a word (a testing utility).
    println!("accepted cost vectors of \"abab\": {:?}", product.accepted_costs("abab"));
    Ok(())
}
