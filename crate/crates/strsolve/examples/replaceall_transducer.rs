//! The replaceAll transducer: a functional NFT computing leftmost-longest
//! replacement, compared against the reference evaluator.
//!
//! Run with `cargo run --example replaceall_transducer`.

use strsolve::alphabet::Alphabet;
use strsolve::builders::{build_replace_nft, build_replaceall_nft};
use strsolve::oracle::{eval_replaceall, run_transducer};
use strsolve::regex::parse_regex;

fn main() -> strsolve::Result<()> {
    let alphabet = Alphabet::explicit("abc".chars())?;
    let pattern = parse_regex("(ab)+")?;

    let t = build_replaceall_nft(&pattern, "c", &alphabet)?;
    println!(
        "replaceAll transducer for (ab)+ -> \"c\": {} states, {} transitions",
        t.num_states,
        t.transitions.len()
    );
    for w in ["aababaab", "ba", "abab", ""] {
        let via_nft = run_transducer(&t, w)?;
        let via_eval = eval_replaceall(&pattern, "c", w)?;
        println!("  T({w:?}) = {via_nft:?}  (reference: {via_eval:?})");
        assert_eq!(via_nft.as_deref(), Some(via_eval.as_str()));
    }

    // Replace-first only touches the leftmost-longest match.
    let first = build_replace_nft(&parse_regex("ab")?, "c", &alphabet)?;
    for w in ["abab", "aab", "bb"] {
        println!("  replace-first({w:?}) = {:?}", run_transducer(&first, w)?);
    }

    // Patterns matching the empty string are rejected.
    match build_replaceall_nft(&parse_regex("a*")?, "c", &alphabet) {
        Err(e) => println!("\nnullable pattern rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
