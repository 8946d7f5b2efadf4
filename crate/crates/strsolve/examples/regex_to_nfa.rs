//! Parse regular expressions and compile them to epsilon-free NFAs.
//!
//! Run with `cargo run --example regex_to_nfa`.

use strsolve::alphabet::Alphabet;
use strsolve::regex::{parse_regex, regex_to_nfa};

fn main() -> strsolve::Result<()> {
    let alphabet = Alphabet::explicit("abcx".chars())?;

    for pattern in ["a(b|c)*", "(ab)+", "[a-c]x", "a?b+"] {
        let regex = parse_regex(pattern)?;
        let nfa = regex_to_nfa(&regex, &alphabet);
        println!("{pattern}:");
        for w in ["", "a", "abc", "ab", "abab", "bx", "cx", "b"] {
            if nfa.accepts(w) {
                println!("  accepts {w:?}");
            }
        }
    }

    // Parse errors carry positions.
    match parse_regex("a(b") {
        Err(e) => println!("\nerror for \"a(b\": {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
