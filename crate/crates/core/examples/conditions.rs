//! Evaluates a `requires` expression under every combination of its atoms.
//!
//! ```text
//! cargo run -p interact-core --example conditions
//! ```

use std::collections::BTreeSet;

use interact_core::lang::parse;
use interact_core::scene::evaluate_condition;

const SRC: &str = r#"scenario "c" {
  step a : action { action_id = a; requires = start; par_time = 1; }
  step b : action { action_id = b; requires = start; par_time = 1; }
  event e { when = time(1); do = set_flag(clean); }
  event f { when = time(2); do = set_flag(locked); }
  step x : action { action_id = x; requires = done(a) && (done(b) || flag(clean)) && !flag(locked); par_time = 1; }
}"#;

fn main() {
    let s = parse(SRC).scenario.expect("scenario parses");
    let e = &s.step("x").unwrap().requires;
    println!("requires = {e}");
    for bits in 0..16u32 {
        let done: BTreeSet<String> = ["a", "b"]
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .map(|(_, s)| s.to_string())
            .collect();
        let flags: BTreeSet<String> = ["clean", "locked"]
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> (i + 2) & 1 == 1)
            .map(|(_, s)| s.to_string())
            .collect();
        println!("done {done:?} flags {flags:?} -> {}", evaluate_condition(e, &done, &flags));
    }
}
