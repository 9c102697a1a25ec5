//! Prints the state hash of a fresh session, then after each second of an
//! idle run.
//!
//! ```text
//! cargo run -p interact-core --example state_hash -- scenarios/laser_cutter.itx default
//! ```

use std::sync::Arc;

use interact_core::lang::parse;
use interact_core::replay::{hex16, scenario_hash, state_hash};
use interact_core::session::Session;

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "scenarios/laser_cutter.itx".into());
    let difficulty = args.next().unwrap_or_else(|| "default".into());
    let text = std::fs::read_to_string(&path).expect("readable scenario file");
    let scenario = Arc::new(parse(&text).scenario.expect("scenario parses"));
    println!("scenario {}", hex16(scenario_hash(&scenario)));
    let mut session = Session::start(scenario, &difficulty).expect("difficulty exists");
    println!("tick 0 {}", hex16(state_hash(&session)));
    for second in 1..=3 {
        for _ in 0..120 {
            session.tick(&[]).expect("world stays finite");
        }
        println!("second {second} {}", hex16(state_hash(&session)));
    }
}
