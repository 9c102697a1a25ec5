//! Plays the scripted laser-cutter trace and prints the session log, then
//! the score report.
//!
//! ```text
//! cargo run -p interact-core --example session
//! ```

use std::sync::Arc;

use interact_core::lang::parse;
use interact_core::replay::read_trace;
use interact_core::session::Session;

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "scenarios/laser_cutter.itx".into());
    let trace = args
        .next()
        .unwrap_or_else(|| "scenarios/traces/laser_cutter_hints_skip.jsonl".into());
    let scenario = Arc::new(parse(&std::fs::read_to_string(&path).unwrap()).scenario.unwrap());
    let records = read_trace(&std::fs::read_to_string(&trace).unwrap()).unwrap();

    let mut session = Session::start(scenario, "default").unwrap();
    let mut next = 0;
    while next < records.len() || !session.is_finished() {
        let now = session.tick_count();
        let mut batch = Vec::new();
        while next < records.len() && records[next].tick <= now {
            batch.push(records[next].input.clone());
            next += 1;
        }
        let frame = session.tick(&batch).unwrap();
        for r in &frame.rejected {
            println!("tick {now}: rejected {r}");
        }
    }
    for entry in session.log() {
        println!("{}", serde_json::to_string(entry).unwrap());
    }
    let report = session.finalize(false).unwrap();
    for s in &report.steps {
        println!(
            "{:<16} {:>6.1}  time x{:.2} accuracy x{:.2} hints {}{}",
            s.step,
            s.step_score,
            s.time_factor,
            s.accuracy_factor,
            s.hints,
            if s.skipped { " (skipped)" } else { "" }
        );
    }
    println!("total {:.1}", report.total);
}
