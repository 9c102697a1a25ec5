//! Records the perfect laser-cutter trace, replays the log, then replays a
//! copy with one checkpoint flipped.
//!
//! ```text
//! cargo run -p interact-core --example replay -- /tmp/laser.jsonl
//! ```

use std::sync::Arc;

use interact_core::lang::parse;
use interact_core::replay::{read_trace, record, replay, ReplayLog, RunLength};

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "laser_cutter.replay.jsonl".into());
    let text = std::fs::read_to_string("scenarios/laser_cutter.itx").unwrap();
    let scenario = Arc::new(parse(&text).scenario.unwrap());
    let trace = read_trace(&std::fs::read_to_string("scenarios/traces/laser_cutter_perfect.jsonl").unwrap()).unwrap();

    let log = record(scenario.clone(), "default", &trace, RunLength::UntilFinished { max_ticks: 12_000 }).unwrap();
    std::fs::write(&out, log.to_jsonl()).unwrap();
    println!(
        "wrote {out}: {} records, {} checkpoints, {} ticks, total {}",
        log.records.len(),
        log.checkpoints.len(),
        log.end_tick,
        log.report.total
    );

    let back = ReplayLog::from_jsonl(&std::fs::read_to_string(&out).unwrap()).unwrap();
    println!("replay: {:?}", replay(&back, scenario.clone()).unwrap());

    let mut tampered = back.clone();
    if let Some(h) = tampered.checkpoints.get_mut(&480) {
        *h ^= 1;
    }
    println!("tampered: {:?}", replay(&tampered, scenario).unwrap());
}
