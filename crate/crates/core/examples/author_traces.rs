//! Plays the laser-cutter maintenance sequence against a live session and
//! writes the resulting input traces next to the scenario.
//!
//! ```text
//! cargo run -p interact-core --example author_traces
//! ```

#[path = "../tests/common/laser_script.rs"]
mod laser_script;

use interact_core::replay::{state_hash, write_trace};

use laser_script::{laser_cutter, play, repo_root, Style};

fn main() {
    let dir = repo_root().join("scenarios/traces");
    std::fs::create_dir_all(&dir).expect("trace directory");
    let runs = [
        ("laser_cutter_perfect.jsonl", Style::default()),
        (
            "laser_cutter_hints_skip.jsonl",
            Style {
                hints: &[("wipe_lens", 2)],
                skips: &["sponge_plate"],
            },
        ),
    ];
    for (name, style) in runs {
        let script = play(laser_cutter(), "default", &style);
        let report = script.session.finalize(false).expect("every step finished");
        std::fs::write(dir.join(name), write_trace(&script.records)).expect("trace written");
        println!(
            "{name}: {} records, {} ticks, total {:.1}, hash {:016x}",
            script.records.len(),
            script.session.tick_count(),
            report.total,
            state_hash(&script.session)
        );
        for s in &report.steps {
            println!("  {:<16} {:>8.4} t={:?}", s.step, s.step_score, s.time);
        }
    }
}
