//! Parses and lints an `.itx` file, printing one diagnostic per line.
//!
//! ```text
//! cargo run -p interact-core --example validate -- scenarios/laser_cutter.itx
//! ```

use interact_core::lang::{format_canonical, lint_source};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| "scenarios/laser_cutter.itx".into());
    let text = std::fs::read_to_string(&path).expect("readable scenario file");
    let (scenario, diags) = lint_source(&text);
    for d in &diags {
        println!("{}", d.render(&path));
    }
    if let Some(s) = scenario {
        println!(
            "{}: {} parts, {} steps, {} events, {} difficulties",
            s.name,
            s.parts.len(),
            s.steps.len(),
            s.events.len(),
            s.difficulties.len()
        );
        if std::env::var_os("SHOW_CANONICAL").is_some() {
            print!("{}", format_canonical(&s));
        }
    }
}
