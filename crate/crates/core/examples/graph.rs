//! Prints the step graph of a scenario as Graphviz DOT.
//!
//! ```text
//! cargo run -p interact-core --example graph | dot -Tsvg > graph.svg
//! ```

use interact_core::lang::{export_graph_dot, parse};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| "scenarios/laser_cutter.itx".into());
    let text = std::fs::read_to_string(&path).expect("readable scenario file");
    let scenario = parse(&text).scenario.expect("scenario parses");
    print!("{}", export_graph_dot(&scenario));
}
