use std::collections::BTreeSet;
use std::fmt::Write;

use crate::scene::{EventAction, Scenario, Trigger};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders the step graph as a DOT digraph.
///
/// Steps become boxes labelled `id\nkind`, `done(..)` atoms become solid
/// edges, and each event becomes an ellipse `event:<id>` with dashed edges
/// from its trigger step and to the parts, steps or regions it touches.
pub fn export_graph_dot(s: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(&s.name));
    out.push_str("  rankdir=LR;\n");
    for st in &s.steps {
        let _ = writeln!(
            out,
            "  {} [shape=box, label=\"{}\\n{}\"];",
            quote(&st.id),
            st.id,
            st.kind.name()
        );
    }
    for st in &s.steps {
        let mut seen = BTreeSet::new();
        for d in st.requires.step_refs() {
            if seen.insert(d) {
                let _ = writeln!(out, "  {} -> {};", quote(d), quote(&st.id));
            }
        }
    }
    for ev in &s.events {
        let node = quote(&format!("event:{}", ev.id));
        let _ = writeln!(out, "  {node} [shape=ellipse, style=dashed];");
        match &ev.trigger {
            Trigger::Completed { step } | Trigger::Started { step } => {
                let _ = writeln!(out, "  {} -> {node} [style=dashed];", quote(step));
            }
            Trigger::FlagSet { flag } => {
                let _ = writeln!(out, "  {} -> {node} [style=dashed];", quote(&format!("flag:{flag}")));
            }
            Trigger::Entered { region, .. } => {
                let _ = writeln!(out, "  {} -> {node} [style=dashed];", quote(&format!("region:{region}")));
            }
            Trigger::TimeElapsed { .. } => {}
        }
        for a in &ev.actions {
            let target = match a {
                EventAction::Weld { part, .. } | EventAction::Unweld { part } => format!("part:{part}"),
                EventAction::Activate { entity } | EventAction::Deactivate { entity } => format!("part:{entity}"),
                EventAction::SetFlag { flag } => format!("flag:{flag}"),
                EventAction::Particles { region } => format!("region:{region}"),
            };
            let _ = writeln!(out, "  {node} -> {} [style=dashed];", quote(&target));
        }
    }
    // flags feeding conditions
    for st in &s.steps {
        let mut seen = BTreeSet::new();
        for f in st.requires.flag_refs() {
            if seen.insert(f) {
                let _ = writeln!(out, "  {} -> {} [style=dotted];", quote(&format!("flag:{f}")), quote(&st.id));
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse;

    fn dot(src: &str) -> String {
        export_graph_dot(&parse(src).scenario.expect("parses"))
    }

    const HEAD: &str = r#"part p { shape = sphere(0.1); mass = 0; pose = (0,0,0) rpy(0,0,0); }"#;

    #[test]
    fn chain_edge() {
        let d = dot(&format!(
            r#"scenario "c" {{ {HEAD}
              step a : action {{ action_id = x; requires = start; par_time = 1; }}
              step b : action {{ action_id = y; requires = done(a); par_time = 1; }} }}"#
        ));
        assert!(d.contains("  \"a\" -> \"b\";\n"));
        assert!(d.contains("\"a\" [shape=box, label=\"a\\naction\"];"));
    }

    #[test]
    fn conjunction_gives_two_edges() {
        let d = dot(&format!(
            r#"scenario "c" {{ {HEAD}
              step a : action {{ action_id = x; requires = start; par_time = 1; }}
              step b : action {{ action_id = y; requires = start; par_time = 1; }}
              step c : action {{ action_id = z; requires = done(a) && done(b); par_time = 1; }} }}"#
        ));
        assert!(d.contains("\"a\" -> \"c\";"));
        assert!(d.contains("\"b\" -> \"c\";"));
    }

    #[test]
    fn event_edges_are_dashed() {
        let d = dot(&format!(
            r#"scenario "c" {{ {HEAD}
              step s : action {{ action_id = x; requires = start; par_time = 1; }}
              event e {{ when = completed(s); do = unweld(p); }} }}"#
        ));
        assert!(d.contains("\"s\" -> \"event:e\" [style=dashed];"));
        assert!(d.contains("\"event:e\" -> \"part:p\" [style=dashed];"));
    }
}
