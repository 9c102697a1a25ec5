use std::collections::BTreeSet;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use super::parser::parse;
use crate::diag::{Code, Diagnostic, Item, Location};
use crate::scene::{reachability_check, validate_scenario, EventAction, Scenario, StepKind, Trigger};

/// Static checks beyond validation: unreachable and deadlocked steps,
/// unused parts, steps without hints.
pub fn lint(s: &Scenario) -> Vec<Diagnostic> {
    let mut out = validate_scenario(s);
    let reach = reachability_check(s);

    let mut g = DiGraph::<usize, ()>::new();
    let nodes: Vec<_> = (0..s.steps.len()).map(|i| g.add_node(i)).collect();
    for (i, st) in s.steps.iter().enumerate() {
        for dep in st.requires.step_refs() {
            if let Some(j) = s.step_index(dep) {
                g.update_edge(nodes[j], nodes[i], ());
            }
        }
    }
    let mut deadlocked = BTreeSet::new();
    let mut cycles: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|scc| {
            let mut ids: Vec<usize> = scc.into_iter().map(|n| g[n]).collect();
            ids.sort_unstable();
            ids
        })
        .filter(|ids| ids.len() > 1 || g.contains_edge(nodes[ids[0]], nodes[ids[0]]))
        .filter(|ids| ids.iter().all(|&i| reach.unreachable.contains(&s.steps[i].id)))
        .collect();
    cycles.sort();
    for ids in cycles {
        let names: Vec<&str> = ids.iter().map(|&i| s.steps[i].id.as_str()).collect();
        deadlocked.extend(ids.iter().copied());
        out.push(
            Diagnostic::new(
                Code::CycleOnlyDeadlock,
                format!("steps {} only unlock each other and can never start", names.join(", ")),
            )
            .at(Location::field(Item::Step(names[0].to_string()), "requires")),
        );
    }

    for (i, st) in s.steps.iter().enumerate() {
        if reach.unreachable.contains(&st.id) && !deadlocked.contains(&i) {
            out.push(
                Diagnostic::new(Code::UnreachableStep, format!("step `{}` can never become active", st.id))
                    .at(Location::field(Item::Step(st.id.clone()), "requires")),
            );
        }
    }

    let used = referenced_parts(s);
    for p in &s.parts {
        if !used.contains(p.id.as_str()) {
            out.push(
                Diagnostic::new(Code::UnusedPart, format!("part `{}` is not used by any step or event", p.id))
                    .at(Location::item(Item::Part(p.id.clone()))),
            );
        }
    }

    for st in &s.steps {
        if st.hint.trim().is_empty() {
            out.push(
                Diagnostic::new(Code::NoHint, format!("step `{}` has no hint text", st.id))
                    .at(Location::item(Item::Step(st.id.clone()))),
            );
        }
    }
    out
}

fn referenced_parts(s: &Scenario) -> BTreeSet<&str> {
    let mut used = BTreeSet::new();
    for st in &s.steps {
        match &st.kind {
            StepKind::Placing { part, target, .. } => {
                used.insert(part.as_str());
                used.insert(target.part.as_str());
            }
            StepKind::ToolUse { tool, target, .. } => {
                used.insert(tool.as_str());
                used.insert(target.as_str());
            }
            StepKind::Action { .. } => {}
        }
    }
    for ev in &s.events {
        if let Trigger::Entered { part, region } = &ev.trigger {
            used.insert(part.as_str());
            if let Some(parent) = s.region(region).and_then(|r| r.parent.as_deref()) {
                used.insert(parent);
            }
        }
        for a in &ev.actions {
            match a {
                EventAction::Weld { part, target } => {
                    used.insert(part.as_str());
                    used.insert(target.part.as_str());
                }
                EventAction::Unweld { part } => {
                    used.insert(part.as_str());
                }
                EventAction::Activate { entity } | EventAction::Deactivate { entity } => {
                    used.insert(entity.as_str());
                }
                EventAction::Particles { region } => {
                    if let Some(parent) = s.region(region).and_then(|r| r.parent.as_deref()) {
                        used.insert(parent);
                    }
                }
                EventAction::SetFlag { .. } => {}
            }
        }
    }
    used
}

/// Parses and lints source text; every diagnostic carries a span.
pub fn lint_source(text: &str) -> (Option<Scenario>, Vec<Diagnostic>) {
    let parsed = parse(text);
    let Some(s) = parsed.scenario else {
        return (None, parsed.diagnostics);
    };
    // lint includes validation, which parse already ran
    let mut out = lint(&s);
    parsed.spans.attach(&mut out);
    (Some(s), out)
}
