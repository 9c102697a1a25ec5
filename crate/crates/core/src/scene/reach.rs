use std::collections::BTreeSet;

use serde::Serialize;

use super::{ConditionExpr, EventAction, Scenario, Trigger};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Reachability {
    pub reachable: BTreeSet<String>,
    pub unreachable: BTreeSet<String>,
}

/// Over-approximates which steps can ever become active.
///
/// Runs a monotone fixpoint: a step is marked once its condition *can* be
/// true given that every marked step may have completed and every flag set
/// by an enabled event may be set. `Done`/`Flag` atoms can always also be
/// false (the step or flag may not have happened yet), which keeps the
/// iteration monotone under negation. For negation-free conditions the
/// result is exact.
pub fn reachability_check(s: &Scenario) -> Reachability {
    let mut reachable: BTreeSet<&str> = BTreeSet::new();
    let mut flags: BTreeSet<&str> = BTreeSet::new();
    loop {
        let mut changed = false;
        for ev in &s.events {
            let enabled = match &ev.trigger {
                Trigger::Completed { step } | Trigger::Started { step } => reachable.contains(step.as_str()),
                Trigger::Entered { .. } | Trigger::TimeElapsed { .. } => true,
                Trigger::FlagSet { flag } => flags.contains(flag.as_str()),
            };
            if !enabled {
                continue;
            }
            for a in &ev.actions {
                if let EventAction::SetFlag { flag } = a {
                    changed |= flags.insert(flag.as_str());
                }
            }
        }
        for st in &s.steps {
            if !reachable.contains(st.id.as_str()) && can_be(&st.requires, true, &reachable, &flags) {
                reachable.insert(st.id.as_str());
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut out = Reachability::default();
    for st in &s.steps {
        if reachable.contains(st.id.as_str()) {
            out.reachable.insert(st.id.clone());
        } else {
            out.unreachable.insert(st.id.clone());
        }
    }
    out
}

fn can_be(e: &ConditionExpr, value: bool, steps: &BTreeSet<&str>, flags: &BTreeSet<&str>) -> bool {
    match e {
        ConditionExpr::Start => value,
        ConditionExpr::Done(x) => !value || steps.contains(x.as_str()),
        ConditionExpr::Flag(f) => !value || flags.contains(f.as_str()),
        ConditionExpr::Not(inner) => can_be(inner, !value, steps, flags),
        ConditionExpr::And(es) => {
            if value {
                es.iter().all(|e| can_be(e, true, steps, flags))
            } else {
                es.iter().any(|e| can_be(e, false, steps, flags))
            }
        }
        ConditionExpr::Or(es) => {
            if value {
                es.iter().any(|e| can_be(e, true, steps, flags))
            } else {
                es.iter().all(|e| can_be(e, false, steps, flags))
            }
        }
    }
}
