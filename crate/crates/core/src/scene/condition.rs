use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

/// Boolean unlock rule over completed steps and set flags.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "op", content = "args", rename_all = "snake_case")]
pub enum ConditionExpr {
    Start,
    Done(String),
    Flag(String),
    Not(Box<ConditionExpr>),
    And(Vec<ConditionExpr>),
    Or(Vec<ConditionExpr>),
}

impl ConditionExpr {
    pub fn done(step: impl Into<String>) -> Self {
        ConditionExpr::Done(step.into())
    }

    pub fn flag(name: impl Into<String>) -> Self {
        ConditionExpr::Flag(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: ConditionExpr) -> Self {
        ConditionExpr::Not(Box::new(e))
    }

    pub fn and(parts: impl IntoIterator<Item = ConditionExpr>) -> Self {
        ConditionExpr::And(parts.into_iter().collect())
    }

    pub fn or(parts: impl IntoIterator<Item = ConditionExpr>) -> Self {
        ConditionExpr::Or(parts.into_iter().collect())
    }

    pub fn eval_with(&self, done: &dyn Fn(&str) -> bool, flag: &dyn Fn(&str) -> bool) -> bool {
        match self {
            ConditionExpr::Start => true,
            ConditionExpr::Done(s) => done(s),
            ConditionExpr::Flag(f) => flag(f),
            ConditionExpr::Not(e) => !e.eval_with(done, flag),
            ConditionExpr::And(es) => es.iter().all(|e| e.eval_with(done, flag)),
            ConditionExpr::Or(es) => es.iter().any(|e| e.eval_with(done, flag)),
        }
    }

    /// Step ids referenced by `done(..)` atoms, in textual order.
    pub fn step_refs(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let ConditionExpr::Done(s) = e {
                out.push(s.as_str());
            }
        });
        out
    }

    /// Flag names referenced by `flag(..)` atoms, in textual order.
    pub fn flag_refs(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let ConditionExpr::Flag(f) = e {
                out.push(f.as_str());
            }
        });
        out
    }

    fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a ConditionExpr)) {
        f(self);
        match self {
            ConditionExpr::Not(e) => e.visit(f),
            ConditionExpr::And(es) | ConditionExpr::Or(es) => {
                for e in es {
                    e.visit(f);
                }
            }
            _ => {}
        }
    }

    fn is_atom(&self) -> bool {
        matches!(
            self,
            ConditionExpr::Start | ConditionExpr::Done(_) | ConditionExpr::Flag(_) | ConditionExpr::Not(_)
        )
    }
}

pub fn evaluate_condition(e: &ConditionExpr, completed: &BTreeSet<String>, flags: &BTreeSet<String>) -> bool {
    e.eval_with(&|s| completed.contains(s), &|f| flags.contains(f))
}

// Canonical textual form. Nested And/Or children are parenthesized so the
// tree shape survives a parse round-trip.
impl fmt::Display for ConditionExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionExpr::Start => f.write_str("start"),
            ConditionExpr::Done(s) => write!(f, "done({s})"),
            ConditionExpr::Flag(s) => write!(f, "flag({s})"),
            ConditionExpr::Not(e) => {
                if e.is_atom() {
                    write!(f, "!{e}")
                } else {
                    write!(f, "!({e})")
                }
            }
            ConditionExpr::And(es) | ConditionExpr::Or(es) => {
                let sep = if matches!(self, ConditionExpr::And(_)) {
                    " && "
                } else {
                    " || "
                };
                if es.is_empty() {
                    // not producible by the parser
                    return f.write_str(if sep == " && " { "start" } else { "!start" });
                }
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    let wrap = match (self, e) {
                        (_, ConditionExpr::And(_)) if sep == " && " => true,
                        (_, ConditionExpr::Or(_)) => true,
                        _ => es.len() == 1 && !e.is_atom(),
                    };
                    if wrap {
                        write!(f, "({e})")?;
                    } else {
                        write!(f, "{e}")?;
                    }
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn conjunction_of_done_steps() {
        let e = ConditionExpr::and([ConditionExpr::done("a"), ConditionExpr::done("b")]);
        assert!(evaluate_condition(&e, &set(&["a", "b"]), &set(&[])));
        assert!(!evaluate_condition(&e, &set(&["a"]), &set(&[])));
    }

    #[test]
    fn start_is_constant_true() {
        assert!(evaluate_condition(&ConditionExpr::Start, &set(&[]), &set(&[])));
    }

    #[test]
    fn negation_or_flag() {
        let e = ConditionExpr::or([
            ConditionExpr::not(ConditionExpr::done("a")),
            ConditionExpr::flag("f"),
        ]);
        assert!(!evaluate_condition(&e, &set(&["a"]), &set(&[])));
        assert!(evaluate_condition(&e, &set(&["a"]), &set(&["f"])));
    }

    #[test]
    fn display_keeps_structure() {
        let e = ConditionExpr::and([
            ConditionExpr::or([ConditionExpr::done("a"), ConditionExpr::flag("f")]),
            ConditionExpr::not(ConditionExpr::and([ConditionExpr::done("b"), ConditionExpr::Start])),
            ConditionExpr::and([ConditionExpr::done("c"), ConditionExpr::done("d")]),
        ]);
        assert_eq!(
            e.to_string(),
            "(done(a) || flag(f)) && !(done(b) && start) && (done(c) && done(d))"
        );
    }
}
