use std::collections::{BTreeSet, HashSet};

use nalgebra::DMatrix;

use super::{ColliderShape, ConditionExpr, EventAction, Scenario, StepKind, Trigger};
use crate::diag::{Code, Diagnostic, Item, Location};
use crate::math::{Pose, Vec3};

/// Relative threshold on the smallest singular value of a hull's centered
/// vertex matrix below which the hull is flat.
pub const HULL_RANK_TOLERANCE: f64 = 1e-9;

/// Checks every static invariant of a scenario. An empty result means the
/// scenario is well-formed.
pub fn validate_scenario(s: &Scenario) -> Vec<Diagnostic> {
    let mut v = Validator {
        s,
        out: Vec::new(),
        flags: s.settable_flags(),
    };
    v.run();
    v.out
}

struct Validator<'a> {
    s: &'a Scenario,
    out: Vec<Diagnostic>,
    flags: BTreeSet<&'a str>,
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

fn non_negative(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

/// True when the vertices do not span three dimensions.
pub fn hull_is_degenerate(vertices: &[Vec3]) -> bool {
    if vertices.len() < 4 {
        return true;
    }
    let n = vertices.len() as f64;
    let centroid = vertices.iter().fold(Vec3::zeros(), |a, v| a + v) / n;
    let m = DMatrix::from_fn(vertices.len(), 3, |r, c| vertices[r][c] - centroid[c]);
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    !(max > 0.0 && min > HULL_RANK_TOLERANCE * max)
}

impl<'a> Validator<'a> {
    fn push(&mut self, code: Code, loc: Location, msg: impl Into<String>) {
        self.out.push(Diagnostic::new(code, msg).at(loc));
    }

    fn run(&mut self) {
        self.unique_ids();
        for p in &self.s.parts {
            self.part(p);
        }
        for m in &self.s.materials {
            if !non_negative(m.friction) {
                self.push(
                    Code::BadFriction,
                    Location::item(Item::Material(m.a.clone(), m.b.clone())),
                    format!("friction between `{}` and `{}` must be >= 0", m.a, m.b),
                );
            }
        }
        for r in &self.s.regions {
            let item = Item::Region(r.id.clone());
            if !positive(r.radius) || !r.center.iter().all(|c| c.is_finite()) {
                self.push(Code::BadRegion, Location::item(item.clone()), format!("region `{}` needs a finite center and radius > 0", r.id));
            }
            if let Some(parent) = &r.parent {
                if self.s.part(parent).is_none() {
                    self.push(Code::DanglingPart, Location::reference(item, "on", parent), format!("region `{}` is attached to unknown part `{parent}`", r.id));
                }
            }
        }
        for st in &self.s.steps {
            self.step(st);
        }
        for ev in &self.s.events {
            self.event(ev);
        }
        for d in &self.s.difficulties {
            let item = Item::Difficulty(d.id.clone());
            if !non_negative(d.hint_penalty) {
                self.push(Code::BadDifficulty, Location::field(item.clone(), "hint_penalty"), format!("difficulty `{}`: hint_penalty must be >= 0", d.id));
            }
            if !positive(d.par_time_scale) {
                self.push(Code::BadDifficulty, Location::field(item, "par_time_scale"), format!("difficulty `{}`: par_time_scale must be > 0", d.id));
            }
        }
    }

    fn unique_ids(&mut self) {
        fn dups<'b>(ids: impl Iterator<Item = &'b str>) -> Vec<&'b str> {
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for id in ids {
                if !seen.insert(id) && !out.contains(&id) {
                    out.push(id);
                }
            }
            out
        }
        let s = self.s;
        for id in dups(s.parts.iter().map(|p| p.id.as_str())) {
            self.push(Code::DuplicateId, Location::item(Item::Part(id.into())), format!("part id `{id}` declared more than once"));
        }
        for id in dups(s.steps.iter().map(|p| p.id.as_str())) {
            self.push(Code::DuplicateId, Location::item(Item::Step(id.into())), format!("step id `{id}` declared more than once"));
        }
        for id in dups(s.events.iter().map(|p| p.id.as_str())) {
            self.push(Code::DuplicateId, Location::item(Item::Event(id.into())), format!("event id `{id}` declared more than once"));
        }
        for id in dups(s.regions.iter().map(|p| p.id.as_str())) {
            self.push(Code::DuplicateId, Location::item(Item::Region(id.into())), format!("region id `{id}` declared more than once"));
        }
        for id in dups(s.difficulties.iter().map(|p| p.id.as_str())) {
            self.push(Code::DuplicateId, Location::item(Item::Difficulty(id.into())), format!("difficulty id `{id}` declared more than once"));
        }
    }

    fn pose(&mut self, pose: &Pose, loc: Location, what: &str) {
        if !pose.is_valid() {
            self.push(Code::BadPose, loc, format!("{what}: pose must be finite with a unit quaternion"));
        }
    }

    fn part(&mut self, p: &super::PartDef) {
        let item = Item::Part(p.id.clone());
        let shape_loc = Location::field(item.clone(), "shape");
        match &p.shape {
            ColliderShape::Sphere { radius } => {
                if !positive(*radius) {
                    self.push(Code::BadShape, shape_loc, format!("part `{}`: sphere radius must be > 0", p.id));
                }
            }
            ColliderShape::Box { half_extents } => {
                if !half_extents.iter().all(|h| positive(*h)) {
                    self.push(Code::BadShape, shape_loc, format!("part `{}`: box half extents must be > 0", p.id));
                }
            }
            ColliderShape::Capsule { radius, half_height } => {
                if !positive(*radius) || !non_negative(*half_height) {
                    self.push(Code::BadShape, shape_loc, format!("part `{}`: capsule needs radius > 0 and half height >= 0", p.id));
                }
            }
            ColliderShape::ConvexHull { vertices } => {
                if !vertices.iter().all(|v| v.iter().all(|c| c.is_finite())) {
                    self.push(Code::BadShape, shape_loc, format!("part `{}`: hull vertices must be finite", p.id));
                } else if vertices.len() < 4 {
                    self.push(Code::DegenerateHull, shape_loc, format!("part `{}`: hull needs at least 4 vertices", p.id));
                } else if hull_is_degenerate(vertices) {
                    self.push(Code::DegenerateHull, shape_loc, format!("part `{}`: hull vertices do not span three dimensions", p.id));
                }
            }
        }
        if !non_negative(p.mass) {
            self.push(Code::BadMass, Location::field(item.clone(), "mass"), format!("part `{}`: mass must be >= 0", p.id));
        }
        self.pose(&p.initial_pose, Location::field(item.clone(), "pose"), &format!("part `{}`", p.id));
        let mut seen = HashSet::new();
        for a in &p.anchors {
            let loc = Location::reference(item.clone(), "anchor", a.name.clone());
            if !seen.insert(a.name.as_str()) {
                self.push(Code::DuplicateAnchor, loc.clone(), format!("part `{}`: anchor `{}` declared more than once", p.id, a.name));
            }
            self.pose(&a.pose, loc, &format!("anchor `{}.{}`", p.id, a.name));
        }
    }

    fn check_part(&mut self, id: &str, item: &Item, field: &'static str) -> bool {
        if self.s.part(id).is_some() {
            true
        } else {
            self.push(Code::DanglingPart, Location::reference(item.clone(), field, id), format!("unknown part `{id}`"));
            false
        }
    }

    fn check_anchor(&mut self, part: &str, anchor: &str, item: &Item, field: &'static str) {
        if self.check_part(part, item, field) {
            let exists = self.s.part(part).and_then(|p| p.anchor(anchor)).is_some();
            if !exists {
                self.push(
                    Code::DanglingAnchor,
                    Location::reference(item.clone(), field, format!("{part}.{anchor}")),
                    format!("part `{part}` has no anchor `{anchor}`"),
                );
            }
        }
    }

    fn condition(&mut self, e: &ConditionExpr, item: &Item) {
        for step in e.step_refs() {
            if self.s.step(step).is_none() {
                self.push(Code::DanglingStep, Location::reference(item.clone(), "requires", step), format!("unknown step `{step}`"));
            }
        }
        for flag in e.flag_refs() {
            if !self.flags.contains(flag) {
                self.push(Code::DanglingFlag, Location::reference(item.clone(), "requires", flag), format!("flag `{flag}` is never set by any event"));
            }
        }
    }

    fn step(&mut self, st: &super::StepDef) {
        let item = Item::Step(st.id.clone());
        match &st.kind {
            StepKind::Placing { part, target, pos_tol, rot_tol, dwell } => {
                self.check_part(part, &item, "part");
                self.check_anchor(&target.part, &target.anchor, &item, "target");
                if part == &target.part {
                    self.push(Code::SelfTarget, Location::field(item.clone(), "target"), format!("step `{}`: a part cannot be placed onto itself", st.id));
                }
                if !positive(*pos_tol) || !positive(*rot_tol) {
                    self.push(Code::BadTolerance, Location::field(item.clone(), "tol"), format!("step `{}`: tolerances must be > 0", st.id));
                }
                if !non_negative(*dwell) {
                    self.push(Code::BadTime, Location::field(item.clone(), "dwell"), format!("step `{}`: dwell must be >= 0", st.id));
                }
            }
            StepKind::Action { action_id } => {
                if action_id.is_empty() {
                    self.push(Code::MissingField, Location::field(item.clone(), "action_id"), format!("step `{}`: empty action id", st.id));
                }
            }
            StepKind::ToolUse { tool, target, contact_time } => {
                self.check_part(tool, &item, "tool");
                self.check_part(target, &item, "target");
                if tool == target {
                    self.push(Code::SelfTarget, Location::field(item.clone(), "target"), format!("step `{}`: tool and target must differ", st.id));
                }
                if !positive(*contact_time) {
                    self.push(Code::BadTime, Location::field(item.clone(), "contact_time"), format!("step `{}`: contact_time must be > 0", st.id));
                }
            }
        }
        self.condition(&st.requires, &item);
        if !non_negative(st.min_time) {
            self.push(Code::BadTime, Location::field(item.clone(), "min_time"), format!("step `{}`: min_time must be >= 0", st.id));
        }
        if !positive(st.par_time) {
            self.push(Code::BadTime, Location::field(item.clone(), "par_time"), format!("step `{}`: par_time must be > 0", st.id));
        } else if st.min_time.is_finite() && st.par_time < st.min_time {
            self.push(Code::BadTime, Location::field(item, "par_time"), format!("step `{}`: par_time must be >= min_time", st.id));
        }
    }

    fn event(&mut self, ev: &super::EventDef) {
        let item = Item::Event(ev.id.clone());
        match &ev.trigger {
            Trigger::Completed { step } | Trigger::Started { step } => {
                if self.s.step(step).is_none() {
                    self.push(Code::DanglingStep, Location::reference(item.clone(), "when", step), format!("unknown step `{step}`"));
                }
            }
            Trigger::Entered { part, region } => {
                self.check_part(part, &item, "when");
                if self.s.region(region).is_none() {
                    self.push(Code::DanglingRegion, Location::reference(item.clone(), "when", region), format!("unknown region `{region}`"));
                }
            }
            Trigger::FlagSet { flag } => {
                if !self.flags.contains(flag.as_str()) {
                    self.push(Code::DanglingFlag, Location::reference(item.clone(), "when", flag), format!("flag `{flag}` is never set by any event"));
                }
            }
            Trigger::TimeElapsed { seconds } => {
                if !non_negative(*seconds) {
                    self.push(Code::BadTime, Location::field(item.clone(), "when"), format!("event `{}`: time must be >= 0", ev.id));
                }
            }
        }
        for a in &ev.actions {
            match a {
                EventAction::Weld { part, target } => {
                    self.check_part(part, &item, "do");
                    self.check_anchor(&target.part, &target.anchor, &item, "do");
                    if part == &target.part {
                        self.push(Code::SelfTarget, Location::field(item.clone(), "do"), format!("event `{}`: cannot weld `{part}` to itself", ev.id));
                    }
                }
                EventAction::Unweld { part } => {
                    self.check_part(part, &item, "do");
                }
                EventAction::Activate { entity } | EventAction::Deactivate { entity } => {
                    if self.s.part(entity).is_none() {
                        self.push(Code::DanglingEntity, Location::reference(item.clone(), "do", entity), format!("unknown entity `{entity}`"));
                    }
                }
                EventAction::SetFlag { .. } => {}
                EventAction::Particles { region } => {
                    if self.s.region(region).is_none() {
                        self.push(Code::DanglingRegion, Location::reference(item.clone(), "do", region), format!("unknown region `{region}`"));
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{AnchorRef, PartDef, StepDef};

    fn minimal() -> Scenario {
        let mut s = Scenario::new("t");
        s.parts.push(PartDef::new("p", ColliderShape::Sphere { radius: 0.1 }, 0.0, Pose::IDENTITY));
        let mut st = StepDef::new("s", StepKind::Action { action_id: "go".into() }, ConditionExpr::Start, 5.0);
        st.instruction = "go".into();
        s.steps.push(st);
        s
    }

    #[test]
    fn minimal_scenario_is_clean() {
        assert!(validate_scenario(&minimal()).is_empty());
    }

    #[test]
    fn undeclared_target_anchor() {
        let mut s = minimal();
        s.parts.push(PartDef::new("q", ColliderShape::Sphere { radius: 0.1 }, 1.0, Pose::IDENTITY));
        s.steps.push(StepDef::new(
            "place",
            StepKind::Placing {
                part: "q".into(),
                target: AnchorRef::new("p", "slot"),
                pos_tol: 0.01,
                rot_tol: 0.1,
                dwell: 0.5,
            },
            ConditionExpr::Start,
            10.0,
        ));
        let d = validate_scenario(&s);
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].code, Code::DanglingAnchor);
    }

    // Independent rank oracle: the points span 3D iff some triple of
    // difference vectors has a non-negligible scalar triple product.
    fn spans_3d(vs: &[Vec3]) -> bool {
        let scale = vs.iter().map(|v| (v - vs[0]).norm()).fold(0.0, f64::max);
        for i in 1..vs.len() {
            for j in i + 1..vs.len() {
                for k in j + 1..vs.len() {
                    let t = (vs[i] - vs[0]).dot(&(vs[j] - vs[0]).cross(&(vs[k] - vs[0])));
                    if t.abs() > 1e-9 * scale.powi(3) {
                        return true;
                    }
                }
            }
        }
        false
    }

    #[test]
    fn coplanar_hull_is_degenerate() {
        let flat = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
        ];
        assert!(!spans_3d(&flat));
        let mut s = minimal();
        s.parts[0].shape = ColliderShape::ConvexHull { vertices: flat };
        let d = validate_scenario(&s);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, Code::DegenerateHull);
    }

    #[test]
    fn tilted_coplanar_and_solid_hulls_agree_with_oracle() {
        let rot = crate::math::Quat::from_euler_angles(0.3, -0.7, 1.1);
        let plane: Vec<Vec3> = [(0.0, 0.0), (2.0, 0.0), (0.0, 3.0), (1.5, 1.5), (0.2, 0.9)]
            .iter()
            .map(|&(x, y)| rot * Vec3::new(x, y, 0.0) + Vec3::new(5.0, -2.0, 1.0))
            .collect();
        assert_eq!(hull_is_degenerate(&plane), !spans_3d(&plane));
        let mut solid = plane.clone();
        solid.push(rot * Vec3::new(0.5, 0.5, 0.01) + Vec3::new(5.0, -2.0, 1.0));
        assert_eq!(hull_is_degenerate(&solid), !spans_3d(&solid));
        assert!(!hull_is_degenerate(&solid));
    }

    #[test]
    fn par_time_below_min_time() {
        let mut s = minimal();
        s.steps[0].min_time = 10.0;
        let d = validate_scenario(&s);
        assert_eq!(d[0].code, Code::BadTime);
    }

    #[test]
    fn unset_flag_is_dangling() {
        let mut s = minimal();
        s.steps[0].requires = ConditionExpr::flag("ready");
        let d = validate_scenario(&s);
        assert_eq!(d[0].code, Code::DanglingFlag);
    }
}
