//! Scenario domain types: parts, steps, events, regions and difficulty levels.
//!
//! A [`Scenario`] is plain data. [`validate_scenario`] checks the static
//! invariants and [`reachability_check`] looks for steps that can never
//! unlock.

mod condition;
mod reach;
mod validate;

pub use condition::{evaluate_condition, ConditionExpr};
pub use reach::{reachability_check, Reachability};
pub use validate::validate_scenario;

use serde::Serialize;

use crate::math::{Pose, Vec3};

/// Collision geometry in the part's local frame. Capsules are aligned with
/// the local z axis.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ColliderShape {
    Sphere { radius: f64 },
    Box { half_extents: Vec3 },
    Capsule { radius: f64, half_height: f64 },
    ConvexHull { vertices: Vec<Vec3> },
}

impl ColliderShape {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ColliderShape::Sphere { .. } => "sphere",
            ColliderShape::Box { .. } => "box",
            ColliderShape::Capsule { .. } => "capsule",
            ColliderShape::ConvexHull { .. } => "hull",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Anchor {
    pub name: String,
    pub pose: Pose,
}

pub const DEFAULT_MATERIAL: &str = "default";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartDef {
    pub id: String,
    pub shape: ColliderShape,
    /// Kilograms; zero marks a static/kinematic part.
    pub mass: f64,
    pub initial_pose: Pose,
    pub grabbable: bool,
    pub anchors: Vec<Anchor>,
    pub material: String,
}

impl PartDef {
    pub fn new(id: impl Into<String>, shape: ColliderShape, mass: f64, initial_pose: Pose) -> Self {
        PartDef {
            id: id.into(),
            shape,
            mass,
            initial_pose,
            grabbable: false,
            anchors: Vec::new(),
            material: DEFAULT_MATERIAL.to_string(),
        }
    }

    pub fn anchor(&self, name: &str) -> Option<&Pose> {
        self.anchors.iter().find(|a| a.name == name).map(|a| &a.pose)
    }
}

/// `part.anchor`
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnchorRef {
    pub part: String,
    pub anchor: String,
}

impl AnchorRef {
    pub fn new(part: impl Into<String>, anchor: impl Into<String>) -> Self {
        AnchorRef {
            part: part.into(),
            anchor: anchor.into(),
        }
    }
}

pub const DEFAULT_DWELL: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepKind {
    Placing {
        part: String,
        target: AnchorRef,
        pos_tol: f64,
        /// Radians.
        rot_tol: f64,
        dwell: f64,
    },
    Action {
        action_id: String,
    },
    ToolUse {
        tool: String,
        target: String,
        contact_time: f64,
    },
}

impl StepKind {
    pub fn name(&self) -> &'static str {
        match self {
            StepKind::Placing { .. } => "placing",
            StepKind::Action { .. } => "action",
            StepKind::ToolUse { .. } => "tooluse",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepDef {
    pub id: String,
    pub kind: StepKind,
    pub requires: ConditionExpr,
    pub min_time: f64,
    pub par_time: f64,
    pub instruction: String,
    pub hint: String,
}

impl StepDef {
    pub fn new(id: impl Into<String>, kind: StepKind, requires: ConditionExpr, par_time: f64) -> Self {
        StepDef {
            id: id.into(),
            kind,
            requires,
            min_time: 0.0,
            par_time,
            instruction: String::new(),
            hint: String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Trigger {
    Completed { step: String },
    Started { step: String },
    Entered { part: String, region: String },
    FlagSet { flag: String },
    TimeElapsed { seconds: f64 },
}

impl Trigger {
    /// Evaluation order of trigger classes within a tick.
    pub fn class_rank(&self) -> u8 {
        match self {
            Trigger::Started { .. } => 0,
            Trigger::Completed { .. } => 1,
            Trigger::Entered { .. } => 2,
            Trigger::FlagSet { .. } => 3,
            Trigger::TimeElapsed { .. } => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventAction {
    Weld { part: String, target: AnchorRef },
    Unweld { part: String },
    Activate { entity: String },
    Deactivate { entity: String },
    SetFlag { flag: String },
    Particles { region: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventDef {
    pub id: String,
    pub trigger: Trigger,
    pub actions: Vec<EventAction>,
}

/// Spherical keypoint volume, optionally attached to a part.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Region {
    pub id: String,
    pub center: Vec3,
    pub radius: f64,
    pub parent: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DifficultyLevel {
    pub id: String,
    pub ghost_enabled: bool,
    pub trajectory_enabled: bool,
    pub instructions_enabled: bool,
    pub hint_penalty: f64,
    pub par_time_scale: f64,
}

impl DifficultyLevel {
    pub const DEFAULT_ID: &'static str = "default";

    /// The level injected into scenarios that declare none.
    pub fn injected_default() -> Self {
        DifficultyLevel {
            id: Self::DEFAULT_ID.to_string(),
            ghost_enabled: true,
            trajectory_enabled: true,
            instructions_enabled: true,
            hint_penalty: 10.0,
            par_time_scale: 1.0,
        }
    }
}

/// Pairwise friction coefficient between two materials (unordered).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaterialPair {
    pub a: String,
    pub b: String,
    pub friction: f64,
}

pub const DEFAULT_ENVIRONMENT: &str = "laboratory";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub environment: String,
    pub parts: Vec<PartDef>,
    pub steps: Vec<StepDef>,
    pub events: Vec<EventDef>,
    pub regions: Vec<Region>,
    pub difficulties: Vec<DifficultyLevel>,
    pub materials: Vec<MaterialPair>,
}

impl Scenario {
    pub fn new(name: impl Into<String>) -> Self {
        Scenario {
            name: name.into(),
            environment: DEFAULT_ENVIRONMENT.to_string(),
            parts: Vec::new(),
            steps: Vec::new(),
            events: Vec::new(),
            regions: Vec::new(),
            difficulties: Vec::new(),
            materials: Vec::new(),
        }
    }

    pub fn part(&self, id: &str) -> Option<&PartDef> {
        self.parts.iter().find(|p| p.id == id)
    }

    pub fn step(&self, id: &str) -> Option<&StepDef> {
        self.steps.iter().find(|s| s.id == id)
    }

    pub fn step_index(&self, id: &str) -> Option<usize> {
        self.steps.iter().position(|s| s.id == id)
    }

    pub fn region(&self, id: &str) -> Option<&Region> {
        self.regions.iter().find(|r| r.id == id)
    }

    pub fn difficulty(&self, id: &str) -> Option<&DifficultyLevel> {
        self.difficulties.iter().find(|d| d.id == id)
    }

    /// Adds the default difficulty level when none is declared.
    pub fn ensure_difficulty(&mut self) {
        if self.difficulties.is_empty() {
            self.difficulties.push(DifficultyLevel::injected_default());
        }
    }

    /// Friction for an unordered material pair, if declared.
    pub fn friction(&self, a: &str, b: &str) -> Option<f64> {
        self.materials
            .iter()
            .find(|m| (m.a == a && m.b == b) || (m.a == b && m.b == a))
            .map(|m| m.friction)
    }

    /// Every flag name some event can set.
    pub fn settable_flags(&self) -> std::collections::BTreeSet<&str> {
        self.events
            .iter()
            .flat_map(|e| e.actions.iter())
            .filter_map(|a| match a {
                EventAction::SetFlag { flag } => Some(flag.as_str()),
                _ => None,
            })
            .collect()
    }
}
