//! Runs a [`Scenario`] against a [`World`]: step lifecycle, events, runtime
//! helpers, hints, skips and scoring.
//!
//! ```
//! use interact_core::lang::parse;
//! use interact_core::session::{Session, UserInput};
//!
//! let src = r#"scenario "demo" {
//!   part panel { shape = box(0.5, 0.5, 0.05); mass = 0; pose = (0,0,0) rpy(0,0,0); }
//!   step power_off : action { action_id = power_off; requires = start; par_time = 5; }
//! }"#;
//! let scenario = parse(src).scenario.unwrap();
//! let mut s = Session::start(scenario.into(), "default").unwrap();
//! s.tick(&[UserInput::press("power_off")]).unwrap();
//! assert!(s.is_finished());
//! assert_eq!(s.finalize(false).unwrap().total, 100.0);
//! ```

mod input;
pub mod score;

use std::collections::BTreeSet;
use std::hash::Hasher;
use std::sync::Arc;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

pub use input::{UserInput, HAND_QUAT_TOLERANCE};
pub use score::{ScoreReport, StepScore};

use crate::math::{pose_error, slerp, Pose, PoseError};
use crate::physics::{PhysicsError, World, WorldConfig};
use crate::scene::{evaluate_condition, DifficultyLevel, EventAction, Scenario, StepKind, Trigger};

/// Number of points in a trajectory helper.
pub const TRAJECTORY_POINTS: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StepStatus {
    Locked,
    Active {
        activated_at: u64,
        /// First tick of the current in-tolerance run.
        in_tolerance_since: Option<u64>,
        /// Ticks of tool/target contact so far.
        contact_ticks: u64,
    },
    Completed {
        activated_at: u64,
        at: u64,
        residual: PoseError,
    },
    Skipped {
        activated_at: u64,
        at: u64,
    },
}

impl StepStatus {
    pub fn is_terminal(&self) -> bool {
        matches!(self, StepStatus::Completed { .. } | StepStatus::Skipped { .. })
    }

    pub fn is_active(&self) -> bool {
        matches!(self, StepStatus::Active { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            StepStatus::Locked => "locked",
            StepStatus::Active { .. } => "active",
            StepStatus::Completed { .. } => "completed",
            StepStatus::Skipped { .. } => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SessionError {
    #[error("unknown difficulty `{requested}`; available: {}", available.join(", "))]
    UnknownDifficulty { requested: String, available: Vec<String> },
    #[error("unknown step `{0}`")]
    UnknownStep(String),
    #[error("step `{0}` is not active")]
    StepNotActive(String),
    #[error("unknown part `{0}`")]
    UnknownPart(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("unknown flag `{0}`")]
    UnknownFlag(String),
    #[error("the hand already holds `{0}`")]
    HandBusy(String),
    #[error("the hand is empty")]
    HandEmpty,
    #[error("invalid hand pose")]
    InvalidPose,
    #[error("steps not finished: {}", .0.join(", "))]
    NotTerminal(Vec<String>),
    #[error(transparent)]
    Physics(#[from] PhysicsError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogEntry {
    StepActivated { step: String },
    StepCompleted { step: String, residual: PoseError },
    StepSkipped { step: String },
    HintUsed { step: String, count: u32 },
    EventFired { event: String },
    FlagSet { flag: String },
    Particles { region: String },
    Grabbed { part: String },
    Released { part: String },
    AutoUnwelded { part: String },
    ActionIgnored { action_id: String },
    InputRejected { input: UserInput, reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub tick: u64,
    #[serde(flatten)]
    pub entry: LogEntry,
}

/// Runtime helpers for one active step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HelperFrame {
    pub step: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ghost: Option<Pose>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trajectory: Option<Vec<Pose>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub instruction: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub hint: Option<String>,
}

/// What one tick produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub tick: u64,
    pub active: Vec<String>,
    pub helpers: Vec<HelperFrame>,
    pub completed: Vec<String>,
    pub fired: Vec<String>,
    pub rejected: Vec<String>,
    /// Sum of terminal step scores divided by the step count.
    pub score_partial: f64,
}

#[derive(Clone, Debug)]
pub struct Session {
    scenario: Arc<Scenario>,
    difficulty: DifficultyLevel,
    world: World,
    statuses: Vec<StepStatus>,
    flags: BTreeSet<String>,
    fired: Vec<bool>,
    hints: Vec<u32>,
    held: Option<String>,
    pressed: BTreeSet<String>,
    entered: Vec<(String, String)>,
    input_digest: u64,
    log: Vec<LogRecord>,
}

fn ticks_for(seconds: f64, dt: f64) -> u64 {
    if seconds <= 0.0 {
        0
    } else {
        (seconds / dt - 1e-9).ceil() as u64
    }
}

impl Session {
    /// Builds the world, activates every step whose condition holds with
    /// nothing done, and fires the events that hold at time zero.
    pub fn start(scenario: Arc<Scenario>, difficulty: &str) -> Result<Session, SessionError> {
        Self::start_with(scenario, difficulty, WorldConfig::default())
    }

    pub fn start_with(scenario: Arc<Scenario>, difficulty: &str, config: WorldConfig) -> Result<Session, SessionError> {
        let level = scenario.difficulty(difficulty).cloned().or_else(|| {
            (scenario.difficulties.is_empty() && difficulty == DifficultyLevel::DEFAULT_ID)
                .then(DifficultyLevel::injected_default)
        });
        let Some(level) = level else {
            let mut available: Vec<String> = scenario.difficulties.iter().map(|d| d.id.clone()).collect();
            if available.is_empty() {
                available.push(DifficultyLevel::DEFAULT_ID.to_string());
            }
            return Err(SessionError::UnknownDifficulty {
                requested: difficulty.to_string(),
                available,
            });
        };
        let n = scenario.steps.len();
        let mut s = Session {
            world: World::from_scenario(&scenario, config),
            difficulty: level,
            statuses: vec![StepStatus::Locked; n],
            flags: BTreeSet::new(),
            fired: vec![false; scenario.events.len()],
            hints: vec![0; n],
            held: None,
            pressed: BTreeSet::new(),
            entered: Vec::new(),
            input_digest: FnvHasher::default().finish(),
            log: Vec::new(),
            scenario,
        };
        s.propagate(&mut Vec::new())?;
        Ok(s)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn difficulty(&self) -> &DifficultyLevel {
        &self.difficulty
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn tick_count(&self) -> u64 {
        self.world.tick()
    }

    /// Seconds, `tick · dt`.
    pub fn clock(&self) -> f64 {
        self.world.time()
    }

    pub fn status(&self, step: &str) -> Option<&StepStatus> {
        self.scenario.step_index(step).map(|i| &self.statuses[i])
    }

    pub fn statuses(&self) -> impl Iterator<Item = (&str, &StepStatus)> {
        self.scenario.steps.iter().map(|s| s.id.as_str()).zip(&self.statuses)
    }

    pub fn flags(&self) -> &BTreeSet<String> {
        &self.flags
    }

    pub fn fired_events(&self) -> Vec<&str> {
        self.scenario
            .events
            .iter()
            .zip(&self.fired)
            .filter(|(_, f)| **f)
            .map(|(e, _)| e.id.as_str())
            .collect()
    }

    pub fn hints_used(&self, step: &str) -> u32 {
        self.scenario.step_index(step).map_or(0, |i| self.hints[i])
    }

    pub fn held(&self) -> Option<&str> {
        self.held.as_deref()
    }

    pub fn log(&self) -> &[LogRecord] {
        &self.log
    }

    pub fn is_finished(&self) -> bool {
        self.statuses.iter().all(StepStatus::is_terminal)
    }

    fn record(&mut self, entry: LogEntry) {
        self.log.push(LogRecord {
            tick: self.world.tick(),
            entry,
        });
    }

    fn step_index(&self, step: &str) -> Result<usize, SessionError> {
        self.scenario
            .step_index(step)
            .ok_or_else(|| SessionError::UnknownStep(step.to_string()))
    }

    fn done_set(&self) -> BTreeSet<String> {
        self.scenario
            .steps
            .iter()
            .zip(&self.statuses)
            .filter(|(_, st)| st.is_terminal())
            .map(|(s, _)| s.id.clone())
            .collect()
    }

    /// Reveals the step's hint and counts it against the score. Also turns
    /// on the ghost and trajectory for that step.
    pub fn request_hint(&mut self, step: &str) -> Result<String, SessionError> {
        let i = self.step_index(step)?;
        if !self.statuses[i].is_active() {
            return Err(SessionError::StepNotActive(step.to_string()));
        }
        self.hints[i] += 1;
        self.record(LogEntry::HintUsed {
            step: step.to_string(),
            count: self.hints[i],
        });
        Ok(self.scenario.steps[i].hint.clone())
    }

    /// Forfeits an active step. A placing step's part is teleported to its
    /// target and welded there. Skipped counts as done for unlocking.
    pub fn skip_step(&mut self, step: &str) -> Result<(), SessionError> {
        let i = self.step_index(step)?;
        let StepStatus::Active { activated_at, .. } = self.statuses[i] else {
            return Err(SessionError::StepNotActive(step.to_string()));
        };
        if let StepKind::Placing { part, target, .. } = &self.scenario.steps[i].kind {
            let (part, target) = (part.clone(), target.clone());
            self.snap_to_target(&part, &target.part, &target.anchor)?;
        }
        self.statuses[i] = StepStatus::Skipped {
            activated_at,
            at: self.world.tick(),
        };
        self.record(LogEntry::StepSkipped { step: step.to_string() });
        self.propagate(&mut Vec::new())?;
        Ok(())
    }

    fn release_if_held(&mut self, part: &str) -> Result<(), SessionError> {
        if self.held.as_deref() == Some(part) {
            self.world.detach_grab(part)?;
            self.held = None;
            self.record(LogEntry::Released { part: part.to_string() });
        }
        Ok(())
    }

    fn anchor_pose(&self, part: &str, anchor: &str) -> Option<Pose> {
        let def = self.scenario.part(part)?;
        let local = def.anchor(anchor)?;
        Some(self.world.body(part)?.pose.compose(local))
    }

    /// Welds `part` to `parent.anchor`, releasing it from the hand first.
    fn snap_to_target(&mut self, part: &str, parent: &str, anchor: &str) -> Result<(), SessionError> {
        self.release_if_held(part)?;
        let local = *self
            .scenario
            .part(parent)
            .and_then(|p| p.anchor(anchor))
            .ok_or_else(|| SessionError::UnknownPart(format!("{parent}.{anchor}")))?;
        self.world.set_weld(part, parent, local)?;
        Ok(())
    }

    fn set_flag(&mut self, flag: &str) {
        if self.flags.insert(flag.to_string()) {
            self.record(LogEntry::FlagSet { flag: flag.to_string() });
        }
    }

    fn known_flag(&self, name: &str) -> bool {
        self.scenario.settable_flags().contains(name)
            || self.scenario.steps.iter().any(|s| s.requires.flag_refs().contains(&name))
            || self
                .scenario
                .events
                .iter()
                .any(|e| matches!(&e.trigger, Trigger::FlagSet { flag } if flag == name))
    }

    fn apply_input(&mut self, input: &UserInput) -> Result<(), SessionError> {
        match input {
            UserInput::HandPose { .. } => {
                let pose = input.pose().ok_or(SessionError::InvalidPose)?;
                self.world.set_hand_pose(pose);
            }
            UserInput::Grab { part } => {
                if let Some(h) = &self.held {
                    return Err(SessionError::HandBusy(h.clone()));
                }
                if self.world.body(part).is_none() {
                    return Err(SessionError::UnknownPart(part.clone()));
                }
                let was_welded = self.world.weld(part).is_some();
                self.world.attach_grab(part)?;
                self.held = Some(part.clone());
                if was_welded {
                    self.record(LogEntry::AutoUnwelded { part: part.clone() });
                }
                self.record(LogEntry::Grabbed { part: part.clone() });
            }
            UserInput::Release => {
                let part = self.held.clone().ok_or(SessionError::HandEmpty)?;
                self.release_if_held(&part)?;
            }
            UserInput::Press { action_id } => {
                let known = self
                    .scenario
                    .steps
                    .iter()
                    .any(|s| matches!(&s.kind, StepKind::Action { action_id: a } if a == action_id));
                if !known {
                    return Err(SessionError::UnknownAction(action_id.clone()));
                }
                self.pressed.insert(action_id.clone());
            }
            UserInput::Hint { step } => {
                self.request_hint(step)?;
            }
            UserInput::Skip { step } => self.skip_step(step)?,
            UserInput::SetFlag { name } => {
                if !self.known_flag(name) {
                    return Err(SessionError::UnknownFlag(name.clone()));
                }
                self.set_flag(name);
            }
        }
        Ok(())
    }

    /// Applies `inputs` in order, steps the world, advances steps, unlocks
    /// steps and fires events, then reports helpers for the active steps.
    /// Inputs that cannot be applied are logged and skipped.
    pub fn tick(&mut self, inputs: &[UserInput]) -> Result<FrameReport, SessionError> {
        let mut rejected = Vec::new();
        let mut bytes = Vec::new();
        for input in inputs {
            bytes.clear();
            input.write_bytes(&mut bytes);
            let mut h = FnvHasher::with_key(self.input_digest);
            h.write(&self.world.tick().to_le_bytes());
            h.write(&bytes);
            self.input_digest = h.finish();
            if let Err(e) = self.apply_input(input) {
                if let SessionError::Physics(PhysicsError::Diverged { .. }) = e {
                    return Err(e);
                }
                rejected.push(e.to_string());
                self.record(LogEntry::InputRejected {
                    input: input.clone(),
                    reason: e.to_string(),
                });
            }
        }

        let report = self.world.step()?;
        for part in &report.auto_unwelded {
            self.record(LogEntry::AutoUnwelded { part: part.clone() });
        }
        self.entered = report.entered.clone();
        let now = self.world.tick();
        let dt = self.world.config.dt;
        let mut completed = Vec::new();

        for i in 0..self.statuses.len() {
            let StepStatus::Active {
                activated_at,
                in_tolerance_since,
                contact_ticks,
            } = self.statuses[i].clone()
            else {
                continue;
            };
            let step = &self.scenario.steps[i];
            let min_ok = now - activated_at >= ticks_for(step.min_time, dt);
            match &step.kind {
                StepKind::Placing {
                    part,
                    target,
                    pos_tol,
                    rot_tol,
                    dwell,
                } => {
                    let (part, target) = (part.clone(), target.clone());
                    let (pos_tol, rot_tol, dwell) = (*pos_tol, *rot_tol, *dwell);
                    let Some(goal) = self.anchor_pose(&target.part, &target.anchor) else {
                        continue;
                    };
                    let err = pose_error(&self.world.body(&part).unwrap().pose, &goal);
                    let inside = err.d_pos <= pos_tol && err.d_rot <= rot_tol;
                    let since = if inside { Some(in_tolerance_since.unwrap_or(now)) } else { None };
                    let held_long = since.is_some_and(|s| now - s + 1 >= ticks_for(dwell, dt));
                    if inside && held_long && min_ok {
                        self.snap_to_target(&part, &target.part, &target.anchor)?;
                        self.statuses[i] = StepStatus::Completed {
                            activated_at,
                            at: now,
                            residual: err,
                        };
                        completed.push(i);
                    } else {
                        self.statuses[i] = StepStatus::Active {
                            activated_at,
                            in_tolerance_since: since,
                            contact_ticks,
                        };
                    }
                }
                StepKind::ToolUse {
                    tool,
                    target,
                    contact_time,
                } => {
                    let touching = report.touching(tool, target);
                    let contact_ticks = contact_ticks + touching as u64;
                    if contact_ticks >= ticks_for(*contact_time, dt) && min_ok {
                        self.statuses[i] = StepStatus::Completed {
                            activated_at,
                            at: now,
                            residual: PoseError::default(),
                        };
                        completed.push(i);
                    } else {
                        self.statuses[i] = StepStatus::Active {
                            activated_at,
                            in_tolerance_since,
                            contact_ticks,
                        };
                    }
                }
                StepKind::Action { action_id } => {
                    if min_ok && self.pressed.contains(action_id) {
                        self.statuses[i] = StepStatus::Completed {
                            activated_at,
                            at: now,
                            residual: PoseError::default(),
                        };
                        completed.push(i);
                    }
                }
            }
        }
        for id in std::mem::take(&mut self.pressed) {
            let used = completed
                .iter()
                .any(|&i| matches!(&self.scenario.steps[i].kind, StepKind::Action { action_id } if *action_id == id));
            if !used {
                self.record(LogEntry::ActionIgnored { action_id: id });
            }
        }
        let mut completed_ids = Vec::new();
        for i in completed {
            let residual = match &self.statuses[i] {
                StepStatus::Completed { residual, .. } => *residual,
                _ => unreachable!(),
            };
            let id = self.scenario.steps[i].id.clone();
            self.record(LogEntry::StepCompleted {
                step: id.clone(),
                residual,
            });
            completed_ids.push(id);
        }

        let mut fired = Vec::new();
        self.propagate(&mut fired)?;
        self.entered.clear();
        Ok(FrameReport {
            tick: now,
            active: self.active_steps(),
            helpers: self.helpers(),
            completed: completed_ids,
            fired,
            rejected,
            score_partial: self.partial_score(),
        })
    }

    pub fn active_steps(&self) -> Vec<String> {
        self.statuses()
            .filter(|(_, st)| st.is_active())
            .map(|(id, _)| id.to_string())
            .collect()
    }

    /// Unlocks steps and fires events until nothing changes.
    fn propagate(&mut self, fired: &mut Vec<String>) -> Result<(), SessionError> {
        loop {
            let mut changed = false;
            let done = self.done_set();
            let now = self.world.tick();
            for i in 0..self.statuses.len() {
                if self.statuses[i] == StepStatus::Locked
                    && evaluate_condition(&self.scenario.steps[i].requires, &done, &self.flags)
                {
                    self.statuses[i] = StepStatus::Active {
                        activated_at: now,
                        in_tolerance_since: None,
                        contact_ticks: 0,
                    };
                    let step = self.scenario.steps[i].id.clone();
                    self.record(LogEntry::StepActivated { step });
                    changed = true;
                }
            }
            let mut order: Vec<usize> = (0..self.scenario.events.len()).collect();
            order.sort_by_key(|&i| self.scenario.events[i].trigger.class_rank());
            for i in order {
                if self.fired[i] || !self.trigger_holds(&self.scenario.events[i].trigger) {
                    continue;
                }
                self.fired[i] = true;
                let event = self.scenario.events[i].clone();
                self.record(LogEntry::EventFired { event: event.id.clone() });
                fired.push(event.id.clone());
                for action in &event.actions {
                    self.apply_action(action)?;
                }
                changed = true;
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn trigger_holds(&self, t: &Trigger) -> bool {
        let status = |step: &str| self.status(step).unwrap_or(&StepStatus::Locked);
        match t {
            Trigger::Started { step } => *status(step) != StepStatus::Locked,
            Trigger::Completed { step } => status(step).is_terminal(),
            Trigger::Entered { part, region } => self.entered.iter().any(|(p, r)| p == part && r == region),
            Trigger::FlagSet { flag } => self.flags.contains(flag),
            Trigger::TimeElapsed { seconds } => self.world.tick() >= ticks_for(*seconds, self.world.config.dt),
        }
    }

    fn apply_action(&mut self, action: &EventAction) -> Result<(), SessionError> {
        match action {
            EventAction::Weld { part, target } => self.snap_to_target(part, &target.part, &target.anchor)?,
            EventAction::Unweld { part } => {
                self.world.remove_weld(part)?;
            }
            EventAction::Activate { entity } => self.world.set_active(entity, true)?,
            EventAction::Deactivate { entity } => {
                self.release_if_held(entity)?;
                self.world.set_active(entity, false)?;
            }
            EventAction::SetFlag { flag } => self.set_flag(flag),
            EventAction::Particles { region } => self.record(LogEntry::Particles { region: region.clone() }),
        }
        Ok(())
    }

    /// Helpers for every active step, gated by the difficulty level. A step
    /// whose hint was requested always gets its ghost and trajectory.
    pub fn helpers(&self) -> Vec<HelperFrame> {
        let d = &self.difficulty;
        let mut out = Vec::new();
        for (i, step) in self.scenario.steps.iter().enumerate() {
            if !self.statuses[i].is_active() {
                continue;
            }
            let hinted = self.hints[i] > 0;
            let mut h = HelperFrame {
                step: step.id.clone(),
                ghost: None,
                trajectory: None,
                instruction: (d.instructions_enabled && !step.instruction.is_empty()).then(|| step.instruction.clone()),
                hint: hinted.then(|| step.hint.clone()),
            };
            if let StepKind::Placing { part, target, .. } = &step.kind {
                if let (Some(goal), Some(body)) = (self.anchor_pose(&target.part, &target.anchor), self.world.body(part)) {
                    if d.ghost_enabled || hinted {
                        h.ghost = Some(goal);
                    }
                    if d.trajectory_enabled || hinted {
                        h.trajectory = Some(trajectory(&body.pose, &goal));
                    }
                }
            }
            out.push(h);
        }
        out
    }

    fn score_of(&self, i: usize, abandoned: bool) -> StepScore {
        let step = &self.scenario.steps[i];
        let d = &self.difficulty;
        let dt = self.world.config.dt;
        let hints = self.hints[i];
        let mut s = StepScore {
            step: step.id.clone(),
            base: score::BASE_SCORE,
            time_factor: 1.0,
            accuracy_factor: 1.0,
            hints,
            hint_penalty: d.hint_penalty * hints as f64,
            skipped: false,
            incomplete: false,
            time: None,
            step_score: 0.0,
        };
        match &self.statuses[i] {
            StepStatus::Completed {
                activated_at,
                at,
                residual,
            } => {
                let t = (at - activated_at) as f64 * dt;
                s.time = Some(t);
                s.time_factor = score::time_factor(t, step.par_time * d.par_time_scale);
                if let StepKind::Placing { pos_tol, rot_tol, .. } = &step.kind {
                    s.accuracy_factor = score::accuracy_factor(residual, *pos_tol, *rot_tol);
                }
                s.step_score = score::step_score(s.time_factor, s.accuracy_factor, d.hint_penalty, hints);
            }
            StepStatus::Skipped { .. } => s.skipped = true,
            _ => s.incomplete = abandoned,
        }
        s
    }

    fn partial_score(&self) -> f64 {
        let n = self.statuses.len();
        if n == 0 {
            return 0.0;
        }
        let sum: f64 = (0..n).filter(|&i| self.statuses[i].is_terminal()).map(|i| self.score_of(i, false).step_score).sum();
        sum / n as f64
    }

    /// Final scores. Without `abandon`, every step must be terminal; with it,
    /// unfinished steps score 0 and are flagged incomplete.
    pub fn finalize(&self, abandon: bool) -> Result<ScoreReport, SessionError> {
        let open: Vec<String> = self
            .statuses()
            .filter(|(_, st)| !st.is_terminal())
            .map(|(id, _)| id.to_string())
            .collect();
        if !abandon && !open.is_empty() {
            return Err(SessionError::NotTerminal(open));
        }
        let steps: Vec<StepScore> = (0..self.statuses.len()).map(|i| self.score_of(i, abandon)).collect();
        let total = if steps.is_empty() {
            0.0
        } else {
            score::round1(steps.iter().map(|s| s.step_score).sum::<f64>() / steps.len() as f64)
        };
        Ok(ScoreReport {
            scenario: self.scenario.name.clone(),
            difficulty: self.difficulty.id.clone(),
            abandoned: abandon && !open.is_empty(),
            steps,
            total,
        })
    }

    /// Canonical bytes of the session status: step statuses in scenario
    /// order, hint counters, sorted flags, fired events, held part, input
    /// digest and tick. Appended to the world bytes for state hashing.
    pub fn write_status(&self, out: &mut Vec<u8>) {
        fn text(out: &mut Vec<u8>, s: &str) {
            out.extend_from_slice(&(s.len() as u32).to_le_bytes());
            out.extend_from_slice(s.as_bytes());
        }
        let u64le = |out: &mut Vec<u8>, v: u64| out.extend_from_slice(&v.to_le_bytes());
        out.extend_from_slice(&(self.statuses.len() as u32).to_le_bytes());
        for (st, hints) in self.statuses.iter().zip(&self.hints) {
            match st {
                StepStatus::Locked => out.push(0),
                StepStatus::Active {
                    activated_at,
                    in_tolerance_since,
                    contact_ticks,
                } => {
                    out.push(1);
                    u64le(out, *activated_at);
                    u64le(out, in_tolerance_since.map_or(u64::MAX, |t| t));
                    u64le(out, *contact_ticks);
                }
                StepStatus::Completed {
                    activated_at,
                    at,
                    residual,
                } => {
                    out.push(2);
                    u64le(out, *activated_at);
                    u64le(out, *at);
                    out.extend_from_slice(&residual.d_pos.to_le_bytes());
                    out.extend_from_slice(&residual.d_rot.to_le_bytes());
                }
                StepStatus::Skipped { activated_at, at } => {
                    out.push(3);
                    u64le(out, *activated_at);
                    u64le(out, *at);
                }
            }
            out.extend_from_slice(&hints.to_le_bytes());
        }
        out.extend_from_slice(&(self.flags.len() as u32).to_le_bytes());
        for f in &self.flags {
            text(out, f);
        }
        out.extend(self.fired.iter().map(|&f| f as u8));
        text(out, self.held.as_deref().unwrap_or(""));
        u64le(out, self.input_digest);
        u64le(out, self.world.tick());
    }
}

/// `TRAJECTORY_POINTS` poses from `from` to `to`: linear in position,
/// spherical in orientation.
pub fn trajectory(from: &Pose, to: &Pose) -> Vec<Pose> {
    let last = (TRAJECTORY_POINTS - 1) as f64;
    (0..TRAJECTORY_POINTS)
        .map(|i| {
            let t = i as f64 / last;
            Pose::new(from.position.lerp(&to.position, t), slerp(&from.orientation, &to.orientation, t))
        })
        .collect()
}
