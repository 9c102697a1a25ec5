//! Scripted play-throughs of `scenarios/laser_cutter.itx`, authored against a
//! live session so every input lands on a tick the engine actually reached.

#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use interact_core::lang::parse;
use interact_core::math::{Pose, Vec3};
use interact_core::replay::TraceRecord;
use interact_core::scene::Scenario;
use interact_core::session::{Session, UserInput};

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn load(name: &str) -> Arc<Scenario> {
    let path = repo_root().join("scenarios").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    Arc::new(parse(&text).scenario.expect("scenario parses"))
}

pub fn laser_cutter() -> Arc<Scenario> {
    load("laser_cutter.itx")
}

pub struct Script {
    pub session: Session,
    pub records: Vec<TraceRecord>,
}

impl Script {
    pub fn new(scenario: Arc<Scenario>, difficulty: &str) -> Self {
        Script {
            session: Session::start(scenario, difficulty).unwrap(),
            records: Vec::new(),
        }
    }

    /// Applies `inputs` on the current tick and records them.
    pub fn tick(&mut self, inputs: Vec<UserInput>) {
        let now = self.session.tick_count();
        self.records.extend(inputs.iter().cloned().map(|i| TraceRecord::new(now, i)));
        let frame = self.session.tick(&inputs).unwrap();
        assert!(frame.rejected.is_empty(), "tick {now}: {:?}", frame.rejected);
    }

    pub fn idle(&mut self, n: u64) {
        for _ in 0..n {
            self.tick(vec![]);
        }
    }

    pub fn until_done(&mut self, step: &str) {
        let mut guard = 0;
        while !self.session.status(step).unwrap().is_terminal() {
            self.tick(vec![]);
            guard += 1;
            assert!(guard < 2400, "step {step} never finished");
        }
    }

    pub fn pose_of(&self, part: &str) -> Pose {
        self.session.world().body(part).unwrap().pose
    }

    pub fn anchor(&self, part: &str, anchor: &str) -> Pose {
        let local = self.session.scenario().part(part).unwrap().anchor(anchor).unwrap();
        self.pose_of(part).compose(local)
    }

    pub fn pick(&mut self, part: &str) {
        let at = self.pose_of(part);
        self.tick(vec![UserInput::hand(&at), UserInput::grab(part)]);
    }

    pub fn move_to(&mut self, pose: Pose) {
        self.tick(vec![UserInput::hand(&pose)]);
    }

    pub fn place(&mut self, step: &str, part: &str, target: (&str, &str)) {
        self.pick(part);
        let goal = self.anchor(target.0, target.1);
        self.move_to(goal);
        self.until_done(step);
    }

    /// Rubs `tool` against `target` with the tool centre at `offset` from
    /// the target origin, then puts the tool back on its hook.
    pub fn rub(&mut self, step: &str, tool: &str, target: &str, offset: Vec3, keep: bool) {
        if self.session.held() != Some(tool) {
            self.pick(tool);
        }
        let t = self.pose_of(target);
        let tool_pose = self.pose_of(tool);
        self.move_to(Pose::new(t.position + offset, tool_pose.orientation));
        self.until_done(step);
        if !keep {
            self.stow(tool);
        }
    }

    pub fn stow(&mut self, tool: &str) {
        let hook = self.anchor("bench", &format!("{tool}_hook"));
        self.move_to(hook);
        self.tick(vec![UserInput::Release]);
    }

    pub fn press(&mut self, step: &str, action: &str) {
        self.tick(vec![UserInput::press(action)]);
        self.until_done(step);
    }
}

/// Mistakes a learner might make: hints and skips by step id.
#[derive(Default)]
pub struct Style<'a> {
    pub hints: &'a [(&'a str, u32)],
    pub skips: &'a [&'a str],
}

impl Style<'_> {
    fn before(&self, s: &mut Script, step: &str) -> bool {
        for &(id, n) in self.hints {
            if id == step {
                for _ in 0..n {
                    s.tick(vec![UserInput::hint(step)]);
                }
            }
        }
        if self.skips.contains(&step) {
            s.tick(vec![UserInput::skip(step)]);
            return true;
        }
        false
    }
}

/// Runs the whole maintenance sequence.
pub fn play(scenario: Arc<Scenario>, difficulty: &str, style: &Style) -> Script {
    let mut s = Script::new(scenario, difficulty);
    let above = |dz: f64| Vec3::new(0.0, 0.0, dz);

    if !style.before(&mut s, "power_off") {
        s.press("power_off", "power_off");
    }
    for (step, part, slot) in [
        ("unmount_mirror", "mirror", "mirror_slot"),
        ("unmount_lens", "lens", "lens_slot"),
        ("unmount_nozzle", "nozzle", "nozzle_slot"),
    ] {
        if !style.before(&mut s, step) {
            s.place(step, part, ("bench", slot));
        }
    }
    if !style.before(&mut s, "wipe_lens") {
        s.rub("wipe_lens", "cloth", "lens", above(0.02), true);
    }
    if !style.before(&mut s, "wipe_nozzle") {
        s.rub("wipe_nozzle", "cloth", "nozzle", Vec3::new(0.03, 0.0, 0.0), true);
    }
    if s.session.held() == Some("cloth") {
        s.stow("cloth");
    }
    if !style.before(&mut s, "sponge_plate") {
        s.rub("sponge_plate", "sponge", "bed", above(0.02), false);
    }
    for (step, part, mount) in [
        ("mount_lens", "lens", "lens_mount"),
        ("mount_nozzle", "nozzle", "nozzle_mount"),
        ("mount_mirror", "mirror", "mirror_mount"),
    ] {
        if !style.before(&mut s, step) {
            s.place(step, part, ("head", mount));
        }
    }
    if !style.before(&mut s, "power_on") {
        s.press("power_on", "power_on");
    }
    if !style.before(&mut s, "vacuum_bed") {
        s.rub("vacuum_bed", "vacuum", "bed", above(0.035), true);
    }
    s
}
