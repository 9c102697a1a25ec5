mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use interact_core::lang::parse;
use interact_core::math::{Pose, Vec3};
use interact_core::scene::{evaluate_condition, Scenario};
use interact_core::session::{score, FrameReport, LogEntry, Session, SessionError, StepStatus, UserInput};
use proptest::prelude::*;

use common::laser_script::laser_cutter;

fn scenario(src: &str) -> Arc<Scenario> {
    let r = parse(src);
    Arc::new(r.scenario.unwrap_or_else(|| panic!("{:?}", r.diagnostics)))
}

const PLACE: &str = r#"scenario "place" {
  part base {
    shape = box(0.5, 0.5, 0.05);
    mass = 0;
    pose = (0, 0, 0) rpy(0, 0, 0);
    anchor seat = (0, 0, 0.3) rpy(0, 0, 0);
  }
  part peg {
    shape = sphere(0.02);
    mass = 0.1;
    pose = (1, 0, 0.5) rpy(0, 0, 0);
    grabbable = true;
  }
  step put : placing {
    part = peg;
    target = anchor(base, seat);
    tol = pos 0.01 rot 5deg;
    dwell = 1;
    requires = start;
    par_time = 10;
    instruction = "put the peg on the seat";
    hint = "the seat is above the base";
  }
  step after : action { action_id = go; requires = done(put); par_time = 5; hint = "go"; }
  difficulty easy { ghost = true; trajectory = true; instructions = true; hint_penalty = 15; par_time_scale = 1; }
  difficulty bare { ghost = false; trajectory = false; instructions = false; hint_penalty = 15; par_time_scale = 1; }
}"#;

fn seat() -> Pose {
    Pose::from_position(Vec3::new(0.0, 0.0, 0.3))
}

/// Grabs the peg at its own origin so the part pose equals the hand pose.
fn grab_peg(s: &mut Session) {
    let at = s.world().body("peg").unwrap().pose;
    s.tick(&[UserInput::hand(&at), UserInput::grab("peg")]).unwrap();
}

#[test]
fn initial_activation_follows_requires() {
    let s = Session::start(scenario(PLACE), "easy").unwrap();
    assert!(s.status("put").unwrap().is_active());
    assert_eq!(s.status("after"), Some(&StepStatus::Locked));
    assert_eq!(s.clock(), 0.0);
}

#[test]
fn laser_cutter_starts_with_power_off_only() {
    let s = Session::start(laser_cutter(), "default").unwrap();
    assert_eq!(s.active_steps(), vec!["power_off".to_string()]);
    // optics and tools are mounted by time(0) events
    assert!(s.world().weld("lens").is_some());
    assert!(s.world().weld("vacuum").is_some());
}

#[test]
fn unknown_difficulty_names_the_valid_ones() {
    let err = Session::start(scenario(PLACE), "nightmare").unwrap_err();
    let SessionError::UnknownDifficulty { available, .. } = &err else {
        panic!("{err:?}")
    };
    assert_eq!(available, &["easy", "bare"]);
    assert!(err.to_string().contains("easy, bare"));
}

#[test]
fn dwell_completes_on_the_120th_in_tolerance_tick() {
    let mut s = Session::start(scenario(PLACE), "easy").unwrap();
    grab_peg(&mut s);
    let mut frames: Vec<FrameReport> = Vec::new();
    frames.push(s.tick(&[UserInput::hand(&seat())]).unwrap());
    while frames.len() < 130 && frames.last().unwrap().completed.is_empty() {
        frames.push(s.tick(&[]).unwrap());
    }
    assert_eq!(frames.len(), 120);
    assert_eq!(frames[119].completed, vec!["put".to_string()]);
    assert!(frames[..119].iter().all(|f| f.completed.is_empty()));
    // completion hands the part over to a weld at the target
    assert_eq!(s.held(), None);
    assert_eq!(s.world().weld("peg").unwrap().parent, "base");
    assert!(s.status("after").unwrap().is_active());
}

#[test]
fn leaving_tolerance_restarts_the_dwell() {
    let mut s = Session::start(scenario(PLACE), "easy").unwrap();
    grab_peg(&mut s);
    s.tick(&[UserInput::hand(&seat())]).unwrap();
    for _ in 0..100 {
        s.tick(&[]).unwrap();
    }
    let away = seat().translated(Vec3::new(0.05, 0.0, 0.0));
    s.tick(&[UserInput::hand(&away)]).unwrap();
    let mut n = 0;
    s.tick(&[UserInput::hand(&seat())]).unwrap();
    n += 1;
    while !s.status("put").unwrap().is_terminal() {
        s.tick(&[]).unwrap();
        n += 1;
    }
    assert_eq!(n, 120);
}

#[test]
fn rotation_just_past_tolerance_never_completes() {
    let mut s = Session::start(scenario(PLACE), "easy").unwrap();
    grab_peg(&mut s);
    let tol = 5f64.to_radians();
    let tilted = Pose::from_rpy(seat().position, tol + 1e-6, 0.0, 0.0);
    s.tick(&[UserInput::hand(&tilted)]).unwrap();
    for _ in 0..600 {
        s.tick(&[]).unwrap();
    }
    assert!(s.status("put").unwrap().is_active());
}

#[test]
fn min_time_holds_back_completion() {
    let src = PLACE.replace("dwell = 1;", "dwell = 0.1;\n    min_time = 2;");
    let mut s = Session::start(scenario(&src), "easy").unwrap();
    grab_peg(&mut s);
    s.tick(&[UserInput::hand(&seat())]).unwrap();
    while !s.status("put").unwrap().is_terminal() {
        s.tick(&[]).unwrap();
    }
    let StepStatus::Completed { activated_at, at, .. } = s.status("put").unwrap() else {
        panic!()
    };
    assert_eq!(at - activated_at, 240);
}

const UNWELD: &str = r#"scenario "unweld" {
  part frame { shape = box(1, 1, 0.1); mass = 0; pose = (0, 0, 0) rpy(0, 0, 0); anchor lid_seat = (0, 0, 1) rpy(0, 0, 0); }
  part lid { shape = box(0.2, 0.2, 0.01); mass = 1; pose = (0, 0, 1) rpy(0, 0, 0); grabbable = true; }
  event hold { when = time(0); do = weld(lid, frame.lid_seat); }
  event free { when = completed(open); do = unweld(lid); }
  step open : action { action_id = open; requires = start; par_time = 5; hint = "press open"; }
}"#;

#[test]
fn completion_event_unwelds_part_for_the_next_tick() {
    let mut s = Session::start(scenario(UNWELD), "default").unwrap();
    for _ in 0..10 {
        s.tick(&[]).unwrap();
    }
    assert_eq!(s.world().body("lid").unwrap().pose.position.z, 1.0);
    let f = s.tick(&[UserInput::press("open")]).unwrap();
    assert_eq!(f.completed, vec!["open".to_string()]);
    assert_eq!(f.fired, vec!["free".to_string()]);
    assert!(s.world().weld("lid").is_none());
    s.tick(&[]).unwrap();
    let lid = s.world().body("lid").unwrap();
    assert!(lid.linear_velocity.z < 0.0 && lid.pose.position.z < 1.0);
}

#[test]
fn events_fire_once() {
    let mut s = Session::start(scenario(UNWELD), "default").unwrap();
    s.tick(&[UserInput::press("open")]).unwrap();
    for _ in 0..20 {
        s.tick(&[]).unwrap();
    }
    let fired: Vec<&str> = s
        .log()
        .iter()
        .filter_map(|r| match &r.entry {
            LogEntry::EventFired { event } => Some(event.as_str()),
            _ => None,
        })
        .collect();
    assert_eq!(fired, vec!["hold", "free"]);
}

#[test]
fn triggers_fire_in_class_order() {
    let src = r#"scenario "order" {
      event by_time { when = time(0); do = set_flag(t); }
      event by_flag { when = flag(t); do = set_flag(f); }
      event by_start { when = started(a); do = set_flag(s); }
      step a : action { action_id = a; requires = start; par_time = 1; hint = "a"; }
      step b : action { action_id = b; requires = flag(t) && flag(f) && flag(s); par_time = 1; hint = "b"; }
    }"#;
    let s = Session::start(scenario(src), "default").unwrap();
    assert_eq!(s.fired_events(), vec!["by_time", "by_flag", "by_start"]);
    let order: Vec<&str> = s
        .log()
        .iter()
        .filter_map(|r| match &r.entry {
            LogEntry::EventFired { event } => Some(event.as_str()),
            _ => None,
        })
        .collect();
    // started before flag before time; the flag event waits for by_time
    assert_eq!(order, vec!["by_start", "by_time", "by_flag"]);
    assert!(s.status("b").unwrap().is_active());
}

#[test]
fn hints_count_and_require_an_active_step() {
    let mut s = Session::start(scenario(PLACE), "easy").unwrap();
    assert_eq!(s.request_hint("after"), Err(SessionError::StepNotActive("after".into())));
    assert_eq!(s.request_hint("put").unwrap(), "the seat is above the base");
    assert_eq!(s.hints_used("put"), 1);
    s.request_hint("put").unwrap();
    grab_peg(&mut s);
    s.tick(&[UserInput::hand(&seat())]).unwrap();
    while !s.status("put").unwrap().is_terminal() {
        s.tick(&[]).unwrap();
    }
    s.tick(&[UserInput::press("go")]).unwrap();
    let r = s.finalize(false).unwrap();
    assert_eq!(r.steps[0].hints, 2);
    assert_eq!(r.steps[0].hint_penalty, 30.0);
    assert_eq!(r.steps[0].step_score, 70.0);
    assert_eq!(r.total, 85.0);
}

#[test]
fn skipping_a_placement_teleports_and_unlocks() {
    let mut s = Session::start(scenario(PLACE), "easy").unwrap();
    assert!(s.skip_step("after").is_err());
    s.skip_step("put").unwrap();
    assert_eq!(s.world().body("peg").unwrap().pose, seat());
    assert!(s.status("after").unwrap().is_active());
    s.tick(&[UserInput::press("go")]).unwrap();
    let r = s.finalize(false).unwrap();
    assert!(r.steps[0].skipped);
    assert_eq!(r.steps[0].step_score, 0.0);
    assert_eq!(r.total, 50.0);
    // the peg stays put after the teleport
    for _ in 0..60 {
        s.tick(&[]).unwrap();
    }
    assert!((s.world().body("peg").unwrap().pose.position - seat().position).norm() < 1e-12);
}

#[test]
fn finishing_late_halves_the_step() {
    let src = r#"scenario "late" { step a : action { action_id = a; requires = start; par_time = 1; hint = "a"; } }"#;
    let mut s = Session::start(scenario(src), "default").unwrap();
    for _ in 0..239 {
        s.tick(&[]).unwrap();
    }
    s.tick(&[UserInput::press("a")]).unwrap();
    let r = s.finalize(false).unwrap();
    assert_eq!(r.steps[0].time, Some(2.0));
    assert_eq!(r.steps[0].time_factor, 0.5);
    assert_eq!(r.total, 50.0);
}

#[test]
fn finalize_requires_terminal_steps_unless_abandoned() {
    let s = Session::start(scenario(PLACE), "easy").unwrap();
    assert!(matches!(s.finalize(false), Err(SessionError::NotTerminal(v)) if v == ["put", "after"]));
    let r = s.finalize(true).unwrap();
    assert!(r.abandoned);
    assert!(r.steps.iter().all(|st| st.incomplete && st.step_score == 0.0));
    assert_eq!(r.total, 0.0);
}

#[test]
fn bad_inputs_are_rejected_and_logged() {
    let mut s = Session::start(scenario(PLACE), "easy").unwrap();
    let f = s
        .tick(&[
            UserInput::grab("ghost"),
            UserInput::grab("base"),
            UserInput::Release,
            UserInput::press("nope"),
            UserInput::HandPose {
                pos: [0.0; 3],
                quat: [2.0, 0.0, 0.0, 0.0],
            },
        ])
        .unwrap();
    assert_eq!(f.rejected.len(), 5);
    let rejected = s.log().iter().filter(|r| matches!(r.entry, LogEntry::InputRejected { .. })).count();
    assert_eq!(rejected, 5);
    assert_eq!(s.tick_count(), 1);
}

#[test]
fn single_hand() {
    let mut s = Session::start(scenario(BRANCHY), "default").unwrap();
    let f = s.tick(&[UserInput::grab("peg"), UserInput::grab("rag")]).unwrap();
    assert_eq!(f.rejected, vec!["the hand already holds `peg`".to_string()]);
    assert_eq!(s.held(), Some("peg"));
}

fn helper_for<'a>(f: &'a FrameReport, step: &str) -> &'a interact_core::session::HelperFrame {
    f.helpers.iter().find(|h| h.step == step).unwrap()
}

#[test]
fn helpers_follow_difficulty_and_hint_override() {
    let mut easy = Session::start(scenario(PLACE), "easy").unwrap();
    let f = easy.tick(&[]).unwrap();
    let h = helper_for(&f, "put");
    assert_eq!(h.ghost, Some(seat()));
    let traj = h.trajectory.as_ref().unwrap();
    assert_eq!(traj.len(), 32);
    let peg = easy.world().body("peg").unwrap().pose;
    assert_eq!(traj[0], peg);
    assert!((traj[31].position - seat().position).norm() < 1e-15);
    // evenly spaced in position
    let step = (seat().position - peg.position) / 31.0;
    for w in traj.windows(2) {
        assert!((w[1].position - w[0].position - step).norm() < 1e-12);
    }
    assert_eq!(h.instruction.as_deref(), Some("put the peg on the seat"));
    assert_eq!(h.hint, None);

    let mut bare = Session::start(scenario(PLACE), "bare").unwrap();
    let f = bare.tick(&[]).unwrap();
    let h = helper_for(&f, "put");
    assert!(h.ghost.is_none() && h.trajectory.is_none() && h.instruction.is_none() && h.hint.is_none());
    let f = bare.tick(&[UserInput::hint("put")]).unwrap();
    let h = helper_for(&f, "put");
    assert_eq!(h.ghost, Some(seat()));
    assert_eq!(h.trajectory.as_ref().map(Vec::len), Some(32));
    assert_eq!(h.hint.as_deref(), Some("the seat is above the base"));
    assert!(h.instruction.is_none());
}

#[test]
fn trajectory_interpolates_orientation_on_the_great_circle() {
    let a = Pose::from_rpy(Vec3::zeros(), 0.0, 0.0, 0.0);
    let b = Pose::from_rpy(Vec3::new(3.1, 0.0, 0.0), 0.0, 0.0, 1.5);
    let t = interact_core::session::trajectory(&a, &b);
    for (i, p) in t.iter().enumerate() {
        let want = 1.5 * i as f64 / 31.0;
        assert!((p.orientation.angle() - want).abs() < 1e-12);
        assert!((p.position.x - 3.1 * i as f64 / 31.0).abs() < 1e-12);
    }
}

const BRANCHY: &str = r#"scenario "branchy" {
  part base { shape = box(0.5, 0.5, 0.05); mass = 0; pose = (0, 0, 0) rpy(0, 0, 0); anchor seat = (0, 0, 0.3) rpy(0, 0, 0); }
  part peg { shape = sphere(0.02); mass = 0.1; pose = (0.2, 0, 0.5) rpy(0, 0, 0); grabbable = true; }
  part rag { shape = sphere(0.03); mass = 0.1; pose = (-0.2, 0, 0.5) rpy(0, 0, 0); grabbable = true; }
  step a : action { action_id = a; requires = start; par_time = 2; hint = "a"; }
  step b : placing { part = peg; target = anchor(base, seat); tol = pos 0.02 rot 20deg; dwell = 0.1; requires = done(a) || flag(shortcut); par_time = 3; hint = "b"; }
  step c : tooluse { tool = rag; target = peg; contact_time = 0.1; requires = done(b) && !flag(shortcut); par_time = 3; hint = "c"; }
  step d : action { action_id = d; requires = done(a); par_time = 2; hint = "d"; }
  step e : action { action_id = e; requires = done(c) || done(d); par_time = 2; hint = "e"; }
  event shortcut_on { when = time(0.5); do = set_flag(shortcut); }
  difficulty default { hint_penalty = 40; }
}"#;

fn arb_input() -> impl Strategy<Value = UserInput> {
    let step = prop::sample::select(vec!["a", "b", "c", "d", "e", "zz"]);
    let part = prop::sample::select(vec!["peg", "rag", "base", "zz"]);
    prop_oneof![
        4 => (-0.3..0.3f64, -0.3..0.3f64, 0.0..0.6f64, -0.3..0.3f64).prop_map(|(x, y, z, yaw)| {
            UserInput::hand(&Pose::from_rpy(Vec3::new(x, y, z), 0.0, 0.0, yaw))
        }),
        2 => Just(UserInput::hand(&Pose::from_position(Vec3::new(0.0, 0.0, 0.3)))),
        2 => part.prop_map(UserInput::grab),
        1 => Just(UserInput::Release),
        2 => prop::sample::select(vec!["a", "d", "e", "zz"]).prop_map(UserInput::press),
        1 => step.clone().prop_map(UserInput::hint),
        1 => step.prop_map(UserInput::skip),
        1 => prop::sample::select(vec!["shortcut", "zz"]).prop_map(UserInput::set_flag),
    ]
}

fn terminal_snapshot(s: &Session) -> Vec<(String, StepStatus)> {
    s.statuses()
        .filter(|(_, st)| st.is_terminal())
        .map(|(id, st)| (id.to_string(), st.clone()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn terminal_steps_stay_terminal_and_scores_stay_bounded(
        trace in prop::collection::vec((0u64..4, prop::collection::vec(arb_input(), 0..3)), 1..60)
    ) {
        let mut s = Session::start(scenario(BRANCHY), "default").unwrap();
        let mut terminal: Vec<(String, StepStatus)> = Vec::new();
        for (gap, inputs) in trace {
            for _ in 0..gap {
                s.tick(&[]).unwrap();
            }
            let f = s.tick(&inputs).unwrap();
            prop_assert!((0.0..=100.0).contains(&f.score_partial));
            let now = terminal_snapshot(&s);
            for t in &terminal {
                prop_assert!(now.contains(t), "{:?} left its terminal state", t);
            }
            terminal = now;
        }
        let r = s.finalize(true).unwrap();
        prop_assert!((0.0..=100.0).contains(&r.total));
        for st in &r.steps {
            prop_assert!((0.0..=100.0).contains(&st.step_score));
            prop_assert!((0.5..=1.0).contains(&st.time_factor));
            prop_assert!((0.5..=1.0).contains(&st.accuracy_factor));
            if st.skipped {
                prop_assert_eq!(st.step_score, 0.0);
            }
        }
    }

    /// Replays the log with an independent evaluator: a step activates only
    /// when its condition holds over the steps finished and flags set so far.
    #[test]
    fn activation_is_sound(
        trace in prop::collection::vec((0u64..4, prop::collection::vec(arb_input(), 0..3)), 1..60)
    ) {
        let sc = scenario(BRANCHY);
        let mut s = Session::start(sc.clone(), "default").unwrap();
        for (gap, inputs) in trace {
            for _ in 0..gap {
                s.tick(&[]).unwrap();
            }
            s.tick(&inputs).unwrap();
        }
        let mut done = BTreeSet::new();
        let mut flags = BTreeSet::new();
        let mut checked = 0;
        for rec in s.log() {
            match &rec.entry {
                LogEntry::StepCompleted { step, .. } | LogEntry::StepSkipped { step } => {
                    done.insert(step.clone());
                }
                LogEntry::FlagSet { flag } => {
                    flags.insert(flag.clone());
                }
                LogEntry::StepActivated { step } => {
                    let req = &sc.step(step).unwrap().requires;
                    prop_assert!(evaluate_condition(req, &done, &flags), "{step} at {}", rec.tick);
                    checked += 1;
                }
                _ => {}
            }
        }
        prop_assert!(checked >= 1);
    }

    #[test]
    fn hints_never_raise_a_score(hints in 0u32..10, tf in 0.5..1.0f64, af in 0.5..1.0f64, pen in 0.0..50.0f64) {
        prop_assert!(score::step_score(tf, af, pen, hints + 1) <= score::step_score(tf, af, pen, hints));
    }

    #[test]
    fn time_factor_is_non_increasing(t in 0.0..100.0f64, dt in 0.0..10.0f64, par in 0.1..20.0f64) {
        prop_assert!(score::time_factor(t + dt, par) <= score::time_factor(t, par));
    }
}
