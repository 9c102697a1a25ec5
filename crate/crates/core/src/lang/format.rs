use std::fmt::Write;

use crate::math::{Pose, Vec3};
use crate::scene::{
    ColliderShape, DifficultyLevel, EventAction, Scenario, StepKind, Trigger, DEFAULT_ENVIRONMENT, DEFAULT_MATERIAL,
};

/// Shortest decimal text that reads back to the same `f64`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x}")
}

// Degrees with at most 9 significant digits.
fn format_degrees(rad: f64) -> String {
    let deg = rad.to_degrees();
    let rounded: f64 = format!("{deg:.8e}").parse().unwrap_or(deg);
    format_number(rounded)
}

fn vec3(v: &Vec3) -> String {
    format!("({}, {}, {})", format_number(v.x), format_number(v.y), format_number(v.z))
}

fn pose(p: &Pose) -> String {
    let (r, pi, y) = p.rpy();
    format!(
        "{} rpy({}, {}, {})",
        vec3(&p.position),
        format_degrees(r),
        format_degrees(pi),
        format_degrees(y)
    )
}

fn string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn shape(s: &ColliderShape) -> String {
    match s {
        ColliderShape::Sphere { radius } => format!("sphere({})", format_number(*radius)),
        ColliderShape::Box { half_extents: h } => format!(
            "box({}, {}, {})",
            format_number(h.x),
            format_number(h.y),
            format_number(h.z)
        ),
        ColliderShape::Capsule { radius, half_height } => {
            format!("capsule({}, {})", format_number(*radius), format_number(*half_height))
        }
        ColliderShape::ConvexHull { vertices } => {
            let vs: Vec<String> = vertices.iter().map(vec3).collect();
            format!("hull({})", vs.join(", "))
        }
    }
}

fn trigger(t: &Trigger) -> String {
    match t {
        Trigger::Completed { step } => format!("completed({step})"),
        Trigger::Started { step } => format!("started({step})"),
        Trigger::Entered { part, region } => format!("entered({part}, {region})"),
        Trigger::FlagSet { flag } => format!("flag({flag})"),
        Trigger::TimeElapsed { seconds } => format!("time({})", format_number(*seconds)),
    }
}

fn action(a: &EventAction) -> String {
    match a {
        EventAction::Weld { part, target } => format!("weld({part}, {}.{})", target.part, target.anchor),
        EventAction::Unweld { part } => format!("unweld({part})"),
        EventAction::Activate { entity } => format!("activate({entity})"),
        EventAction::Deactivate { entity } => format!("deactivate({entity})"),
        EventAction::SetFlag { flag } => format!("set_flag({flag})"),
        EventAction::Particles { region } => format!("particles({region})"),
    }
}

/// Renders a scenario in canonical form: declaration order within each item
/// group, one field per line, two-space indentation.
///
/// Group order is environment, parts, regions, materials, steps, events,
/// difficulties. Fields equal to the parser default are omitted, and a lone
/// injected default difficulty is not written out.
pub fn format_canonical(s: &Scenario) -> String {
    let mut out = String::new();
    let mut blocks: Vec<String> = Vec::new();
    if s.environment != DEFAULT_ENVIRONMENT {
        blocks.push(format!("  environment = {};\n", s.environment));
    }
    for p in &s.parts {
        let mut b = format!("  part {} {{\n", p.id);
        let _ = writeln!(b, "    shape = {};", shape(&p.shape));
        let _ = writeln!(b, "    mass = {};", format_number(p.mass));
        let _ = writeln!(b, "    pose = {};", pose(&p.initial_pose));
        if p.grabbable {
            b.push_str("    grabbable = true;\n");
        }
        if p.material != DEFAULT_MATERIAL {
            let _ = writeln!(b, "    material = {};", p.material);
        }
        for a in &p.anchors {
            let _ = writeln!(b, "    anchor {} = {};", a.name, pose(&a.pose));
        }
        b.push_str("  }\n");
        blocks.push(b);
    }
    let mut lines = String::new();
    for r in &s.regions {
        let _ = write!(lines, "  region {} = sphere({}, {})", r.id, vec3(&r.center), format_number(r.radius));
        if let Some(parent) = &r.parent {
            let _ = write!(lines, " on {parent}");
        }
        lines.push_str(";\n");
    }
    if !lines.is_empty() {
        blocks.push(std::mem::take(&mut lines));
    }
    for m in &s.materials {
        let _ = writeln!(lines, "  material {} {} = {};", m.a, m.b, format_number(m.friction));
    }
    if !lines.is_empty() {
        blocks.push(lines);
    }
    for st in &s.steps {
        let mut b = format!("  step {} : {} {{\n", st.id, st.kind.name());
        match &st.kind {
            StepKind::Placing {
                part,
                target,
                pos_tol,
                rot_tol,
                dwell,
            } => {
                let _ = writeln!(b, "    part = {part};");
                let _ = writeln!(b, "    target = anchor({}, {});", target.part, target.anchor);
                let _ = writeln!(
                    b,
                    "    tol = pos {} rot {}deg;",
                    format_number(*pos_tol),
                    format_degrees(*rot_tol)
                );
                let _ = writeln!(b, "    dwell = {};", format_number(*dwell));
            }
            StepKind::Action { action_id } => {
                let _ = writeln!(b, "    action_id = {action_id};");
            }
            StepKind::ToolUse {
                tool,
                target,
                contact_time,
            } => {
                let _ = writeln!(b, "    tool = {tool};");
                let _ = writeln!(b, "    target = {target};");
                let _ = writeln!(b, "    contact_time = {};", format_number(*contact_time));
            }
        }
        let _ = writeln!(b, "    requires = {};", st.requires);
        if st.min_time != 0.0 {
            let _ = writeln!(b, "    min_time = {};", format_number(st.min_time));
        }
        let _ = writeln!(b, "    par_time = {};", format_number(st.par_time));
        if !st.instruction.is_empty() {
            let _ = writeln!(b, "    instruction = {};", string(&st.instruction));
        }
        if !st.hint.is_empty() {
            let _ = writeln!(b, "    hint = {};", string(&st.hint));
        }
        b.push_str("  }\n");
        blocks.push(b);
    }
    for ev in &s.events {
        let mut b = format!("  event {} {{\n", ev.id);
        let _ = writeln!(b, "    when = {};", trigger(&ev.trigger));
        if !ev.actions.is_empty() {
            let acts: Vec<String> = ev.actions.iter().map(action).collect();
            let _ = writeln!(b, "    do = {};", acts.join(", "));
        }
        b.push_str("  }\n");
        blocks.push(b);
    }
    let implicit = s.difficulties.len() == 1 && s.difficulties[0] == DifficultyLevel::injected_default();
    if !implicit {
        for d in &s.difficulties {
            let mut b = format!("  difficulty {} {{\n", d.id);
            let _ = writeln!(b, "    ghost = {};", d.ghost_enabled);
            let _ = writeln!(b, "    trajectory = {};", d.trajectory_enabled);
            let _ = writeln!(b, "    instructions = {};", d.instructions_enabled);
            let _ = writeln!(b, "    hint_penalty = {};", format_number(d.hint_penalty));
            let _ = writeln!(b, "    par_time_scale = {};", format_number(d.par_time_scale));
            b.push_str("  }\n");
            blocks.push(b);
        }
    }
    let _ = writeln!(out, "scenario {} {{", string(&s.name));
    out.push_str(&blocks.join("\n"));
    out.push_str("}\n");
    out
}
