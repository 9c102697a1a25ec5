//! Message schemas shared by the server and [`crate::client`].

use std::collections::BTreeMap;

use interact_core::math::quat_to_wxyz;
use interact_core::replay::{hex16, state_hash};
use interact_core::session::{HelperFrame, ScoreReport, Session, StepStatus, UserInput};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodyPose {
    pub id: String,
    pub pos: [f64; 3],
    /// `[w, x, y, z]`
    pub quat: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CableNodes {
    pub id: String,
    pub nodes: Vec<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepState {
    pub id: String,
    #[serde(flatten)]
    pub status: StepStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActiveStep {
    pub id: String,
    /// Absent when the difficulty hides the instruction panel.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instruction: Option<String>,
}

/// Snapshot pushed to stream subscribers every `stream_divisor` ticks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireFrame {
    pub tick: u64,
    pub time: f64,
    pub bodies: Vec<BodyPose>,
    pub cables: Vec<CableNodes>,
    pub steps: Vec<StepState>,
    pub active: Vec<ActiveStep>,
    pub helpers: Vec<HelperFrame>,
    /// Events fired since the previous frame.
    pub fired: Vec<String>,
    /// Steps completed or skipped since the previous frame.
    pub completed: Vec<String>,
    pub score_partial: f64,
    pub held: Option<String>,
}

impl WireFrame {
    pub fn snapshot(session: &Session, fired: Vec<String>, completed: Vec<String>, score_partial: f64) -> Self {
        let world = session.world();
        let helpers = session.helpers();
        let active = session
            .active_steps()
            .into_iter()
            .map(|id| {
                let instruction = helpers.iter().find(|h| h.step == id).and_then(|h| h.instruction.clone());
                ActiveStep { id, instruction }
            })
            .collect();
        WireFrame {
            tick: session.tick_count(),
            time: session.clock(),
            bodies: world
                .bodies()
                .map(|b| {
                    let p = b.pose.position;
                    BodyPose {
                        id: b.part_id.clone(),
                        pos: [p.x, p.y, p.z],
                        quat: quat_to_wxyz(&b.pose.orientation),
                    }
                })
                .collect(),
            cables: world
                .cables()
                .map(|c| CableNodes {
                    id: c.id.clone(),
                    nodes: c.positions.iter().map(|p| [p.x, p.y, p.z]).collect(),
                })
                .collect(),
            steps: step_states(session),
            active,
            helpers,
            fired,
            completed,
            score_partial,
            held: session.held().map(str::to_string),
        }
    }
}

pub fn step_states(session: &Session) -> Vec<StepState> {
    session
        .statuses()
        .map(|(id, s)| StepState {
            id: id.to_string(),
            status: s.clone(),
        })
        .collect()
}

/// Session control that is not an engine input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Control {
    Pause,
    Resume,
    Abandon,
}

/// A client message: any [`UserInput`] or a [`Control`], both tagged by
/// `kind`, e.g. `{"kind":"grab","part":"mirror"}` or `{"kind":"pause"}`.
#[derive(Clone, Debug, PartialEq)]
pub enum ClientCommand {
    Input(UserInput),
    Control(Control),
}

impl ClientCommand {
    pub fn parse(text: &str) -> Result<ClientCommand, String> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let kind = v.get("kind").and_then(|k| k.as_str()).ok_or("missing string field `kind`")?;
        let control = match kind {
            "pause" => Some(Control::Pause),
            "resume" => Some(Control::Resume),
            "abandon" => Some(Control::Abandon),
            _ => None,
        };
        if let Some(c) = control {
            if v.as_object().is_some_and(|o| o.len() > 1) {
                return Err(format!("`{kind}` takes no fields"));
            }
            return Ok(ClientCommand::Control(c));
        }
        serde_json::from_value(v).map(ClientCommand::Input).map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        match self {
            ClientCommand::Input(i) => serde_json::to_string(i),
            ClientCommand::Control(c) => serde_json::to_string(&serde_json::json!({ "kind": c })),
        }
        .expect("command serializes")
    }
}

impl From<UserInput> for ClientCommand {
    fn from(i: UserInput) -> Self {
        ClientCommand::Input(i)
    }
}

impl From<Control> for ClientCommand {
    fn from(c: Control) -> Self {
        ClientCommand::Control(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalMessage {
    pub tick: u64,
    pub hash: String,
    pub report: ScoreReport,
}

/// Everything the server sends on a stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ServerMessage {
    Frame(Box<WireFrame>),
    Final(FinalMessage),
    Error {
        /// The tick an input was rejected on, for engine rejections.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tick: Option<u64>,
        message: String,
    },
}

impl ServerMessage {
    pub fn error(message: impl Into<String>) -> Self {
        ServerMessage::Error {
            tick: None,
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("message serializes")
    }
}

/// Body of `GET /sessions/{id}/state`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub id: String,
    pub scenario_id: String,
    pub scenario: String,
    pub difficulty: String,
    pub tick: u64,
    pub time: f64,
    pub paused: bool,
    pub ended: bool,
    pub steps: Vec<StepState>,
    pub held: Option<String>,
    pub flags: Vec<String>,
    pub hints: BTreeMap<String, u32>,
    pub fired: Vec<String>,
    pub score_partial: f64,
    pub hash: String,
    /// Present once the session has ended.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ScoreReport>,
}

impl SessionState {
    pub fn of(id: &str, scenario_id: &str, session: &Session, paused: bool, score_partial: f64, report: Option<ScoreReport>) -> Self {
        SessionState {
            id: id.to_string(),
            scenario_id: scenario_id.to_string(),
            scenario: session.scenario().name.clone(),
            difficulty: session.difficulty().id.clone(),
            tick: session.tick_count(),
            time: session.clock(),
            paused,
            ended: report.is_some(),
            steps: step_states(session),
            held: session.held().map(str::to_string),
            flags: session.flags().iter().cloned().collect(),
            hints: session
                .statuses()
                .map(|(id, _)| (id.to_string(), session.hints_used(id)))
                .filter(|(_, n)| *n > 0)
                .collect(),
            fired: session.fired_events().into_iter().map(str::to_string).collect(),
            score_partial,
            hash: hex16(state_hash(session)),
            report,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub valid: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub step_count: usize,
    #[serde(default)]
    pub difficulties: Vec<String>,
    /// First error diagnostic, for invalid files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CreateSession {
    pub scenario_id: String,
    pub difficulty: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Created {
    pub id: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub available: Vec<String>,
}
