use serde::{Deserialize, Serialize};

use crate::math::{quat_from_wxyz, quat_to_wxyz, Pose, Vec3};

pub const HAND_QUAT_TOLERANCE: f64 = 1e-6;

/// One user input. JSON form is tagged by `kind`, e.g.
/// `{"kind":"hand_pose","pos":[x,y,z],"quat":[w,x,y,z]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UserInput {
    HandPose { pos: [f64; 3], quat: [f64; 4] },
    Grab { part: String },
    Release,
    Press { action_id: String },
    Hint { step: String },
    Skip { step: String },
    SetFlag { name: String },
}

impl UserInput {
    pub fn hand(pose: &Pose) -> Self {
        let p = pose.position;
        UserInput::HandPose {
            pos: [p.x, p.y, p.z],
            quat: quat_to_wxyz(&pose.orientation),
        }
    }

    pub fn grab(part: impl Into<String>) -> Self {
        UserInput::Grab { part: part.into() }
    }

    pub fn press(action_id: impl Into<String>) -> Self {
        UserInput::Press {
            action_id: action_id.into(),
        }
    }

    pub fn hint(step: impl Into<String>) -> Self {
        UserInput::Hint { step: step.into() }
    }

    pub fn skip(step: impl Into<String>) -> Self {
        UserInput::Skip { step: step.into() }
    }

    pub fn set_flag(name: impl Into<String>) -> Self {
        UserInput::SetFlag { name: name.into() }
    }

    /// The hand pose, if this is a valid hand-pose input. The quaternion
    /// must be unit length to within `HAND_QUAT_TOLERANCE`.
    pub fn pose(&self) -> Option<Pose> {
        match self {
            UserInput::HandPose { pos, quat } => {
                let norm = quat.iter().map(|c| c * c).sum::<f64>().sqrt();
                if !((norm - 1.0).abs() <= HAND_QUAT_TOLERANCE) {
                    return None;
                }
                let pose = Pose::new(Vec3::new(pos[0], pos[1], pos[2]), quat_from_wxyz(*quat));
                pose.is_valid().then_some(pose)
            }
            _ => None,
        }
    }

    /// Canonical bytes, folded into the session's input digest.
    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        let mut s = |tag: u8, text: &str| {
            out.push(tag);
            out.extend_from_slice(&(text.len() as u32).to_le_bytes());
            out.extend_from_slice(text.as_bytes());
        };
        match self {
            UserInput::HandPose { pos, quat } => {
                out.push(0);
                for c in pos.iter().chain(quat.iter()) {
                    out.extend_from_slice(&c.to_le_bytes());
                }
            }
            UserInput::Grab { part } => s(1, part),
            UserInput::Release => s(2, ""),
            UserInput::Press { action_id } => s(3, action_id),
            UserInput::Hint { step } => s(4, step),
            UserInput::Skip { step } => s(5, step),
            UserInput::SetFlag { name } => s(6, name),
        }
    }
}
