use serde::{Deserialize, Serialize};

use crate::math::PoseError;

pub const BASE_SCORE: f64 = 100.0;
pub const FACTOR_FLOOR: f64 = 0.5;

/// 1 up to par, then linear down to the 0.5 floor reached at twice par.
pub fn time_factor(t: f64, par: f64) -> f64 {
    if t <= par {
        1.0
    } else {
        (1.0 - 0.5 * (t - par) / par).max(FACTOR_FLOOR)
    }
}

/// `1 − 0.25·(d_pos/pos_tol + d_rot/rot_tol)`, clamped to `[0.5, 1]`.
pub fn accuracy_factor(residual: &PoseError, pos_tol: f64, rot_tol: f64) -> f64 {
    (1.0 - 0.25 * (residual.d_pos / pos_tol + residual.d_rot / rot_tol)).clamp(FACTOR_FLOOR, 1.0)
}

pub fn step_score(time_factor: f64, accuracy_factor: f64, hint_penalty: f64, hints: u32) -> f64 {
    (BASE_SCORE * time_factor * accuracy_factor - hint_penalty * hints as f64).clamp(0.0, BASE_SCORE)
}

/// Rounds half away from zero to one decimal.
pub fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepScore {
    pub step: String,
    pub base: f64,
    pub time_factor: f64,
    pub accuracy_factor: f64,
    pub hints: u32,
    /// Points deducted for hints.
    pub hint_penalty: f64,
    pub skipped: bool,
    /// Set for steps left Locked or Active by an abandoned session.
    pub incomplete: bool,
    /// Seconds from activation to completion.
    pub time: Option<f64>,
    pub step_score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub scenario: String,
    pub difficulty: String,
    pub abandoned: bool,
    pub steps: Vec<StepScore>,
    pub total: f64,
}
