//! Cables as chains of point masses joined by compliant distance
//! constraints, stepped with position-based dynamics.
//!
//! Segments only resist stretching. A compressed segment exerts no force,
//! which lets a cable with coincident endpoints fold down instead of
//! locking into a zig-zag.

use serde::{Deserialize, Serialize};

use crate::math::Vec3;

/// Where a cable end is pinned.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Attachment {
    /// A point in a body's local frame.
    Body { part: String, local: Vec3 },
    /// A fixed world point.
    World { point: Vec3 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CableParams {
    pub iterations: usize,
    pub dt: f64,
    pub gravity: Vec3,
}

impl Default for CableParams {
    fn default() -> Self {
        CableParams {
            iterations: 20,
            dt: 1.0 / 120.0,
            gravity: Vec3::new(0.0, 0.0, -9.81),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cable {
    pub id: String,
    pub positions: Vec<Vec3>,
    pub velocities: Vec<Vec3>,
    /// Rest length of each of the `positions.len() - 1` segments.
    pub rest_length: f64,
    pub node_mass: f64,
    /// Inverse stiffness in m/N; zero is inextensible.
    pub compliance: f64,
    /// Linear drag rate in 1/s.
    pub damping: f64,
    pub start: Option<Attachment>,
    pub end: Option<Attachment>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CableError {
    #[error("E_CABLE_TOO_SHORT: endpoints are {span} m apart but the cable is only {length} m long")]
    TooShort { span: f64, length: f64 },
    #[error("a cable needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("cable length must be positive and finite, got {0}")]
    BadLength(f64),
    #[error("static solve needs both ends pinned to world points")]
    NotPinned,
}

impl CableError {
    pub fn code(&self) -> &'static str {
        match self {
            CableError::TooShort { .. } => "E_CABLE_TOO_SHORT",
            CableError::TooFewNodes(_) => "E_CABLE_NODES",
            CableError::BadLength(_) => "E_CABLE_LENGTH",
            CableError::NotPinned => "E_CABLE_NOT_PINNED",
        }
    }
}

pub const DEFAULT_NODE_MASS: f64 = 0.01;
pub const DEFAULT_CABLE_DAMPING: f64 = 0.5;

/// Builds a cable of `nodes` points evenly spaced on the segment `a → b`.
/// Ends start unattached; use [`Cable::pin_start`] and friends to attach.
pub fn init_cable(id: impl Into<String>, total_length: f64, nodes: usize, a: Vec3, b: Vec3) -> Result<Cable, CableError> {
    if nodes < 2 {
        return Err(CableError::TooFewNodes(nodes));
    }
    if !(total_length.is_finite() && total_length > 0.0) {
        return Err(CableError::BadLength(total_length));
    }
    let span = (b - a).norm();
    if span > total_length {
        return Err(CableError::TooShort {
            span,
            length: total_length,
        });
    }
    let segs = (nodes - 1) as f64;
    let positions = (0..nodes).map(|i| a + (b - a) * (i as f64 / segs)).collect();
    Ok(Cable {
        id: id.into(),
        positions,
        velocities: vec![Vec3::zeros(); nodes],
        rest_length: total_length / segs,
        node_mass: DEFAULT_NODE_MASS,
        compliance: 0.0,
        damping: DEFAULT_CABLE_DAMPING,
        start: None,
        end: None,
    })
}

impl Cable {
    pub fn pin_start(mut self, a: Attachment) -> Self {
        self.start = Some(a);
        self
    }

    pub fn pin_end(mut self, a: Attachment) -> Self {
        self.end = Some(a);
        self
    }

    /// Pins both ends at their current positions.
    pub fn pinned_in_place(self) -> Self {
        let first = self.positions[0];
        let last = *self.positions.last().unwrap();
        self.pin_start(Attachment::World { point: first })
            .pin_end(Attachment::World { point: last })
    }

    pub fn total_rest_length(&self) -> f64 {
        self.rest_length * (self.positions.len() - 1) as f64
    }

    pub fn arc_length(&self) -> f64 {
        self.positions.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Largest relative deviation of a segment from its rest length.
    pub fn max_strain(&self) -> f64 {
        self.positions
            .windows(2)
            .map(|w| ((w[1] - w[0]).norm() - self.rest_length).abs() / self.rest_length)
            .fold(0.0, f64::max)
    }

    pub fn max_speed(&self) -> f64 {
        self.velocities.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.node_mass * self.velocities.iter().map(|v| v.norm_squared()).sum::<f64>()
    }

    fn pins(&self, resolve: &dyn Fn(&Attachment) -> Option<Vec3>) -> (Option<Vec3>, Option<Vec3>) {
        (
            self.start.as_ref().and_then(resolve),
            self.end.as_ref().and_then(resolve),
        )
    }

    fn inverse_masses(&self, pins: (Option<Vec3>, Option<Vec3>)) -> Vec<f64> {
        let n = self.positions.len();
        let mut w = vec![1.0 / self.node_mass; n];
        if pins.0.is_some() {
            w[0] = 0.0;
        }
        if pins.1.is_some() {
            w[n - 1] = 0.0;
        }
        w
    }
}

/// Resolves world attachments only.
pub fn world_only(a: &Attachment) -> Option<Vec3> {
    match a {
        Attachment::World { point } => Some(*point),
        Attachment::Body { .. } => None,
    }
}

fn project_segment(p: &mut [Vec3], w: &[f64], i: usize, rest: f64, alpha: f64, lambda: &mut f64) {
    let d = p[i + 1] - p[i];
    let len = d.norm();
    if len <= 1e-12 {
        return;
    }
    let c = len - rest;
    let wsum = w[i] + w[i + 1];
    if wsum == 0.0 {
        return;
    }
    let dl = (-c - alpha * *lambda) / (wsum + alpha);
    // tension only: the accumulated multiplier never pushes nodes apart
    let next = (*lambda + dl).min(0.0);
    let dl = next - *lambda;
    *lambda = next;
    let n = d / len;
    p[i] -= n * (w[i] * dl);
    p[i + 1] += n * (w[i + 1] * dl);
}

fn predict(c: &Cable, pins: (Option<Vec3>, Option<Vec3>), w: &[f64], params: &CableParams, damping: f64) -> Vec<Vec3> {
    let dt = params.dt;
    let keep = (1.0 - damping * dt).max(0.0);
    let n = c.positions.len();
    let mut p = c.positions.clone();
    for i in 0..n {
        if w[i] > 0.0 {
            let v = c.velocities[i] * keep + params.gravity * dt;
            p[i] += v * dt;
        }
    }
    if let Some(a) = pins.0 {
        p[0] = a;
    }
    if let Some(b) = pins.1 {
        p[n - 1] = b;
    }
    p
}

fn relax(c: &Cable, p: &mut [Vec3], w: &[f64], params: &CableParams) {
    let segs = p.len() - 1;
    let alpha = c.compliance / (params.dt * params.dt);
    let mut lambda = vec![0.0; segs];
    for _ in 0..params.iterations {
        for i in 0..segs {
            project_segment(p, w, i, c.rest_length, alpha, &mut lambda[i]);
        }
        for i in (0..segs).rev() {
            project_segment(p, w, i, c.rest_length, alpha, &mut lambda[i]);
        }
    }
}

/// Sweeps until no segment is stretched by more than 1e-12 of its rest
/// length, or 10⁴ iterations.
fn relax_converged(c: &Cable, p: &mut [Vec3], w: &[f64]) {
    let segs = p.len() - 1;
    for _ in 0..10_000 {
        let mut lambda = vec![0.0; segs];
        for i in 0..segs {
            project_segment(p, w, i, c.rest_length, 0.0, &mut lambda[i]);
        }
        for i in (0..segs).rev() {
            project_segment(p, w, i, c.rest_length, 0.0, &mut lambda[i]);
        }
        let worst = p
            .windows(2)
            .map(|s| (s[1] - s[0]).norm() - c.rest_length)
            .fold(0.0, f64::max);
        if worst <= 1e-12 * c.rest_length {
            return;
        }
    }
}

fn finish(c: &mut Cable, p: Vec<Vec3>, dt: f64) {
    for (i, np) in p.into_iter().enumerate() {
        c.velocities[i] = (np - c.positions[i]) / dt;
        c.positions[i] = np;
    }
}

/// One position-based dynamics tick: predict under gravity with drag, pin
/// attached ends, project segments forward then backward for the configured
/// iterations, and derive velocities from the displacement.
pub fn step_cable(c: &mut Cable, resolve: &dyn Fn(&Attachment) -> Option<Vec3>, params: &CableParams) {
    let pins = c.pins(resolve);
    let w = c.inverse_masses(pins);
    let mut p = predict(c, pins, &w, params, c.damping);
    relax(c, &mut p, &w, params);
    finish(c, p, params.dt);
}

/// Newton projection of the stretched segments back to rest length
/// (tridiagonal `J W Jᵀ` solve per iteration). Used by the static solver
/// to remove the residual strain Gauss-Seidel leaves behind.
fn fast_project(c: &Cable, p: &mut [Vec3], w: &[f64]) {
    let segs = p.len() - 1;
    let rest = c.rest_length;
    for _ in 0..20 {
        let dirs: Vec<Vec3> = (0..segs).map(|i| p[i + 1] - p[i]).collect();
        let lens: Vec<f64> = dirs.iter().map(|d| d.norm()).collect();
        let active: Vec<bool> = (0..segs)
            .map(|i| lens[i] > 1e-12 && lens[i] - rest > 1e-13 * rest && w[i] + w[i + 1] > 0.0)
            .collect();
        if !active.iter().any(|&a| a) {
            return;
        }
        let n: Vec<Vec3> = (0..segs)
            .map(|i| if lens[i] > 1e-12 { dirs[i] / lens[i] } else { Vec3::zeros() })
            .collect();
        let mut diag = vec![1.0; segs];
        let mut off = vec![0.0; segs.saturating_sub(1)];
        let mut rhs = vec![0.0; segs];
        for i in 0..segs {
            if active[i] {
                diag[i] = w[i] + w[i + 1];
                rhs[i] = lens[i] - rest;
            }
            if i + 1 < segs && active[i] && active[i + 1] {
                off[i] = -w[i + 1] * n[i].dot(&n[i + 1]);
            }
        }
        let lambda = thomas(&off, &diag, &rhs);
        for i in 0..segs {
            let f = n[i] * lambda[i];
            p[i] += f * w[i];
            p[i + 1] -= f * w[i + 1];
        }
    }
}

/// Solves a symmetric tridiagonal system with sub/super diagonal `off`.
fn thomas(off: &[f64], diag: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { off[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - off[i - 1] * c[i - 1];
        c[i] = if i + 1 < n { off[i] / m } else { 0.0 };
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Drag rate used while settling.
pub const STATIC_DAMPING: f64 = 0.99;
pub const STATIC_SPEED_TOLERANCE: f64 = 1e-5;
pub const STATIC_MAX_TICKS: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StaticReport {
    pub converged: bool,
    pub ticks: usize,
    /// Largest relative segment strain.
    pub max_violation: f64,
    pub max_speed: f64,
}

/// Relaxes a cable pinned at both ends to rest: damped ticks, each followed
/// by an exact projection onto the rest lengths, until every node is slower
/// than 1e-5 m/s or the tick cap is hit.
pub fn static_solve(c: &mut Cable, params: &CableParams) -> Result<StaticReport, CableError> {
    static_solve_observed(c, params, |_| {})
}

/// [`static_solve`], calling `on_tick` after every tick.
///
/// Settling runs in two phases. The first alternates damped Gauss-Seidel
/// ticks with an exact projection. Once the cable is still, a second phase
/// keeps only the projection, whose fixed point is free of the sweep-order
/// bias, and runs until the cable is still again.
pub fn static_solve_observed(
    c: &mut Cable,
    params: &CableParams,
    mut on_tick: impl FnMut(&Cable),
) -> Result<StaticReport, CableError> {
    let pins = c.pins(&world_only);
    if pins.0.is_none() || pins.1.is_none() {
        return Err(CableError::NotPinned);
    }
    let w = c.inverse_masses(pins);
    let exact = c.compliance == 0.0;
    let mut ticks = 0;
    let mut converged = false;
    let mut sweeping = true;
    while ticks < STATIC_MAX_TICKS {
        let mut p = predict(c, pins, &w, params, STATIC_DAMPING);
        if sweeping || !exact {
            relax(c, &mut p, &w, params);
            if exact {
                fast_project(c, &mut p, &w);
            }
        } else {
            relax_converged(c, &mut p, &w);
        }
        finish(c, p, params.dt);
        ticks += 1;
        on_tick(c);
        if c.max_speed() < STATIC_SPEED_TOLERANCE {
            if sweeping && exact {
                sweeping = false;
            } else {
                converged = true;
                break;
            }
        }
    }
    Ok(StaticReport {
        converged,
        ticks,
        max_violation: c.max_strain(),
        max_speed: c.max_speed(),
    })
}
