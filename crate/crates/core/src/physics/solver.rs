//! Sequential-impulse contact solver.

use nalgebra::Matrix3;

use crate::math::Vec3;

/// Velocity state of one body as seen by the solver.
#[derive(Clone, Debug)]
pub struct SolverBody {
    pub inv_mass: f64,
    /// World-frame inverse inertia.
    pub inv_inertia: Matrix3<f64>,
    pub com: Vec3,
    pub v: Vec3,
    pub w: Vec3,
}

impl SolverBody {
    pub fn fixed(com: Vec3) -> Self {
        SolverBody {
            inv_mass: 0.0,
            inv_inertia: Matrix3::zeros(),
            com,
            v: Vec3::zeros(),
            w: Vec3::zeros(),
        }
    }

    fn velocity_at(&self, r: &Vec3) -> Vec3 {
        self.v + self.w.cross(r)
    }

    fn apply(&mut self, r: &Vec3, impulse: &Vec3) {
        self.v += impulse * self.inv_mass;
        self.w += self.inv_inertia * r.cross(impulse);
    }
}

/// One contact point between solver bodies `a` and `b`, normal from a to b.
#[derive(Clone, Debug)]
pub struct ContactPoint {
    pub a: usize,
    pub b: usize,
    pub point: Vec3,
    pub normal: Vec3,
    pub depth: f64,
    pub friction: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverParams {
    pub iterations: usize,
    pub dt: f64,
    pub baumgarte: f64,
    pub slop: f64,
}

/// Deterministic orthonormal tangent pair for a unit normal.
pub fn tangent_basis(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.57 { Vec3::x() } else { Vec3::y() };
    let t1 = n.cross(&helper).normalize();
    let t2 = n.cross(&t1);
    (t1, t2)
}

struct Row {
    ra: Vec3,
    rb: Vec3,
    n: Vec3,
    t: [Vec3; 2],
    mass_n: f64,
    mass_t: [f64; 2],
    bias: f64,
    jn: f64,
    jt: Vec3,
}

fn effective_mass(a: &SolverBody, b: &SolverBody, ra: &Vec3, rb: &Vec3, d: &Vec3) -> f64 {
    let ca = ra.cross(d);
    let cb = rb.cross(d);
    let k = a.inv_mass + b.inv_mass + ca.dot(&(a.inv_inertia * ca)) + cb.dot(&(b.inv_inertia * cb));
    if k > 0.0 {
        1.0 / k
    } else {
        0.0
    }
}

fn pair<'a>(bodies: &'a mut [SolverBody], a: usize, b: usize) -> (&'a mut SolverBody, &'a mut SolverBody) {
    assert_ne!(a, b, "contact between a body and itself");
    if a < b {
        let (lo, hi) = bodies.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    } else {
        let (lo, hi) = bodies.split_at_mut(a);
        (&mut hi[0], &mut lo[b])
    }
}

/// Runs `iterations` passes over the contacts in the given order. Restitution
/// is zero; penetration beyond `slop` feeds a Baumgarte velocity bias.
/// Friction is clamped to the disc `|j_t| ≤ μ j_n`.
pub fn solve(bodies: &mut [SolverBody], contacts: &[ContactPoint], p: &SolverParams) {
    let mut rows: Vec<Row> = contacts
        .iter()
        .map(|c| {
            let (a, b) = (&bodies[c.a], &bodies[c.b]);
            let ra = c.point - a.com;
            let rb = c.point - b.com;
            let (t1, t2) = tangent_basis(&c.normal);
            Row {
                mass_n: effective_mass(a, b, &ra, &rb, &c.normal),
                mass_t: [effective_mass(a, b, &ra, &rb, &t1), effective_mass(a, b, &ra, &rb, &t2)],
                bias: p.baumgarte / p.dt * (c.depth - p.slop).max(0.0),
                ra,
                rb,
                n: c.normal,
                t: [t1, t2],
                jn: 0.0,
                jt: Vec3::zeros(),
            }
        })
        .collect();
    for _ in 0..p.iterations {
        for (c, row) in contacts.iter().zip(rows.iter_mut()) {
            let (a, b) = pair(bodies, c.a, c.b);
            // normal: positive impulse pushes b along n
            let vrel = b.velocity_at(&row.rb) - a.velocity_at(&row.ra);
            let vn = vrel.dot(&row.n);
            let dj = row.mass_n * (row.bias - vn);
            let jn = (row.jn + dj).max(0.0);
            let dj = jn - row.jn;
            row.jn = jn;
            let imp = row.n * dj;
            a.apply(&row.ra, &-imp);
            b.apply(&row.rb, &imp);

            let vrel = b.velocity_at(&row.rb) - a.velocity_at(&row.ra);
            let mut jt = row.jt;
            for k in 0..2 {
                jt += row.t[k] * (-row.mass_t[k] * vrel.dot(&row.t[k]));
            }
            let limit = c.friction * row.jn;
            let len = jt.norm();
            if len > limit {
                jt *= if len > 0.0 { limit / len } else { 0.0 };
            }
            let imp = jt - row.jt;
            row.jt = jt;
            a.apply(&row.ra, &-imp);
            b.apply(&row.rb, &imp);
        }
    }
}
