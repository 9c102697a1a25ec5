//! Reference implementations the engine is checked against. None of them
//! call into the engine's own geometry or condition code.

#![allow(dead_code)]

use interact_core::math::{Pose, Vec3};
use interact_core::scene::{ColliderShape, ConditionExpr};
use rand::{Rng, RngCore};

// ---------------------------------------------------------------- conditions

/// Six atoms: `done(s0..s2)` and `flag(f0..f2)`. Assignment bit `i` gives
/// the truth of atom `i`.
pub const ATOMS: [&str; 6] = ["s0", "s1", "s2", "f0", "f1", "f2"];

/// Truth table of `e` over all 64 assignments, one bit per assignment,
/// evaluated column-wise on bitsets.
pub fn truth_table(e: &ConditionExpr) -> u64 {
    fn column(atom: usize) -> u64 {
        (0..64u64).filter(|a| a >> atom & 1 == 1).fold(0, |m, a| m | 1 << a)
    }
    let index = |name: &str| ATOMS.iter().position(|a| *a == name).expect("known atom");
    match e {
        ConditionExpr::Start => u64::MAX,
        ConditionExpr::Done(s) => column(index(s)),
        ConditionExpr::Flag(f) => column(index(f)),
        ConditionExpr::Not(x) => !truth_table(x),
        ConditionExpr::And(xs) => xs.iter().fold(u64::MAX, |m, x| m & truth_table(x)),
        ConditionExpr::Or(xs) => xs.iter().fold(0, |m, x| m | truth_table(x)),
    }
}

/// Random expression with at most `max_atoms` atom occurrences.
pub fn random_condition(rng: &mut impl RngCore, max_atoms: usize) -> ConditionExpr {
    let budget = rng.random_range(1..=max_atoms);
    gen_cond(rng, budget, 0)
}

fn gen_cond(rng: &mut impl RngCore, budget: usize, depth: usize) -> ConditionExpr {
    if budget == 1 || depth > 4 {
        let leaf = match rng.random_range(0..13) {
            0 => ConditionExpr::Start,
            k => {
                let i = (k - 1) % 6;
                if i < 3 {
                    ConditionExpr::done(ATOMS[i])
                } else {
                    ConditionExpr::flag(ATOMS[i])
                }
            }
        };
        return if rng.random_bool(0.25) { ConditionExpr::not(leaf) } else { leaf };
    }
    let n = rng.random_range(2..=budget.min(3));
    let mut left = budget;
    let mut parts = Vec::new();
    for i in 0..n {
        let rest = n - i - 1;
        let take = if rest == 0 { left } else { rng.random_range(1..=left - rest) };
        left -= take;
        parts.push(gen_cond(rng, take, depth + 1));
    }
    let e = if rng.random_bool(0.5) {
        ConditionExpr::And(parts)
    } else {
        ConditionExpr::Or(parts)
    };
    if rng.random_bool(0.2) {
        ConditionExpr::not(e)
    } else {
        e
    }
}

// ------------------------------------------------------------------ geometry

/// A convex solid described by a signed measure that is negative exactly
/// inside, zero on the surface and positive outside.
pub struct Solid {
    kind: ColliderShape,
    pose: Pose,
    /// Outward planes `(n, d)` with `n·x ≤ d` inside, for hulls.
    planes: Vec<(Vec3, f64)>,
}

impl Solid {
    pub fn new(kind: ColliderShape, pose: Pose) -> Self {
        let planes = match &kind {
            ColliderShape::ConvexHull { vertices } => brute_force_planes(vertices),
            _ => Vec::new(),
        };
        Solid { kind, pose, planes }
    }

    /// Exact signed distance for spheres, capsules and boxes; for hulls the
    /// largest plane offset, which has the same sign as the distance.
    pub fn measure(&self, p: &Vec3) -> f64 {
        let q = self.pose.orientation.inverse() * (p - self.pose.position);
        match &self.kind {
            ColliderShape::Sphere { radius } => q.norm() - radius,
            ColliderShape::Capsule { radius, half_height } => {
                let z = q.z.clamp(-half_height, *half_height);
                (q - Vec3::new(0.0, 0.0, z)).norm() - radius
            }
            ColliderShape::Box { half_extents: h } => {
                let d = q.abs() - h;
                let outside = Vec3::new(d.x.max(0.0), d.y.max(0.0), d.z.max(0.0)).norm();
                outside + d.x.max(d.y).max(d.z).min(0.0)
            }
            ColliderShape::ConvexHull { .. } => {
                self.planes.iter().map(|(n, d)| n.dot(&q) - d).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// World bounding box from the defining points.
    pub fn bounds(&self) -> (Vec3, Vec3) {
        let pts: Vec<Vec3> = match &self.kind {
            ColliderShape::Sphere { radius } => {
                return (
                    self.pose.position - Vec3::repeat(*radius),
                    self.pose.position + Vec3::repeat(*radius),
                )
            }
            ColliderShape::Capsule { radius, half_height } => {
                let a = self.pose.transform_point(&Vec3::new(0.0, 0.0, *half_height));
                let b = self.pose.transform_point(&Vec3::new(0.0, 0.0, -half_height));
                return (a.inf(&b) - Vec3::repeat(*radius), a.sup(&b) + Vec3::repeat(*radius));
            }
            ColliderShape::Box { half_extents: h } => (0..8)
                .map(|i| {
                    let s = |b: usize| if i >> b & 1 == 1 { 1.0 } else { -1.0 };
                    Vec3::new(s(0) * h.x, s(1) * h.y, s(2) * h.z)
                })
                .collect(),
            ColliderShape::ConvexHull { vertices } => vertices.clone(),
        };
        let w: Vec<Vec3> = pts.iter().map(|p| self.pose.transform_point(p)).collect();
        let lo = w.iter().fold(Vec3::repeat(f64::INFINITY), |m, p| m.inf(p));
        let hi = w.iter().fold(Vec3::repeat(f64::NEG_INFINITY), |m, p| m.sup(p));
        (lo, hi)
    }
}

/// Supporting planes of the hull of `v`: every vertex triple whose plane
/// leaves all vertices on one side.
pub fn brute_force_planes(v: &[Vec3]) -> Vec<(Vec3, f64)> {
    let scale = v.iter().map(|p| p.norm()).fold(0.0, f64::max).max(1e-12);
    let eps = 1e-9 * scale;
    let mut out: Vec<(Vec3, f64)> = Vec::new();
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            for k in j + 1..v.len() {
                let n = (v[j] - v[i]).cross(&(v[k] - v[i]));
                if n.norm() <= 1e-12 * scale * scale {
                    continue;
                }
                let n = n.normalize();
                let d = n.dot(&v[i]);
                let above = v.iter().any(|p| n.dot(p) - d > eps);
                let below = v.iter().any(|p| n.dot(p) - d < -eps);
                let plane = match (above, below) {
                    (false, _) => (n, d),
                    (true, false) => (-n, -d),
                    (true, true) => continue,
                };
                if !out.iter().any(|(m, e)| (m - plane.0).norm() < 1e-9 && (e - plane.1).abs() < eps) {
                    out.push(plane);
                }
            }
        }
    }
    out
}

/// What sampling says about a pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Overlap {
    /// Some point lies at least `band` inside both solids.
    Deep,
    /// No point comes within `band` of being inside both.
    Apart,
    /// Within `band` of touching; no verdict.
    Grazing,
}

/// Samples `n` points uniformly in the intersection of the two bounding
/// boxes grown by `band`, then polishes the best one by a shrinking random
/// search. The overlap measure `max(a(p), b(p))` is convex, so the search
/// descends towards its minimum.
pub fn sample_overlap(a: &Solid, b: &Solid, n: usize, band: f64, rng: &mut impl RngCore) -> (Overlap, f64) {
    let f = |p: &Vec3| a.measure(p).max(b.measure(p));
    let (alo, ahi) = a.bounds();
    let (blo, bhi) = b.bounds();
    let lo = alo.sup(&blo) - Vec3::repeat(band);
    let hi = ahi.inf(&bhi) + Vec3::repeat(band);
    if (0..3).any(|k| lo[k] > hi[k]) {
        return (Overlap::Apart, f64::INFINITY);
    }
    let mut best = (lo + hi) / 2.0;
    let mut best_f = f(&best);
    for _ in 0..n {
        let p = Vec3::new(
            rng.random_range(lo.x..=hi.x),
            rng.random_range(lo.y..=hi.y),
            rng.random_range(lo.z..=hi.z),
        );
        let v = f(&p);
        if v < best_f {
            best = p;
            best_f = v;
        }
    }
    let mut step = (hi - lo).norm() / 50.0;
    while step > 1e-7 && best_f > -band {
        let mut improved = false;
        for _ in 0..24 {
            let d = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let p = best + d * step;
            let v = f(&p);
            if v < best_f {
                best = p;
                best_f = v;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let verdict = if best_f <= -band {
        Overlap::Deep
    } else if best_f > band {
        Overlap::Apart
    } else {
        Overlap::Grazing
    };
    (verdict, best_f)
}

// ------------------------------------------------------------ random shapes

pub fn random_pose(rng: &mut impl RngCore, spread: f64) -> Pose {
    let p = Vec3::new(
        rng.random_range(-spread..spread),
        rng.random_range(-spread..spread),
        rng.random_range(-spread..spread),
    );
    let deg = |rng: &mut dyn RngCore| rng.random_range(-180.0f64..180.0).to_radians();
    Pose::from_rpy(p, deg(rng), deg(rng), deg(rng))
}

/// Random hull, capsule or box with features between 0.05 and 0.5.
pub fn random_shape(rng: &mut impl RngCore) -> ColliderShape {
    match rng.random_range(0..3) {
        0 => ColliderShape::Box {
            half_extents: Vec3::new(
                rng.random_range(0.05..0.5),
                rng.random_range(0.05..0.5),
                rng.random_range(0.05..0.5),
            ),
        },
        1 => ColliderShape::Capsule {
            radius: rng.random_range(0.05..0.3),
            half_height: rng.random_range(0.05..0.5),
        },
        _ => {
            let n = rng.random_range(5..12);
            let r = rng.random_range(0.1..0.5);
            // points on an ellipsoid, so all are hull vertices
            let axes = Vec3::new(r, r * rng.random_range(0.4..1.0), r * rng.random_range(0.4..1.0));
            let vertices = (0..n)
                .map(|_| {
                    let d = loop {
                        let d = Vec3::new(
                            rng.random_range(-1.0..1.0),
                            rng.random_range(-1.0..1.0),
                            rng.random_range(-1.0..1.0),
                        );
                        if d.norm() > 0.2 && d.norm() <= 1.0 {
                            break d.normalize();
                        }
                    };
                    d.component_mul(&axes)
                })
                .collect();
            ColliderShape::ConvexHull { vertices }
        }
    }
}
