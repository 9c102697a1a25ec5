//! GJK distance queries between convex cores.
//!
//! Shapes are split into a polytope-like core (point, segment, box, hull)
//! and a margin radius. GJK runs on the cores, so the Minkowski difference
//! is always a polytope and both GJK and EPA terminate exactly.

use super::shape::Shape;
use crate::math::{Pose, Vec3};

/// A shape placed in the world.
#[derive(Clone, Copy)]
pub struct Placed<'a> {
    pub shape: &'a Shape,
    pub pose: &'a Pose,
}

impl Placed<'_> {
    pub fn core_support(&self, d: &Vec3) -> Vec3 {
        let local = self.pose.orientation.inverse_transform_vector(d);
        self.pose.transform_point(&self.shape.core_support(&local))
    }

    pub fn margin(&self) -> f64 {
        self.shape.margin()
    }
}

/// Point of the Minkowski difference `A − B` with its witnesses.
#[derive(Clone, Copy, Debug)]
pub struct SupportPoint {
    pub w: Vec3,
    pub a: Vec3,
    pub b: Vec3,
}

pub fn support(a: &Placed, b: &Placed, d: &Vec3) -> SupportPoint {
    let pa = a.core_support(d);
    let pb = b.core_support(&-d);
    SupportPoint { w: pa - pb, a: pa, b: pb }
}

#[derive(Clone, Debug)]
pub enum GjkResult {
    /// Closest points on the two cores and their distance.
    Separated { distance: f64, pa: Vec3, pb: Vec3 },
    /// The cores overlap; the final simplex encloses (or touches) the origin.
    Intersecting { simplex: Vec<SupportPoint> },
}

const MAX_ITERATIONS: usize = 128;
const REL_TOLERANCE: f64 = 1e-12;

/// Closest point of a simplex to the origin, as barycentric weights.
/// Vertices with zero weight are dropped from the returned simplex.
fn closest_on_simplex(s: &[SupportPoint]) -> (Vec<(SupportPoint, f64)>, bool) {
    match s.len() {
        1 => (vec![(s[0], 1.0)], false),
        2 => (segment(s[0], s[1]), false),
        3 => (triangle(s[0], s[1], s[2]), false),
        _ => tetrahedron(s[0], s[1], s[2], s[3]),
    }
}

fn segment(a: SupportPoint, b: SupportPoint) -> Vec<(SupportPoint, f64)> {
    let ab = b.w - a.w;
    let denom = ab.norm_squared();
    let t = if denom > 0.0 { (-a.w).dot(&ab) / denom } else { 0.0 };
    if t <= 0.0 {
        vec![(a, 1.0)]
    } else if t >= 1.0 {
        vec![(b, 1.0)]
    } else {
        vec![(a, 1.0 - t), (b, t)]
    }
}

// Ericson, closest point on triangle to a point (here the origin).
fn triangle(a: SupportPoint, b: SupportPoint, c: SupportPoint) -> Vec<(SupportPoint, f64)> {
    let ab = b.w - a.w;
    let ac = c.w - a.w;
    let ap = -a.w;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return vec![(a, 1.0)];
    }
    let bp = -b.w;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return vec![(b, 1.0)];
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return vec![(a, 1.0 - v), (b, v)];
    }
    let cp = -c.w;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return vec![(c, 1.0)];
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return vec![(a, 1.0 - w), (c, w)];
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return vec![(b, 1.0 - w), (c, w)];
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    vec![(a, 1.0 - v - w), (b, v), (c, w)]
}

fn tetrahedron(
    a: SupportPoint,
    b: SupportPoint,
    c: SupportPoint,
    d: SupportPoint,
) -> (Vec<(SupportPoint, f64)>, bool) {
    let pts = [a, b, c, d];
    let faces = [(0, 1, 2, 3), (0, 1, 3, 2), (0, 2, 3, 1), (1, 2, 3, 0)];
    let mut best: Option<(f64, Vec<(SupportPoint, f64)>)> = None;
    let mut inside = true;
    for &(i, j, k, l) in &faces {
        let n = (pts[j].w - pts[i].w).cross(&(pts[k].w - pts[i].w));
        let side_origin = n.dot(&-pts[i].w);
        let side_other = n.dot(&(pts[l].w - pts[i].w));
        // origin strictly on the far side of this face from the 4th vertex
        if side_origin * side_other < 0.0 || side_other == 0.0 {
            inside = false;
            let r = triangle(pts[i], pts[j], pts[k]);
            let p: Vec3 = r.iter().map(|(s, t)| s.w * *t).sum();
            let dist = p.norm_squared();
            if best.as_ref().is_none_or(|(bd, _)| dist < *bd) {
                best = Some((dist, r));
            }
        }
    }
    if inside {
        return (pts.iter().map(|p| (*p, 0.25)).collect(), true);
    }
    (best.expect("a face sees the origin").1, false)
}

/// Runs GJK between the cores of two placed shapes.
pub fn gjk(a: &Placed, b: &Placed) -> GjkResult {
    let scale = 1.0 + (a.pose.position - b.pose.position).norm();
    let mut dir = b.pose.position - a.pose.position;
    if dir.norm_squared() == 0.0 {
        dir = Vec3::x();
    }
    let first = support(a, b, &-dir);
    let mut simplex = vec![first];
    let mut v = first.w;
    let mut weights = vec![(first, 1.0)];
    for _ in 0..MAX_ITERATIONS {
        let vv = v.norm_squared();
        if vv <= (1e-12 * scale).powi(2) {
            return GjkResult::Intersecting { simplex };
        }
        let w = support(a, b, &-v);
        // no further progress toward the origin
        if vv - v.dot(&w.w) <= REL_TOLERANCE * vv
            || simplex.iter().any(|s| s.w == w.w)
        {
            break;
        }
        simplex.push(w);
        let (reduced, inside) = closest_on_simplex(&simplex);
        if inside {
            return GjkResult::Intersecting { simplex };
        }
        let nv: Vec3 = reduced.iter().map(|(s, t)| s.w * *t).sum();
        simplex = reduced.iter().map(|(s, _)| *s).collect();
        if nv.norm_squared() >= vv {
            // numerical stall; keep the previous best
            break;
        }
        v = nv;
        weights = reduced;
    }
    let pa: Vec3 = weights.iter().map(|(s, t)| s.a * *t).sum();
    let pb: Vec3 = weights.iter().map(|(s, t)| s.b * *t).sum();
    GjkResult::Separated {
        distance: v.norm(),
        pa,
        pb,
    }
}

/// Distance between two placed shapes including margins; zero or negative
/// values are reported as `None` (overlapping).
pub fn distance(a: &Placed, b: &Placed) -> Option<f64> {
    match gjk(a, b) {
        GjkResult::Separated { distance, .. } => {
            let d = distance - a.margin() - b.margin();
            (d > 0.0).then_some(d)
        }
        GjkResult::Intersecting { .. } => None,
    }
}
