//! Narrowphase: contact geometry between two placed shapes.

use std::cmp::Ordering;

use super::epa::{epa, Penetration};
use super::gjk::{gjk, GjkResult, Placed};
use super::shape::Shape;
use crate::math::{Pose, Vec3};
use crate::scene::ColliderShape;

/// Contact geometry. `normal` points from the first shape to the second;
/// translating the second shape by `depth · normal` separates them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactGeom {
    pub point: Vec3,
    pub normal: Vec3,
    pub depth: f64,
}

/// All contact points of a pair sharing one normal.
#[derive(Clone, Debug, PartialEq)]
pub struct Manifold {
    pub normal: Vec3,
    /// `(point, depth)` pairs.
    pub points: Vec<(Vec3, f64)>,
}

/// EPA gave up; `fallback` is the contact from its last best face.
#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
#[error("EPA did not converge; degenerate contact at depth {}", fallback.depth)]
pub struct DegenerateContact {
    pub fallback: ContactGeom,
}

fn flip(c: ContactGeom) -> ContactGeom {
    ContactGeom {
        normal: -c.normal,
        ..c
    }
}

fn flip_manifold(m: Manifold) -> Manifold {
    Manifold {
        normal: -m.normal,
        points: m.points,
    }
}

fn kind_rank(s: &Shape) -> u8 {
    match s.kind {
        ColliderShape::Sphere { .. } => 0,
        ColliderShape::Box { .. } => 1,
        ColliderShape::Capsule { .. } => 2,
        ColliderShape::ConvexHull { .. } => 3,
    }
}

// Total order on placed shapes, so that a pair is always evaluated in the
// same argument order and swapping arguments only flips the normal.
fn canonical_order(a: &Shape, pa: &Pose, b: &Shape, pb: &Pose) -> Ordering {
    let key = |s: &Shape, p: &Pose| {
        let mut k = vec![kind_rank(s) as f64];
        k.extend(p.position.iter());
        k.extend(p.orientation.coords.iter());
        k
    };
    let (ka, kb) = (key(a, pa), key(b, pb));
    for (x, y) in ka.iter().zip(&kb) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Contact between two shapes, or `None` when separated.
pub fn collide_pair(a: &Shape, pa: &Pose, b: &Shape, pb: &Pose) -> Result<Option<ContactGeom>, DegenerateContact> {
    if canonical_order(a, pa, b, pb) == Ordering::Greater {
        return match collide_ordered(b, pb, a, pa) {
            Ok(c) => Ok(c.map(flip)),
            Err(e) => Err(DegenerateContact {
                fallback: flip(e.fallback),
            }),
        };
    }
    collide_ordered(a, pa, b, pb)
}

fn collide_ordered(a: &Shape, pa: &Pose, b: &Shape, pb: &Pose) -> Result<Option<ContactGeom>, DegenerateContact> {
    use ColliderShape::*;
    Ok(match (&a.kind, &b.kind) {
        (Sphere { radius: ra }, Sphere { radius: rb }) => sphere_sphere(pa.position, *ra, pb.position, *rb),
        (Sphere { radius }, Box { half_extents }) => sphere_box(pa.position, *radius, half_extents, pb).map(flip),
        (Box { half_extents }, Sphere { radius }) => sphere_box(pb.position, *radius, half_extents, pa),
        (Box { half_extents: ha }, Box { half_extents: hb }) => {
            box_box(ha, pa, hb, pb).map(|m| deepest(&m))
        }
        _ => return gjk_contact(a, pa, b, pb),
    })
}

/// Contact manifold for the solver: several points for box pairs, a single
/// point otherwise.
pub fn manifold(a: &Shape, pa: &Pose, b: &Shape, pb: &Pose) -> Result<Option<Manifold>, DegenerateContact> {
    if let (ColliderShape::Box { half_extents: ha }, ColliderShape::Box { half_extents: hb }) = (&a.kind, &b.kind) {
        if canonical_order(a, pa, b, pb) == Ordering::Greater {
            return Ok(box_box(hb, pb, ha, pa).map(flip_manifold));
        }
        return Ok(box_box(ha, pa, hb, pb));
    }
    let single = |c: ContactGeom| Manifold {
        normal: c.normal,
        points: vec![(c.point, c.depth)],
    };
    match collide_pair(a, pa, b, pb) {
        Ok(c) => Ok(c.map(single)),
        Err(e) => Err(e),
    }
}

fn deepest(m: &Manifold) -> ContactGeom {
    let mut best = m.points[0];
    for p in &m.points[1..] {
        if p.1 > best.1 {
            best = *p;
        }
    }
    ContactGeom {
        point: best.0,
        normal: m.normal,
        depth: best.1,
    }
}

pub fn sphere_sphere(ca: Vec3, ra: f64, cb: Vec3, rb: f64) -> Option<ContactGeom> {
    let d = cb - ca;
    let dist = d.norm();
    let depth = ra + rb - dist;
    if depth <= 0.0 {
        return None;
    }
    let normal = if dist > 0.0 { d / dist } else { Vec3::z() };
    let pa = ca + normal * ra;
    let pb = cb - normal * rb;
    Some(ContactGeom {
        point: (pa + pb) * 0.5,
        normal,
        depth,
    })
}

/// Contact with the normal pointing from the box to the sphere.
pub fn sphere_box(center: Vec3, radius: f64, half: &Vec3, pose: &Pose) -> Option<ContactGeom> {
    let local = pose.orientation.inverse_transform_vector(&(center - pose.position));
    let clamped = Vec3::new(
        local.x.clamp(-half.x, half.x),
        local.y.clamp(-half.y, half.y),
        local.z.clamp(-half.z, half.z),
    );
    let delta = local - clamped;
    let dist = delta.norm();
    let (n_local, surface, depth) = if dist > 0.0 {
        (delta / dist, clamped, radius - dist)
    } else {
        // centre inside: push out through the nearest face
        let mut axis = 0;
        let mut best = f64::INFINITY;
        for i in 0..3 {
            let gap = half[i] - local[i].abs();
            if gap < best {
                best = gap;
                axis = i;
            }
        }
        let mut n = Vec3::zeros();
        n[axis] = if local[axis] >= 0.0 { 1.0 } else { -1.0 };
        let mut s = local;
        s[axis] = n[axis] * half[axis];
        (n, s, radius + best)
    };
    if depth <= 0.0 {
        return None;
    }
    let normal = pose.orientation * n_local;
    let on_box = pose.transform_point(&surface);
    let on_sphere = center - normal * radius;
    Some(ContactGeom {
        point: (on_box + on_sphere) * 0.5,
        normal,
        depth,
    })
}

fn box_axes(p: &Pose) -> [Vec3; 3] {
    let r = p.orientation.to_rotation_matrix();
    [r * Vec3::x(), r * Vec3::y(), r * Vec3::z()]
}

fn projected_radius(axes: &[Vec3; 3], h: &Vec3, l: &Vec3) -> f64 {
    h.x * axes[0].dot(l).abs() + h.y * axes[1].dot(l).abs() + h.z * axes[2].dot(l).abs()
}

enum Axis {
    FaceA(usize),
    FaceB(usize),
    Edge(usize, usize),
}

/// Separating-axis test between two boxes with a clipped face manifold.
pub fn box_box(ha: &Vec3, pa: &Pose, hb: &Vec3, pb: &Pose) -> Option<Manifold> {
    let aa = box_axes(pa);
    let ab = box_axes(pb);
    let t = pb.position - pa.position;
    let mut best_face: Option<(f64, Axis, Vec3)> = None;
    let mut best_edge: Option<(f64, Axis, Vec3)> = None;
    let mut test = |l: Vec3, axis: Axis, is_edge: bool| -> bool {
        let overlap = projected_radius(&aa, ha, &l) + projected_radius(&ab, hb, &l) - t.dot(&l).abs();
        if overlap < 0.0 {
            return false;
        }
        let n = if t.dot(&l) >= 0.0 { l } else { -l };
        let slot = if is_edge { &mut best_edge } else { &mut best_face };
        if slot.as_ref().is_none_or(|(o, _, _)| overlap < *o) {
            *slot = Some((overlap, axis, n));
        }
        true
    };
    for i in 0..3 {
        if !test(aa[i], Axis::FaceA(i), false) {
            return None;
        }
    }
    for j in 0..3 {
        if !test(ab[j], Axis::FaceB(j), false) {
            return None;
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            let c = aa[i].cross(&ab[j]);
            let len = c.norm();
            if len < 1e-9 {
                continue;
            }
            if !test(c / len, Axis::Edge(i, j), true) {
                return None;
            }
        }
    }
    let (face_depth, face_axis, face_n) = best_face.expect("face axes always tested");
    // prefer face contacts unless an edge axis is clearly shallower
    let (depth, axis, n) = match best_edge {
        Some((ed, ea, en)) if ed < 0.95 * face_depth - 1e-6 => (ed, ea, en),
        _ => (face_depth, face_axis, face_n),
    };
    let points = match axis {
        Axis::FaceA(i) => clip_face(&aa, ha, pa, &ab, hb, pb, i, n),
        Axis::FaceB(j) => clip_face(&ab, hb, pb, &aa, ha, pa, j, -n),
        Axis::Edge(i, j) => {
            let support_edge = |axes: &[Vec3; 3], h: &Vec3, c: Vec3, k: usize, dir: Vec3| {
                let mut center = c;
                for m in 0..3 {
                    if m != k {
                        let s = if axes[m].dot(&dir) >= 0.0 { 1.0 } else { -1.0 };
                        center += axes[m] * (s * h[m]);
                    }
                }
                (center - axes[k] * h[k], center + axes[k] * h[k])
            };
            let (a0, a1) = support_edge(&aa, ha, pa.position, i, n);
            let (b0, b1) = support_edge(&ab, hb, pb.position, j, -n);
            let (qa, qb) = closest_segment_points(a0, a1, b0, b1);
            vec![((qa + qb) * 0.5, depth)]
        }
    };
    if points.is_empty() {
        return Some(Manifold {
            normal: n,
            points: vec![((pa.position + pb.position) * 0.5, depth)],
        });
    }
    Some(Manifold { normal: n, points })
}

/// Clips the incident face of box `inc` against reference face `axis` of
/// box `reference`. `n` is the reference face normal pointing at `inc`.
#[allow(clippy::too_many_arguments)]
fn clip_face(
    ra: &[Vec3; 3],
    rh: &Vec3,
    rp: &Pose,
    ia: &[Vec3; 3],
    ih: &Vec3,
    ip: &Pose,
    axis: usize,
    n: Vec3,
) -> Vec<(Vec3, f64)> {
    // incident face: most anti-parallel to n
    let mut inc_axis = 0;
    let mut most = f64::INFINITY;
    let mut inc_sign = 1.0;
    for k in 0..3 {
        let d = ia[k].dot(&n);
        for s in [1.0, -1.0] {
            if s * d < most {
                most = s * d;
                inc_axis = k;
                inc_sign = s;
            }
        }
    }
    let (u, v) = ((inc_axis + 1) % 3, (inc_axis + 2) % 3);
    let fc = ip.position + ia[inc_axis] * (inc_sign * ih[inc_axis]);
    let mut poly: Vec<Vec3> = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
        .iter()
        .map(|(su, sv)| fc + ia[u] * (su * ih[u]) + ia[v] * (sv * ih[v]))
        .collect();
    let ref_center = rp.position + n * rh[axis];
    for k in 0..3 {
        if k == axis {
            continue;
        }
        for s in [1.0, -1.0] {
            let pn = ra[k] * s;
            let off = pn.dot(&rp.position) + rh[k];
            poly = clip_polygon(&poly, &pn, off);
            if poly.is_empty() {
                return Vec::new();
            }
        }
    }
    poly.into_iter()
        .filter_map(|p| {
            let sep = n.dot(&(p - ref_center));
            (sep <= 0.0).then(|| (p - n * (sep * 0.5), -sep))
        })
        .collect()
}

// Keeps the part of the polygon with pn·p ≤ off.
fn clip_polygon(poly: &[Vec3], pn: &Vec3, off: f64) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let dp = pn.dot(&p) - off;
        let dq = pn.dot(&q) - off;
        if dp <= 0.0 {
            out.push(p);
        }
        if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
            let t = dp / (dp - dq);
            out.push(p + (q - p) * t);
        }
    }
    out
}

/// Closest points between segments `p0p1` and `q0q1`.
pub fn closest_segment_points(p0: Vec3, p1: Vec3, q0: Vec3, q1: Vec3) -> (Vec3, Vec3) {
    let d1 = p1 - p0;
    let d2 = q1 - q0;
    let r = p0 - q0;
    let a = d1.dot(&d1);
    let e = d2.dot(&d2);
    let f = d2.dot(&r);
    let (s, t);
    if a <= 1e-300 && e <= 1e-300 {
        return (p0, q0);
    }
    if a <= 1e-300 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= 1e-300 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    (p0 + d1 * s, q0 + d2 * t)
}

fn gjk_contact(a: &Shape, pa: &Pose, b: &Shape, pb: &Pose) -> Result<Option<ContactGeom>, DegenerateContact> {
    let xa = Placed { shape: a, pose: pa };
    let xb = Placed { shape: b, pose: pb };
    let (ra, rb) = (a.margin(), b.margin());
    match gjk(&xa, &xb) {
        GjkResult::Separated { distance, pa: ca, pb: cb } => {
            let depth = ra + rb - distance;
            if depth <= 0.0 {
                return Ok(None);
            }
            let normal = if distance > 0.0 { (cb - ca) / distance } else { Vec3::z() };
            let wa = ca + normal * ra;
            let wb = cb - normal * rb;
            Ok(Some(ContactGeom {
                point: (wa + wb) * 0.5,
                normal,
                depth,
            }))
        }
        GjkResult::Intersecting { simplex } => {
            let to_contact = |p: Penetration| ContactGeom {
                point: ((p.pa + p.normal * ra) + (p.pb - p.normal * rb)) * 0.5,
                normal: p.normal,
                depth: p.depth + ra + rb,
            };
            match epa(&xa, &xb, &simplex) {
                Ok(p) => Ok(Some(to_contact(p))),
                Err(p) => Err(DegenerateContact {
                    fallback: to_contact(p),
                }),
            }
        }
    }
}
