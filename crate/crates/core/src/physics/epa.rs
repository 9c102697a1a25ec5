//! Expanding polytope algorithm for penetration depth between cores.

use super::gjk::{support, Placed, SupportPoint};
use crate::math::Vec3;

pub const MAX_EPA_ITERATIONS: usize = 64;
const TOLERANCE: f64 = 1e-10;

/// Penetration of the cores: translating B by `depth · normal` separates
/// them. `pa`/`pb` are the witness points on each core.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Penetration {
    pub normal: Vec3,
    pub depth: f64,
    pub pa: Vec3,
    pub pb: Vec3,
}

#[derive(Clone, Copy, Debug)]
struct Face {
    v: [usize; 3],
    normal: Vec3,
    dist: f64,
}

fn make_face(pts: &[SupportPoint], v: [usize; 3], interior: &Vec3) -> Option<Face> {
    let (a, b, c) = (pts[v[0]].w, pts[v[1]].w, pts[v[2]].w);
    let n = (b - a).cross(&(c - a));
    let len = n.norm();
    if len <= 1e-14 {
        return None;
    }
    let mut normal = n / len;
    let mut v = v;
    if normal.dot(&(interior - a)) > 0.0 {
        normal = -normal;
        v.swap(1, 2);
    }
    Some(Face {
        v,
        normal,
        dist: normal.dot(&a),
    })
}

fn witness(pts: &[SupportPoint], f: &Face) -> Penetration {
    let (a, b, c) = (pts[f.v[0]], pts[f.v[1]], pts[f.v[2]]);
    let p = f.normal * f.dist;
    // barycentric coordinates of the origin's projection on the face
    let v0 = b.w - a.w;
    let v1 = c.w - a.w;
    let v2 = p - a.w;
    let d00 = v0.dot(&v0);
    let d01 = v0.dot(&v1);
    let d11 = v1.dot(&v1);
    let d20 = v2.dot(&v0);
    let d21 = v2.dot(&v1);
    let denom = d00 * d11 - d01 * d01;
    let (u, v, w) = if denom.abs() > 0.0 {
        let v = (d11 * d20 - d01 * d21) / denom;
        let w = (d00 * d21 - d01 * d20) / denom;
        (1.0 - v - w, v, w)
    } else {
        (1.0, 0.0, 0.0)
    };
    Penetration {
        normal: f.normal,
        depth: f.dist.max(0.0),
        pa: a.a * u + b.a * v + c.a * w,
        pb: a.b * u + b.b * v + c.b * w,
    }
}

/// Grows a GJK simplex that encloses the origin into a full tetrahedron.
fn seed(a: &Placed, b: &Placed, simplex: &[SupportPoint]) -> Vec<SupportPoint> {
    let mut pts: Vec<SupportPoint> = Vec::new();
    for p in simplex {
        if !pts.iter().any(|q| (q.w - p.w).norm() < 1e-12) {
            pts.push(*p);
        }
    }
    let axes = [Vec3::x(), Vec3::y(), Vec3::z(), -Vec3::x(), -Vec3::y(), -Vec3::z()];
    let rank_gain = |pts: &[SupportPoint], w: &Vec3| -> f64 {
        match pts.len() {
            0 => 1.0,
            1 => (w - pts[0].w).norm(),
            2 => {
                let d = pts[1].w - pts[0].w;
                d.cross(&(w - pts[0].w)).norm() / d.norm().max(1e-300)
            }
            _ => {
                let n = (pts[1].w - pts[0].w).cross(&(pts[2].w - pts[0].w));
                (n.dot(&(w - pts[0].w))).abs() / n.norm().max(1e-300)
            }
        }
    };
    while pts.len() < 4 {
        let mut dirs: Vec<Vec3> = axes.to_vec();
        if pts.len() == 3 {
            let n = (pts[1].w - pts[0].w).cross(&(pts[2].w - pts[0].w));
            dirs.insert(0, -n);
            dirs.insert(0, n);
        } else if pts.len() == 2 {
            let d = pts[1].w - pts[0].w;
            for ax in axes {
                let perp = d.cross(&ax);
                if perp.norm() > 1e-9 {
                    dirs.insert(0, perp);
                }
            }
        }
        let mut best: Option<(f64, SupportPoint)> = None;
        for d in &dirs {
            let s = support(a, b, d);
            let g = rank_gain(&pts, &s.w);
            if best.as_ref().is_none_or(|(bg, _)| g > *bg) {
                best = Some((g, s));
            }
        }
        match best {
            Some((g, s)) if g > 1e-10 => pts.push(s),
            _ => break,
        }
    }
    pts
}

/// Runs EPA from a GJK simplex. On non-convergence returns the best face
/// found so far as the error payload.
pub fn epa(a: &Placed, b: &Placed, simplex: &[SupportPoint]) -> Result<Penetration, Penetration> {
    let mut pts = seed(a, b, simplex);
    if pts.len() < 4 {
        // flat Minkowski difference: touching, zero depth
        let n = if pts.len() == 3 {
            (pts[1].w - pts[0].w).cross(&(pts[2].w - pts[0].w)).normalize()
        } else {
            Vec3::z()
        };
        let p = pts.first().copied().unwrap_or_else(|| support(a, b, &n));
        return Ok(Penetration {
            normal: n,
            depth: 0.0,
            pa: p.a,
            pb: p.b,
        });
    }
    let interior = (pts[0].w + pts[1].w + pts[2].w + pts[3].w) / 4.0;
    let mut faces: Vec<Face> = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]
        .iter()
        .filter_map(|v| make_face(&pts, *v, &interior))
        .collect();
    let mut best = faces[0];
    for _ in 0..MAX_EPA_ITERATIONS {
        let face = *faces
            .iter()
            .min_by(|x, y| x.dist.total_cmp(&y.dist))
            .expect("polytope has faces");
        best = face;
        let s = support(a, b, &face.normal);
        let gain = s.w.dot(&face.normal) - face.dist;
        if gain <= TOLERANCE * (1.0 + face.dist.abs()) {
            return Ok(witness(&pts, &face));
        }
        let new = pts.len();
        pts.push(s);
        let mut horizon: Vec<[usize; 2]> = Vec::new();
        let mut kept = Vec::with_capacity(faces.len());
        for f in faces.drain(..) {
            let visible = f.normal.dot(&(s.w - pts[f.v[0]].w)) > 0.0;
            if visible {
                for e in [[f.v[0], f.v[1]], [f.v[1], f.v[2]], [f.v[2], f.v[0]]] {
                    if let Some(pos) = horizon.iter().position(|h| h[0] == e[1] && h[1] == e[0]) {
                        horizon.remove(pos);
                    } else {
                        horizon.push(e);
                    }
                }
            } else {
                kept.push(f);
            }
        }
        faces = kept;
        for e in horizon {
            if let Some(f) = make_face(&pts, [e[0], e[1], new], &interior) {
                faces.push(f);
            }
        }
        if faces.is_empty() {
            break;
        }
    }
    Err(witness(&pts, &best))
}
