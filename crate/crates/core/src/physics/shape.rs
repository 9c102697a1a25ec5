use nalgebra::Matrix3;

use crate::math::{Pose, Vec3};
use crate::scene::ColliderShape;

/// Axis-aligned bounding box in world space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn inflate(&self, margin: f64) -> Aabb {
        let m = Vec3::repeat(margin);
        Aabb {
            min: self.min - m,
            max: self.max + m,
        }
    }

    pub fn overlaps(&self, o: &Aabb) -> bool {
        (0..3).all(|i| self.min[i] <= o.max[i] && o.min[i] <= self.max[i])
    }
}

/// A planar face of a convex hull: outward unit normal, plane offset and
/// the face's vertices in counter-clockwise order seen from outside.
#[derive(Clone, Debug, PartialEq)]
pub struct HullFace {
    pub normal: Vec3,
    pub offset: f64,
    pub vertices: Vec<usize>,
}

/// Collision geometry with derived data cached at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Shape {
    pub kind: ColliderShape,
    pub faces: Vec<HullFace>,
}

/// Mass, centre of mass (local) and inertia about the centre of mass
/// (local axes).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassProperties {
    pub mass: f64,
    pub com: Vec3,
    pub inertia: Matrix3<f64>,
}

impl Shape {
    pub fn new(kind: ColliderShape) -> Shape {
        let faces = match &kind {
            ColliderShape::ConvexHull { vertices } => hull_faces(vertices),
            _ => Vec::new(),
        };
        Shape { kind, faces }
    }

    /// Radius swept around the core shape.
    pub fn margin(&self) -> f64 {
        match self.kind {
            ColliderShape::Sphere { radius } | ColliderShape::Capsule { radius, .. } => radius,
            _ => 0.0,
        }
    }

    /// Support point of the core (margin excluded) in local coordinates.
    /// Ties resolve to the first candidate so results are deterministic.
    pub fn core_support(&self, d: &Vec3) -> Vec3 {
        match &self.kind {
            ColliderShape::Sphere { .. } => Vec3::zeros(),
            ColliderShape::Capsule { half_height, .. } => {
                Vec3::new(0.0, 0.0, if d.z >= 0.0 { *half_height } else { -half_height })
            }
            ColliderShape::Box { half_extents: h } => Vec3::new(
                if d.x >= 0.0 { h.x } else { -h.x },
                if d.y >= 0.0 { h.y } else { -h.y },
                if d.z >= 0.0 { h.z } else { -h.z },
            ),
            ColliderShape::ConvexHull { vertices } => {
                let mut best = vertices[0];
                let mut best_dot = best.dot(d);
                for v in &vertices[1..] {
                    let dot = v.dot(d);
                    if dot > best_dot {
                        best = *v;
                        best_dot = dot;
                    }
                }
                best
            }
        }
    }

    /// Full support point including the margin.
    pub fn support(&self, d: &Vec3) -> Vec3 {
        let core = self.core_support(d);
        let n = d.norm();
        if n > 0.0 {
            core + d * (self.margin() / n)
        } else {
            core
        }
    }

    pub fn aabb(&self, pose: &Pose) -> Aabb {
        let r = pose.orientation.to_rotation_matrix();
        let c = pose.position;
        match &self.kind {
            ColliderShape::Sphere { radius } => Aabb {
                min: c - Vec3::repeat(*radius),
                max: c + Vec3::repeat(*radius),
            },
            ColliderShape::Capsule { radius, half_height } => {
                let axis = r * Vec3::new(0.0, 0.0, *half_height);
                let ext = axis.abs() + Vec3::repeat(*radius);
                Aabb {
                    min: c - ext,
                    max: c + ext,
                }
            }
            ColliderShape::Box { half_extents } => {
                let ext = r.matrix().abs() * half_extents;
                Aabb {
                    min: c - ext,
                    max: c + ext,
                }
            }
            ColliderShape::ConvexHull { vertices } => {
                let mut min = Vec3::repeat(f64::INFINITY);
                let mut max = Vec3::repeat(f64::NEG_INFINITY);
                for v in vertices {
                    let w = pose.transform_point(v);
                    min = min.inf(&w);
                    max = max.sup(&w);
                }
                Aabb { min, max }
            }
        }
    }

    pub fn volume(&self) -> f64 {
        match &self.kind {
            ColliderShape::Sphere { radius } => 4.0 / 3.0 * std::f64::consts::PI * radius.powi(3),
            ColliderShape::Box { half_extents: h } => 8.0 * h.x * h.y * h.z,
            ColliderShape::Capsule { radius, half_height } => {
                std::f64::consts::PI * radius * radius * (2.0 * half_height + 4.0 / 3.0 * radius)
            }
            ColliderShape::ConvexHull { vertices } => hull_integrals(vertices, &self.faces).0,
        }
    }

    /// Uniform-density mass properties for the given total mass.
    pub fn mass_properties(&self, mass: f64) -> MassProperties {
        let diag = |x: f64, y: f64, z: f64| Matrix3::from_diagonal(&Vec3::new(x, y, z));
        let (com, inertia) = match &self.kind {
            ColliderShape::Sphere { radius } => {
                let i = 0.4 * mass * radius * radius;
                (Vec3::zeros(), diag(i, i, i))
            }
            ColliderShape::Box { half_extents: h } => {
                let (x, y, z) = (h.x * h.x, h.y * h.y, h.z * h.z);
                let k = mass / 3.0;
                (Vec3::zeros(), diag(k * (y + z), k * (x + z), k * (x + y)))
            }
            ColliderShape::Capsule { radius: r, half_height } => {
                let len = 2.0 * half_height;
                let vc = std::f64::consts::PI * r * r * len;
                let vs = 4.0 / 3.0 * std::f64::consts::PI * r * r * r;
                let mc = mass * vc / (vc + vs);
                let ms = mass - mc;
                let izz = mc * r * r / 2.0 + ms * 0.4 * r * r;
                let ixx = mc * (r * r / 4.0 + len * len / 12.0)
                    + ms * (0.4 * r * r + len * len / 4.0 + 3.0 * len * r / 8.0);
                (Vec3::zeros(), diag(ixx, ixx, izz))
            }
            ColliderShape::ConvexHull { vertices } => {
                let (volume, com, second) = hull_integrals(vertices, &self.faces);
                let density = if volume > 0.0 { mass / volume } else { 0.0 };
                let c = second * density - com * com.transpose() * mass;
                (com, Matrix3::identity() * c.trace() - c)
            }
        };
        MassProperties { mass, com, inertia }
    }
}

/// Volume, centroid and second moment `∫ x xᵀ dV` about the local origin,
/// by decomposing the hull into tetrahedra from an interior point.
fn hull_integrals(vertices: &[Vec3], faces: &[HullFace]) -> (f64, Vec3, Matrix3<f64>) {
    let apex = vertices.iter().fold(Vec3::zeros(), |a, v| a + v) / vertices.len() as f64;
    let mut volume = 0.0;
    let mut first = Vec3::zeros();
    let mut second = Matrix3::zeros();
    for f in faces {
        let p0 = vertices[f.vertices[0]];
        for w in f.vertices[1..].windows(2) {
            let (p1, p2) = (vertices[w[0]], vertices[w[1]]);
            let det = (p0 - apex).dot(&(p1 - apex).cross(&(p2 - apex)));
            let vol = det / 6.0;
            volume += vol;
            let sum = apex + p0 + p1 + p2;
            first += sum * (vol / 4.0);
            let mut s = sum * sum.transpose();
            for v in [apex, p0, p1, p2] {
                s += v * v.transpose();
            }
            second += s * (det / 120.0);
        }
    }
    let com = if volume > 0.0 { first / volume } else { apex };
    (volume, com, second)
}

/// Faces of the convex hull of a point set, by testing every vertex triple
/// as a candidate supporting plane and merging coplanar results.
pub fn hull_faces(vertices: &[Vec3]) -> Vec<HullFace> {
    let scale = vertices.iter().map(|v| v.amax()).fold(1e-12, f64::max);
    let eps = 1e-9 * scale;
    let n = vertices.len();
    let mut planes: Vec<(Vec3, f64)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let c = (vertices[j] - vertices[i]).cross(&(vertices[k] - vertices[i]));
                let len = c.norm();
                if len <= eps * scale {
                    continue;
                }
                let normal = c / len;
                let offset = normal.dot(&vertices[i]);
                let mut above = false;
                let mut below = false;
                for v in vertices {
                    let s = normal.dot(v) - offset;
                    above |= s > eps;
                    below |= s < -eps;
                }
                let plane = match (above, below) {
                    (false, true) => (normal, offset),
                    (true, false) => (-normal, -offset),
                    _ => continue,
                };
                let dup = planes
                    .iter()
                    .any(|(m, o)| (m - plane.0).norm() < 1e-7 && (o - plane.1).abs() < 1e-7 * scale);
                if !dup {
                    planes.push(plane);
                }
            }
        }
    }
    planes
        .into_iter()
        .map(|(normal, offset)| {
            let mut on: Vec<usize> = Vec::new();
            for (idx, v) in vertices.iter().enumerate() {
                if (normal.dot(v) - offset).abs() <= eps && !on.iter().any(|&o| (vertices[o] - v).norm() <= eps) {
                    on.push(idx);
                }
            }
            let centroid = on.iter().fold(Vec3::zeros(), |a, &i| a + vertices[i]) / on.len() as f64;
            let u = (vertices[on[0]] - centroid).normalize();
            let w = normal.cross(&u);
            on.sort_by(|&a, &b| {
                let pa = vertices[a] - centroid;
                let pb = vertices[b] - centroid;
                let ta = pa.dot(&w).atan2(pa.dot(&u));
                let tb = pb.dot(&w).atan2(pb.dot(&u));
                ta.total_cmp(&tb)
            });
            HullFace {
                normal,
                offset,
                vertices: on,
            }
        })
        .collect()
}
