//! Rigid poses and the pose-distance metric used for placement checks.

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

pub type Vec3 = Vector3<f64>;
pub type Quat = UnitQuaternion<f64>;

/// Tolerance on `|q| - 1` for a quaternion to count as a valid orientation.
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// Position in meters plus a unit orientation quaternion.
///
/// Serialized as `{"pos":[x,y,z],"quat":[w,x,y,z]}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "PoseRepr", into = "PoseRepr")]
pub struct Pose {
    pub position: Vec3,
    pub orientation: Quat,
}

#[derive(Serialize, Deserialize)]
struct PoseRepr {
    pos: [f64; 3],
    quat: [f64; 4],
}

impl From<PoseRepr> for Pose {
    fn from(r: PoseRepr) -> Self {
        Pose {
            position: Vec3::new(r.pos[0], r.pos[1], r.pos[2]),
            orientation: quat_from_wxyz(r.quat),
        }
    }
}

impl From<Pose> for PoseRepr {
    fn from(p: Pose) -> Self {
        PoseRepr {
            pos: [p.position.x, p.position.y, p.position.z],
            quat: quat_to_wxyz(&p.orientation),
        }
    }
}

/// Builds a unit quaternion from `[w, x, y, z]`.
///
/// Values already unit-length to 1e-12 are taken bit-for-bit so that a
/// serialize/deserialize cycle is the identity; anything else is normalized.
pub fn quat_from_wxyz(q: [f64; 4]) -> Quat {
    let raw = Quaternion::new(q[0], q[1], q[2], q[3]);
    let norm = raw.norm();
    if (norm - 1.0).abs() <= 1e-12 {
        UnitQuaternion::new_unchecked(raw)
    } else if norm.is_finite() && norm > 0.0 {
        UnitQuaternion::new_normalize(raw)
    } else {
        // keep the invalid value visible to validation
        UnitQuaternion::new_unchecked(raw)
    }
}

pub fn quat_to_wxyz(q: &Quat) -> [f64; 4] {
    [q.w, q.i, q.j, q.k]
}

impl Default for Pose {
    fn default() -> Self {
        Pose::IDENTITY
    }
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        position: Vec3::new(0.0, 0.0, 0.0),
        orientation: UnitQuaternion::new_unchecked(Quaternion::new(1.0, 0.0, 0.0, 0.0)),
    };

    pub fn new(position: Vec3, orientation: Quat) -> Self {
        Pose {
            position,
            orientation,
        }
    }

    pub fn from_position(position: Vec3) -> Self {
        Pose {
            position,
            orientation: Quat::identity(),
        }
    }

    /// Roll-pitch-yaw in radians, applied as `Rz(yaw) * Ry(pitch) * Rx(roll)`.
    pub fn from_rpy(position: Vec3, roll: f64, pitch: f64, yaw: f64) -> Self {
        Pose {
            position,
            orientation: Quat::from_euler_angles(roll, pitch, yaw),
        }
    }

    /// Returns `(roll, pitch, yaw)` in radians.
    pub fn rpy(&self) -> (f64, f64, f64) {
        self.orientation.euler_angles()
    }

    /// `self ∘ other`: `other` expressed in the frame of `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose {
            position: self.position + self.orientation * other.position,
            orientation: self.orientation * other.orientation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.orientation.inverse();
        Pose {
            position: -(inv * self.position),
            orientation: inv,
        }
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.position + self.orientation * p
    }

    pub fn translated(&self, delta: Vec3) -> Pose {
        Pose {
            position: self.position + delta,
            orientation: self.orientation,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|c| c.is_finite())
            && quat_to_wxyz(&self.orientation).iter().all(|c| c.is_finite())
    }

    pub fn is_valid(&self) -> bool {
        self.is_finite() && (self.orientation.quaternion().norm() - 1.0).abs() <= UNIT_TOLERANCE
    }

    /// Little-endian bytes of `px py pz qw qx qy qz`.
    pub fn write_bytes(&self, out: &mut Vec<u8>) {
        for c in self.position.iter() {
            out.extend_from_slice(&c.to_le_bytes());
        }
        for c in quat_to_wxyz(&self.orientation) {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
}

/// Position and rotation distance between two poses.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct PoseError {
    pub d_pos: f64,
    pub d_rot: f64,
}

/// Euclidean position distance and geodesic rotation angle in `[0, π]`.
///
/// The angle equals `2·acos(min(1, |⟨qa, qb⟩|))`; it is evaluated through
/// the half-chord between the two 4-vectors with `atan2`, which stays
/// accurate near zero where `acos` loses half the significant digits.
pub fn pose_error(a: &Pose, b: &Pose) -> PoseError {
    let d_pos = (a.position - b.position).norm();
    // angle between the 4-vectors is half the rotation angle
    let qa = a.orientation.coords;
    let qb = if qa.dot(&b.orientation.coords) < 0.0 {
        -b.orientation.coords
    } else {
        b.orientation.coords
    };
    let d_rot = 4.0 * (qa - qb).norm().atan2((qa + qb).norm());
    PoseError { d_pos, d_rot }
}

/// Spherical interpolation that tolerates antipodal endpoints.
pub fn slerp(a: &Quat, b: &Quat, t: f64) -> Quat {
    let b = if a.coords.dot(&b.coords) < 0.0 {
        UnitQuaternion::new_unchecked(-b.into_inner())
    } else {
        *b
    };
    a.try_slerp(&b, t, 1e-12).unwrap_or_else(|| {
        UnitQuaternion::new_normalize(a.into_inner().lerp(&b.into_inner(), t))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn identical_poses_have_zero_error() {
        let p = Pose::from_rpy(Vec3::new(1.0, 2.0, 3.0), 0.1, 0.2, 0.3);
        let e = pose_error(&p, &p);
        assert_eq!(e.d_pos, 0.0);
        assert_eq!(e.d_rot, 0.0);
    }

    #[test]
    fn three_four_five_offset() {
        let a = Pose::IDENTITY;
        let b = Pose::from_position(Vec3::new(0.003, 0.004, 0.0));
        assert!((pose_error(&a, &b).d_pos - 0.005).abs() < 1e-15);
    }

    #[test]
    fn quarter_turn_about_z() {
        let a = Pose::IDENTITY;
        let b = Pose::from_rpy(Vec3::zeros(), 0.0, 0.0, FRAC_PI_2);
        assert!((pose_error(&a, &b).d_rot - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn double_cover_is_ignored() {
        let a = Pose::from_rpy(Vec3::zeros(), 0.3, -0.2, 1.0);
        let mut b = a;
        b.orientation = UnitQuaternion::new_unchecked(-a.orientation.into_inner());
        assert!(pose_error(&a, &b).d_rot < 1e-12);
    }

    #[test]
    fn half_turn_is_pi() {
        let a = Pose::IDENTITY;
        let b = Pose::from_rpy(Vec3::zeros(), PI, 0.0, 0.0);
        assert!((pose_error(&a, &b).d_rot - PI).abs() < 1e-12);
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let p = Pose::from_rpy(Vec3::new(0.5, -1.0, 2.0), 0.4, 0.1, -2.0);
        let id = p.compose(&p.inverse());
        let e = pose_error(&id, &Pose::IDENTITY);
        assert!(e.d_pos < 1e-12 && e.d_rot < 1e-12);
    }

    #[test]
    fn serde_shape_is_pos_quat() {
        let p = Pose::from_position(Vec3::new(1.0, 2.0, 3.0));
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"pos":[1.0,2.0,3.0],"quat":[1.0,0.0,0.0,0.0]}"#);
        let back: Pose = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    proptest::proptest! {
        #[test]
        fn pose_error_symmetric_and_matches_acos_form(
            ax in -2.0f64..2.0, ay in -2.0f64..2.0, az in -2.0f64..2.0,
            r1 in -3.0f64..3.0, p1 in -1.5f64..1.5, y1 in -3.0f64..3.0,
            r2 in -3.0f64..3.0, p2 in -1.5f64..1.5, y2 in -3.0f64..3.0,
        ) {
            let a = Pose::from_rpy(Vec3::new(ax, ay, az), r1, p1, y1);
            let b = Pose::from_rpy(Vec3::new(az, ax, ay), r2, p2, y2);
            let ab = pose_error(&a, &b);
            let ba = pose_error(&b, &a);
            proptest::prop_assert!((ab.d_pos - ba.d_pos).abs() < 1e-12);
            proptest::prop_assert!((ab.d_rot - ba.d_rot).abs() < 1e-12);
            proptest::prop_assert!(ab.d_pos >= 0.0 && ab.d_rot >= 0.0 && ab.d_rot <= PI + 1e-12);
            let dot = a.orientation.coords.dot(&b.orientation.coords).abs().min(1.0);
            let acos_form = 2.0 * dot.acos();
            // acos loses precision near dot = 1, hence the loose bound
            proptest::prop_assert!((ab.d_rot - acos_form).abs() < 1e-7);
        }
    }
}
