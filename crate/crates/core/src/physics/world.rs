use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Matrix3, UnitQuaternion};
use serde::Serialize;

use super::broad::{sweep_and_prune, BROADPHASE_MARGIN};
use super::narrow::manifold;
use super::shape::Shape;
use super::solver::{self, ContactPoint, SolverBody, SolverParams};
use crate::cable::{step_cable, Attachment, Cable, CableParams};
use crate::math::{Pose, Quat, Vec3};
use crate::scene::{MaterialPair, Region, Scenario, DEFAULT_MATERIAL};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorldConfig {
    pub gravity: Vec3,
    pub dt: f64,
    pub iterations: usize,
    pub baumgarte: f64,
    pub slop: f64,
    pub default_friction: f64,
    pub cable_iterations: usize,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            gravity: Vec3::new(0.0, 0.0, -9.81),
            dt: 1.0 / 120.0,
            iterations: 8,
            baumgarte: 0.2,
            slop: 1e-3,
            default_friction: 0.5,
            cable_iterations: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PhysicsError {
    #[error("unknown body `{0}`")]
    UnknownBody(String),
    #[error("body `{0}` already exists")]
    DuplicateBody(String),
    #[error("part `{0}` is not grabbable")]
    NotGrabbable(String),
    #[error("welding `{child}` to `{parent}` would create a cycle")]
    WeldCycle { child: String, parent: String },
    #[error("part `{0}` is grabbed and cannot be welded")]
    WeldGrabbed(String),
    #[error("part `{0}` is already grabbed")]
    AlreadyGrabbed(String),
    #[error("part `{0}` is not grabbed")]
    NotGrabbed(String),
    #[error("simulation diverged at body `{body}`")]
    Diverged { body: String },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RigidBody {
    pub part_id: String,
    /// Pose of the part frame.
    pub pose: Pose,
    /// Velocity of the center of mass.
    pub linear_velocity: Vec3,
    pub angular_velocity: Vec3,
    pub mass: f64,
    /// Center of mass in the part frame.
    pub com_local: Vec3,
    /// Inertia about the center of mass, part-frame axes.
    pub inertia: Matrix3<f64>,
    pub kinematic: bool,
    pub active: bool,
    pub grabbable: bool,
    pub material: String,
    #[serde(skip)]
    pub shape: Shape,
}

impl RigidBody {
    pub fn new(part_id: impl Into<String>, shape: Shape, mass: f64, pose: Pose) -> Self {
        let props = shape.mass_properties(mass);
        RigidBody {
            part_id: part_id.into(),
            pose,
            linear_velocity: Vec3::zeros(),
            angular_velocity: Vec3::zeros(),
            mass,
            com_local: props.com,
            inertia: props.inertia,
            kinematic: mass <= 0.0,
            active: true,
            grabbable: false,
            material: DEFAULT_MATERIAL.to_string(),
            shape,
        }
    }

    pub fn com(&self) -> Vec3 {
        self.pose.transform_point(&self.com_local)
    }

    /// Velocity of a world point rigidly attached to this body.
    pub fn point_velocity(&self, p: &Vec3) -> Vec3 {
        self.linear_velocity + self.angular_velocity.cross(&(p - self.com()))
    }

    fn inv_inertia_world(&self) -> Matrix3<f64> {
        let r = self.pose.orientation.to_rotation_matrix();
        let inv = self.inertia.try_inverse().unwrap_or_else(Matrix3::zeros);
        r.matrix() * inv * r.matrix().transpose()
    }

    fn set_com_pose(&mut self, com: Vec3, orientation: Quat) {
        self.pose = Pose {
            position: com - orientation * self.com_local,
            orientation,
        };
    }

    fn is_finite(&self) -> bool {
        self.pose.is_finite()
            && self.linear_velocity.iter().all(|c| c.is_finite())
            && self.angular_velocity.iter().all(|c| c.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeldJoint {
    pub child: String,
    pub parent: String,
    /// Child part pose in the parent part frame.
    pub relative: Pose,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrabConstraint {
    pub part: String,
    /// Part pose in the hand frame.
    pub offset: Pose,
    pub active: bool,
    /// Driven poses of the last two ticks, oldest first.
    history: [Pose; 2],
}

/// Contact between two bodies, `a < b` by id; normal points from `a` to `b`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Contact {
    pub a: String,
    pub b: String,
    pub point: Vec3,
    pub normal: Vec3,
    pub depth: f64,
    pub friction: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TickReport {
    pub tick: u64,
    pub contacts: Vec<Contact>,
    /// `(part, region)` entries this tick.
    pub entered: Vec<(String, String)>,
    /// Welds dropped because their child was grabbed.
    pub auto_unwelded: Vec<String>,
    /// Pairs whose EPA did not converge; their contact used the fallback face.
    pub degenerate: Vec<(String, String)>,
}

impl TickReport {
    pub fn touching(&self, x: &str, y: &str) -> bool {
        self.contacts
            .iter()
            .any(|c| (c.a == x && c.b == y) || (c.a == y && c.b == x))
    }
}

#[derive(Clone, Debug)]
pub struct World {
    pub config: WorldConfig,
    bodies: BTreeMap<String, RigidBody>,
    welds: BTreeMap<String, WeldJoint>,
    grabs: BTreeMap<String, GrabConstraint>,
    cables: BTreeMap<String, Cable>,
    regions: Vec<Region>,
    materials: Vec<MaterialPair>,
    hand: Pose,
    tick: u64,
    inside: BTreeSet<(String, String)>,
    pending_unwelds: Vec<String>,
}

impl World {
    pub fn new(config: WorldConfig) -> Self {
        World {
            config,
            bodies: BTreeMap::new(),
            welds: BTreeMap::new(),
            grabs: BTreeMap::new(),
            cables: BTreeMap::new(),
            regions: Vec::new(),
            materials: Vec::new(),
            hand: Pose::IDENTITY,
            tick: 0,
            inside: BTreeSet::new(),
            pending_unwelds: Vec::new(),
        }
    }

    /// One body per part at its initial pose, plus the scenario's regions and
    /// friction table.
    pub fn from_scenario(s: &Scenario, config: WorldConfig) -> Self {
        let mut w = World::new(config);
        for p in &s.parts {
            let mut b = RigidBody::new(p.id.clone(), Shape::new(p.shape.clone()), p.mass, p.initial_pose);
            b.grabbable = p.grabbable;
            b.material = p.material.clone();
            w.bodies.insert(p.id.clone(), b);
        }
        w.regions = s.regions.clone();
        w.materials = s.materials.clone();
        w.inside = w.compute_inside();
        w
    }

    pub fn add_body(&mut self, body: RigidBody) -> Result<(), PhysicsError> {
        if self.bodies.contains_key(&body.part_id) {
            return Err(PhysicsError::DuplicateBody(body.part_id));
        }
        self.bodies.insert(body.part_id.clone(), body);
        self.inside = self.compute_inside();
        Ok(())
    }

    pub fn add_region(&mut self, region: Region) {
        self.regions.push(region);
        self.inside = self.compute_inside();
    }

    pub fn add_cable(&mut self, cable: Cable) {
        self.cables.insert(cable.id.clone(), cable);
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 * self.config.dt
    }

    pub fn body(&self, id: &str) -> Option<&RigidBody> {
        self.bodies.get(id)
    }

    pub fn body_mut(&mut self, id: &str) -> Option<&mut RigidBody> {
        self.bodies.get_mut(id)
    }

    pub fn bodies(&self) -> impl Iterator<Item = &RigidBody> {
        self.bodies.values()
    }

    pub fn cable(&self, id: &str) -> Option<&Cable> {
        self.cables.get(id)
    }

    pub fn cables(&self) -> impl Iterator<Item = &Cable> {
        self.cables.values()
    }

    pub fn weld(&self, child: &str) -> Option<&WeldJoint> {
        self.welds.get(child)
    }

    pub fn is_grabbed(&self, part: &str) -> bool {
        self.grabs.get(part).is_some_and(|g| g.active)
    }

    pub fn grabbed(&self) -> impl Iterator<Item = &str> {
        self.grabs.values().filter(|g| g.active).map(|g| g.part.as_str())
    }

    pub fn hand_pose(&self) -> &Pose {
        &self.hand
    }

    pub fn set_hand_pose(&mut self, pose: Pose) {
        self.hand = pose;
    }

    pub fn set_active(&mut self, id: &str, active: bool) -> Result<(), PhysicsError> {
        let b = self.bodies.get_mut(id).ok_or_else(|| PhysicsError::UnknownBody(id.to_string()))?;
        b.active = active;
        Ok(())
    }

    /// Friction for two materials: declared pair or the configured default.
    pub fn friction(&self, a: &str, b: &str) -> f64 {
        self.materials
            .iter()
            .find(|m| (m.a == a && m.b == b) || (m.a == b && m.b == a))
            .map_or(self.config.default_friction, |m| m.friction)
    }

    pub fn set_friction(&mut self, a: &str, b: &str, mu: f64) {
        self.materials.retain(|m| !((m.a == a && m.b == b) || (m.a == b && m.b == a)));
        self.materials.push(MaterialPair {
            a: a.to_string(),
            b: b.to_string(),
            friction: mu,
        });
    }

    fn require(&self, id: &str) -> Result<&RigidBody, PhysicsError> {
        self.bodies.get(id).ok_or_else(|| PhysicsError::UnknownBody(id.to_string()))
    }

    /// Welds `child` to `parent` at `relative` (child pose in the parent
    /// frame), replacing any weld the child already had. The child's
    /// velocities are zeroed and it is snapped into place at once.
    pub fn set_weld(&mut self, child: &str, parent: &str, relative: Pose) -> Result<(), PhysicsError> {
        self.require(child)?;
        self.require(parent)?;
        if self.is_grabbed(child) {
            return Err(PhysicsError::WeldGrabbed(child.to_string()));
        }
        let mut cur = Some(parent);
        while let Some(p) = cur {
            if p == child {
                return Err(PhysicsError::WeldCycle {
                    child: child.to_string(),
                    parent: parent.to_string(),
                });
            }
            cur = self.welds.get(p).map(|w| w.parent.as_str());
        }
        self.welds.insert(
            child.to_string(),
            WeldJoint {
                child: child.to_string(),
                parent: parent.to_string(),
                relative,
            },
        );
        let b = self.bodies.get_mut(child).unwrap();
        b.linear_velocity = Vec3::zeros();
        b.angular_velocity = Vec3::zeros();
        self.snap_welds();
        Ok(())
    }

    /// Welds `child` where it currently is relative to `parent`.
    pub fn weld_in_place(&mut self, child: &str, parent: &str) -> Result<(), PhysicsError> {
        let rel = self.require(parent)?.pose.inverse().compose(&self.require(child)?.pose);
        self.set_weld(child, parent, rel)
    }

    /// Removes the child's weld, if any. The child keeps the velocity of the
    /// parent point it was attached at.
    pub fn remove_weld(&mut self, child: &str) -> Result<bool, PhysicsError> {
        self.require(child)?;
        let Some(w) = self.welds.remove(child) else {
            return Ok(false);
        };
        let parent = &self.bodies[&w.parent];
        let com = self.bodies[child].com();
        let (v, omega) = (parent.point_velocity(&com), parent.angular_velocity);
        let b = self.bodies.get_mut(child).unwrap();
        b.linear_velocity = v;
        b.angular_velocity = omega;
        Ok(true)
    }

    /// Grabs `part` with the current hand pose. A welded part is unwelded
    /// first; that is reported in the next tick report.
    pub fn attach_grab(&mut self, part: &str) -> Result<(), PhysicsError> {
        let b = self.require(part)?;
        if !b.grabbable {
            return Err(PhysicsError::NotGrabbable(part.to_string()));
        }
        if self.is_grabbed(part) {
            return Err(PhysicsError::AlreadyGrabbed(part.to_string()));
        }
        let pose = b.pose;
        if self.remove_weld(part)? {
            self.pending_unwelds.push(part.to_string());
        }
        self.grabs.insert(
            part.to_string(),
            GrabConstraint {
                part: part.to_string(),
                offset: self.hand.inverse().compose(&pose),
                active: true,
                history: [pose, pose],
            },
        );
        Ok(())
    }

    /// Releases `part`. Its velocity is the finite difference of the last
    /// two driven poses.
    pub fn detach_grab(&mut self, part: &str) -> Result<(), PhysicsError> {
        self.require(part)?;
        let g = self
            .grabs
            .remove(part)
            .ok_or_else(|| PhysicsError::NotGrabbed(part.to_string()))?;
        let dt = self.config.dt;
        let b = self.bodies.get_mut(part).unwrap();
        let [p0, p1] = g.history;
        let c0 = p0.transform_point(&b.com_local);
        let c1 = p1.transform_point(&b.com_local);
        b.linear_velocity = (c1 - c0) / dt;
        b.angular_velocity = (p1.orientation * p0.orientation.inverse()).scaled_axis() / dt;
        Ok(())
    }

    fn drives(&self, b: &RigidBody) -> bool {
        !b.kinematic && b.active && !self.welds.contains_key(&b.part_id) && !self.is_grabbed(&b.part_id)
    }

    /// Advances one fixed step: drive grabs, integrate, detect and solve
    /// contacts, snap welds, step cables, detect region entries.
    pub fn step(&mut self) -> Result<TickReport, PhysicsError> {
        let dt = self.config.dt;
        let mut report = TickReport {
            auto_unwelded: std::mem::take(&mut self.pending_unwelds),
            ..TickReport::default()
        };

        // 1. grabs
        for g in self.grabs.values_mut().filter(|g| g.active) {
            let target = self.hand.compose(&g.offset);
            let b = self.bodies.get_mut(&g.part).unwrap();
            let prev = b.pose;
            b.pose = target;
            g.history = [prev, target];
            let (c0, c1) = (prev.transform_point(&b.com_local), target.transform_point(&b.com_local));
            b.linear_velocity = (c1 - c0) / dt;
            b.angular_velocity = (target.orientation * prev.orientation.inverse()).scaled_axis() / dt;
        }

        // 2. integrate
        let gravity = self.config.gravity;
        let free: Vec<String> = self
            .bodies
            .values()
            .filter(|b| b.active && !self.welds.contains_key(&b.part_id) && !self.is_grabbed(&b.part_id))
            .map(|b| b.part_id.clone())
            .collect();
        for id in &free {
            let b = self.bodies.get_mut(id).unwrap();
            if !b.kinematic {
                b.linear_velocity += gravity * dt;
            }
            integrate(b, b.linear_velocity, b.angular_velocity, dt);
        }

        // 3. collision
        let (contacts, degenerate) = self.detect();
        report.degenerate = degenerate;

        // 4. contacts
        self.solve_contacts(&contacts);

        // 5. welds
        self.snap_welds();

        // 6. cables
        let params = CableParams {
            iterations: self.config.cable_iterations,
            dt,
            gravity,
        };
        let bodies = &self.bodies;
        let resolve = |a: &Attachment| -> Option<Vec3> {
            match a {
                Attachment::World { point } => Some(*point),
                Attachment::Body { part, local } => bodies.get(part).map(|b| b.pose.transform_point(local)),
            }
        };
        for c in self.cables.values_mut() {
            step_cable(c, &resolve, &params);
        }

        for b in self.bodies.values() {
            if !b.is_finite() {
                return Err(PhysicsError::Diverged {
                    body: b.part_id.clone(),
                });
            }
        }
        if let Some(c) = self.cables.values().find(|c| c.positions.iter().any(|p| !p.iter().all(|x| x.is_finite()))) {
            return Err(PhysicsError::Diverged { body: c.id.clone() });
        }

        // 7. regions
        let now = self.compute_inside();
        report.entered = now.difference(&self.inside).cloned().collect();
        self.inside = now;

        self.tick += 1;
        report.tick = self.tick;
        report.contacts = contacts;
        Ok(report)
    }

    fn compute_inside(&self) -> BTreeSet<(String, String)> {
        let mut set = BTreeSet::new();
        for r in &self.regions {
            let center = match &r.parent {
                Some(p) => match self.bodies.get(p) {
                    Some(b) => b.pose.transform_point(&r.center),
                    None => continue,
                },
                None => r.center,
            };
            for b in self.bodies.values() {
                if b.active && r.parent.as_deref() != Some(b.part_id.as_str()) && (b.pose.position - center).norm() <= r.radius {
                    set.insert((b.part_id.clone(), r.id.clone()));
                }
            }
        }
        set
    }

    /// Broadphase over active bodies: sorted id pairs whose inflated AABBs
    /// overlap.
    pub fn broadphase_pairs(&self) -> Vec<(String, String)> {
        let items: Vec<(&str, _)> = self
            .bodies
            .values()
            .filter(|b| b.active)
            .map(|b| (b.part_id.as_str(), b.shape.aabb(&b.pose).inflate(BROADPHASE_MARGIN)))
            .collect();
        sweep_and_prune(&items)
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect()
    }

    fn welded_pair(&self, a: &str, b: &str) -> bool {
        self.welds.get(a).is_some_and(|w| w.parent == b) || self.welds.get(b).is_some_and(|w| w.parent == a)
    }

    /// Contacts in canonical order (pair order, then manifold order). Pairs
    /// where neither body is free-dynamic nor grabbed are skipped, as are
    /// direct weld pairs.
    pub fn detect(&self) -> (Vec<Contact>, Vec<(String, String)>) {
        let mut out = Vec::new();
        let mut degenerate = Vec::new();
        for (ia, ib) in self.broadphase_pairs() {
            let (a, b) = (&self.bodies[&ia], &self.bodies[&ib]);
            let moving = |x: &RigidBody| self.drives(x) || self.is_grabbed(&x.part_id);
            if !(moving(a) || moving(b)) || self.welded_pair(&ia, &ib) {
                continue;
            }
            let m = match manifold(&a.shape, &a.pose, &b.shape, &b.pose) {
                Ok(Some(m)) => m,
                Ok(None) => continue,
                Err(e) => {
                    degenerate.push((ia.clone(), ib.clone()));
                    super::narrow::Manifold {
                        normal: e.fallback.normal,
                        points: vec![(e.fallback.point, e.fallback.depth)],
                    }
                }
            };
            let mu = self.friction(&a.material, &b.material);
            for (point, depth) in m.points {
                out.push(Contact {
                    a: ia.clone(),
                    b: ib.clone(),
                    point,
                    normal: m.normal,
                    depth: depth.max(0.0),
                    friction: mu,
                });
            }
        }
        (out, degenerate)
    }

    /// Sequential impulses over `contacts`. Grabbed bodies are not pushed and
    /// do not push; welded, kinematic and inactive bodies act as immovable.
    /// Free bodies' positions are re-integrated with the corrected velocity.
    pub fn solve_contacts(&mut self, contacts: &[Contact]) {
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        let mut ids: Vec<String> = Vec::new();
        let mut sb: Vec<SolverBody> = Vec::new();
        let mut points = Vec::new();
        for c in contacts {
            if self.is_grabbed(&c.a) || self.is_grabbed(&c.b) {
                continue;
            }
            let (a, b) = (&self.bodies[&c.a], &self.bodies[&c.b]);
            if !self.drives(a) && !self.drives(b) {
                continue;
            }
            let mut slot = |body: &RigidBody| -> usize {
                if let Some(&i) = index.get(body.part_id.as_str()) {
                    return i;
                }
                let i = sb.len();
                sb.push(if self.drives(body) {
                    SolverBody {
                        inv_mass: 1.0 / body.mass,
                        inv_inertia: body.inv_inertia_world(),
                        com: body.com(),
                        v: body.linear_velocity,
                        w: body.angular_velocity,
                    }
                } else {
                    SolverBody::fixed(body.com())
                });
                ids.push(body.part_id.clone());
                i
            };
            let (sa, sbi) = (slot(a), slot(b));
            index.insert(&c.a, sa);
            index.insert(&c.b, sbi);
            points.push(ContactPoint {
                a: sa,
                b: sbi,
                point: c.point,
                normal: c.normal,
                depth: c.depth,
                friction: c.friction,
            });
        }
        if points.is_empty() {
            return;
        }
        let params = SolverParams {
            iterations: self.config.iterations,
            dt: self.config.dt,
            baumgarte: self.config.baumgarte,
            slop: self.config.slop,
        };
        solver::solve(&mut sb, &points, &params);
        let dt = self.config.dt;
        for (id, s) in ids.iter().zip(&sb) {
            let drives = self.drives(&self.bodies[id]);
            let b = self.bodies.get_mut(id).unwrap();
            if !drives {
                continue;
            }
            let dv = s.v - b.linear_velocity;
            let dw = s.w - b.angular_velocity;
            b.linear_velocity = s.v;
            b.angular_velocity = s.w;
            integrate(b, dv, dw, dt);
        }
    }

    /// Snaps every welded child to its parent, parents before children.
    fn snap_welds(&mut self) {
        let depth = |c: &str| {
            let mut d = 0usize;
            let mut cur = self.welds.get(c);
            while let Some(w) = cur {
                cur = self.welds.get(&w.parent);
                d += 1;
            }
            d
        };
        let mut order: Vec<(usize, String)> = self.welds.keys().map(|c| (depth(c), c.clone())).collect();
        order.sort();
        for (_, child) in order {
            let w = &self.welds[&child];
            let parent = &self.bodies[&w.parent];
            let pose = parent.pose.compose(&w.relative);
            let (pv, pw) = {
                let com = pose.transform_point(&self.bodies[&child].com_local);
                (parent.point_velocity(&com), parent.angular_velocity)
            };
            let b = self.bodies.get_mut(&child).unwrap();
            b.pose = pose;
            b.linear_velocity = pv;
            b.angular_velocity = pw;
        }
    }

    /// Canonical little-endian serialization, used for state hashing:
    ///
    /// 1. `u32` body count, then per body in id order: `u32` id length, id
    ///    bytes, pose (`px py pz qw qx qy qz`, 7 × f64), linear then angular
    ///    velocity (6 × f64), one flag byte (bit 0 kinematic, 1 active,
    ///    2 grabbed, 3 welded).
    /// 2. `u32` weld count, then per weld in child order: child id, parent id,
    ///    relative pose.
    /// 3. `u32` grab count, then per grab in part order: part id, offset pose,
    ///    the two history poses.
    /// 4. Hand pose.
    /// 5. `u32` cable count, then per cable in id order: id, `u32` node
    ///    count, node positions (3 × f64 each), node velocities.
    /// 6. `u32` count of `(part, region)` pairs currently inside, each as two
    ///    ids.
    /// 7. Tick as `u64`.
    ///
    /// Ids are written as `u32` length followed by UTF-8 bytes.
    pub fn write_state(&self, out: &mut Vec<u8>) {
        fn id(out: &mut Vec<u8>, s: &str) {
            out.extend_from_slice(&(s.len() as u32).to_le_bytes());
            out.extend_from_slice(s.as_bytes());
        }
        fn vec3(out: &mut Vec<u8>, v: &Vec3) {
            for c in v.iter() {
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
        out.extend_from_slice(&(self.bodies.len() as u32).to_le_bytes());
        for b in self.bodies.values() {
            id(out, &b.part_id);
            b.pose.write_bytes(out);
            vec3(out, &b.linear_velocity);
            vec3(out, &b.angular_velocity);
            let flags = (b.kinematic as u8)
                | (b.active as u8) << 1
                | (self.is_grabbed(&b.part_id) as u8) << 2
                | (self.welds.contains_key(&b.part_id) as u8) << 3;
            out.push(flags);
        }
        out.extend_from_slice(&(self.welds.len() as u32).to_le_bytes());
        for w in self.welds.values() {
            id(out, &w.child);
            id(out, &w.parent);
            w.relative.write_bytes(out);
        }
        out.extend_from_slice(&(self.grabs.len() as u32).to_le_bytes());
        for g in self.grabs.values() {
            id(out, &g.part);
            g.offset.write_bytes(out);
            g.history[0].write_bytes(out);
            g.history[1].write_bytes(out);
        }
        self.hand.write_bytes(out);
        out.extend_from_slice(&(self.cables.len() as u32).to_le_bytes());
        for c in self.cables.values() {
            id(out, &c.id);
            out.extend_from_slice(&(c.positions.len() as u32).to_le_bytes());
            for p in &c.positions {
                vec3(out, p);
            }
            for v in &c.velocities {
                vec3(out, v);
            }
        }
        out.extend_from_slice(&(self.inside.len() as u32).to_le_bytes());
        for (p, r) in &self.inside {
            id(out, p);
            id(out, r);
        }
        out.extend_from_slice(&self.tick.to_le_bytes());
    }
}

/// Moves the center of mass by `v·dt` and rotates by `exp(ω·dt)`.
fn integrate(b: &mut RigidBody, v: Vec3, w: Vec3, dt: f64) {
    if v == Vec3::zeros() && w == Vec3::zeros() {
        return;
    }
    let com = b.com() + v * dt;
    let q = UnitQuaternion::from_scaled_axis(w * dt) * b.pose.orientation;
    let q = UnitQuaternion::new_normalize(q.into_inner());
    b.set_com_pose(com, q);
}
