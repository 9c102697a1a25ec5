//! Rigid-body physics: shapes, collision detection and the world stepper.
//!
//! A [`World`] advances at a fixed timestep. Each tick drives grabbed
//! bodies from the hand pose, integrates free bodies with semi-implicit
//! Euler, finds contacts (sweep-and-prune, then analytic, SAT or GJK/EPA
//! narrowphase), resolves them with sequential impulses, snaps welds, steps
//! cables and reports region entries.

pub mod broad;
pub mod epa;
pub mod gjk;
pub mod narrow;
pub mod shape;
pub mod solver;
mod world;

pub use narrow::{collide_pair, ContactGeom, DegenerateContact};
pub use shape::{Aabb, Shape};
pub use world::{Contact, GrabConstraint, PhysicsError, RigidBody, TickReport, WeldJoint, World, WorldConfig};
