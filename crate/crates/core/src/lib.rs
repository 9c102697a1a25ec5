//! Headless engine for physics-based assembly and maintenance training.
//!
//! The crate is organized bottom-up:
//!
//! - [`scene`]: scenario data model, static validation and reachability.
//! - [`lang`]: the `.itx` authoring language (parser, formatter, linter, DOT export).
//! - [`physics`]: fixed-timestep rigid bodies with GJK/EPA collision,
//!   sequential-impulse contacts, welds and grabs.
//! - [`cable`]: position-based cables attached to bodies.
//! - [`session`]: step lifecycle, events, helpers, hints, skips and scoring.
//! - [`replay`]: input traces, state hashing and deterministic replay.
//!
//! Runnable walkthroughs for each layer live in `examples/`.

pub mod cable;
pub mod diag;
pub mod lang;
pub mod math;
pub mod physics;
pub mod replay;
pub mod scene;
pub mod session;

pub use diag::{Code, Diagnostic, Severity, SourceSpan};
pub use math::{pose_error, Pose, PoseError, Quat, Vec3};
pub use scene::Scenario;

/// Engine version recorded in replay headers.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");
