//! Deterministic 2-D multi-robot testbed.
//!
//! Robots follow single-integrator kinematics and every user command can be
//! routed through a barrier-certificate safety filter: a small quadratic
//! program that projects the command onto the set of velocities keeping all
//! pairwise distances above `d_s` and all robots inside the workspace.
//!
//! The crate is split by concern:
//!
//! - [`dynamics`]: single-integrator and unicycle models, the near-identity
//!   diffeomorphism between them, and a go-to-goal law.
//! - [`safety`] and [`qp`]: constraint assembly and the projection solver.
//! - [`controllers`], [`graph`] and [`geometry`]: rendezvous, formation and
//!   coverage control together with the grid Voronoi machinery they need.
//! - [`sim`]: fixed-step engine, collision pipeline, traces and the safety score.
//! - [`verify`]: scenario-suite verification gating filter bypass.
//! - [`config`]: the JSON experiment configuration.

pub mod config;
pub mod controllers;
pub mod dynamics;
mod error;
pub mod geometry;
pub mod graph;
pub mod math;
pub mod qp;
pub mod safety;
pub mod sim;
pub mod verify;

pub use error::{Error, Result};
pub use math::{Rect, Vec2};
