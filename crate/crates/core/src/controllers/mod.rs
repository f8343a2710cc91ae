//! Reference multi-agent control laws.
//!
//! Every law produces single-integrator velocity commands, one per robot.
//! Safety is not their concern: commands are routed through the filter by
//! the simulation loop.

mod consensus;
mod coverage;
mod formation;
mod goal;

pub use consensus::{consensus, ConsensusController};
pub use coverage::{coverage, CoverageController, CoverageMode, CoverageOutput, CoverageParams};
pub use formation::{edge_tension, formation, FormationController, FormationSpec};
pub use goal::{AdversarialController, ConstantController, GoalController, ReplayController, ZeroController};

use crate::math::Vec2;
use crate::Result;

/// A feedback law invoked once per control period.
pub trait Controller: Send {
    fn name(&self) -> &str;

    /// Commands for the robots at positions `x` at time `t`.
    fn control(&mut self, t: f64, x: &[Vec2]) -> Result<Vec<Vec2>>;
}

impl<C: Controller + ?Sized> Controller for Box<C> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn control(&mut self, t: f64, x: &[Vec2]) -> Result<Vec<Vec2>> {
        (**self).control(t, x)
    }
}
