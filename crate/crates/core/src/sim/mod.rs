//! Fixed-step simulation engine.
//!
//! Each tick: filter (or clamp) the held nominal command, integrate
//! single-integrator kinematics, detect contacts, record them with their
//! normal approach speed, then resolve penetration.

pub mod collision;
pub mod score;
pub mod trace;

use std::collections::BTreeMap;

use crate::config::{ContactMode, ExperimentConfig};
use crate::controllers::Controller;
use crate::dynamics::{si_step, Pose};
use crate::math::{Rect, Vec2};
use crate::safety::{FilterOptions, SafetyFilter, SafetyParams};
use crate::{Error, Result};

pub use collision::{Contact, ContactPair, Resolution, Wall};
pub use score::{safety_score, ScoreAccumulator, ScoreReport};
pub use trace::{ContactEvent, RunStatus, TickRecord, Trace};

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub record: TickRecord,
    pub contacts: Vec<ContactEvent>,
    pub resolution: Option<Resolution>,
}

#[derive(Debug, Clone)]
pub struct World {
    t: f64,
    tick: u64,
    poses: Vec<Pose>,
    radii: Vec<f64>,
    arena: Rect,
    dt: f64,
    contact_mode: ContactMode,
    filter: SafetyFilter,
    /// Start time of every contact seen on the previous tick.
    open: BTreeMap<ContactPair, f64>,
}

impl World {
    /// `safety.bounds` is the physical arena; the filter works on the arena
    /// shrunk by the largest radius so that filtered robots never touch a wall.
    pub fn new(poses: Vec<Pose>, radii: Vec<f64>, safety: SafetyParams, dt: f64, contact_mode: ContactMode) -> Result<Self> {
        if poses.len() != radii.len() {
            return Err(Error::Dimension(format!("{} poses for {} radii", poses.len(), radii.len())));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        if let Some(i) = radii.iter().position(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidParameter(format!("radius of robot {i} must be > 0")));
        }
        if let Some(i) = poses.iter().position(|p| !(p.x.is_finite() && p.y.is_finite() && p.theta.is_finite())) {
            return Err(Error::NonFinite(format!("pose of robot {i}")));
        }
        let filter = SafetyFilter::new(Self::filter_params(&safety, &radii), FilterOptions::default())?;
        Ok(Self { t: 0.0, tick: 0, poses, radii, arena: safety.bounds, dt, contact_mode, filter, open: BTreeMap::new() })
    }

    pub fn from_config(config: &ExperimentConfig, poses: Vec<Pose>) -> Result<Self> {
        let radii = vec![config.robot_radius; poses.len()];
        Self::new(poses, radii, config.safety, config.dt, config.contacts)
    }

    fn filter_params(safety: &SafetyParams, radii: &[f64]) -> SafetyParams {
        let r = radii.iter().copied().fold(0.0, f64::max);
        SafetyParams { bounds: safety.bounds.inset(r), ..*safety }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn poses(&self) -> &[Pose] {
        &self.poses
    }

    pub fn positions(&self) -> Vec<Vec2> {
        self.poses.iter().map(Pose::position).collect()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn arena(&self) -> Rect {
        self.arena
    }

    /// Safety parameters in arena coordinates.
    pub fn safety(&self) -> SafetyParams {
        SafetyParams { bounds: self.arena, ..*self.filter.params() }
    }

    pub fn set_safety(&mut self, safety: SafetyParams) -> Result<()> {
        safety.bounds.validate()?;
        self.filter.set_params(Self::filter_params(&safety, &self.radii))?;
        self.arena = safety.bounds;
        Ok(())
    }

    /// Advance one tick. On error the world is left unchanged.
    pub fn step(&mut self, u_hat: &[Vec2], use_filter: bool) -> Result<StepOutput> {
        let n = self.poses.len();
        if u_hat.len() != n {
            return Err(Error::Dimension(format!("{} commands for {n} robots", u_hat.len())));
        }
        if let Some(i) = u_hat.iter().position(|u| !u.is_finite()) {
            return Err(Error::NonFinite(format!("command for robot {i}")));
        }
        let alpha = self.filter.params().alpha;
        let (u, status) = if use_filter {
            let out = self.filter.apply(u_hat, &self.positions())?;
            (out.u, Some(out.status))
        } else {
            (u_hat.iter().map(|v| v.clamp_box(alpha)).collect(), None)
        };

        for (pose, &ui) in self.poses.iter_mut().zip(&u) {
            *pose = si_step(*pose, ui, self.dt)?;
        }
        self.tick += 1;
        self.t = self.tick as f64 * self.dt;

        let mut p = self.positions();
        let detected = collision::detect(&p, &self.radii, &self.arena);
        let mut open = BTreeMap::new();
        let contacts = detected
            .iter()
            .map(|c| {
                let start = *self.open.get(&c.pair).unwrap_or(&self.t);
                open.insert(c.pair, start);
                let normal_speed = match c.pair {
                    ContactPair::Robots { i, j } => (u[i] - u[j]).dot(c.normal),
                    ContactPair::Wall { i, .. } => u[i].dot(c.normal),
                };
                ContactEvent {
                    tick: self.tick,
                    t: self.t,
                    pair: c.pair,
                    depth: c.depth,
                    normal_speed: normal_speed.max(0.0),
                    duration: self.t - start,
                }
            })
            .collect();
        self.open = open;

        let resolution = match self.contact_mode {
            ContactMode::Resolve if !detected.is_empty() => {
                let res = collision::resolve(&mut p, &self.radii, &self.arena);
                for (pose, q) in self.poses.iter_mut().zip(&p) {
                    pose.x = q.x;
                    pose.y = q.y;
                }
                Some(res)
            }
            _ => None,
        };

        Ok(StepOutput {
            record: TickRecord { tick: self.tick, t: self.t, poses: self.poses.clone(), u_hat: u_hat.to_vec(), u, filter: status },
            contacts,
            resolution,
        })
    }
}

/// Run `config` with its own controller.
pub fn run_configured(config: &ExperimentConfig) -> Result<Trace> {
    config.validate()?;
    let initial = config.initial_poses()?;
    let positions: Vec<Vec2> = initial.iter().map(Pose::position).collect();
    let mut controller = config.build_controller(&positions)?;
    run_from(config, initial, controller.as_mut())
}

/// Run `config` with an externally supplied controller.
pub fn run(config: &ExperimentConfig, controller: &mut dyn Controller) -> Result<Trace> {
    config.validate()?;
    let initial = config.initial_poses()?;
    run_from(config, initial, controller)
}

/// A controller error or an invalid command ends the run early with status
/// [`RunStatus::Truncated`]; the trace up to that point is kept.
pub fn run_from(config: &ExperimentConfig, initial: Vec<Pose>, controller: &mut dyn Controller) -> Result<Trace> {
    let mut world = World::from_config(config, initial.clone())?;
    let mut trace = Trace { config: config.clone(), initial, ticks: Vec::new(), contacts: Vec::new(), status: RunStatus::Complete };
    let period = config.control_period_ticks as u64;
    let mut u_hat = vec![Vec2::ZERO; world.poses().len()];
    for k in 0..config.tick_count() {
        if k % period == 0 {
            match controller.control(world.t(), &world.positions()) {
                Ok(u) => u_hat = u,
                Err(e) => {
                    trace.status = RunStatus::Truncated { reason: format!("controller {}: {e}", controller.name()) };
                    break;
                }
            }
        }
        match world.step(&u_hat, config.filter) {
            Ok(out) => {
                trace.ticks.push(out.record);
                trace.contacts.extend(out.contacts);
            }
            Err(e) => {
                trace.status = RunStatus::Truncated { reason: format!("step {k}: {e}") };
                break;
            }
        }
    }
    Ok(trace)
}
