//! Experiment configuration.
//!
//! Configurations are JSON documents. Missing fields take their defaults and
//! unknown fields are rejected. [`ExperimentConfig::validate`] enforces every
//! parameter invariant of the modules it feeds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controllers::{
    AdversarialController, ConsensusController, ConstantController, Controller, CoverageController, CoverageMode, CoverageParams,
    FormationController, FormationSpec, GoalController, ReplayController, ZeroController,
};
use crate::dynamics::Pose;
use crate::geometry::{DensityField, DensityRef, DEFAULT_FLOOR, DEFAULT_SIGMA};
use crate::graph::Topology;
use crate::math::{Rect, Vec2};
use crate::safety::SafetyParams;
use crate::{Error, Result};

/// Minimum safety score for running a controller without the filter.
pub const BYPASS_THRESHOLD: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    #[default]
    Cycle,
    Path,
    Complete,
}

impl GraphKind {
    pub fn build(self, n: usize) -> Topology {
        match self {
            GraphKind::Cycle => Topology::cycle(n),
            GraphKind::Path => Topology::path(n),
            GraphKind::Complete => Topology::complete(n),
        }
    }
}

/// Initial placement of the robots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Layout {
    /// Uniform rejection sampling with separation at least `1.2 d_s`.
    Random {},
    Explicit {
        poses: Vec<Pose>,
    },
    /// Evenly spaced on a circle, facing the center.
    Circle {
        radius: f64,
    },
    /// Four robots on the corners of a centered square of half-width `half`.
    SquareCorners {
        half: f64,
    },
    /// Tight lattice around the workspace center with spacing `1.25 d_s`.
    Clustered {},
    /// Spread along the walls just inside the admissible region.
    NearWall {},
    /// Two facing columns on either side of the center.
    Crossing {},
}

impl Default for Layout {
    fn default() -> Self {
        Layout::Random {}
    }
}

impl Layout {
    /// Generate `n` poses. Every pose lies in `arena.inset(radius)` and all
    /// pairs are at least `d_s` apart.
    pub fn generate(&self, n: usize, safety: &SafetyParams, radius: f64, seed: u64) -> Result<Vec<Pose>> {
        let region = safety.bounds.inset(radius);
        let d_s = safety.d_s;
        let poses: Vec<Pose> = match self {
            Layout::Random {} => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let inner = region.inset(0.01);
                let mut pts: Vec<Vec2> = Vec::with_capacity(n);
                let mut attempts = 0;
                while pts.len() < n {
                    attempts += 1;
                    if attempts > 100_000 {
                        return Err(Error::Config(format!("could not place {n} robots with separation {}", 1.2 * d_s)));
                    }
                    let c = Vec2::new(rng.gen_range(inner.left..inner.right), rng.gen_range(inner.bottom..inner.top));
                    if pts.iter().all(|p| p.distance(c) >= 1.2 * d_s) {
                        pts.push(c);
                    }
                }
                pts.into_iter().map(|p| Pose::new(p.x, p.y, rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))).collect()
            }
            Layout::Explicit { poses } => {
                if poses.len() != n {
                    return Err(Error::Config(format!("explicit layout has {} poses for {n} robots", poses.len())));
                }
                poses.iter().map(|p| Pose::new(p.x, p.y, p.theta)).collect()
            }
            Layout::Circle { radius: r } => (0..n)
                .map(|k| {
                    let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    Pose::new(r * a.cos(), r * a.sin(), a + std::f64::consts::PI)
                })
                .collect(),
            Layout::SquareCorners { half } => {
                if n != 4 {
                    return Err(Error::Config(format!("square-corner layout needs 4 robots, got {n}")));
                }
                [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
                    .iter()
                    .map(|&(sx, sy): &(f64, f64)| Pose::new(sx * half, sy * half, (-sy).atan2(-sx)))
                    .collect()
            }
            Layout::Clustered {} => {
                let spacing = 1.25 * d_s;
                let cols = (n as f64).sqrt().ceil() as usize;
                let origin = region.center() - Vec2::new(0.5 * spacing * (cols - 1) as f64, 0.5 * spacing * ((n - 1) / cols) as f64);
                (0..n)
                    .map(|k| {
                        let p = origin + Vec2::new((k % cols) as f64 * spacing, (k / cols) as f64 * spacing);
                        Pose::new(p.x, p.y, 0.0)
                    })
                    .collect()
            }
            Layout::NearWall {} => {
                let ring = region.inset(0.005);
                let perimeter = 2.0 * (ring.width() + ring.height());
                (0..n)
                    .map(|k| {
                        let mut s = perimeter * (k as f64 + 0.5) / n as f64;
                        let p = if s < ring.width() {
                            Vec2::new(ring.left + s, ring.bottom)
                        } else if {
                            s -= ring.width();
                            s < ring.height()
                        } {
                            Vec2::new(ring.right, ring.bottom + s)
                        } else if {
                            s -= ring.height();
                            s < ring.width()
                        } {
                            Vec2::new(ring.right - s, ring.top)
                        } else {
                            s -= ring.width();
                            Vec2::new(ring.left, ring.top - s)
                        };
                        Pose::new(p.x, p.y, 0.0)
                    })
                    .collect()
            }
            Layout::Crossing {} => {
                let rows = n.div_ceil(2);
                let pitch = (region.height() * 0.8) / rows.max(1) as f64;
                (0..n)
                    .map(|k| {
                        let side = if k % 2 == 0 { -1.0 } else { 1.0 };
                        let row = k / 2;
                        let y = region.center().y - 0.5 * pitch * (rows - 1) as f64 + pitch * row as f64;
                        let x = region.center().x + side * 0.35 * region.width();
                        Pose::new(x, y, if side < 0.0 { 0.0 } else { std::f64::consts::PI })
                    })
                    .collect()
            }
        };
        check_layout(&poses, &region, d_s)?;
        Ok(poses)
    }
}

fn check_layout(poses: &[Pose], region: &Rect, d_s: f64) -> Result<()> {
    for (i, p) in poses.iter().enumerate() {
        if !region.contains(p.position()) {
            return Err(Error::Config(format!("initial position of robot {i} ({}, {}) is outside the admissible region", p.x, p.y)));
        }
        for (j, q) in poses.iter().enumerate().skip(i + 1) {
            if p.position().distance(q.position()) < d_s {
                return Err(Error::Config(format!("robots {i} and {j} start closer than d_s = {d_s}")));
            }
        }
    }
    Ok(())
}

/// What happens when robots overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactMode {
    /// Record the contact, then push the bodies apart.
    #[default]
    Resolve,
    /// Record the contact and let bodies pass through each other.
    Record,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControllerConfig {
    Consensus {
        #[serde(default)]
        graph: GraphKind,
    },
    Formation {
        /// Reference shape; desired distances are read off it.
        shape: Vec<[f64; 2]>,
        edges: Vec<(usize, usize)>,
        gain: f64,
    },
    Coverage {
        kappa: f64,
        #[serde(default)]
        mode: CoverageMode,
        resolution: usize,
        #[serde(default = "default_sigma")]
        sigma: f64,
        #[serde(default)]
        refs: Vec<DensityRef>,
    },
    /// Drive each robot to the point opposite its start through the center.
    Swap {
        gain: f64,
        lateral_gain: f64,
    },
    Adversarial {},
    /// Constant commands pushing every robot across the vertical center line.
    HeadOn {},
    Zero {},
    /// Command frames replayed from a file (see [`ReplayController`]).
    External {
        path: String,
    },
}

fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}

impl ControllerConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerConfig::Consensus { .. } => "consensus",
            ControllerConfig::Formation { .. } => "formation",
            ControllerConfig::Coverage { .. } => "coverage",
            ControllerConfig::Swap { .. } => "swap",
            ControllerConfig::Adversarial {} => "adversarial",
            ControllerConfig::HeadOn {} => "head_on",
            ControllerConfig::Zero {} => "zero",
            ControllerConfig::External { .. } => "external",
        }
    }

    /// Regular hexagon of circumradius 0.25 m with a fan triangulation from
    /// vertex 0: 9 edges, minimally rigid.
    pub fn default_formation() -> Self {
        let shape = (0..6)
            .map(|k| {
                let a = std::f64::consts::PI / 3.0 * k as f64;
                [0.25 * a.cos(), 0.25 * a.sin()]
            })
            .collect();
        let mut edges: Vec<(usize, usize)> = (0..6).map(|i| (i, (i + 1) % 6)).collect();
        edges.extend([(0, 2), (0, 3), (0, 4)]);
        ControllerConfig::Formation { shape, edges, gain: 5.0 }
    }

    pub fn default_coverage() -> Self {
        ControllerConfig::Coverage { kappa: 1.0, mode: CoverageMode::Lloyd, resolution: 64, sigma: DEFAULT_SIGMA, refs: Vec::new() }
    }
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig::Swap { gain: 1.0, lateral_gain: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub robots: usize,
    /// Simulated seconds.
    pub duration: f64,
    /// Simulation tick (s).
    pub dt: f64,
    /// Ticks per controller invocation.
    pub control_period_ticks: u32,
    pub safety: SafetyParams,
    pub robot_radius: f64,
    pub controller: ControllerConfig,
    pub layout: Layout,
    pub seed: u64,
    pub filter: bool,
    pub contacts: ContactMode,
    /// Directory for trace, summary and plot output.
    pub out: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            robots: 4,
            duration: 30.0,
            dt: 0.01,
            control_period_ticks: 5,
            safety: SafetyParams::default(),
            robot_radius: 0.02,
            controller: ControllerConfig::default(),
            layout: Layout::Random {},
            seed: 0,
            filter: true,
            contacts: ContactMode::Resolve,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn control_period(&self) -> f64 {
        self.dt * self.control_period_ticks as f64
    }

    pub fn tick_count(&self) -> u64 {
        (self.duration / self.dt).round() as u64
    }

    /// Safety parameters for robot centers: the arena shrunk by the body radius.
    pub fn filter_params(&self) -> SafetyParams {
        SafetyParams { bounds: self.safety.bounds.inset(self.robot_radius), ..self.safety }
    }

    pub fn validate(&self) -> Result<()> {
        if self.robots == 0 {
            return Err(Error::Config("robots must be >= 1".into()));
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(Error::Config(format!("duration must be >= 0, got {}", self.duration)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.control_period_ticks == 0 {
            return Err(Error::Config("control_period_ticks must be >= 1".into()));
        }
        if !(self.robot_radius.is_finite() && self.robot_radius > 0.0) {
            return Err(Error::Config(format!("robot_radius must be > 0, got {}", self.robot_radius)));
        }
        self.safety.validate().map_err(|e| Error::Config(format!("safety: {e}")))?;
        self.filter_params().validate().map_err(|e| Error::Config(format!("safety (radius-inset workspace): {e}")))?;
        if self.safety.d_s < 2.0 * self.robot_radius {
            return Err(Error::Config(format!("d_s = {} must be at least the body diameter {}", self.safety.d_s, 2.0 * self.robot_radius)));
        }
        if self.safety.gamma * self.dt > 1.0 {
            return Err(Error::Config(format!("gamma * dt = {} must not exceed 1", self.safety.gamma * self.dt)));
        }
        match &self.controller {
            ControllerConfig::Formation { shape, edges, gain } => {
                if shape.len() != self.robots {
                    return Err(Error::Config(format!("formation shape has {} points for {} robots", shape.len(), self.robots)));
                }
                let topology = Topology::new(self.robots, edges.iter().copied())?;
                let shape: Vec<Vec2> = shape.iter().copied().map(Vec2::from).collect();
                FormationSpec::from_shape(&shape, topology, *gain)?;
            }
            ControllerConfig::Coverage { kappa, mode, resolution, sigma, refs } => {
                CoverageParams { kappa: *kappa, mode: *mode, resolution: *resolution, period: self.control_period() }
                    .validate()
                    .map_err(|e| Error::Config(e.to_string()))?;
                DensityField { refs: refs.clone(), sigma: *sigma, floor: DEFAULT_FLOOR }
                    .validate()
                    .map_err(|e| Error::Config(e.to_string()))?;
            }
            ControllerConfig::Swap { gain, lateral_gain } if !(*gain > 0.0 && *lateral_gain >= 0.0) => {
                return Err(Error::Config("swap gains must satisfy gain > 0 and lateral_gain >= 0".into()));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn initial_poses(&self) -> Result<Vec<Pose>> {
        self.layout.generate(self.robots, &self.safety, self.robot_radius, self.seed)
    }

    /// Instantiate the configured controller for robots starting at `initial`.
    pub fn build_controller(&self, initial: &[Vec2]) -> Result<Box<dyn Controller>> {
        Ok(match &self.controller {
            ControllerConfig::Consensus { graph } => Box::new(ConsensusController { topology: graph.build(self.robots) }),
            ControllerConfig::Formation { shape, edges, gain } => {
                let topology = Topology::new(self.robots, edges.iter().copied())?;
                let shape: Vec<Vec2> = shape.iter().copied().map(Vec2::from).collect();
                Box::new(FormationController { spec: FormationSpec::from_shape(&shape, topology, *gain)? })
            }
            ControllerConfig::Coverage { kappa, mode, resolution, sigma, refs } => Box::new(CoverageController::new(
                DensityField { refs: refs.clone(), sigma: *sigma, floor: DEFAULT_FLOOR },
                self.safety.bounds,
                CoverageParams { kappa: *kappa, mode: *mode, resolution: *resolution, period: self.control_period() },
            )?),
            ControllerConfig::Swap { gain, lateral_gain } => {
                let center = self.safety.bounds.center();
                let goals = initial.iter().map(|&p| center * 2.0 - p).collect();
                Box::new(GoalController::new(goals, *gain, *lateral_gain, self.safety.alpha)?)
            }
            ControllerConfig::Adversarial {} => Box::new(AdversarialController::new(self.seed ^ 0x5eed, self.safety.alpha)),
            ControllerConfig::HeadOn {} => {
                let center = self.safety.bounds.center();
                let a = self.safety.alpha;
                let commands = initial.iter().map(|p| Vec2::new(if p.x < center.x { a } else { -a }, 0.0)).collect();
                Box::new(ConstantController { commands })
            }
            ControllerConfig::Zero {} => Box::new(ZeroController),
            ControllerConfig::External { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {path}: {e}")))?;
                Box::new(ReplayController::parse(&text)?)
            }
        })
    }
}
