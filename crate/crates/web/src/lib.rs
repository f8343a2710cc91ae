//! WebAssembly bindings for the browser playground in `www/`.
//!
//! [`Playground`] steps one simulation on demand so the page can drive it
//! from `requestAnimationFrame`. [`verify_controller`] runs the verification
//! suite and returns its report as JSON.

use swarmsafe::config::{ControllerConfig, ExperimentConfig, Layout};
use swarmsafe::controllers::{Controller, CoverageController, CoverageParams};
use swarmsafe::geometry::{DensityField, DensityRef};
use swarmsafe::sim::{ScoreAccumulator, World};
use swarmsafe::verify::{default_suite, verify_configured};
use swarmsafe::Vec2;
use wasm_bindgen::prelude::*;

enum Driver {
    Coverage(CoverageController),
    Other(Box<dyn Controller>),
}

fn scenario_config(scenario: &str, robots: usize, seed: u64) -> Result<ExperimentConfig, String> {
    let base = ExperimentConfig { robots, seed, ..Default::default() };
    let cfg = match scenario {
        "swap" => ExperimentConfig { layout: Layout::Circle { radius: 0.45 }, ..base },
        "head_on" => ExperimentConfig { layout: Layout::Crossing {}, controller: ControllerConfig::HeadOn {}, ..base },
        "coverage" => ExperimentConfig { controller: ControllerConfig::default_coverage(), ..base },
        other => return Err(format!("unknown scenario {other:?}; expected swap, head_on or coverage")),
    };
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

#[wasm_bindgen]
pub struct Playground {
    config: ExperimentConfig,
    world: World,
    driver: Driver,
    u_hat: Vec<Vec2>,
    u: Vec<Vec2>,
    score: ScoreAccumulator,
    min_distance: f64,
    next_ref: u32,
}

#[wasm_bindgen]
impl Playground {
    /// `scenario` is one of `swap`, `head_on` or `coverage`.
    #[wasm_bindgen(constructor)]
    pub fn new(scenario: &str, robots: usize, seed: u64) -> Result<Playground, String> {
        let config = scenario_config(scenario, robots, seed)?;
        let poses = config.initial_poses().map_err(|e| e.to_string())?;
        let world = World::from_config(&config, poses).map_err(|e| e.to_string())?;
        let x = world.positions();
        let driver = match &config.controller {
            ControllerConfig::Coverage { kappa, mode, resolution, sigma, refs } => Driver::Coverage(
                CoverageController::new(
                    DensityField::with_refs(refs.clone(), *sigma),
                    config.safety.bounds,
                    CoverageParams { kappa: *kappa, mode: *mode, resolution: *resolution, period: config.control_period() },
                )
                .map_err(|e| e.to_string())?,
            ),
            _ => Driver::Other(config.build_controller(&x).map_err(|e| e.to_string())?),
        };
        let mut p = Playground {
            u_hat: vec![Vec2::ZERO; robots],
            u: vec![Vec2::ZERO; robots],
            config,
            world,
            driver,
            score: ScoreAccumulator::default(),
            min_distance: f64::INFINITY,
            next_ref: 1,
        };
        p.track_distance();
        Ok(p)
    }

    /// Advance `ticks` simulation ticks. On error the world is left at the
    /// last good tick.
    pub fn step(&mut self, ticks: u32) -> Result<(), String> {
        for _ in 0..ticks {
            if self.world.tick().is_multiple_of(self.config.control_period_ticks as u64) {
                let (t, x) = (self.world.t(), self.world.positions());
                self.u_hat = match &mut self.driver {
                    Driver::Coverage(c) => c.control(t, &x),
                    Driver::Other(c) => c.control(t, &x),
                }
                .map_err(|e| e.to_string())?;
            }
            let out = self.world.step(&self.u_hat, self.config.filter).map_err(|e| e.to_string())?;
            for c in &out.contacts {
                self.score.push(c, self.config.dt);
            }
            self.u = out.record.u;
            self.track_distance();
        }
        Ok(())
    }

    fn track_distance(&mut self) {
        let x = self.world.positions();
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                self.min_distance = self.min_distance.min(x[i].distance(x[j]));
            }
        }
    }

    /// Robot centers as `[x0, y0, x1, y1, ...]` (m).
    pub fn positions(&self) -> Vec<f64> {
        self.world.positions().iter().flat_map(|p| [p.x, p.y]).collect()
    }

    /// Last applied velocities, interleaved like [`Playground::positions`] (m/s).
    pub fn velocities(&self) -> Vec<f64> {
        self.u.iter().flat_map(|u| [u.x, u.y]).collect()
    }

    /// Workspace as `[left, right, bottom, top]` (m).
    pub fn bounds(&self) -> Vec<f64> {
        let b = self.config.safety.bounds;
        vec![b.left, b.right, b.bottom, b.top]
    }

    pub fn robot_radius(&self) -> f64 {
        self.config.robot_radius
    }

    pub fn t(&self) -> f64 {
        self.world.t()
    }

    pub fn filter(&self) -> bool {
        self.config.filter
    }

    pub fn set_filter(&mut self, on: bool) {
        self.config.filter = on;
    }

    pub fn gamma(&self) -> f64 {
        self.config.safety.gamma
    }

    pub fn safety_distance(&self) -> f64 {
        self.config.safety.d_s
    }

    /// Change `gamma` and `d_s` together. Rejected values leave both unchanged.
    pub fn set_safety(&mut self, gamma: f64, d_s: f64) -> Result<(), String> {
        let mut cfg = self.config.clone();
        cfg.safety.gamma = gamma;
        cfg.safety.d_s = d_s;
        cfg.validate().map_err(|e| e.to_string())?;
        self.world.set_safety(cfg.safety).map_err(|e| e.to_string())?;
        self.config = cfg;
        Ok(())
    }

    /// Place a density reference (coverage only). Returns its id.
    pub fn add_density(&mut self, x: f64, y: f64, weight: f64) -> Result<u32, String> {
        let Driver::Coverage(c) = &mut self.driver else {
            return Err("density references apply to the coverage scenario only".into());
        };
        let p = Vec2::new(x, y);
        if !(p.is_finite() && self.config.safety.bounds.contains(p)) {
            return Err(format!("({x}, {y}) is outside the workspace"));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(format!("weight must be > 0, got {weight}"));
        }
        let id = self.next_ref;
        self.next_ref += 1;
        c.field.refs.push(DensityRef::fixed(id, p, weight));
        Ok(id)
    }

    pub fn clear_density(&mut self) {
        if let Driver::Coverage(c) = &mut self.driver {
            c.field.refs.clear();
        }
    }

    /// Density references as `[x0, y0, w0, x1, ...]`.
    pub fn density(&self) -> Vec<f64> {
        match &self.driver {
            Driver::Coverage(c) => c.field.refs.iter().flat_map(|r| [r.position.x, r.position.y, r.weight]).collect(),
            Driver::Other(_) => Vec::new(),
        }
    }

    /// Safety score of the run so far; 1 before the first tick.
    pub fn score(&self) -> f64 {
        let ticks = self.world.tick() as usize;
        if ticks == 0 {
            return 1.0;
        }
        self.score.report(self.config.robots, ticks, self.config.safety.alpha).map_or(1.0, |r| r.score)
    }

    pub fn impacts(&self) -> usize {
        let ticks = (self.world.tick() as usize).max(1);
        self.score.report(self.config.robots, ticks, self.config.safety.alpha).map_or(0, |r| r.impacts)
    }

    /// Smallest center distance seen so far (m).
    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }
}

/// Verify a named controller (`zero`, `swap`, `head_on`, `adversarial` or
/// `consensus`) on the scenario suite with `seconds` per scenario. Returns the
/// report as JSON.
#[wasm_bindgen]
pub fn verify_controller(name: &str, robots: usize, seconds: f64) -> Result<String, String> {
    let controller = match name {
        "zero" => ControllerConfig::Zero {},
        "swap" => ControllerConfig::default(),
        "head_on" => ControllerConfig::HeadOn {},
        "adversarial" => ControllerConfig::Adversarial {},
        "consensus" => ControllerConfig::Consensus { graph: Default::default() },
        other => return Err(format!("unknown controller {other:?}")),
    };
    if !(seconds.is_finite() && seconds > 0.0 && seconds <= 60.0) {
        return Err(format!("seconds must be in (0, 60], got {seconds}"));
    }
    let base = ExperimentConfig { robots, controller, ..Default::default() };
    base.validate().map_err(|e| e.to_string())?;
    let mut suite = default_suite(robots);
    suite.iter_mut().for_each(|s| s.duration = seconds);
    let report = verify_configured(&base, &suite).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&report).expect("report serializes"))
}
