//! Session state and message handling, independent of any transport.

use swarmsafe::config::{ControllerConfig, ExperimentConfig};
use swarmsafe::controllers::{Controller, CoverageController, CoverageParams};
use swarmsafe::geometry::{DensityField, DensityRef};
use swarmsafe::sim::{ScoreAccumulator, World};
use swarmsafe::{Result, Vec2};

use crate::protocol::{CursorSnapshot, Message, ParamSnapshot, RobotSnapshot, RunState, PROTOCOL_VERSION};

enum Driver {
    Coverage(CoverageController),
    Other(Box<dyn Controller>),
}

/// Parameters a client may change, with their admissible closed ranges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRanges {
    pub gamma: (f64, f64),
    pub d_s: (f64, f64),
    pub kappa: (f64, f64),
}

impl ParamRanges {
    /// `gamma dt <= 1`, `d_s` between the body diameter and a quarter of the
    /// narrower workspace side, and `kappa * period <= 2`.
    pub fn for_config(cfg: &ExperimentConfig) -> Self {
        let b = cfg.filter_params().bounds;
        Self {
            gamma: (1e-3, 1.0 / cfg.dt),
            d_s: (2.0 * cfg.robot_radius, 0.25 * b.width().min(b.height())),
            kappa: (1e-3, 2.0 / cfg.control_period()),
        }
    }
}

pub struct Session {
    config: ExperimentConfig,
    world: World,
    driver: Driver,
    u_hat: Vec<Vec2>,
    status: RunState,
    kappa: f64,
    pending: Vec<(String, f64)>,
    ranges: ParamRanges,
    cursors: Vec<DensityRef>,
    score: ScoreAccumulator,
    clients: usize,
}

impl Session {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let initial = config.initial_poses()?;
        let world = World::from_config(&config, initial)?;
        let (driver, kappa, cursors) = match config.controller.clone() {
            ControllerConfig::Coverage { kappa, mode, resolution, sigma, refs } => {
                let c = CoverageController::new(
                    DensityField::with_refs(refs.clone(), sigma),
                    config.safety.bounds,
                    CoverageParams { kappa, mode, resolution, period: config.control_period() },
                )?;
                (Driver::Coverage(c), kappa, refs)
            }
            _ => (Driver::Other(config.build_controller(&world.positions())?), 0.0, Vec::new()),
        };
        let n = config.robots;
        Ok(Self {
            ranges: ParamRanges::for_config(&config),
            config,
            world,
            driver,
            u_hat: vec![Vec2::ZERO; n],
            status: RunState::Running,
            kappa,
            pending: Vec::new(),
            cursors,
            score: ScoreAccumulator::default(),
            clients: 0,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn status(&self) -> RunState {
        self.status
    }

    pub fn ranges(&self) -> ParamRanges {
        self.ranges
    }

    pub fn cursors(&self) -> &[DensityRef] {
        &self.cursors
    }

    pub fn set_clients(&mut self, n: usize) {
        self.clients = n;
    }

    /// Apply one inbound message. Returns the reply for the sender, if any.
    /// Rejected messages leave the session unchanged.
    pub fn handle_message(&mut self, msg: Message) -> Option<Message> {
        if msg.version() != PROTOCOL_VERSION {
            return Some(Message::error(format!("unsupported protocol version {}", msg.version())));
        }
        let result = match msg {
            Message::Hello { .. } => return Some(Message::Hello { v: PROTOCOL_VERSION, role: "server".into() }),
            Message::CursorAdd { id, x, y, w, .. } => self.cursor_add(id, x, y, w),
            Message::CursorUpdate { id, x, y, .. } => self.cursor_update(id, x, y),
            Message::CursorRemove { id, .. } => match self.cursors.iter().position(|c| c.id == id) {
                Some(k) => {
                    self.cursors.remove(k);
                    self.sync_density();
                    Ok(())
                }
                None => Err(format!("no cursor with id {id}")),
            },
            Message::SetParam { name, value, .. } => self.set_param(name, value),
            Message::Pause { .. } => {
                self.status = RunState::Paused;
                Ok(())
            }
            Message::Resume { .. } => {
                self.status = RunState::Running;
                Ok(())
            }
            Message::State { .. } | Message::Heartbeat { .. } | Message::Error { .. } => {
                Err("message type is server-to-client only".to_string())
            }
        };
        result.err().map(Message::error)
    }

    fn check_point(&self, x: f64, y: f64) -> std::result::Result<Vec2, String> {
        let p = Vec2::new(x, y);
        if !p.is_finite() {
            return Err("cursor position must be finite".into());
        }
        if !self.config.safety.bounds.contains(p) {
            return Err(format!("cursor ({x}, {y}) is outside the workspace"));
        }
        Ok(p)
    }

    fn cursor_add(&mut self, id: u32, x: f64, y: f64, w: f64) -> std::result::Result<(), String> {
        let p = self.check_point(x, y)?;
        if !(w.is_finite() && w > 0.0) {
            return Err(format!("cursor weight must be > 0, got {w}"));
        }
        if self.cursors.iter().any(|c| c.id == id) {
            return Err(format!("cursor id {id} already exists"));
        }
        self.cursors.push(DensityRef::fixed(id, p, w));
        self.sync_density();
        Ok(())
    }

    fn cursor_update(&mut self, id: u32, x: f64, y: f64) -> std::result::Result<(), String> {
        let p = self.check_point(x, y)?;
        let c = self.cursors.iter_mut().find(|c| c.id == id).ok_or(format!("no cursor with id {id}"))?;
        c.position = p;
        self.sync_density();
        Ok(())
    }

    fn set_param(&mut self, name: String, value: f64) -> std::result::Result<(), String> {
        let (lo, hi) = match name.as_str() {
            "gamma" => self.ranges.gamma,
            "d_s" => self.ranges.d_s,
            "kappa" => self.ranges.kappa,
            _ => return Err(format!("unknown parameter {name:?}; settable: gamma, d_s, kappa")),
        };
        if !(value.is_finite() && value >= lo && value <= hi) {
            return Err(format!("{name} = {value} out of range [{lo}, {hi}]"));
        }
        self.pending.retain(|(n, _)| *n != name);
        self.pending.push((name, value));
        Ok(())
    }

    fn sync_density(&mut self) {
        if let Driver::Coverage(c) = &mut self.driver {
            c.field.refs = self.cursors.clone();
        }
    }

    fn apply_pending(&mut self) -> Result<()> {
        for (name, value) in std::mem::take(&mut self.pending) {
            match name.as_str() {
                "kappa" => {
                    self.kappa = value;
                    if let Driver::Coverage(c) = &mut self.driver {
                        c.params.kappa = value;
                    }
                }
                _ => {
                    let mut s = self.world.safety();
                    if name == "gamma" {
                        s.gamma = value;
                    } else {
                        s.d_s = value;
                    }
                    self.world.set_safety(s)?;
                    self.config.safety = s;
                }
            }
        }
        Ok(())
    }

    /// Advance one simulation tick unless paused. Parameter changes take
    /// effect at the first tick of a control period.
    pub fn tick(&mut self) -> Result<()> {
        if self.status == RunState::Paused {
            return Ok(());
        }
        if self.world.tick().is_multiple_of(self.config.control_period_ticks as u64) {
            self.apply_pending()?;
            let x = self.world.positions();
            let t = self.world.t();
            self.u_hat = match &mut self.driver {
                Driver::Coverage(c) => c.control(t, &x)?,
                Driver::Other(c) => c.control(t, &x)?,
            };
        }
        let out = self.world.step(&self.u_hat, self.config.filter)?;
        for c in &out.contacts {
            self.score.push(c, self.world.dt());
        }
        Ok(())
    }

    pub fn score(&self) -> f64 {
        self.score.report(self.world.poses().len(), self.world.tick() as usize, self.config.safety.alpha).map_or(1.0, |r| r.score)
    }

    pub fn params(&self) -> ParamSnapshot {
        let s = self.world.safety();
        ParamSnapshot { gamma: s.gamma, d_s: s.d_s, kappa: self.kappa, alpha: s.alpha }
    }

    /// Broadcast message: full state while running, heartbeat while paused.
    pub fn snapshot(&self) -> Message {
        if self.status == RunState::Paused {
            return Message::Heartbeat { v: PROTOCOL_VERSION, t: self.world.t(), status: self.status };
        }
        Message::State {
            v: PROTOCOL_VERSION,
            t: self.world.t(),
            tick: self.world.tick(),
            status: self.status,
            robots: self
                .world
                .poses()
                .iter()
                .enumerate()
                .map(|(id, p)| RobotSnapshot { id: id as u32, x: p.x, y: p.y, theta: p.theta })
                .collect(),
            density_refs: self.cursors.iter().map(|c| CursorSnapshot { id: c.id, x: c.position.x, y: c.position.y, w: c.weight }).collect(),
            params: self.params(),
            score: self.score(),
            clients: self.clients,
        }
    }
}
