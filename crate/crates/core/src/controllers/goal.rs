use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controllers::Controller;
use crate::math::Vec2;
use crate::{Error, Result};

/// Saturated proportional waypoint tracking at the single-integrator level:
/// `u = sat((k I + b R) (goal - x))`, where `R` turns the error clockwise
/// by 90 degrees. The lateral term `b` makes robots meeting head-on pass
/// on their right instead of stalling in a symmetric standoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalController {
    pub goals: Vec<Vec2>,
    pub gain: f64,
    pub lateral_gain: f64,
    /// Euclidean speed limit (m/s).
    pub max_speed: f64,
}

impl GoalController {
    pub fn new(goals: Vec<Vec2>, gain: f64, lateral_gain: f64, max_speed: f64) -> Result<Self> {
        if !(gain > 0.0 && lateral_gain >= 0.0 && max_speed > 0.0) {
            return Err(Error::Config(format!(
                "goal gains must satisfy gain > 0, lateral >= 0, max_speed > 0 (got {gain}, {lateral_gain}, {max_speed})"
            )));
        }
        if goals.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("goal".into()));
        }
        Ok(Self { goals, gain, lateral_gain, max_speed })
    }

    pub fn command(&self, x: Vec2, goal: Vec2) -> Vec2 {
        let e = goal - x;
        let u = e * self.gain - e.perp() * self.lateral_gain;
        let speed = u.norm();
        if speed > self.max_speed {
            u * (self.max_speed / speed)
        } else {
            u
        }
    }
}

impl Controller for GoalController {
    fn name(&self) -> &str {
        "goal"
    }

    fn control(&mut self, _t: f64, x: &[Vec2]) -> Result<Vec<Vec2>> {
        if x.len() != self.goals.len() {
            return Err(Error::Dimension(format!("{} goals for {} robots", self.goals.len(), x.len())));
        }
        Ok(x.iter().zip(&self.goals).map(|(&xi, &g)| self.command(xi, g)).collect())
    }
}

/// Always commands zero velocity.
#[derive(Debug, Clone, Default)]
pub struct ZeroController;

impl Controller for ZeroController {
    fn name(&self) -> &str {
        "zero"
    }

    fn control(&mut self, _t: f64, x: &[Vec2]) -> Result<Vec<Vec2>> {
        Ok(vec![Vec2::ZERO; x.len()])
    }
}

/// Replays the same command vector every period.
#[derive(Debug, Clone)]
pub struct ConstantController {
    pub commands: Vec<Vec2>,
}

impl Controller for ConstantController {
    fn name(&self) -> &str {
        "constant"
    }

    fn control(&mut self, _t: f64, x: &[Vec2]) -> Result<Vec<Vec2>> {
        if x.len() != self.commands.len() {
            return Err(Error::Dimension(format!("{} commands for {} robots", self.commands.len(), x.len())));
        }
        Ok(self.commands.clone())
    }
}

/// Uniform random commands in the `alpha` box, redrawn every period from a seeded stream.
#[derive(Debug, Clone)]
pub struct AdversarialController {
    rng: ChaCha8Rng,
    pub alpha: f64,
}

impl AdversarialController {
    pub fn new(seed: u64, alpha: f64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), alpha }
    }
}

impl Controller for AdversarialController {
    fn name(&self) -> &str {
        "adversarial"
    }

    fn control(&mut self, _t: f64, x: &[Vec2]) -> Result<Vec<Vec2>> {
        let a = self.alpha;
        Ok((0..x.len()).map(|_| Vec2::new(self.rng.gen_range(-a..=a), self.rng.gen_range(-a..=a))).collect())
    }
}

/// Plays back recorded command frames, one per control period, then zeros.
///
/// The text format is one JSON array per line, each holding one `[vx, vy]`
/// pair per robot.
#[derive(Debug, Clone)]
pub struct ReplayController {
    frames: Vec<Vec<Vec2>>,
    next: usize,
}

impl ReplayController {
    pub fn new(frames: Vec<Vec<Vec2>>) -> Self {
        Self { frames, next: 0 }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut frames = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let raw: Vec<[f64; 2]> =
                serde_json::from_str(line).map_err(|e| Error::Config(format!("command frame on line {}: {e}", lineno + 1)))?;
            frames.push(raw.into_iter().map(Vec2::from).collect());
        }
        Ok(Self::new(frames))
    }
}

impl Controller for ReplayController {
    fn name(&self) -> &str {
        "external"
    }

    fn control(&mut self, _t: f64, x: &[Vec2]) -> Result<Vec<Vec2>> {
        let frame = match self.frames.get(self.next) {
            Some(f) => f.clone(),
            None => vec![Vec2::ZERO; x.len()],
        };
        self.next += 1;
        if frame.len() != x.len() {
            return Err(Error::Controller(format!("frame {} has {} commands for {} robots", self.next - 1, frame.len(), x.len())));
        }
        Ok(frame)
    }
}
