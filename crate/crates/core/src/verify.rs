//! Scenario-suite verification of a controller.
//!
//! Every scenario runs with the filter off, so the score measures the raw
//! controller. The aggregate is the minimum scenario score and bypass is
//! allowed only when it reaches [`BYPASS_THRESHOLD`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Layout, BYPASS_THRESHOLD};
use crate::controllers::Controller;
use crate::dynamics::Pose;
use crate::math::Vec2;
use crate::sim::{run_from, safety_score, RunStatus, ScoreReport};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub robots: usize,
    pub layout: Layout,
    pub duration: f64,
    pub seed: u64,
}

/// Two random spreads, a clustered start, a near-wall start and an
/// antagonistic crossing, 30 s each.
pub fn default_suite(robots: usize) -> Vec<Scenario> {
    let s = |name: &str, layout, seed| Scenario { name: name.into(), robots, layout, duration: 30.0, seed };
    vec![
        s("random-a", Layout::Random {}, 1),
        s("random-b", Layout::Random {}, 2),
        s("clustered", Layout::Clustered {}, 3),
        s("near-wall", Layout::NearWall {}, 4),
        s("crossing", Layout::Crossing {}, 5),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    BypassAllowed,
    WrapRequired,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub name: String,
    pub score: f64,
    pub report: Option<ScoreReport>,
    /// Set when the controller failed; the scenario then scores 0.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub controller: String,
    pub scenarios: Vec<ScenarioResult>,
    pub aggregate: f64,
    pub threshold: f64,
    /// Over all impacts in the suite (m/s).
    pub mean_collision_velocity: f64,
    /// Over all contact episodes in the suite (s).
    pub mean_contact_duration: f64,
    pub decision: Decision,
    pub diagnostics: String,
}

/// Builds a fresh controller for a scenario given the initial positions.
pub type ControllerFactory<'a> = dyn FnMut(&ExperimentConfig, &[Vec2]) -> Result<Box<dyn Controller>> + 'a;

/// Configuration of one scenario derived from `base`.
pub fn scenario_config(base: &ExperimentConfig, s: &Scenario, filter: bool) -> ExperimentConfig {
    ExperimentConfig { robots: s.robots, layout: s.layout.clone(), duration: s.duration, seed: s.seed, filter, ..base.clone() }
}

/// Run one scenario. `Err` only for invalid scenario setups; controller
/// failures are reported inside the result.
pub fn run_scenario(
    base: &ExperimentConfig,
    s: &Scenario,
    filter: bool,
    factory: &mut ControllerFactory,
) -> Result<(ScenarioResult, crate::sim::Trace)> {
    let cfg = scenario_config(base, s, filter);
    cfg.validate()?;
    let initial: Vec<Pose> = cfg.initial_poses()?;
    let positions: Vec<Vec2> = initial.iter().map(Pose::position).collect();
    let failed =
        |reason: String, trace| Ok((ScenarioResult { name: s.name.clone(), score: 0.0, report: None, failure: Some(reason) }, trace));
    let empty = || crate::sim::Trace {
        config: cfg.clone(),
        initial: initial.clone(),
        ticks: Vec::new(),
        contacts: Vec::new(),
        status: RunStatus::Truncated { reason: "controller construction failed".into() },
    };
    let mut controller = match factory(&cfg, &positions) {
        Ok(c) => c,
        Err(e) => return failed(format!("construction: {e}"), empty()),
    };
    let trace = run_from(&cfg, initial.clone(), controller.as_mut())?;
    if let RunStatus::Truncated { reason } = &trace.status {
        let reason = reason.clone();
        return failed(reason, trace);
    }
    let report = safety_score(&trace)?;
    Ok((ScenarioResult { name: s.name.clone(), score: report.score, report: Some(report), failure: None }, trace))
}

pub fn verify(base: &ExperimentConfig, suite: &[Scenario], factory: &mut ControllerFactory) -> Result<VerificationReport> {
    if suite.is_empty() {
        return Err(Error::InvalidParameter("verification suite is empty".into()));
    }
    let mut scenarios = Vec::with_capacity(suite.len());
    let (mut impact_sum, mut impacts, mut duration_sum) = (0.0, 0usize, 0.0);
    for s in suite {
        let (result, _) = run_scenario(base, s, false, factory)?;
        if let Some(r) = &result.report {
            impact_sum += r.mean_collision_velocity * r.impacts as f64;
            duration_sum += r.mean_contact_duration * r.impacts as f64;
            impacts += r.impacts;
        }
        scenarios.push(result);
    }
    let aggregate = scenarios.iter().map(|s| s.score).fold(f64::INFINITY, f64::min);
    let decision = if aggregate >= BYPASS_THRESHOLD { Decision::BypassAllowed } else { Decision::WrapRequired };
    let mut diagnostics = Vec::new();
    for s in &scenarios {
        if let Some(f) = &s.failure {
            diagnostics.push(format!("{}: controller failed: {f}", s.name));
        } else if let Some(r) = &s.report {
            if r.impacts > 0 {
                diagnostics.push(format!("{}: {} impacts, {} contact records", s.name, r.impacts, r.contact_records));
            }
        }
    }
    if diagnostics.is_empty() {
        diagnostics.push("no contacts in any scenario".into());
    }
    let mean = |x: f64| if impacts == 0 { 0.0 } else { x / impacts as f64 };
    Ok(VerificationReport {
        controller: base.controller.name().to_string(),
        scenarios,
        aggregate,
        threshold: BYPASS_THRESHOLD,
        mean_collision_velocity: mean(impact_sum),
        mean_contact_duration: mean(duration_sum),
        decision,
        diagnostics: diagnostics.join("\n"),
    })
}

/// Verify the controller described by `base.controller`.
pub fn verify_configured(base: &ExperimentConfig, suite: &[Scenario]) -> Result<VerificationReport> {
    verify(base, suite, &mut |cfg, x| cfg.build_controller(x))
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "controller: {}", self.controller)?;
        for s in &self.scenarios {
            let note = s.failure.as_deref().map(|e| format!("  FAILED: {e}")).unwrap_or_default();
            writeln!(f, "  {:<12} S = {:.6}{note}", s.name, s.score)?;
        }
        writeln!(f, "aggregate S = {:.6} (threshold {})", self.aggregate, self.threshold)?;
        writeln!(f, "mean collision velocity = {:.4} m/s", self.mean_collision_velocity)?;
        writeln!(f, "mean contact duration = {:.4} s", self.mean_contact_duration)?;
        for line in self.diagnostics.lines() {
            writeln!(f, "  {line}")?;
        }
        let decision = match self.decision {
            Decision::BypassAllowed => "bypass_allowed",
            Decision::WrapRequired => "wrap_required",
        };
        write!(f, "decision: {decision}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ControllerConfig;
    use crate::controllers::ZeroController;

    fn short_suite(robots: usize) -> Vec<Scenario> {
        default_suite(robots).into_iter().map(|s| Scenario { duration: 5.0, ..s }).collect()
    }

    fn base(controller: ControllerConfig) -> ExperimentConfig {
        ExperimentConfig { controller, ..Default::default() }
    }

    #[test]
    fn zero_controller_bypasses() {
        let r = verify_configured(&base(ControllerConfig::Zero {}), &short_suite(6)).unwrap();
        assert!(r.scenarios.iter().all(|s| s.score == 1.0));
        assert_eq!(r.decision, Decision::BypassAllowed);
    }

    #[test]
    fn head_on_requires_wrap() {
        let r = verify_configured(&base(ControllerConfig::HeadOn {}), &short_suite(6)).unwrap();
        assert!(r.aggregate < 1.0);
        assert!(r.mean_collision_velocity > 0.0);
        assert_eq!(r.decision, Decision::WrapRequired);
    }

    #[test]
    fn crash_scores_zero() {
        let mut factory = |_: &ExperimentConfig, _: &[Vec2]| -> Result<Box<dyn Controller>> {
            Ok(Box::new(crate::controllers::ConstantController { commands: vec![] }))
        };
        let r = verify(&base(ControllerConfig::Zero {}), &short_suite(4)[..1], &mut factory).unwrap();
        assert_eq!(r.aggregate, 0.0);
        assert!(r.scenarios[0].failure.is_some());
        assert_eq!(r.decision, Decision::WrapRequired);
    }

    #[test]
    fn empty_suite_rejected() {
        let mut factory = |_: &ExperimentConfig, _: &[Vec2]| -> Result<Box<dyn Controller>> { Ok(Box::new(ZeroController)) };
        assert!(verify(&base(ControllerConfig::Zero {}), &[], &mut factory).is_err());
    }

    #[test]
    fn aggregate_is_minimum_and_monotone() {
        let suite = short_suite(6);
        let cfg = base(ControllerConfig::Adversarial {});
        let full = verify_configured(&cfg, &suite).unwrap();
        let min = full.scenarios.iter().map(|s| s.score).fold(1.0, f64::min);
        assert_eq!(full.aggregate, min);
        let partial = verify_configured(&cfg, &suite[..3]).unwrap();
        assert!(full.aggregate <= partial.aggregate);
    }

    #[test]
    fn summary_mentions_decision() {
        let r = verify_configured(&base(ControllerConfig::Zero {}), &short_suite(4)[..1]).unwrap();
        assert!(r.to_string().ends_with("decision: bypass_allowed"));
    }
}
