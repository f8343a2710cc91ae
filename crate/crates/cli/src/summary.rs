//! Run metrics written to `summary.json`.

use serde::Serialize;
use swarmsafe::config::ControllerConfig;
use swarmsafe::controllers::FormationSpec;
use swarmsafe::geometry::{locational_cost, tessellate, DensityField, Grid, DEFAULT_FLOOR};
use swarmsafe::graph::Topology;
use swarmsafe::sim::{safety_score, RunStatus, ScoreReport, Trace};
use swarmsafe::{Result, Vec2};

/// Distance (m) at which a swap robot counts as arrived.
pub const GOAL_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub controller: String,
    pub robots: usize,
    pub ticks: usize,
    /// Simulated time at the end of the run (s).
    pub t_end: f64,
    pub filter: bool,
    pub status: RunStatus,
    pub score: ScoreReport,
    /// Smallest center distance over the whole run (m). `None` for one robot.
    pub min_pairwise_distance: Option<f64>,
    /// Largest center distance at the end (m).
    pub final_max_pairwise_distance: Option<f64>,
    /// Largest nominal command norm over the run (m/s).
    pub max_command_norm: f64,
    /// `[t, max |‖xi - xj‖ - dij|]` per control period, formation only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_error: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_max_edge_error: Option<f64>,
    /// `[t, H]` per control period, coverage only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage_cost: Option<Vec<[f64; 2]>>,
    /// First time every robot is within [`GOAL_TOLERANCE`] of its goal, swap only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub goals_reached_at: Option<f64>,
}

fn pairwise(x: &[Vec2]) -> impl Iterator<Item = f64> + '_ {
    (0..x.len()).flat_map(move |i| (i + 1..x.len()).map(move |j| x[i].distance(x[j])))
}

pub fn summarize(trace: &Trace) -> Result<Summary> {
    let cfg = &trace.config;
    let initial: Vec<Vec2> = trace.initial.iter().map(|p| p.position()).collect();
    let frames = || {
        std::iter::once((0.0, initial.clone()))
            .chain(trace.ticks.iter().map(|r| (r.t, r.poses.iter().map(|p| p.position()).collect::<Vec<_>>())))
    };
    let sampled = || {
        let every = cfg.control_period_ticks as usize;
        frames().enumerate().filter(move |(k, _)| k % every == 0).map(|(_, f)| f)
    };

    let min_pairwise = frames().flat_map(|(_, x)| pairwise(&x).collect::<Vec<_>>()).reduce(f64::min);
    let final_x = trace.final_positions();
    let final_max = pairwise(&final_x).reduce(f64::max);
    let max_command_norm = trace.ticks.iter().flat_map(|r| r.u_hat.iter().map(|u| u.norm())).fold(0.0, f64::max);

    let (mut edge_error, mut final_max_edge_error, mut coverage_cost, mut goals_reached_at) = (None, None, None, None);
    match &cfg.controller {
        ControllerConfig::Formation { shape, edges, gain } => {
            let shape: Vec<Vec2> = shape.iter().copied().map(Vec2::from).collect();
            let spec = FormationSpec::from_shape(&shape, Topology::new(cfg.robots, edges.iter().copied())?, *gain)?;
            edge_error = Some(sampled().map(|(t, x)| [t, spec.max_edge_error(&x)]).collect());
            final_max_edge_error = Some(spec.max_edge_error(&final_x));
        }
        ControllerConfig::Coverage { resolution, sigma, refs, .. } => {
            let grid = Grid::new(cfg.safety.bounds, *resolution)?;
            let field = DensityField { refs: refs.clone(), sigma: *sigma, floor: DEFAULT_FLOOR };
            coverage_cost = Some(
                sampled()
                    .map(|(t, x)| {
                        let tess = tessellate(&x, &grid, &field, t);
                        [t, locational_cost(&x, &tess, &grid, &field, t)]
                    })
                    .collect(),
            );
        }
        ControllerConfig::Swap { .. } => {
            let center = cfg.safety.bounds.center();
            let goals: Vec<Vec2> = initial.iter().map(|&p| center * 2.0 - p).collect();
            goals_reached_at = frames().find(|(_, x)| x.iter().zip(&goals).all(|(p, g)| p.distance(*g) <= GOAL_TOLERANCE)).map(|(t, _)| t);
        }
        _ => {}
    }

    Ok(Summary {
        controller: cfg.controller.name().into(),
        robots: trace.robots(),
        ticks: trace.ticks.len(),
        t_end: trace.ticks.last().map_or(0.0, |r| r.t),
        filter: cfg.filter,
        status: trace.status.clone(),
        score: safety_score(trace)?,
        min_pairwise_distance: min_pairwise,
        final_max_pairwise_distance: final_max,
        max_command_norm,
        edge_error,
        final_max_edge_error,
        coverage_cost,
        goals_reached_at,
    })
}
