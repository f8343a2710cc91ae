use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::controllers::Controller;
use crate::graph::Topology;
use crate::math::Vec2;
use crate::{Error, Result};

/// Desired inter-agent distances on a (rigid) graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormationSpec {
    pub topology: Topology,
    /// Desired distance for each edge, keyed by `(min, max)`.
    pub distances: BTreeMap<(usize, usize), f64>,
    pub gain: f64,
}

impl FormationSpec {
    /// Take the desired distances from a reference shape.
    pub fn from_shape(shape: &[Vec2], topology: Topology, gain: f64) -> Result<Self> {
        if shape.len() != topology.n() {
            return Err(Error::Dimension(format!("shape has {} points for {} agents", shape.len(), topology.n())));
        }
        let distances = topology.edges().map(|(i, j)| ((i, j), shape[i].distance(shape[j]))).collect();
        let spec = Self { topology, distances, gain };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain.is_finite() && self.gain > 0.0) {
            return Err(Error::Config(format!("formation gain must be > 0, got {}", self.gain)));
        }
        for (i, j) in self.topology.edges() {
            match self.distances.get(&(i, j)) {
                Some(d) if d.is_finite() && *d > 0.0 => {}
                Some(d) => return Err(Error::Config(format!("desired distance for edge ({i}, {j}) must be > 0, got {d}"))),
                None => return Err(Error::Config(format!("missing desired distance for edge ({i}, {j})"))),
            }
        }
        Ok(())
    }

    fn check(&self, x: &[Vec2]) -> Result<()> {
        if self.topology.n() != x.len() {
            return Err(Error::Dimension(format!("formation has {} agents, state has {}", self.topology.n(), x.len())));
        }
        self.validate()
    }

    fn edge_terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.topology.edges().map(|(i, j)| (i, j, self.distances[&(i, j)]))
    }

    /// Largest `| |x_i - x_j| - d_ij |` over all edges.
    pub fn max_edge_error(&self, x: &[Vec2]) -> f64 {
        self.edge_terms().map(|(i, j, d)| (x[i].distance(x[j]) - d).abs()).fold(0.0, f64::max)
    }
}

/// `u_i = sum_{j in N_i} gain (|x_i - x_j|^2 - d_ij^2)(x_j - x_i)`, the
/// negative gradient of [`edge_tension`].
pub fn formation(x: &[Vec2], spec: &FormationSpec) -> Result<Vec<Vec2>> {
    spec.check(x)?;
    let mut u = vec![Vec2::ZERO; x.len()];
    for (i, j, d) in spec.edge_terms() {
        let diff = x[j] - x[i];
        let term = diff * (spec.gain * (diff.norm_sq() - d * d));
        u[i] += term;
        u[j] -= term;
    }
    Ok(u)
}

/// `w(x) = 1/2 sum_i sum_{j in N_i} gain/4 (|x_i - x_j|^2 - d_ij^2)^2`.
/// Each undirected edge appears twice in the double sum.
pub fn edge_tension(x: &[Vec2], spec: &FormationSpec) -> Result<f64> {
    spec.check(x)?;
    Ok(spec
        .edge_terms()
        .map(|(i, j, d)| {
            let e = (x[i] - x[j]).norm_sq() - d * d;
            0.25 * spec.gain * e * e
        })
        .sum())
}

#[derive(Debug, Clone)]
pub struct FormationController {
    pub spec: FormationSpec,
}

impl Controller for FormationController {
    fn name(&self) -> &str {
        "formation"
    }

    fn control(&mut self, _t: f64, x: &[Vec2]) -> Result<Vec<Vec2>> {
        formation(x, &self.spec)
    }
}
