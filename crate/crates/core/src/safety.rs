//! Safety barrier certificates and the minimally invasive filter.
//!
//! For robots at `x_i`, `x_j` the pairwise barrier is
//! `h_ij = |x_i - x_j|^2 - d_s^2`, and for the workspace walls
//! `h_i1 = (right - x)(x - left)`, `h_i2 = (top - y)(y - bottom)`.
//! Under single-integrator dynamics, requiring `dh/dt >= -gamma h` gives one
//! linear inequality on the stacked velocity vector per barrier. The filter
//! returns the velocity closest to the user's command (in least squares)
//! that satisfies all of them together with the per-component bound `alpha`.

use serde::{Deserialize, Serialize};

use crate::math::{Rect, Vec2};
use crate::qp::{self, QpProblem, QpStatus, SparseRow};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SafetyParams {
    /// Minimum center-to-center distance (m).
    pub d_s: f64,
    /// Class-K gain (1/s).
    pub gamma: f64,
    /// Per-component velocity bound (m/s).
    pub alpha: f64,
    pub bounds: Rect,
}

impl Default for SafetyParams {
    fn default() -> Self {
        Self { d_s: 0.08, gamma: 1.0, alpha: 0.1, bounds: Rect::square(0.6) }
    }
}

impl SafetyParams {
    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        for (name, v) in [("d_s", self.d_s), ("gamma", self.gamma), ("alpha", self.alpha)] {
            if !v.is_finite() {
                return Err(Error::NonFinite(name.into()));
            }
            if v <= 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.bounds.width() <= 2.0 * self.d_s || self.bounds.height() <= 2.0 * self.d_s {
            return Err(Error::InvalidParameter(format!(
                "workspace {}x{} must exceed 2*d_s = {} on each side",
                self.bounds.width(),
                self.bounds.height(),
                2.0 * self.d_s
            )));
        }
        Ok(())
    }

    /// Distance beyond which a pair's constraint cannot be active for any
    /// command inside the velocity box.
    ///
    /// For separation `d`, the row reads `-2 d . (u_i - u_j) <= gamma (|d|^2 - d_s^2)`.
    /// Inside the box the left side is at most `4 alpha (|d_x| + |d_y|) <= 4 sqrt(2) alpha |d|`,
    /// and `|d| > d_s + 4 sqrt(2) alpha / gamma` gives
    /// `gamma (|d| - d_s)(|d| + d_s) > 4 sqrt(2) alpha (|d| + d_s) > 4 sqrt(2) alpha |d|`.
    pub fn inactive_pair_distance(&self) -> f64 {
        self.d_s + 4.0 * std::f64::consts::SQRT_2 * self.alpha / self.gamma
    }
}

/// Pairwise barrier `|x_i - x_j|^2 - d_s^2`.
pub fn h_pair(xi: Vec2, xj: Vec2, d_s: f64) -> f64 {
    (xi - xj).norm_sq() - d_s * d_s
}

/// Wall barriers `[(right - x)(x - left), (top - y)(y - bottom)]`.
pub fn h_walls(xi: Vec2, bounds: &Rect) -> [f64; 2] {
    [(bounds.right - xi.x) * (xi.x - bounds.left), (bounds.top - xi.y) * (xi.y - bounds.bottom)]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
}

/// Provenance of a constraint row. Robot indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowLabel {
    Pair(usize, usize),
    Wall(usize, Axis),
}

pub fn pairwise_row(x: &[Vec2], i: usize, j: usize, params: &SafetyParams) -> Result<(SparseRow, f64)> {
    let n = x.len();
    if i == j {
        return Err(Error::Index(format!("pairwise row needs distinct robots, got {i} twice")));
    }
    if i >= n || j >= n {
        return Err(Error::Index(format!("robot index out of range: ({i}, {j}) with {n} robots")));
    }
    let d = x[i] - x[j];
    let row = SparseRow::new(vec![(2 * i, -2.0 * d.x), (2 * i + 1, -2.0 * d.y), (2 * j, 2.0 * d.x), (2 * j + 1, 2.0 * d.y)]);
    Ok((row, params.gamma * h_pair(x[i], x[j], params.d_s)))
}

pub fn boundary_rows(xi: Vec2, i: usize, params: &SafetyParams) -> [(SparseRow, f64); 2] {
    let bounds = &params.bounds;
    let h = h_walls(xi, bounds);
    [
        (SparseRow::new(vec![(2 * i, 2.0 * xi.x - bounds.right - bounds.left)]), params.gamma * h[0]),
        (SparseRow::new(vec![(2 * i + 1, 2.0 * xi.y - bounds.top - bounds.bottom)]), params.gamma * h[1]),
    ]
}

/// Stacked certificate `A u <= b` plus the velocity box.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    pub robots: usize,
    pub rows: Vec<SparseRow>,
    pub b: Vec<f64>,
    pub alpha: f64,
    pub labels: Vec<RowLabel>,
}

impl ConstraintSet {
    pub fn pair_rows(&self) -> usize {
        self.labels.iter().filter(|l| matches!(l, RowLabel::Pair(..))).count()
    }

    pub fn wall_rows(&self) -> usize {
        self.labels.len() - self.pair_rows()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.to_dense(2 * self.robots)).collect()
    }

    /// True when `u` satisfies every row and the box to within `slack`.
    pub fn admits(&self, u: &[f64], slack: f64) -> bool {
        self.rows.iter().zip(&self.b).all(|(r, &b)| r.dot(u) <= b + slack) && u.iter().all(|v| v.abs() <= self.alpha + slack)
    }
}

/// All `N(N-1)/2` pairwise rows followed by `2N` wall rows.
pub fn assemble(x: &[Vec2], params: &SafetyParams) -> ConstraintSet {
    assemble_with(x, params, |_, _| true)
}

fn assemble_with(x: &[Vec2], params: &SafetyParams, keep_pair: impl Fn(usize, usize) -> bool) -> ConstraintSet {
    let n = x.len();
    let mut rows = Vec::with_capacity(n * (n.saturating_sub(1)) / 2 + 2 * n);
    let mut b = Vec::with_capacity(rows.capacity());
    let mut labels = Vec::with_capacity(rows.capacity());
    for i in 0..n {
        for j in (i + 1)..n {
            if !keep_pair(i, j) {
                continue;
            }
            let (row, rhs) = pairwise_row(x, i, j, params).expect("indices in range");
            rows.push(row);
            b.push(rhs);
            labels.push(RowLabel::Pair(i, j));
        }
    }
    for (i, &xi) in x.iter().enumerate() {
        for ((row, rhs), axis) in boundary_rows(xi, i, params).into_iter().zip([Axis::X, Axis::Y]) {
            rows.push(row);
            b.push(rhs);
            labels.push(RowLabel::Wall(i, axis));
        }
    }
    ConstraintSet { robots: n, rows, b, alpha: params.alpha, labels }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterStatus {
    /// The command already satisfied the certificate and was passed through.
    Unmodified,
    Modified,
    /// The state was outside the safe set; violated rows were relaxed.
    UnsafeRelaxed,
    /// The solver hit its sweep limit; best iterate returned.
    MaxIter,
}

impl FilterStatus {
    /// Same spelling as the serialized form.
    pub fn as_str(self) -> &'static str {
        match self {
            FilterStatus::Unmodified => "unmodified",
            FilterStatus::Modified => "modified",
            FilterStatus::UnsafeRelaxed => "unsafe_relaxed",
            FilterStatus::MaxIter => "max_iter",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub u: Vec<Vec2>,
    pub status: FilterStatus,
    /// Labels of rows whose barrier was negative at call time.
    pub violated: Vec<RowLabel>,
    pub sweeps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterOptions {
    /// Omit pair rows provably inactive (see [`SafetyParams::inactive_pair_distance`]).
    pub prune_far_pairs: bool,
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for FilterOptions {
    fn default() -> Self {
        Self { prune_far_pairs: false, tolerance: qp::DEFAULT_TOLERANCE, max_sweeps: qp::DEFAULT_MAX_SWEEPS }
    }
}

/// Project `u_hat` onto the certificate polytope at state `x`.
pub fn filter(u_hat: &[Vec2], x: &[Vec2], params: &SafetyParams) -> Result<FilterOutcome> {
    SafetyFilter::new(*params, FilterOptions::default())?.apply(u_hat, x)
}

/// Stateful filter carrying a warm start between calls. One instance belongs
/// to one simulation loop.
#[derive(Debug, Clone)]
pub struct SafetyFilter {
    params: SafetyParams,
    options: FilterOptions,
    warm: Option<(Vec<RowLabel>, Vec<f64>)>,
}

impl SafetyFilter {
    pub fn new(params: SafetyParams, options: FilterOptions) -> Result<Self> {
        params.validate()?;
        Ok(Self { params, options, warm: None })
    }

    pub fn params(&self) -> &SafetyParams {
        &self.params
    }

    pub fn set_params(&mut self, params: SafetyParams) -> Result<()> {
        params.validate()?;
        self.params = params;
        self.warm = None;
        Ok(())
    }

    pub fn apply(&mut self, u_hat: &[Vec2], x: &[Vec2]) -> Result<FilterOutcome> {
        if u_hat.len() != x.len() {
            return Err(Error::Dimension(format!("{} commands for {} robots", u_hat.len(), x.len())));
        }
        if let Some(bad) = u_hat.iter().position(|u| !u.is_finite()) {
            return Err(Error::NonFinite(format!("command for robot {bad}")));
        }
        if let Some(bad) = x.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite(format!("position of robot {bad}")));
        }
        let params = &self.params;
        let set = if self.options.prune_far_pairs {
            let reach = params.inactive_pair_distance();
            assemble_with(x, params, |i, j| (x[i] - x[j]).norm() <= reach)
        } else {
            assemble(x, params)
        };

        let mut b = set.b.clone();
        let mut violated = Vec::new();
        for (k, rhs) in b.iter_mut().enumerate() {
            if *rhs < 0.0 {
                violated.push(set.labels[k]);
                *rhs = 0.0;
            }
        }

        let flat: Vec<f64> = u_hat.iter().flat_map(|u| [u.x, u.y]).collect();
        let mut problem = QpProblem::new(flat.clone(), set.rows, b, params.alpha)?;
        problem.tolerance = self.options.tolerance;
        problem.max_sweeps = self.options.max_sweeps;

        let warm = match &self.warm {
            Some((labels, lambda)) if *labels == set.labels => Some(lambda.as_slice()),
            _ => None,
        };
        let sol = qp::solve_warm(&problem, warm)?;
        self.warm = Some((set.labels, sol.warm_start()));

        let u: Vec<Vec2> = sol.u.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect();
        let status = if !violated.is_empty() || sol.status == QpStatus::InfeasibleRelaxed {
            FilterStatus::UnsafeRelaxed
        } else if sol.status == QpStatus::MaxIter {
            FilterStatus::MaxIter
        } else if sol.u == flat {
            FilterStatus::Unmodified
        } else {
            FilterStatus::Modified
        };
        Ok(FilterOutcome { u, status, violated, sweeps: sol.sweeps })
    }
}
