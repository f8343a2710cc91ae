//! Euclidean projection onto a polytope intersected with a box.
//!
//! Solves
//!
//! ```text
//!     minimize    J(u) = || u - u_hat ||^2
//!     subject to  a_k . u <= b_k          for every row k
//!                 -bound <= u_m <= bound  for every component m
//! ```
//!
//! by dual coordinate ascent (Hildreth's method). The Hessian is a multiple
//! of the identity, so each row update is closed form. Box multipliers are
//! kept implicit: the primal iterate is always `clamp(u_hat - A^T lambda)`,
//! which is the exact maximizer of the dual over the box block. Rows are swept
//! in a fixed order, so identical inputs give bitwise-identical outputs.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A sparse constraint row: `(column, coefficient)` pairs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseRow {
    pub entries: Vec<(usize, f64)>,
}

impl SparseRow {
    pub fn new(entries: Vec<(usize, f64)>) -> Self {
        Self { entries }
    }

    pub fn dot(&self, u: &[f64]) -> f64 {
        self.entries.iter().map(|&(j, c)| c * u[j]).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|&(_, c)| c * c).sum()
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for &(j, c) in &self.entries {
            out[j] += c;
        }
        out
    }
}

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub u_hat: Vec<f64>,
    pub rows: Vec<SparseRow>,
    pub b: Vec<f64>,
    /// Per-component bound `bound` on `|u_m|`.
    pub bound: f64,
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl QpProblem {
    pub fn new(u_hat: Vec<f64>, rows: Vec<SparseRow>, b: Vec<f64>, bound: f64) -> Result<Self> {
        let p = Self { u_hat, rows, b, bound, tolerance: DEFAULT_TOLERANCE, max_sweeps: DEFAULT_MAX_SWEEPS };
        p.validate()?;
        Ok(p)
    }

    /// Build from dense rows of length `u_hat.len()`.
    pub fn from_dense(u_hat: Vec<f64>, a: &[Vec<f64>], b: Vec<f64>, bound: f64) -> Result<Self> {
        let n = u_hat.len();
        let mut rows = Vec::with_capacity(a.len());
        for (k, row) in a.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!("row {k} has {} columns, expected {n}", row.len())));
            }
            rows.push(SparseRow::new(row.iter().copied().enumerate().filter(|&(_, c)| c != 0.0).collect()));
        }
        Self::new(u_hat, rows, b, bound)
    }

    pub fn dim(&self) -> usize {
        self.u_hat.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if self.rows.len() != self.b.len() {
            return Err(Error::Dimension(format!("{} rows but {} right-hand sides", self.rows.len(), self.b.len())));
        }
        if self.u_hat.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("u_hat".into()));
        }
        if self.b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("b".into()));
        }
        for (k, row) in self.rows.iter().enumerate() {
            for &(j, c) in &row.entries {
                if j >= n {
                    return Err(Error::Dimension(format!("row {k} references column {j} of {n}")));
                }
                if !c.is_finite() {
                    return Err(Error::NonFinite(format!("row {k} coefficient")));
                }
            }
        }
        if !(self.bound.is_finite() && self.bound >= 0.0) {
            return Err(Error::InvalidParameter(format!("box bound must be finite and >= 0, got {}", self.bound)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter("tolerance must be > 0".into()));
        }
        Ok(())
    }

    pub fn objective(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.u_hat).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    /// Largest violation of any row or box bound at `u` (0 when feasible).
    pub fn max_violation(&self, u: &[f64]) -> f64 {
        let rows = self.rows.iter().zip(&self.b).map(|(r, &b)| r.dot(u) - b);
        let boxes = u.iter().map(|v| v.abs() - self.bound);
        rows.chain(boxes).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QpStatus {
    Optimal,
    MaxIter,
    /// The constraints were infeasible; rows were relaxed to admit `u = 0`.
    InfeasibleRelaxed,
}

/// Lagrange multipliers for `J(u) = ||u - u_hat||^2`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Multipliers {
    pub rows: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub u: Vec<f64>,
    pub status: QpStatus,
    pub sweeps: usize,
    pub max_violation: f64,
    pub multipliers: Multipliers,
}

impl QpSolution {
    /// Row multipliers in the solver's internal scaling, suitable for warm starts.
    pub fn warm_start(&self) -> Vec<f64> {
        self.multipliers.rows.iter().map(|l| 0.5 * l).collect()
    }
}

pub fn solve(p: &QpProblem) -> Result<QpSolution> {
    solve_warm(p, None)
}

/// Solve, optionally seeding the row multipliers from a previous solution
/// (see [`QpSolution::warm_start`]). The fixed point does not depend on the seed.
pub fn solve_warm(p: &QpProblem, warm: Option<&[f64]>) -> Result<QpSolution> {
    p.validate()?;
    if let Some(w) = warm {
        if w.len() != p.rows.len() {
            return Err(Error::Dimension(format!("warm start has {} entries for {} rows", w.len(), p.rows.len())));
        }
    }
    let trivially_infeasible = p.rows.iter().zip(&p.b).any(|(r, &b)| r.norm_sq() == 0.0 && b < 0.0);
    if !trivially_infeasible {
        let sol = hildreth(p, warm);
        if sol.status == QpStatus::Optimal || sol.max_violation <= p.tolerance.sqrt() {
            return Ok(sol);
        }
    }
    // Infeasible: admit u = 0 by lifting every negative right-hand side.
    let mut relaxed = p.clone();
    for b in &mut relaxed.b {
        *b = b.max(0.0);
    }
    let mut sol = hildreth(&relaxed, None);
    sol.status = QpStatus::InfeasibleRelaxed;
    sol.max_violation = p.max_violation(&sol.u);
    Ok(sol)
}

fn hildreth(p: &QpProblem, warm: Option<&[f64]>) -> QpSolution {
    let n = p.dim();
    let bound = p.bound;
    let norms: Vec<f64> = p.rows.iter().map(SparseRow::norm_sq).collect();
    let mut lambda: Vec<f64> = match warm {
        Some(w) => w.iter().map(|v| v.max(0.0)).collect(),
        None => vec![0.0; p.rows.len()],
    };
    // w = u_hat - A^T lambda; u = clamp(w)
    let mut w = p.u_hat.clone();
    for (row, &l) in p.rows.iter().zip(&lambda) {
        if l != 0.0 {
            for &(j, c) in &row.entries {
                w[j] -= l * c;
            }
        }
    }
    let mut u: Vec<f64> = w.iter().map(|v| v.clamp(-bound, bound)).collect();

    let mut sweeps = 0;
    let mut status = QpStatus::MaxIter;
    while sweeps < p.max_sweeps {
        sweeps += 1;
        let mut max_step = 0.0f64;
        for (k, row) in p.rows.iter().enumerate() {
            let nsq = norms[k];
            if nsq == 0.0 {
                continue;
            }
            let residual = row.dot(&u) - p.b[k];
            let updated = (lambda[k] + residual / nsq).max(0.0);
            let delta = updated - lambda[k];
            if delta != 0.0 {
                lambda[k] = updated;
                for &(j, c) in &row.entries {
                    w[j] -= delta * c;
                    u[j] = w[j].clamp(-bound, bound);
                }
                max_step = max_step.max(delta.abs() * nsq.sqrt());
            }
        }
        if max_step <= p.tolerance && p.max_violation(&u) <= p.tolerance {
            status = QpStatus::Optimal;
            break;
        }
    }

    let mut upper = vec![0.0; n];
    let mut lower = vec![0.0; n];
    for j in 0..n {
        let nu = w[j] - u[j];
        if nu > 0.0 {
            upper[j] = 2.0 * nu;
        } else if nu < 0.0 {
            lower[j] = -2.0 * nu;
        }
    }
    let max_violation = p.max_violation(&u);
    QpSolution {
        u,
        status,
        sweeps,
        max_violation,
        multipliers: Multipliers { rows: lambda.iter().map(|l| 2.0 * l).collect(), upper, lower },
    }
}

/// Largest KKT residual of `(u, multipliers)`: stationarity, primal
/// feasibility, dual feasibility and complementary slackness.
pub fn kkt_residual(p: &QpProblem, u: &[f64], m: &Multipliers) -> f64 {
    let n = p.dim();
    let upper = |j: usize| m.upper.get(j).copied().unwrap_or(0.0);
    let lower = |j: usize| m.lower.get(j).copied().unwrap_or(0.0);
    let row_mult = |k: usize| m.rows.get(k).copied().unwrap_or(0.0);

    let mut grad: Vec<f64> = (0..n).map(|j| 2.0 * (u[j] - p.u_hat[j]) + upper(j) - lower(j)).collect();
    for (k, row) in p.rows.iter().enumerate() {
        for &(j, c) in &row.entries {
            grad[j] += row_mult(k) * c;
        }
    }
    let stationarity = grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
    let primal = p.max_violation(u);

    let mut dual = 0.0f64;
    let mut complementarity = 0.0f64;
    for (k, row) in p.rows.iter().enumerate() {
        let l = row_mult(k);
        dual = dual.max(-l);
        complementarity = complementarity.max((l * (row.dot(u) - p.b[k])).abs());
    }
    for j in 0..n {
        dual = dual.max(-upper(j)).max(-lower(j));
        complementarity = complementarity.max((upper(j) * (u[j] - p.bound)).abs()).max((lower(j) * (-u[j] - p.bound)).abs());
    }
    stationarity.max(primal).max(dual).max(complementarity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single_row_problem() -> QpProblem {
        QpProblem::from_dense(vec![0.1, 0.0, -0.1, 0.0], &[vec![0.4, 0.0, -0.4, 0.0]], vec![0.03], 0.1).unwrap()
    }

    #[test]
    fn unconstrained_inside_box_is_identity() {
        let p = QpProblem::new(vec![0.05, -0.02, 0.1], vec![], vec![], 0.1).unwrap();
        let s = solve(&p).unwrap();
        assert_eq!(s.u, p.u_hat);
        assert_eq!(s.status, QpStatus::Optimal);
    }

    #[test]
    fn unconstrained_outside_box_clamps() {
        let p = QpProblem::new(vec![0.3, 0.0], vec![], vec![], 0.1).unwrap();
        let s = solve(&p).unwrap();
        assert_eq!(s.u, vec![0.1, 0.0]);
        assert!(kkt_residual(&p, &s.u, &s.multipliers) <= 1e-12);
    }

    #[test]
    fn single_active_row_matches_hand_kkt() {
        let p = single_row_problem();
        let s = solve(&p).unwrap();
        assert_eq!(s.status, QpStatus::Optimal);
        for (got, want) in s.u.iter().zip([0.0375, 0.0, -0.0375, 0.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-9);
        }
        assert!(kkt_residual(&p, &s.u, &s.multipliers) <= p.tolerance);
    }

    #[test]
    fn unmodified_point_reports_primal_violation() {
        let p = single_row_problem();
        let r = kkt_residual(&p, &p.u_hat, &Multipliers::default());
        // a . u_hat - b = 0.08 - 0.03
        assert_abs_diff_eq!(r, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn dimension_and_domain_errors() {
        assert!(matches!(QpProblem::from_dense(vec![0.0; 2], &[vec![1.0]], vec![0.0], 0.1), Err(Error::Dimension(_))));
        assert!(matches!(QpProblem::new(vec![0.0; 2], vec![SparseRow::new(vec![(0, 1.0)])], vec![], 0.1), Err(Error::Dimension(_))));
        assert!(matches!(QpProblem::new(vec![f64::NAN], vec![], vec![], 0.1), Err(Error::NonFinite(_))));
        let p = single_row_problem();
        assert!(matches!(solve_warm(&p, Some(&[0.0, 0.0])), Err(Error::Dimension(_))));
    }

    #[test]
    fn infeasible_rows_are_relaxed() {
        // u0 <= -1 cannot hold inside the box |u0| <= 0.1.
        let p = QpProblem::from_dense(vec![0.05, 0.0], &[vec![1.0, 0.0]], vec![-1.0], 0.1).unwrap();
        let s = solve(&p).unwrap();
        assert_eq!(s.status, QpStatus::InfeasibleRelaxed);
        assert!(s.u[0] <= 1e-9);
        let zero_row = QpProblem::from_dense(vec![0.05, 0.0], &[vec![0.0, 0.0]], vec![-1.0], 0.1).unwrap();
        assert_eq!(solve(&zero_row).unwrap().status, QpStatus::InfeasibleRelaxed);
    }

    fn random_problem(rng: &mut ChaCha8Rng, n: usize, rows: usize) -> QpProblem {
        // Rows with b >= 0 keep u = 0 feasible.
        let a: Vec<Vec<f64>> = (0..rows).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let b = (0..rows).map(|_| rng.gen_range(0.0..0.05)).collect();
        let u_hat = (0..n).map(|_| rng.gen_range(-0.2..0.2)).collect();
        QpProblem::from_dense(u_hat, &a, b, 0.1).unwrap()
    }

    #[test]
    fn projection_beats_sampled_feasible_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let p = random_problem(&mut rng, 6, 5);
            let s = solve(&p).unwrap();
            assert_eq!(s.status, QpStatus::Optimal);
            assert!(kkt_residual(&p, &s.u, &s.multipliers) <= 1e-7);
            let best = p.objective(&s.u);
            let mut checked = 0;
            while checked < 10_000 {
                let cand: Vec<f64> = (0..p.dim()).map(|_| rng.gen_range(-0.1..0.1)).collect();
                if p.max_violation(&cand) > 0.0 {
                    continue;
                }
                checked += 1;
                assert!(best <= p.objective(&cand) + 1e-12);
            }
        }
    }

    #[test]
    fn warm_start_reaches_same_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let p = random_problem(&mut rng, 8, 10);
            let cold = solve(&p).unwrap();
            let mut warm_seed = cold.warm_start();
            for v in &mut warm_seed {
                *v *= rng.gen_range(0.0..2.0);
            }
            let warm = solve_warm(&p, Some(&warm_seed)).unwrap();
            for (a, b) in cold.u.iter().zip(&warm.u) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn solver_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_problem(&mut rng, 10, 12);
        let a = solve(&p).unwrap();
        let b = solve(&p).unwrap();
        assert!(a.u.iter().zip(&b.u).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    proptest! {
        #[test]
        fn feasible_point_projects_to_itself(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_problem(&mut rng, 6, 6);
            let first = solve(&p).unwrap();
            let again = QpProblem { u_hat: first.u.clone(), ..p.clone() };
            let second = solve(&again).unwrap();
            for (a, b) in first.u.iter().zip(&second.u) {
                prop_assert!((a - b).abs() <= 1e-7);
            }
        }
    }
}
