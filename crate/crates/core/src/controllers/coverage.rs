use serde::{Deserialize, Serialize};

use crate::controllers::Controller;
use crate::geometry::{delaunay_neighbors, tessellate, DensityField, Grid, Tessellation, MIN_RESOLUTION};
use crate::math::{Rect, Vec2};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageMode {
    /// `u_i = kappa (c_i - x_i)`.
    #[default]
    Lloyd,
    /// Lloyd term plus centroid drift and neighbor coupling for time-varying densities.
    TvdD1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageParams {
    pub kappa: f64,
    #[serde(default)]
    pub mode: CoverageMode,
    pub resolution: usize,
    /// Time step of the forward difference for `dc/dt` (s).
    #[serde(default = "default_period")]
    pub period: f64,
}

fn default_period() -> f64 {
    0.05
}

impl Default for CoverageParams {
    fn default() -> Self {
        Self { kappa: 1.0, mode: CoverageMode::Lloyd, resolution: 128, period: default_period() }
    }
}

impl CoverageParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("kappa must be > 0, got {}", self.kappa)));
        }
        if self.resolution < MIN_RESOLUTION {
            return Err(Error::InvalidParameter(format!("resolution must be >= {MIN_RESOLUTION}, got {}", self.resolution)));
        }
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(Error::InvalidParameter(format!("period must be > 0, got {}", self.period)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageOutput {
    pub commands: Vec<Vec2>,
    pub tessellation: Tessellation,
    /// Agents whose cell carried no mass; they receive a zero command.
    pub degenerate: Vec<usize>,
}

const POSITION_SLACK: f64 = 1e-9;

pub fn coverage(x: &[Vec2], field: &DensityField, bounds: &Rect, params: &CoverageParams, t: f64) -> Result<CoverageOutput> {
    params.validate()?;
    field.validate()?;
    let grid = Grid::new(*bounds, params.resolution)?;
    let region = bounds.inset(-POSITION_SLACK);
    if let Some(i) = x.iter().position(|p| !region.contains(*p)) {
        return Err(Error::InvalidParameter(format!("agent {i} at {:?} lies outside the workspace", x[i])));
    }

    let tess = tessellate(x, &grid, field, t);
    let degenerate: Vec<usize> = (0..x.len()).filter(|&i| tess.centroid[i].is_none()).collect();
    let lloyd: Vec<Vec2> = x.iter().zip(&tess.centroid).map(|(xi, c)| c.map_or(Vec2::ZERO, |c| (c - *xi) * params.kappa)).collect();

    let commands = match params.mode {
        CoverageMode::Lloyd => lloyd,
        CoverageMode::TvdD1 => tvd_d1(x, field, &grid, params, t, &tess, &lloyd),
    };
    Ok(CoverageOutput { commands, tessellation: tess, degenerate })
}

fn tvd_d1(
    x: &[Vec2],
    field: &DensityField,
    grid: &Grid,
    params: &CoverageParams,
    t: f64,
    tess: &Tessellation,
    lloyd: &[Vec2],
) -> Vec<Vec2> {
    let n = x.len();
    // Forward difference in time at fixed positions.
    let later = tessellate(x, grid, field, t + params.period);
    let drift: Vec<Vec2> = (0..n)
        .map(|i| match (tess.centroid[i], later.centroid[i]) {
            (Some(a), Some(b)) => (b - a) * (1.0 / params.period),
            _ => Vec2::ZERO,
        })
        .collect();
    let base: Vec<Vec2> = (0..n).map(|i| if tess.centroid[i].is_some() { lloyd[i] + drift[i] } else { Vec2::ZERO }).collect();

    // Central differences need a step that moves at least one cell boundary.
    let step = grid.cell_width().min(grid.cell_height()).max(1e-4);
    let neighbors = delaunay_neighbors(tess);
    let mut commands = base.clone();
    for j in 0..n {
        if tess.centroid[j].is_none() {
            continue;
        }
        let affected = neighbors.closed_neighborhood(j);
        let mut columns = [vec![Vec2::ZERO; n], vec![Vec2::ZERO; n]];
        for (axis, column) in columns.iter_mut().enumerate() {
            let offset = if axis == 0 { Vec2::new(step, 0.0) } else { Vec2::new(0.0, step) };
            let mut plus = x.to_vec();
            plus[j] += offset;
            let mut minus = x.to_vec();
            minus[j] -= offset;
            let tp = tessellate(&plus, grid, field, t);
            let tm = tessellate(&minus, grid, field, t);
            for &i in &affected {
                if let (Some(a), Some(b)) = (tp.centroid[i], tm.centroid[i]) {
                    column[i] = (a - b) * (0.5 / step);
                }
            }
        }
        for &i in &affected {
            if tess.centroid[i].is_none() {
                continue;
            }
            // dc_i/dx_j applied to the base command of agent j.
            commands[i] += columns[0][i] * base[j].x + columns[1][i] * base[j].y;
        }
    }
    commands
}

/// Coverage control over a workspace with a fixed or drifting density.
#[derive(Debug, Clone)]
pub struct CoverageController {
    pub field: DensityField,
    pub bounds: Rect,
    pub params: CoverageParams,
    /// Agents reported degenerate by the last call.
    pub last_degenerate: Vec<usize>,
}

impl CoverageController {
    pub fn new(field: DensityField, bounds: Rect, params: CoverageParams) -> Result<Self> {
        field.validate()?;
        params.validate()?;
        bounds.validate()?;
        Ok(Self { field, bounds, params, last_degenerate: Vec::new() })
    }
}

impl Controller for CoverageController {
    fn name(&self) -> &str {
        "coverage"
    }

    fn control(&mut self, t: f64, x: &[Vec2]) -> Result<Vec<Vec2>> {
        let out = coverage(x, &self.field, &self.bounds, &self.params, t)?;
        self.last_degenerate = out.degenerate;
        Ok(out.commands)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{locational_cost, DensityRef};
    use approx::assert_abs_diff_eq;

    const SQUARE: Rect = Rect::square(0.6);

    fn lloyd(kappa: f64, resolution: usize) -> CoverageParams {
        CoverageParams { kappa, mode: CoverageMode::Lloyd, resolution, period: 0.05 }
    }

    #[test]
    fn single_robot_heads_to_center() {
        let field = DensityField::uniform(1.0);
        let x = [Vec2::new(0.3, -0.2)];
        let out = coverage(&x, &field, &SQUARE, &lloyd(2.0, 64), 0.0).unwrap();
        assert_abs_diff_eq!(out.commands[0].x, -0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(out.commands[0].y, 0.4, epsilon = 1e-12);
        let centered = coverage(&[Vec2::ZERO], &field, &SQUARE, &lloyd(2.0, 64), 0.0).unwrap();
        assert!(centered.commands[0].norm() < 1e-12);
    }

    #[test]
    fn two_robots_at_half_centroids_rest() {
        let out =
            coverage(&[Vec2::new(-0.3, 0.0), Vec2::new(0.3, 0.0)], &DensityField::uniform(1.0), &SQUARE, &lloyd(1.0, 128), 0.0).unwrap();
        assert!(out.commands.iter().all(|u| u.norm() < 1e-12));
    }

    #[test]
    fn concentrated_mass_pulls_toward_corner() {
        let corner = Vec2::new(0.5, 0.5);
        let field = DensityField::with_refs(vec![DensityRef::fixed(0, corner, 100.0)], 0.05);
        let out = coverage(&[Vec2::ZERO], &field, &SQUARE, &lloyd(1.0, 128), 0.0).unwrap();
        // Oracle: direct grid integration of the centroid.
        let grid = Grid::new(SQUARE, 128).unwrap();
        let (mut m, mut s) = (0.0, Vec2::ZERO);
        for q in grid.cell_centers() {
            let phi = crate::geometry::density_at(&field, q, 0.0);
            m += phi;
            s += q * phi;
        }
        let c = s * (1.0 / m);
        assert_abs_diff_eq!(out.commands[0].x, c.x, epsilon = 1e-9);
        assert_abs_diff_eq!(out.commands[0].y, c.y, epsilon = 1e-9);
        let u = out.commands[0];
        assert!(u.x > 0.3 && u.y > 0.3 && (u.x - u.y).abs() < 1e-9);
    }

    #[test]
    fn degenerate_cell_gets_zero_command() {
        let p = Vec2::new(0.2, 0.2);
        let out = coverage(&[p, p], &DensityField::default(), &SQUARE, &lloyd(1.0, 32), 0.0).unwrap();
        assert_eq!(out.degenerate, vec![1]);
        assert_eq!(out.commands[1], Vec2::ZERO);
        assert!(out.commands[0].norm() > 0.0);
    }

    #[test]
    fn rejects_outside_agents_and_bad_params() {
        let field = DensityField::default();
        assert!(coverage(&[Vec2::new(0.7, 0.0)], &field, &SQUARE, &lloyd(1.0, 32), 0.0).is_err());
        assert!(coverage(&[Vec2::ZERO], &field, &SQUARE, &lloyd(0.0, 32), 0.0).is_err());
        assert!(coverage(&[Vec2::ZERO], &field, &SQUARE, &lloyd(1.0, 8), 0.0).is_err());
    }

    #[test]
    fn tvd_matches_lloyd_for_static_symmetric_case() {
        let x = [Vec2::new(-0.3, 0.0), Vec2::new(0.3, 0.0)];
        let params = CoverageParams { mode: CoverageMode::TvdD1, ..lloyd(1.0, 64) };
        let out = coverage(&x, &DensityField::uniform(1.0), &SQUARE, &params, 0.0).unwrap();
        assert!(out.commands.iter().all(|u| u.norm() < 1e-9));
    }

    #[test]
    fn tvd_tracks_moving_density() {
        // A reference drifting to +x shifts the centroid; the drift term adds +x motion.
        let r = DensityRef { id: 0, position: Vec2::new(-0.2, 0.0), weight: 50.0, velocity: Vec2::new(0.2, 0.0) };
        let field = DensityField::with_refs(vec![r], 0.1);
        let x = [Vec2::new(-0.2, 0.0)];
        let lloyd_out = coverage(&x, &field, &SQUARE, &lloyd(1.0, 64), 0.0).unwrap();
        let tvd = coverage(&x, &field, &SQUARE, &CoverageParams { mode: CoverageMode::TvdD1, ..lloyd(1.0, 64) }, 0.0).unwrap();
        assert!(tvd.commands[0].x > lloyd_out.commands[0].x + 0.05);
    }

    #[test]
    fn lloyd_step_does_not_raise_cost() {
        let field = DensityField::with_refs(vec![DensityRef::fixed(0, Vec2::new(0.3, -0.2), 2.0)], 0.15);
        let grid = Grid::new(SQUARE, 64).unwrap();
        let params = lloyd(1.0, 64);
        let mut x = vec![Vec2::new(-0.5, -0.5), Vec2::new(0.1, 0.4), Vec2::new(0.4, 0.0), Vec2::new(-0.2, 0.1)];
        let mut h_prev = f64::INFINITY;
        for _ in 0..50 {
            let out = coverage(&x, &field, &SQUARE, &params, 0.0).unwrap();
            let h = locational_cost(&x, &out.tessellation, &grid, &field, 0.0);
            assert!(h <= h_prev + 1e-12);
            h_prev = h;
            for (xi, ui) in x.iter_mut().zip(&out.commands) {
                *xi += *ui * 0.1;
            }
        }
    }
}
