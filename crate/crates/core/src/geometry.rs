//! Grid-based Voronoi tessellation and coverage integrals.
//!
//! The workspace is split into `resolution x resolution` cells. Each cell
//! center belongs to its nearest agent (ties go to the lowest index) and all
//! integrals use the midpoint rule on cell centers. Sums run in a fixed
//! cell order, so results are reproducible bit for bit.

use serde::{Deserialize, Serialize};

use crate::graph::Topology;
use crate::math::{Rect, Vec2};
use crate::{Error, Result};

pub const MIN_RESOLUTION: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub bounds: Rect,
    pub resolution: usize,
}

impl Grid {
    pub fn new(bounds: Rect, resolution: usize) -> Result<Self> {
        bounds.validate()?;
        if resolution < MIN_RESOLUTION {
            return Err(Error::InvalidParameter(format!("grid resolution must be >= {MIN_RESOLUTION}, got {resolution}")));
        }
        Ok(Self { bounds, resolution })
    }

    pub fn cell_count(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn cell_width(&self) -> f64 {
        self.bounds.width() / self.resolution as f64
    }

    pub fn cell_height(&self) -> f64 {
        self.bounds.height() / self.resolution as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_width() * self.cell_height()
    }

    /// Center of cell `index`, row-major from the bottom-left corner.
    pub fn cell_center(&self, index: usize) -> Vec2 {
        let (ix, iy) = (index % self.resolution, index / self.resolution);
        Vec2::new(self.bounds.left + (ix as f64 + 0.5) * self.cell_width(), self.bounds.bottom + (iy as f64 + 0.5) * self.cell_height())
    }

    pub fn cell_centers(&self) -> impl Iterator<Item = Vec2> + '_ {
        (0..self.cell_count()).map(|k| self.cell_center(k))
    }
}

/// A human-provided reference location. `velocity` lets a reference drift
/// linearly in time; it is zero for pointer input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityRef {
    pub id: u32,
    pub position: Vec2,
    pub weight: f64,
    #[serde(default)]
    pub velocity: Vec2,
}

impl DensityRef {
    pub fn fixed(id: u32, position: Vec2, weight: f64) -> Self {
        Self { id, position, weight, velocity: Vec2::ZERO }
    }

    pub fn position_at(&self, t: f64) -> Vec2 {
        self.position + self.velocity * t
    }
}

/// Importance function `phi(q, t) = floor + sum_k w_k exp(-|q - p_k(t)|^2 / (2 sigma^2))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub refs: Vec<DensityRef>,
    pub sigma: f64,
    pub floor: f64,
}

pub const DEFAULT_SIGMA: f64 = 0.12;
pub const DEFAULT_FLOOR: f64 = 1e-3;

impl Default for DensityField {
    fn default() -> Self {
        Self { refs: Vec::new(), sigma: DEFAULT_SIGMA, floor: DEFAULT_FLOOR }
    }
}

impl DensityField {
    /// Constant density `value` everywhere.
    pub fn uniform(value: f64) -> Self {
        Self { refs: Vec::new(), sigma: DEFAULT_SIGMA, floor: value }
    }

    pub fn with_refs(refs: Vec<DensityRef>, sigma: f64) -> Self {
        Self { refs, sigma, floor: DEFAULT_FLOOR }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.floor.is_finite() && self.floor > 0.0) {
            return Err(Error::InvalidParameter(format!("density floor must be > 0, got {}", self.floor)));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("density sigma must be > 0, got {}", self.sigma)));
        }
        for r in &self.refs {
            if !(r.position.is_finite() && r.velocity.is_finite() && r.weight.is_finite()) {
                return Err(Error::NonFinite(format!("density reference {}", r.id)));
            }
            if r.weight < 0.0 {
                return Err(Error::InvalidParameter(format!("density reference {} has negative weight", r.id)));
            }
        }
        Ok(())
    }
}

pub fn density_at(field: &DensityField, q: Vec2, t: f64) -> f64 {
    let inv = 1.0 / (2.0 * field.sigma * field.sigma);
    field.floor + field.refs.iter().map(|r| r.weight * (-(q - r.position_at(t)).norm_sq() * inv).exp()).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tessellation {
    pub resolution: usize,
    /// Owning agent of every cell, row-major.
    pub owner: Vec<usize>,
    pub mass: Vec<f64>,
    /// Mass-weighted center of each cell set; `None` for agents owning no mass.
    pub centroid: Vec<Option<Vec2>>,
}

impl Tessellation {
    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn agents(&self) -> usize {
        self.mass.len()
    }
}

fn nearest(x: &[Vec2], q: Vec2) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in x.iter().enumerate() {
        let d = (q - *p).norm_sq();
        // Strict comparison keeps the lowest index on ties.
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

pub fn tessellate(x: &[Vec2], grid: &Grid, field: &DensityField, t: f64) -> Tessellation {
    let n = x.len();
    let area = grid.cell_area();
    let mut owner = Vec::with_capacity(grid.cell_count());
    let mut mass = vec![0.0; n];
    let mut moment = vec![Vec2::ZERO; n];
    for q in grid.cell_centers() {
        let i = nearest(x, q);
        let m = density_at(field, q, t) * area;
        owner.push(i);
        mass[i] += m;
        moment[i] += q * m;
    }
    let centroid = mass.iter().zip(&moment).map(|(&m, &s)| (m > 0.0).then(|| s * (1.0 / m))).collect();
    Tessellation { resolution: grid.resolution, owner, mass, centroid }
}

/// `H(x, t) = sum_i integral over V_i of |q - x_i|^2 phi(q, t) dq`.
pub fn locational_cost(x: &[Vec2], tess: &Tessellation, grid: &Grid, field: &DensityField, t: f64) -> f64 {
    let area = grid.cell_area();
    grid.cell_centers().zip(&tess.owner).map(|(q, &i)| (q - x[i]).norm_sq() * density_at(field, q, t) * area).sum()
}

/// Agents whose cells touch across at least one grid edge.
pub fn delaunay_neighbors(tess: &Tessellation) -> Topology {
    let res = tess.resolution;
    let mut edges = Vec::new();
    for iy in 0..res {
        for ix in 0..res {
            let a = tess.owner[iy * res + ix];
            if ix + 1 < res {
                let b = tess.owner[iy * res + ix + 1];
                if a != b {
                    edges.push((a, b));
                }
            }
            if iy + 1 < res {
                let b = tess.owner[(iy + 1) * res + ix];
                if a != b {
                    edges.push((a, b));
                }
            }
        }
    }
    Topology::new(tess.agents(), edges).expect("owners are valid agent indices")
}
