use crate::controllers::Controller;
use crate::graph::Topology;
use crate::math::Vec2;
use crate::{Error, Result};

/// Rendezvous law `u_i = sum_{j in N_i} (x_j - x_i)`.
pub fn consensus(x: &[Vec2], g: &Topology) -> Result<Vec<Vec2>> {
    if g.n() != x.len() {
        return Err(Error::Dimension(format!("topology has {} agents, state has {}", g.n(), x.len())));
    }
    let mut u = vec![Vec2::ZERO; x.len()];
    for (i, j) in g.edges() {
        let d = x[j] - x[i];
        u[i] += d;
        u[j] -= d;
    }
    Ok(u)
}

#[derive(Debug, Clone)]
pub struct ConsensusController {
    pub topology: Topology,
}

impl Controller for ConsensusController {
    fn name(&self) -> &str {
        "consensus"
    }

    fn control(&mut self, _t: f64, x: &[Vec2]) -> Result<Vec<Vec2>> {
        consensus(x, &self.topology)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn two_agents() {
        let u = consensus(&[Vec2::ZERO, Vec2::new(2.0, 0.0)], &Topology::new(2, [(0, 1)]).unwrap()).unwrap();
        assert_eq!(u, vec![Vec2::new(2.0, 0.0), Vec2::new(-2.0, 0.0)]);
    }

    #[test]
    fn coincident_agents_stay() {
        let x = vec![Vec2::new(0.3, 0.1); 5];
        assert!(consensus(&x, &Topology::complete(5)).unwrap().iter().all(|u| *u == Vec2::ZERO));
    }

    #[test]
    fn hexagon_points_at_centroid() {
        let r = 0.4;
        let x: Vec<Vec2> = (0..6)
            .map(|k| {
                let a = k as f64 * PI / 3.0;
                Vec2::new(r * a.cos(), r * a.sin())
            })
            .collect();
        let u = consensus(&x, &Topology::cycle(6)).unwrap();
        for (xi, ui) in x.iter().zip(&u) {
            // 2 r (1 - cos 60deg) = r, directed at the origin.
            assert_abs_diff_eq!(ui.norm(), r, epsilon = 1e-12);
            assert_abs_diff_eq!((*ui + *xi).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn isolated_agent_and_size_mismatch() {
        let g = Topology::new(3, [(0, 1)]).unwrap();
        let u = consensus(&[Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(5.0, 5.0)], &g).unwrap();
        assert_eq!(u[2], Vec2::ZERO);
        assert!(matches!(consensus(&[Vec2::ZERO], &g), Err(Error::Dimension(_))));
    }

    proptest! {
        #[test]
        fn commands_sum_to_zero(
            pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..12),
            density in 0.0f64..1.0,
            seed in any::<u64>(),
        ) {
            let n = pts.len();
            let x: Vec<Vec2> = pts.into_iter().map(|(a, b)| Vec2::new(a, b)).collect();
            let mut s = seed;
            let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .filter(|_| { s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); ((s >> 33) as f64 / (1u64 << 31) as f64) < density })
                .collect();
            let u = consensus(&x, &Topology::new(n, edges).unwrap()).unwrap();
            let total = u.iter().fold(Vec2::ZERO, |acc, v| acc + *v);
            prop_assert!(total.norm_inf() <= 1e-12 * n as f64);
        }
    }
}
