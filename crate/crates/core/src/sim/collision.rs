//! Contact detection and non-penetration resolution for disc robots in a
//! rectangular arena.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::math::{Rect, Vec2};

/// Overlaps shallower than this are treated as touching, not penetrating.
pub const CONTACT_SLOP: f64 = 1e-12;
pub const RESOLUTION_TOLERANCE: f64 = 1e-9;
pub const MAX_RESOLUTION_PASSES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Wall {
    Left,
    Right,
    Bottom,
    Top,
}

impl Wall {
    pub const ALL: [Wall; 4] = [Wall::Left, Wall::Right, Wall::Bottom, Wall::Top];

    /// Outward unit normal.
    pub fn normal(self) -> Vec2 {
        match self {
            Wall::Left => Vec2::new(-1.0, 0.0),
            Wall::Right => Vec2::new(1.0, 0.0),
            Wall::Bottom => Vec2::new(0.0, -1.0),
            Wall::Top => Vec2::new(0.0, 1.0),
        }
    }

    /// Signed distance from `p` to the wall, positive on the arena side.
    pub fn clearance(self, p: Vec2, arena: &Rect) -> f64 {
        match self {
            Wall::Left => p.x - arena.left,
            Wall::Right => arena.right - p.x,
            Wall::Bottom => p.y - arena.bottom,
            Wall::Top => arena.top - p.y,
        }
    }
}

/// What a robot touches. Robot pairs are ordered `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContactPair {
    Robots { i: usize, j: usize },
    Wall { i: usize, wall: Wall },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub pair: ContactPair,
    pub depth: f64,
    /// Unit normal from robot `i` toward robot `j`, or the wall's outward normal.
    pub normal: Vec2,
}

fn pair_normal(a: Vec2, b: Vec2) -> (Vec2, f64) {
    let d = b - a;
    let dist = d.norm();
    if dist > 0.0 {
        (d * (1.0 / dist), dist)
    } else {
        (Vec2::new(1.0, 0.0), 0.0)
    }
}

fn pair_contact(i: usize, j: usize, p: &[Vec2], r: &[f64]) -> Option<Contact> {
    let (normal, dist) = pair_normal(p[i], p[j]);
    let depth = r[i] + r[j] - dist;
    (depth > CONTACT_SLOP).then_some(Contact { pair: ContactPair::Robots { i, j }, depth, normal })
}

fn wall_contact(i: usize, wall: Wall, p: &[Vec2], r: &[f64], arena: &Rect) -> Option<Contact> {
    let depth = r[i] - wall.clearance(p[i], arena);
    (depth > CONTACT_SLOP).then_some(Contact { pair: ContactPair::Wall { i, wall }, depth, normal: wall.normal() })
}

/// Robot pairs whose bounding cells are adjacent on a uniform hash grid with
/// cell size equal to the largest diameter. Sorted and duplicate-free.
pub fn broad_phase(p: &[Vec2], r: &[f64]) -> Vec<(usize, usize)> {
    let cell = 2.0 * r.iter().copied().fold(0.0, f64::max);
    if p.len() < 2 || cell <= 0.0 {
        return Vec::new();
    }
    let key = |q: Vec2| ((q.x / cell).floor() as i64, (q.y / cell).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, &q) in p.iter().enumerate() {
        buckets.entry(key(q)).or_default().push(i);
    }
    let mut out = BTreeSet::new();
    for (i, &q) in p.iter().enumerate() {
        let (cx, cy) = key(q);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = buckets.get(&(cx + dx, cy + dy)) {
                    out.extend(list.iter().filter(|&&j| j > i).map(|&j| (i, j)));
                }
            }
        }
    }
    out.into_iter().collect()
}

/// All penetrating contacts, robot pairs first then walls, each in index order.
pub fn detect(p: &[Vec2], r: &[f64], arena: &Rect) -> Vec<Contact> {
    let mut out: Vec<Contact> = broad_phase(p, r).into_iter().filter_map(|(i, j)| pair_contact(i, j, p, r)).collect();
    for i in 0..p.len() {
        out.extend(Wall::ALL.iter().filter_map(|&w| wall_contact(i, w, p, r, arena)));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub passes: usize,
    /// Deepest remaining penetration.
    pub residual: f64,
}

/// Push overlapping bodies apart in place. Each pass visits every current
/// contact once, moving both robots of a pair by half the current depth and
/// a robot in a wall by the full depth.
pub fn resolve(p: &mut [Vec2], r: &[f64], arena: &Rect) -> Resolution {
    let mut passes = 0;
    let mut contacts = detect(p, r, arena);
    while !contacts.is_empty() && passes < MAX_RESOLUTION_PASSES {
        passes += 1;
        for c in &contacts {
            match c.pair {
                ContactPair::Robots { i, j } => {
                    if let Some(now) = pair_contact(i, j, p, r) {
                        let shift = now.normal * (0.5 * now.depth);
                        p[i] -= shift;
                        p[j] += shift;
                    }
                }
                ContactPair::Wall { i, wall } => {
                    if let Some(now) = wall_contact(i, wall, p, r, arena) {
                        p[i] -= now.normal * now.depth;
                    }
                }
            }
        }
        contacts = detect(p, r, arena);
        if contacts.iter().all(|c| c.depth <= RESOLUTION_TOLERANCE) {
            break;
        }
    }
    Resolution { passes, residual: contacts.iter().map(|c| c.depth).fold(0.0, f64::max) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn arena() -> Rect {
        Rect::square(0.6)
    }

    #[test]
    fn pair_detection_threshold() {
        let r = [0.02, 0.02];
        let eps = 1e-3;
        let p = [Vec2::new(0.0, 0.0), Vec2::new(0.04 - eps, 0.0)];
        let c = detect(&p, &r, &arena());
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].pair, ContactPair::Robots { i: 0, j: 1 });
        assert_abs_diff_eq!(c[0].depth, eps, epsilon = 1e-12);
        assert_abs_diff_eq!(c[0].normal.x, 1.0);

        let p = [Vec2::new(0.0, 0.0), Vec2::new(0.04 + eps, 0.0)];
        assert!(detect(&p, &r, &arena()).is_empty());
    }

    #[test]
    fn corner_robot_touches_two_walls_and_resolves_in_one_pass() {
        let mut p = [Vec2::new(-0.59, 0.59)];
        let r = [0.02];
        let c = detect(&p, &r, &arena());
        let walls: Vec<_> = c.iter().map(|c| c.pair).collect();
        assert_eq!(walls, vec![ContactPair::Wall { i: 0, wall: Wall::Left }, ContactPair::Wall { i: 0, wall: Wall::Top }]);
        let res = resolve(&mut p, &r, &arena());
        assert_eq!(res.passes, 1);
        assert!(res.residual <= RESOLUTION_TOLERANCE);
        assert_abs_diff_eq!(p[0].x, -0.58, epsilon = 1e-12);
        assert_abs_diff_eq!(p[0].y, 0.58, epsilon = 1e-12);
    }

    #[test]
    fn pair_resolution_is_symmetric() {
        let mut p = [Vec2::new(-0.01, 0.0), Vec2::new(0.01, 0.0)];
        resolve(&mut p, &[0.02, 0.02], &arena());
        assert_abs_diff_eq!(p[0].x, -0.02, epsilon = 1e-12);
        assert_abs_diff_eq!(p[1].x, 0.02, epsilon = 1e-12);
    }

    #[test]
    fn coincident_robots_separate() {
        let mut p = [Vec2::new(0.1, 0.1), Vec2::new(0.1, 0.1)];
        let res = resolve(&mut p, &[0.02, 0.02], &arena());
        assert!(res.residual <= RESOLUTION_TOLERANCE);
        assert_abs_diff_eq!(p[0].distance(p[1]), 0.04, epsilon = 1e-12);
    }

    fn brute_force(p: &[Vec2], r: &[f64]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if r[i] + r[j] - p[i].distance(p[j]) > CONTACT_SLOP {
                    out.push((i, j));
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn broad_phase_misses_nothing(pts in prop::collection::vec((-0.55f64..0.55, -0.55f64..0.55), 2..40)) {
            let p: Vec<Vec2> = pts.iter().map(|&(x, y)| Vec2::new(x, y)).collect();
            let r = vec![0.05; p.len()];
            let found: Vec<(usize, usize)> = detect(&p, &r, &arena())
                .into_iter()
                .filter_map(|c| match c.pair { ContactPair::Robots { i, j } => Some((i, j)), _ => None })
                .collect();
            prop_assert_eq!(found, brute_force(&p, &r));
        }

        #[test]
        fn sparse_overlaps_resolve_without_deepening(
            pts in prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 2..12),
        ) {
            let mut p: Vec<Vec2> = pts.iter().map(|&(x, y)| Vec2::new(x, y)).collect();
            let r = vec![0.02; p.len()];
            let before = detect(&p, &r, &arena()).iter().map(|c| c.depth).fold(0.0, f64::max);
            let res = resolve(&mut p, &r, &arena());
            prop_assert!(res.residual <= before.max(RESOLUTION_TOLERANCE) + 1e-12);
        }
    }
}
