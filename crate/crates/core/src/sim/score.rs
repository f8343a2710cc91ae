//! Safety score: one minus the cumulative contact normal speed, normalized by
//! the worst case of every robot striking at full speed on every tick.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::collision::ContactPair;
use super::trace::{ContactEvent, Trace};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    /// In `[0, 1]`; one means no contact with approach speed.
    pub score: f64,
    /// Contact records, one per touching pair per tick.
    pub contact_records: usize,
    /// Contact episodes.
    pub impacts: usize,
    /// Mean normal speed at the first tick of each episode (m/s).
    pub mean_collision_velocity: f64,
    /// Mean episode length (s).
    pub mean_contact_duration: f64,
}

/// Running sum backing [`safety_score`], usable while a run is in progress.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreAccumulator {
    normal_speed: f64,
    records: usize,
    impact_speed: f64,
    open: BTreeMap<ContactPair, usize>,
    /// Per-episode duration: last observed `duration + dt`.
    episodes: Vec<f64>,
}

impl ScoreAccumulator {
    pub fn push(&mut self, e: &ContactEvent, dt: f64) {
        self.normal_speed += e.normal_speed;
        self.records += 1;
        let slot = match self.open.get(&e.pair) {
            Some(&k) if !e.is_impact() => k,
            _ => {
                self.impact_speed += e.normal_speed;
                self.episodes.push(0.0);
                self.open.insert(e.pair, self.episodes.len() - 1);
                self.episodes.len() - 1
            }
        };
        self.episodes[slot] = e.duration + dt;
    }

    pub fn report(&self, robots: usize, ticks: usize, alpha: f64) -> Result<ScoreReport> {
        if robots == 0 || ticks == 0 {
            return Err(Error::EmptyTrace);
        }
        if !(alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
        }
        let worst = robots as f64 * ticks as f64 * alpha;
        let impacts = self.episodes.len();
        let mean = |s: f64| if impacts == 0 { 0.0 } else { s / impacts as f64 };
        Ok(ScoreReport {
            score: (1.0 - self.normal_speed / worst).clamp(0.0, 1.0),
            contact_records: self.records,
            impacts,
            mean_collision_velocity: mean(self.impact_speed),
            mean_contact_duration: mean(self.episodes.iter().sum()),
        })
    }
}

pub fn safety_score(trace: &Trace) -> Result<ScoreReport> {
    let mut acc = ScoreAccumulator::default();
    for e in &trace.contacts {
        acc.push(e, trace.config.dt);
    }
    acc.report(trace.robots(), trace.ticks.len(), trace.config.safety.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use crate::dynamics::Pose;
    use crate::sim::trace::{RunStatus, TickRecord};
    use crate::sim::Wall;
    use crate::Vec2;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn blank(robots: usize, ticks: usize) -> Trace {
        let config = ExperimentConfig { robots, ..Default::default() };
        let poses = vec![Pose::default(); robots];
        let ticks = (1..=ticks as u64)
            .map(|k| TickRecord {
                tick: k,
                t: k as f64 * config.dt,
                poses: poses.clone(),
                u_hat: vec![Vec2::ZERO; robots],
                u: vec![Vec2::ZERO; robots],
                filter: None,
            })
            .collect();
        Trace { config, initial: poses, ticks, contacts: Vec::new(), status: RunStatus::Complete }
    }

    fn event(tick: u64, pair: ContactPair, speed: f64, duration: f64) -> ContactEvent {
        ContactEvent { tick, t: tick as f64 * 0.01, pair, depth: 1e-3, normal_speed: speed, duration }
    }

    #[test]
    fn collision_free_is_one() {
        let r = safety_score(&blank(4, 50)).unwrap();
        assert_eq!(r.score, 1.0);
        assert_eq!(r.impacts, 0);
        assert_eq!(r.mean_collision_velocity, 0.0);
    }

    #[test]
    fn single_contact_example() {
        let mut t = blank(2, 100);
        t.contacts.push(event(10, ContactPair::Robots { i: 0, j: 1 }, 0.1, 0.0));
        assert_abs_diff_eq!(safety_score(&t).unwrap().score, 0.995, epsilon = 1e-12);
    }

    #[test]
    fn worst_case_is_zero() {
        let mut t = blank(3, 20);
        for k in 1..=20u64 {
            for i in 0..3 {
                t.contacts.push(event(k, ContactPair::Wall { i, wall: Wall::Left }, 0.1, (k - 1) as f64 * 0.01));
            }
        }
        let r = safety_score(&t).unwrap();
        assert!(r.score <= 1e-9);
        assert_eq!(r.impacts, 3);
        assert_abs_diff_eq!(r.mean_contact_duration, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn episodes_split_on_new_impact() {
        let mut t = blank(2, 10);
        let p = ContactPair::Robots { i: 0, j: 1 };
        t.contacts.extend([event(1, p, 0.1, 0.0), event(2, p, 0.0, 0.01), event(5, p, 0.05, 0.0)]);
        let r = safety_score(&t).unwrap();
        assert_eq!(r.impacts, 2);
        assert_abs_diff_eq!(r.mean_collision_velocity, 0.075, epsilon = 1e-12);
        assert_abs_diff_eq!(r.mean_contact_duration, 0.015, epsilon = 1e-12);
    }

    #[test]
    fn empty_trace_errors() {
        assert!(matches!(safety_score(&blank(2, 0)), Err(Error::EmptyTrace)));
    }

    proptest! {
        #[test]
        fn bounded_and_strictly_decreasing(
            speeds in prop::collection::vec(0.0f64..0.1, 0..50),
            extra in 1e-6f64..0.1,
        ) {
            let mut t = blank(3, 40);
            for (k, s) in speeds.iter().enumerate() {
                t.contacts.push(event(k as u64 % 40 + 1, ContactPair::Wall { i: k % 3, wall: Wall::Top }, *s, 0.0));
            }
            let before = safety_score(&t).unwrap().score;
            prop_assert!((0.0..=1.0).contains(&before));
            t.contacts.push(event(40, ContactPair::Robots { i: 0, j: 2 }, extra, 0.0));
            let after = safety_score(&t).unwrap().score;
            prop_assert!((0.0..=1.0).contains(&after));
            prop_assert!(after < before);
        }
    }
}
