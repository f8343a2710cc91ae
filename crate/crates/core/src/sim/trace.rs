//! Run traces and their file formats.
//!
//! Units: positions in m, headings in rad, velocities in m/s, times in s.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::collision::{ContactPair, Wall};
use crate::config::ExperimentConfig;
use crate::dynamics::Pose;
use crate::math::Vec2;
use crate::safety::FilterStatus;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    /// Time at the end of the tick.
    pub t: f64,
    pub poses: Vec<Pose>,
    /// Nominal commands from the controller.
    pub u_hat: Vec<Vec2>,
    /// Executed commands.
    pub u: Vec<Vec2>,
    /// `None` when the filter is off.
    pub filter: Option<FilterStatus>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactEvent {
    pub tick: u64,
    pub t: f64,
    pub pair: ContactPair,
    /// Penetration depth before resolution (m).
    pub depth: f64,
    /// Approach speed along the contact normal, zero when separating (m/s).
    pub normal_speed: f64,
    /// Time since this contact began; zero on the first tick of contact (s).
    pub duration: f64,
}

impl ContactEvent {
    pub fn is_impact(&self) -> bool {
        self.duration == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    Truncated { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub config: ExperimentConfig,
    pub initial: Vec<Pose>,
    pub ticks: Vec<TickRecord>,
    pub contacts: Vec<ContactEvent>,
    pub status: RunStatus,
}

impl Trace {
    pub fn robots(&self) -> usize {
        self.initial.len()
    }

    pub fn final_positions(&self) -> Vec<Vec2> {
        self.ticks.last().map_or(&self.initial, |r| &r.poses).iter().map(Pose::position).collect()
    }

    /// Tick-by-tick records as JSON lines.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for rec in &self.ticks {
            serde_json::to_writer(&mut w, rec)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    /// One row per robot per tick.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for rec in &self.ticks {
            let filter = rec.filter.map_or("off", FilterStatus::as_str);
            for (id, pose) in rec.poses.iter().enumerate() {
                out.serialize(CsvRow {
                    tick: rec.tick,
                    t: rec.t,
                    id,
                    x: pose.x,
                    y: pose.y,
                    theta: pose.theta,
                    u_hat_x: rec.u_hat[id].x,
                    u_hat_y: rec.u_hat[id].y,
                    u_x: rec.u[id].x,
                    u_y: rec.u[id].y,
                    filter,
                })?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_contacts_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["tick", "t", "kind", "i", "other", "depth", "normal_speed", "duration"])?;
        for c in &self.contacts {
            let (kind, i, other) = match c.pair {
                ContactPair::Robots { i, j } => ("robot", i, j.to_string()),
                ContactPair::Wall { i, wall } => ("wall", i, wall_name(wall).to_string()),
            };
            out.write_record([
                c.tick.to_string(),
                c.t.to_string(),
                kind.to_string(),
                i.to_string(),
                other,
                c.depth.to_string(),
                c.normal_speed.to_string(),
                c.duration.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn wall_name(w: Wall) -> &'static str {
    match w {
        Wall::Left => "left",
        Wall::Right => "right",
        Wall::Bottom => "bottom",
        Wall::Top => "top",
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    tick: u64,
    t: f64,
    id: usize,
    x: f64,
    y: f64,
    theta: f64,
    u_hat_x: f64,
    u_hat_y: f64,
    u_x: f64,
    u_y: f64,
    filter: &'a str,
}
