//! Rider motion: a synthetic flocking peloton, velocity extraction, and
//! CSV trace exchange.

mod sim;
mod trace;

use thiserror::Error;

use crate::graph::RiderPositions;

pub use sim::{simulate_race, Breakaway, PelotonParams, SpeedProfile};
pub use trace::{
    ingest_trace, read_velocity_csv, write_position_csv, write_velocity_csv, POSITION_HEADER, VELOCITY_HEADER,
};

#[derive(Debug, Error)]
pub enum MobilityError {
    #[error("invalid peloton parameters: {0}")]
    InvalidParams(String),
    #[error("trace needs at least two frames, got {0}")]
    TooFewFrames(usize),
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("bad header {found:?}, expected {expected:?}")]
    Header { found: String, expected: String },
    #[error("line {line}: duplicate cell (time {time}, rider {rider}), first seen on line {first_line}")]
    DuplicateCell {
        line: u64,
        first_line: u64,
        time: f64,
        rider: u64,
    },
    #[error("line {line}: time {time} is not on the {dt} s grid")]
    OffGrid { line: u64, time: f64, dt: f64 },
    #[error("grid gap: rider {rider} has no row at time {time}")]
    GridGap { time: f64, rider: u64 },
    #[error("trace is empty")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Along-road velocities of all riders at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityFrame {
    pub time: f64,
    pub x: Vec<f64>,
}

/// Equally spaced position frames for a fixed set of riders.
#[derive(Debug, Clone, PartialEq)]
pub struct RaceTrace {
    pub dt: f64,
    pub rider_ids: Vec<u64>,
    pub frames: Vec<RiderPositions>,
    /// Known attack windows; empty for ingested traces.
    pub breakaways: Vec<Breakaway>,
}

impl RaceTrace {
    pub fn rider_count(&self) -> usize {
        self.rider_ids.len()
    }

    pub fn duration(&self) -> f64 {
        self.frames.len() as f64 * self.dt
    }

    /// Whether `rider` is attacking or recovering at `time`.
    pub fn in_breakaway(&self, rider: usize, time: f64) -> bool {
        self.breakaways
            .iter()
            .any(|b| b.rider == rider && time >= b.start && time <= b.end)
    }
}

/// Finite-difference velocities `(s(t) − s(t−dt)) / dt`, one frame per
/// consecutive pair of position frames.
pub fn velocities(trace: &RaceTrace) -> Result<Vec<VelocityFrame>, MobilityError> {
    if trace.frames.len() < 2 {
        return Err(MobilityError::TooFewFrames(trace.frames.len()));
    }
    Ok(trace
        .frames
        .windows(2)
        .map(|w| VelocityFrame {
            time: w[1].time,
            x: w[1].pos.iter().zip(&w[0].pos).map(|(b, a)| (b.s - a.s) / trace.dt).collect(),
        })
        .collect())
}
