//! Multi-round broadcast aggregation.
//!
//! In round 1 every sensor broadcasts its own reading `(e_i, x_i)`. In each
//! later round a sensor combines what it heard in the previous round with
//! its own previous aggregate using random ±1 weights, and broadcasts the
//! result. Each message `(B_i^l, x_i^l)` is one linear equation
//! `x_i^l = B_i^l · X` for whichever sink hears it.

mod session;
mod sink;
mod wire;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::keyed;
use crate::lp::LinalgError;
use crate::sparsity::SparsityError;

pub use session::{run_rounds, run_session, SessionOutcome, SessionParams};
pub use sink::{reconstruct, solve_measurements, LinearSystem, Method, Reconstruction, SystemRow};
pub use wire::{decode_message, encode_message, wire_bits};

/// Width of the aggregate value in the payload.
pub const REAL_BITS: u64 = 64;
/// Magnitude bits per coefficient when there is no cap.
pub const UNCAPPED_MAGNITUDE_BITS: u32 = 63;
pub const DEFAULT_CAP: usize = 32;
/// Fewest rounds per collection window.
pub const MIN_ROUNDS: usize = 3;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("sensor {sensor} in round {expected}: inbox message from round {found}")]
    RoundMismatch {
        sensor: usize,
        expected: usize,
        found: usize,
    },
    #[error("coefficient row has length {found}, system has {expected} sensors")]
    LengthMismatch { expected: usize, found: usize },
    #[error("contributor cap must be at least 2, got {0}")]
    InvalidCap(usize),
    #[error("coefficient overflow at sensor {sensor} in round {round}")]
    CoefficientOverflow { sensor: usize, round: usize },
    #[error("sink system has no rows")]
    EmptySystem,
    #[error("reading vector has length {found}, expected {expected}")]
    ReadingCount { expected: usize, found: usize },
    #[error("wire: {0}")]
    Wire(String),
    #[error(transparent)]
    Sparsity(#[from] SparsityError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Limit on how many contributions one combination may mix. Under a cap
/// `m` every coefficient satisfies `|b| < m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cap {
    Limit(usize),
    Unlimited,
}

impl Cap {
    pub fn new(m: usize) -> Result<Self, ProtocolError> {
        if m < 2 {
            return Err(ProtocolError::InvalidCap(m));
        }
        Ok(Cap::Limit(m))
    }

    /// `ceil(log2 m)`, or 63 when uncapped (any `i64` magnitude).
    pub fn magnitude_bits(self) -> u32 {
        match self {
            Cap::Limit(m) => (m as u64 - 1).ilog2() + 1,
            Cap::Unlimited => UNCAPPED_MAGNITUDE_BITS,
        }
    }

    pub fn admits_magnitude(self, magnitude: u64) -> bool {
        match self {
            Cap::Limit(m) => magnitude < m as u64,
            Cap::Unlimited => magnitude <= i64::MAX as u64,
        }
    }

    /// `n·ceil(log2 m) + 64`.
    pub fn payload_bits(self, n: usize) -> u64 {
        n as u64 * self.magnitude_bits() as u64 + REAL_BITS
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateMessage {
    pub sender: usize,
    pub round: usize,
    pub coeff_row: Vec<i64>,
    pub aggregate: f64,
    pub payload_bits: u64,
}

/// A sensor's pre-drawn ±1 weights `a_ij^l` for rounds 2.., one per
/// potential contributor `j`. Stored as a key; weights are derived on
/// demand so a plan costs nothing for senders that are never heard.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MixPlan {
    key: u64,
}

impl MixPlan {
    pub fn new(seed: u64, timestep: u64, sensor: usize) -> Self {
        Self {
            key: keyed::key(&[keyed::domain::MIX_PLAN, seed, timestep, sensor as u64]),
        }
    }

    pub fn coeff(&self, round: usize, contributor: usize) -> i64 {
        if keyed::key(&[self.key, round as u64, contributor as u64]) & 1 == 0 {
            1
        } else {
            -1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorState {
    pub id: usize,
    /// Round of the current `coeff_row`/`aggregate`.
    pub round: usize,
    pub coeff_row: Vec<i64>,
    pub aggregate: f64,
    pub plan: MixPlan,
}

impl SensorState {
    /// Round-1 state: the sensor's own reading with a unit row.
    pub fn new(id: usize, n: usize, reading: f64, plan: MixPlan) -> Self {
        let mut coeff_row = vec![0; n];
        coeff_row[id] = 1;
        Self {
            id,
            round: 1,
            coeff_row,
            aggregate: reading,
            plan,
        }
    }

    pub fn message(&self, cap: Cap) -> AggregateMessage {
        AggregateMessage {
            sender: self.id,
            round: self.round,
            coeff_row: self.coeff_row.clone(),
            aggregate: self.aggregate,
            payload_bits: cap.payload_bits(self.coeff_row.len()),
        }
    }
}

/// Advances a sensor one round: mixes its own previous aggregate with the
/// previous-round messages it received, and returns the new state along
/// with the message it broadcasts.
///
/// Under a cap, contributors other than the sensor itself are taken in a
/// uniformly shuffled order and admitted while fewer than `m` are mixed and
/// no coefficient would reach magnitude `m`. Uncapped, everyone is mixed.
pub fn step_sensor<R: Rng + ?Sized>(
    state: &SensorState,
    inbox: &[&AggregateMessage],
    cap: Cap,
    rng: &mut R,
) -> Result<(SensorState, AggregateMessage), ProtocolError> {
    let n = state.coeff_row.len();
    for msg in inbox {
        if msg.round != state.round {
            return Err(ProtocolError::RoundMismatch {
                sensor: state.id,
                expected: state.round,
                found: msg.round,
            });
        }
        if msg.coeff_row.len() != n {
            return Err(ProtocolError::LengthMismatch {
                expected: n,
                found: msg.coeff_row.len(),
            });
        }
    }
    let round = state.round + 1;
    let overflow = || ProtocolError::CoefficientOverflow {
        sensor: state.id,
        round,
    };

    let a_self = state.plan.coeff(round, state.id);
    let mut row: Vec<i64> = state.coeff_row.iter().map(|&b| a_self * b).collect();
    let mut aggregate = a_self as f64 * state.aggregate;
    if !row.iter().all(|&b| cap.admits_magnitude(b.unsigned_abs())) {
        return Err(overflow());
    }

    let mut others: Vec<&AggregateMessage> = inbox.iter().copied().filter(|m| m.sender != state.id).collect();
    others.sort_by_key(|m| m.sender);
    others.dedup_by_key(|m| m.sender);

    match cap {
        Cap::Unlimited => {
            for msg in others {
                let a = state.plan.coeff(round, msg.sender);
                for (b, &c) in row.iter_mut().zip(&msg.coeff_row) {
                    *b = c.checked_mul(a).and_then(|t| b.checked_add(t)).ok_or_else(overflow)?;
                }
                aggregate += a as f64 * msg.aggregate;
            }
            if row.contains(&i64::MIN) {
                return Err(overflow());
            }
        }
        Cap::Limit(m) => {
            others.shuffle(rng);
            let mut mixed = 1;
            let mut candidate = vec![0i64; n];
            for msg in others {
                if mixed == m {
                    break;
                }
                let a = state.plan.coeff(round, msg.sender);
                let mut fits = true;
                for ((t, &b), &c) in candidate.iter_mut().zip(&row).zip(&msg.coeff_row) {
                    match c.checked_mul(a).and_then(|v| b.checked_add(v)) {
                        Some(v) => {
                            *t = v;
                            fits &= cap.admits_magnitude(v.unsigned_abs());
                        }
                        None => fits = false,
                    }
                }
                if fits {
                    std::mem::swap(&mut row, &mut candidate);
                    aggregate += a as f64 * msg.aggregate;
                    mixed += 1;
                }
            }
        }
    }

    let next = SensorState {
        id: state.id,
        round,
        coeff_row: row,
        aggregate,
        plan: state.plan,
    };
    let msg = next.message(cap);
    Ok((next, msg))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundPlan {
    pub rounds: usize,
    /// Riders no chain of links connects to a sink.
    pub uncoverable: Vec<usize>,
}

/// Enough rounds for every reachable rider's data to arrive (one hop per
/// round), never fewer than three.
pub fn plan_rounds(hops: &[Option<usize>]) -> RoundPlan {
    let rounds = hops.iter().flatten().copied().max().unwrap_or(0).max(MIN_ROUNDS);
    let uncoverable: Vec<usize> = hops
        .iter()
        .enumerate()
        .filter_map(|(i, h)| h.is_none().then_some(i))
        .collect();
    if !uncoverable.is_empty() {
        log::warn!("{} rider(s) cannot reach a sink: {:?}", uncoverable.len(), uncoverable);
    }
    RoundPlan { rounds, uncoverable }
}
