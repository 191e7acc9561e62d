//! Who hears whom in one broadcast round: disc connectivity with
//! independent per-link packet loss.
//!
//! Node ids: riders are `0..n`, sinks follow as `n..n + sinks`. Sinks only
//! listen.

use std::collections::VecDeque;

use thiserror::Error;

use crate::graph::{Position, RiderPositions};
use crate::keyed;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadioError {
    #[error("transmission range must be positive, got {0}")]
    InvalidRange(f64),
    #[error("loss probability must be in [0, 1], got {0}")]
    InvalidLoss(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    pub range_m: f64,
    pub loss_p: f64,
    pub seed: u64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            range_m: 50.0,
            loss_p: 0.0,
            seed: 1,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<(), RadioError> {
        if !(self.range_m > 0.0) || !self.range_m.is_finite() {
            return Err(RadioError::InvalidRange(self.range_m));
        }
        if !(0.0..=1.0).contains(&self.loss_p) {
            return Err(RadioError::InvalidLoss(self.loss_p));
        }
        Ok(())
    }
}

/// Deliveries of one round, sorted by `(sender, receiver)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reachability {
    pub round: usize,
    pub delivered: Vec<(usize, usize)>,
}

impl Reachability {
    /// Senders whose broadcast reached `receiver`, in ascending order.
    pub fn senders_to(&self, receiver: usize) -> impl Iterator<Item = usize> + '_ {
        self.delivered.iter().filter(move |&&(_, r)| r == receiver).map(|&(s, _)| s)
    }

    /// Inbound sender lists for every node id below `nodes`.
    pub fn inboxes(&self, nodes: usize) -> Vec<Vec<usize>> {
        let mut inbox = vec![Vec::new(); nodes];
        for &(s, r) in &self.delivered {
            if r < nodes {
                inbox[r].push(s);
            }
        }
        inbox
    }
}

/// Uniform draw for one directed link in one round; delivery happens when
/// it is at least `loss_p`, so raising `loss_p` only removes deliveries.
pub fn link_draw(seed: u64, timestep: u64, round: usize, sender: usize, receiver: usize) -> f64 {
    keyed::unit(&[
        keyed::domain::LINK_LOSS,
        seed,
        timestep,
        round as u64,
        sender as u64,
        receiver as u64,
    ])
}

pub fn compute_reachability(
    positions: &RiderPositions,
    sinks: &[Position],
    params: &RadioParams,
    timestep: u64,
    round: usize,
) -> Reachability {
    let n = positions.len();
    let range_sq = params.range_m * params.range_m;
    let mut delivered = Vec::new();
    for (i, pi) in positions.pos.iter().enumerate() {
        let receivers = positions.pos.iter().chain(sinks).enumerate();
        for (j, pj) in receivers {
            if j == i || pi.distance_sq(pj) > range_sq {
                continue;
            }
            if params.loss_p > 0.0 && link_draw(params.seed, timestep, round, i, j) < params.loss_p {
                continue;
            }
            delivered.push((i, j));
        }
    }
    debug_assert!(delivered.iter().all(|&(s, _)| s < n));
    Reachability { round, delivered }
}

/// Loss-free hop count from each rider to its nearest sink; `None` when no
/// chain of in-range riders reaches one.
pub fn hop_distance_to_sinks(positions: &RiderPositions, sinks: &[Position], range_m: f64) -> Vec<Option<usize>> {
    let n = positions.len();
    let range_sq = range_m * range_m;
    let mut hops: Vec<Option<usize>> = vec![None; n];
    let mut queue = VecDeque::new();
    for (i, p) in positions.pos.iter().enumerate() {
        if sinks.iter().any(|s| p.distance_sq(s) <= range_sq) {
            hops[i] = Some(1);
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let h = hops[i].expect("queued riders have a hop count");
        for j in 0..n {
            if hops[j].is_none() && positions.pos[i].distance_sq(&positions.pos[j]) <= range_sq {
                hops[j] = Some(h + 1);
                queue.push_back(j);
            }
        }
    }
    hops
}

/// Linear-interpolated percentile of the along-road coordinate.
fn along_road_percentile(positions: &RiderPositions, pct: f64) -> f64 {
    let mut s: Vec<f64> = positions.pos.iter().map(|p| p.s).collect();
    s.sort_by(f64::total_cmp);
    let rank = pct / 100.0 * (s.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    s[lo] + (s[hi] - s[lo]) * (rank - lo as f64)
}

/// Two sinks at the back and front of the group: the 2nd and 98th
/// percentile of along-road position, on the road center line.
pub fn place_sinks(positions: &RiderPositions) -> Vec<Position> {
    if positions.is_empty() {
        return Vec::new();
    }
    vec![
        Position::new(along_road_percentile(positions, 2.0), 0.0),
        Position::new(along_road_percentile(positions, 98.0), 0.0),
    ]
}
