use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{MobilityError, RaceTrace};
use crate::graph::{Position, RiderPositions};

/// Half-width of the road corridor riders stay in.
pub const CORRIDOR_HALF_WIDTH: f64 = 5.0;
/// Riders closer than this repel each other.
pub const SEPARATION_DISTANCE: f64 = 1.5;
/// Bound on each flocking acceleration component.
pub const MAX_ACCEL: f64 = 2.0;
/// Relaxation rate of a rider's speed towards its target (1/s).
pub const SPEED_TRACKING: f64 = 0.2;
/// Damping of lateral drift (1/s).
pub const LATERAL_DAMPING: f64 = 0.5;
/// After an attack the rider rides below group speed for this many attack
/// durations, at half the boost, which cancels the gap it opened.
const RECOVERY_FACTOR: f64 = 2.0;

/// Piecewise-constant group speed, as `(start time s, speed m/s)` segments
/// sorted by start time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedProfile(Vec<(f64, f64)>);

impl SpeedProfile {
    pub fn constant(speed: f64) -> Self {
        Self(vec![(0.0, speed)])
    }

    pub fn new(mut segments: Vec<(f64, f64)>) -> Result<Self, MobilityError> {
        if segments.is_empty() {
            return Err(MobilityError::InvalidParams("empty speed profile".into()));
        }
        if segments.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(MobilityError::InvalidParams("non-finite speed profile".into()));
        }
        segments.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self(segments))
    }

    pub fn speed_at(&self, time: f64) -> f64 {
        self.0
            .iter()
            .take_while(|(start, _)| *start <= time)
            .last()
            .unwrap_or(&self.0[0])
            .1
    }

    pub fn segments(&self) -> &[(f64, f64)] {
        &self.0
    }
}

impl fmt::Display for SpeedProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (t, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}:{v}")?;
        }
        Ok(())
    }
}

impl FromStr for SpeedProfile {
    type Err = MobilityError;

    /// `"10"` or `"0:11,200:12.5,420:10.5"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MobilityError::InvalidParams(format!("bad speed profile {s:?}"));
        let mut segments = Vec::new();
        for part in s.split(',') {
            let part = part.trim();
            let (t, v) = match part.split_once(':') {
                Some((t, v)) => (t.trim().parse().map_err(|_| bad())?, v.trim().parse().map_err(|_| bad())?),
                None => (0.0, part.parse().map_err(|_| bad())?),
            };
            segments.push((t, v));
        }
        SpeedProfile::new(segments)
    }
}

/// An attack by one rider: boosted speed until `start + duration`, then a
/// recovery phase below group speed until `end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakaway {
    pub rider: usize,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PelotonParams {
    pub n: usize,
    pub duration: f64,
    pub dt: f64,
    pub speed_profile: SpeedProfile,
    pub separation_gain: f64,
    pub alignment_gain: f64,
    pub cohesion_gain: f64,
    pub neighbor_radius: f64,
    /// Attacks per rider per second.
    pub breakaway_rate: f64,
    pub breakaway_boost: f64,
    pub breakaway_duration: f64,
    /// Length of the column riders start in (m).
    pub initial_length: f64,
    /// Standard deviation of starting speeds around the profile (m/s).
    pub initial_speed_spread: f64,
    pub seed: u64,
}

impl Default for PelotonParams {
    fn default() -> Self {
        Self {
            n: 130,
            duration: 780.0,
            dt: 1.0,
            speed_profile: SpeedProfile::new(vec![(0.0, 11.0), (200.0, 12.5), (420.0, 10.5), (600.0, 13.0)])
                .expect("static profile"),
            separation_gain: 1.0,
            alignment_gain: 0.3,
            cohesion_gain: 0.002,
            neighbor_radius: 50.0,
            breakaway_rate: 0.0005,
            breakaway_boost: 2.0,
            breakaway_duration: 15.0,
            initial_length: 200.0,
            initial_speed_spread: 0.3,
            seed: 1,
        }
    }
}

impl PelotonParams {
    pub fn validate(&self) -> Result<(), MobilityError> {
        let bad = |m: &str| Err(MobilityError::InvalidParams(m.into()));
        if self.n == 0 {
            return bad("n must be positive");
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad("dt must be positive");
        }
        if !(self.duration >= 2.0 * self.dt) || !self.duration.is_finite() {
            return bad("duration must cover at least two steps");
        }
        let nonneg = [
            ("separation_gain", self.separation_gain),
            ("alignment_gain", self.alignment_gain),
            ("cohesion_gain", self.cohesion_gain),
            ("neighbor_radius", self.neighbor_radius),
            ("breakaway_rate", self.breakaway_rate),
            ("breakaway_boost", self.breakaway_boost),
            ("breakaway_duration", self.breakaway_duration),
            ("initial_length", self.initial_length),
            ("initial_speed_spread", self.initial_speed_spread),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(MobilityError::InvalidParams(format!("{name} must be finite and ≥ 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

#[derive(Clone, Copy)]
enum Phase {
    Riding,
    Attack { until: f64 },
    Recovery { until: f64 },
}

#[derive(Clone, Copy)]
struct Rider {
    s: f64,
    d: f64,
    vs: f64,
    vd: f64,
    phase: Phase,
}

fn clamp_accel(a: f64) -> f64 {
    a.clamp(-MAX_ACCEL, MAX_ACCEL)
}

/// Simulates a flocking peloton.
///
/// Per step every rider relaxes towards the profile speed (plus its attack
/// or recovery offset) and feels three flocking accelerations from the
/// riders within `neighbor_radius`: repulsion inside 1.5 m, alignment to
/// the mean neighbour velocity, and attraction to the neighbour centroid.
/// Positions advance by forward Euler; the lateral offset stays within
/// ±5 m.
pub fn simulate_race(params: &PelotonParams) -> Result<RaceTrace, MobilityError> {
    params.validate()?;
    let n = params.n;
    let dt = params.dt;
    let frames = params.frame_count();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let v0 = params.speed_profile.speed_at(0.0);
    let spread = Normal::new(0.0, params.initial_speed_spread)
        .map_err(|e| MobilityError::InvalidParams(e.to_string()))?;
    let mut riders: Vec<Rider> = (0..n)
        .map(|_| Rider {
            s: rng.random_range(0.0..=params.initial_length),
            d: rng.random_range(-(CORRIDOR_HALF_WIDTH - 1.0)..=(CORRIDOR_HALF_WIDTH - 1.0)),
            vs: v0 + spread.sample(&mut rng),
            vd: 0.0,
            phase: Phase::Riding,
        })
        .collect();

    let attack_prob = 1.0 - (-params.breakaway_rate * dt).exp();
    let radius_sq = params.neighbor_radius * params.neighbor_radius;
    let mut out = Vec::with_capacity(frames);
    let mut breakaways = Vec::new();
    let mut accel = vec![(0.0, 0.0); n];

    for f in 0..frames {
        let time = f as f64 * dt;
        let pos = riders.iter().map(|r| Position::new(r.s, r.d)).collect();
        out.push(RiderPositions::new(time, pos).map_err(|e| MobilityError::InvalidParams(e.to_string()))?);
        if f + 1 == frames {
            break;
        }

        for (i, rider) in riders.iter_mut().enumerate() {
            match rider.phase {
                Phase::Attack { until } if time >= until => {
                    rider.phase = Phase::Recovery {
                        until: until + RECOVERY_FACTOR * params.breakaway_duration,
                    }
                }
                Phase::Recovery { until } if time >= until => rider.phase = Phase::Riding,
                _ => {}
            }
            if matches!(rider.phase, Phase::Riding) && attack_prob > 0.0 && rng.random_bool(attack_prob) {
                let until = time + params.breakaway_duration;
                rider.phase = Phase::Attack { until };
                breakaways.push(Breakaway {
                    rider: i,
                    start: time,
                    end: until + RECOVERY_FACTOR * params.breakaway_duration,
                });
            }
        }

        let target = params.speed_profile.speed_at(time);
        for i in 0..n {
            let me = riders[i];
            let (mut sep_s, mut sep_d) = (0.0, 0.0);
            let (mut sum_vs, mut sum_vd, mut sum_s, mut sum_d) = (0.0, 0.0, 0.0, 0.0);
            let mut count = 0usize;
            for (j, other) in riders.iter().enumerate() {
                if j == i {
                    continue;
                }
                let ds = me.s - other.s;
                let dd = me.d - other.d;
                let dist_sq = ds * ds + dd * dd;
                if dist_sq > radius_sq {
                    continue;
                }
                count += 1;
                sum_vs += other.vs;
                sum_vd += other.vd;
                sum_s += other.s;
                sum_d += other.d;
                let dist = dist_sq.sqrt();
                if dist < SEPARATION_DISTANCE {
                    let push = params.separation_gain * (SEPARATION_DISTANCE - dist) / SEPARATION_DISTANCE;
                    if dist > 1e-9 {
                        sep_s += push * ds / dist;
                        sep_d += push * dd / dist;
                    } else if i < j {
                        sep_s += push;
                    } else {
                        sep_s -= push;
                    }
                }
            }
            let (mut align_s, mut align_d, mut coh_s, mut coh_d) = (0.0, 0.0, 0.0, 0.0);
            if count > 0 {
                let c = count as f64;
                align_s = params.alignment_gain * (sum_vs / c - me.vs);
                align_d = params.alignment_gain * (sum_vd / c - me.vd);
                coh_s = params.cohesion_gain * (sum_s / c - me.s);
                coh_d = params.cohesion_gain * (sum_d / c - me.d);
            }
            let offset = match me.phase {
                Phase::Riding => 0.0,
                Phase::Attack { .. } => params.breakaway_boost,
                Phase::Recovery { .. } => -params.breakaway_boost / RECOVERY_FACTOR,
            };
            let track = SPEED_TRACKING * (target + offset - me.vs);
            accel[i] = (
                track + clamp_accel(sep_s) + clamp_accel(align_s) + clamp_accel(coh_s),
                -LATERAL_DAMPING * me.vd + clamp_accel(sep_d) + clamp_accel(align_d) + clamp_accel(coh_d),
            );
        }

        for (rider, &(a_s, a_d)) in riders.iter_mut().zip(&accel) {
            rider.s += rider.vs * dt;
            rider.d += rider.vd * dt;
            if rider.d.abs() > CORRIDOR_HALF_WIDTH {
                rider.d = rider.d.clamp(-CORRIDOR_HALF_WIDTH, CORRIDOR_HALF_WIDTH);
                rider.vd = 0.0;
            }
            rider.vs += a_s * dt;
            rider.vd += a_d * dt;
        }
    }

    Ok(RaceTrace {
        dt,
        rider_ids: (0..n as u64).collect(),
        frames: out,
        breakaways,
    })
}
