use super::{plan_rounds, step_sensor, AggregateMessage, Cap, LinearSystem, MixPlan, ProtocolError, SensorState};
use crate::graph::RiderPositions;
use crate::keyed;
use crate::radio::{compute_reachability, hop_distance_to_sinks, place_sinks, RadioParams, Reachability};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionParams {
    pub cap: Cap,
    pub seed: u64,
    pub timestep: u64,
}

#[derive(Debug, Clone)]
pub struct SessionOutcome {
    pub system: LinearSystem,
    pub rounds: usize,
    /// Riders with no multi-hop path to a sink.
    pub uncoverable: Vec<usize>,
    /// Each sensor's coefficient row after the last round.
    pub final_rows: Vec<Vec<i64>>,
    pub messages: usize,
    pub mean_payload_bits: f64,
}

/// Runs `rounds` broadcast rounds over readings `x`. `reach(l)` says who
/// hears the round-`l` broadcasts; receivers with id `≥ x.len()` are sinks.
/// `observer` sees every message as it is broadcast.
pub fn run_rounds(
    x: &[f64],
    rounds: usize,
    reach: &mut dyn FnMut(usize) -> Reachability,
    params: &SessionParams,
    observer: &mut dyn FnMut(&AggregateMessage),
) -> Result<SessionOutcome, ProtocolError> {
    let n = x.len();
    let mut system = LinearSystem::new(n);
    let mut states: Vec<SensorState> = (0..n)
        .map(|i| SensorState::new(i, n, x[i], MixPlan::new(params.seed, params.timestep, i)))
        .collect();
    let mut msgs: Vec<AggregateMessage> = states.iter().map(|s| s.message(params.cap)).collect();
    let mut messages = 0usize;
    let mut payload_total = 0u64;
    let mut inboxes: Vec<Vec<usize>> = vec![Vec::new(); n];

    for round in 1..=rounds {
        if round > 1 {
            let mut next_states = Vec::with_capacity(n);
            let mut next_msgs = Vec::with_capacity(n);
            for (i, state) in states.iter().enumerate() {
                let inbox: Vec<&AggregateMessage> = inboxes[i].iter().map(|&s| &msgs[s]).collect();
                let mut rng = keyed::rng(&[
                    keyed::domain::SUBSAMPLE,
                    params.seed,
                    params.timestep,
                    round as u64,
                    i as u64,
                ]);
                let (s, m) = step_sensor(state, &inbox, params.cap, &mut rng)?;
                next_states.push(s);
                next_msgs.push(m);
            }
            states = next_states;
            msgs = next_msgs;
        }
        for m in &msgs {
            observer(m);
            payload_total += m.payload_bits;
        }
        messages += msgs.len();

        let delivered = reach(round);
        let mut rider_inbox = vec![Vec::new(); n];
        let mut heard_by_sinks = Vec::new();
        for &(s, r) in &delivered.delivered {
            if r < n {
                rider_inbox[r].push(s);
            } else {
                heard_by_sinks.push(&msgs[s]);
            }
        }
        system.sink_collect(heard_by_sinks)?;
        inboxes = rider_inbox;
    }

    Ok(SessionOutcome {
        system,
        rounds,
        uncoverable: Vec::new(),
        final_rows: states.into_iter().map(|s| s.coeff_row).collect(),
        messages,
        mean_payload_bits: if messages == 0 {
            0.0
        } else {
            payload_total as f64 / messages as f64
        },
    })
}

/// One collection window: sinks at the group's ends, enough rounds for
/// every reachable rider, lossy links per `radio`.
pub fn run_session(
    x: &[f64],
    positions: &RiderPositions,
    radio: &RadioParams,
    params: &SessionParams,
    observer: &mut dyn FnMut(&AggregateMessage),
) -> Result<SessionOutcome, ProtocolError> {
    if x.len() != positions.len() {
        return Err(ProtocolError::ReadingCount {
            expected: positions.len(),
            found: x.len(),
        });
    }
    let sinks = place_sinks(positions);
    let plan = plan_rounds(&hop_distance_to_sinks(positions, &sinks, radio.range_m));
    let mut reach = |round| compute_reachability(positions, &sinks, radio, params.timestep, round);
    let mut outcome = run_rounds(x, plan.rounds, &mut reach, params, observer)?;
    outcome.uncoverable = plan.uncoverable;
    Ok(outcome)
}
