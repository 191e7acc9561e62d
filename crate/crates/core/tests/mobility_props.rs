use peloton_cs::graph::knn_graph;
use peloton_cs::mobility::{simulate_race, velocities, PelotonParams, RaceTrace};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    sorted[((sorted.len() - 1) as f64 * p).round() as usize]
}

/// Time-averaged 95th − 5th percentile spread of along-road positions.
fn mean_length(trace: &RaceTrace) -> f64 {
    let total: f64 = trace
        .frames
        .iter()
        .map(|f| {
            let mut s: Vec<f64> = f.pos.iter().map(|p| p.s).collect();
            s.sort_by(f64::total_cmp);
            percentile(&s, 0.95) - percentile(&s, 0.05)
        })
        .sum();
    total / trace.frames.len() as f64
}

#[test]
fn race_scale_trace_keeps_neighbours_at_similar_speeds() {
    let trace = simulate_race(&PelotonParams::default()).unwrap();
    assert_eq!(trace.frames.len(), 780);
    let frames = velocities(&trace).unwrap();
    let mut pooled = Vec::new();
    let mut worst_after_start: f64 = 0.0;
    for (t, vf) in frames.iter().enumerate() {
        let g = knn_graph(&trace.frames[t], 10).unwrap();
        let diffs: Vec<f64> = g
            .edges()
            .iter()
            .filter(|&&(i, j)| !trace.in_breakaway(i, vf.time) && !trace.in_breakaway(j, vf.time))
            .map(|&(i, j)| (vf.x[i] - vf.x[j]).abs())
            .collect();
        pooled.extend(&diffs);
        // the first step still carries the random starting speeds
        if t > 0 {
            worst_after_start = worst_after_start.max(median(diffs));
        }
    }
    let overall = median(pooled);
    assert!(overall < 0.5, "median neighbour difference {overall}");
    assert!(worst_after_start < 0.5, "worst per-step median {worst_after_start}");
}

#[test]
fn stronger_cohesion_does_not_lengthen_the_peloton() {
    let (mut loose, mut tight) = (0.0, 0.0);
    for seed in 1..=10u64 {
        let base = PelotonParams {
            n: 60,
            duration: 300.0,
            seed,
            ..PelotonParams::default()
        };
        loose += mean_length(&simulate_race(&base).unwrap());
        let stronger = PelotonParams {
            cohesion_gain: 4.0 * base.cohesion_gain,
            ..base
        };
        tight += mean_length(&simulate_race(&stronger).unwrap());
    }
    assert!(tight <= loose, "cohesion ×4 gave mean length {tight} vs {loose}");
}

#[test]
fn integrating_velocities_reproduces_positions() {
    let trace = simulate_race(&PelotonParams {
        n: 30,
        duration: 200.0,
        dt: 0.5,
        ..PelotonParams::default()
    })
    .unwrap();
    let frames = velocities(&trace).unwrap();
    let mut s: Vec<f64> = trace.frames[0].pos.iter().map(|p| p.s).collect();
    for (k, vf) in frames.iter().enumerate() {
        for (si, v) in s.iter_mut().zip(&vf.x) {
            *si += v * trace.dt;
        }
        for (si, p) in s.iter().zip(&trace.frames[k + 1].pos) {
            assert!((si - p.s).abs() <= 1e-9, "frame {}: {si} vs {}", k + 1, p.s);
        }
    }
}
