//! Acceptance checks, one PASS/FAIL line each. Run with
//! `cargo test -p peloton-cs --test acceptance`.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use peloton_cs::experiment::{self, ExperimentConfig, Scenario};
use peloton_cs::graph::{knn_graph, Position, RiderPositions};
use peloton_cs::lp::{solve_lp, LpStatus, DEFAULT_FEAS_TOL};
use peloton_cs::metrics::{stress, summarize};
use peloton_cs::protocol::{run_rounds, Cap, MixPlan, SessionParams};
use peloton_cs::radio::Reachability;
use peloton_cs::sparsity::{build_pairwise_l1, decode_solution, Measurement};
use rand::Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lp_oracle() -> Outcome {
    let mut rng = common::seeded(2024);
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let problem = common::random_feasible_lp(&mut rng);
        let oracle = common::brute_force_lp(&problem).ok_or(format!("instance {i}: oracle found no vertex"))?;
        let sol = solve_lp(&problem, DEFAULT_FEAS_TOL).map_err(|e| format!("instance {i}: {e}"))?;
        check(sol.status == LpStatus::Optimal, || format!("instance {i}: {:?}", sol.status))?;
        worst = worst.max((sol.objective_value - oracle).abs());
    }
    check(worst <= 1e-6, || format!("max objective error {worst:e}"))?;
    Ok(format!("200 LPs, max objective error {worst:.1e}"))
}

fn exact_recovery() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let mut rng = common::seeded(9000 + seed);
        // 1–3 groups of riders far apart on the road
        let groups = 1 + (seed % 3) as usize;
        let mut pos = Vec::new();
        for g in 0..groups {
            for _ in 0..rng.random_range(10..=20) {
                pos.push(Position::new(2000.0 * g as f64 + rng.random_range(0.0..40.0), rng.random_range(-5.0..5.0)));
            }
        }
        let n = pos.len();
        let graph = knn_graph(&RiderPositions::new(0.0, pos).unwrap(), 5).map_err(|e| e.to_string())?;
        let comp = graph.components();
        let count = graph.component_count();
        let level: Vec<f64> = (0..count).map(|_| rng.random_range(8.0..14.0)).collect();
        let x: Vec<f64> = comp.iter().map(|&c| level[c]).collect();
        let k = count + rng.random_range(0..4usize);
        let a = common::identifying_pm1_matrix(&mut rng, k, &comp, count);
        let meas = Measurement::new(a.clone(), a.matvec(&x).unwrap()).unwrap();
        let problem = build_pairwise_l1(&meas, graph.edges()).map_err(|e| e.to_string())?;
        let sol = solve_lp(&problem, DEFAULT_FEAS_TOL).map_err(|e| format!("seed {seed}: {e}"))?;
        let est = decode_solution(&sol, n).map_err(|e| format!("seed {seed}: {e}"))?;
        let s = stress(&x, &est).unwrap();
        check(s <= 1e-10, || format!("seed {seed}: n={n}, {count} components, stress {s:e}"))?;
        worst = worst.max(s);
    }
    Ok(format!("50 instances, max stress {worst:.1e}"))
}

fn product_identity() -> Outcome {
    let (n, rounds, seed, timestep) = (10usize, 4usize, 31u64, 7u64);
    let x: Vec<f64> = (0..n).map(|i| 9.5 + 0.25 * i as f64).collect();
    let params = SessionParams {
        cap: Cap::Unlimited,
        seed,
        timestep,
    };
    // every rider and the sink (id n) hear every broadcast
    let mut everyone = |round: usize| Reachability {
        round,
        delivered: (0..n).flat_map(|s| (0..=n).filter(move |&r| r != s).map(move |r| (s, r))).collect(),
    };
    let mut last_round = Vec::new();
    let out = run_rounds(&x, rounds, &mut everyone, &params, &mut |m| {
        if m.round == rounds {
            last_round.push(m.coeff_row.clone());
        }
    })
    .map_err(|e| e.to_string())?;
    // Π A^r for r = 2..=L, built from the mixing plans directly
    let mut product: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
    for round in 2..=rounds {
        let a: Vec<Vec<i64>> = (0..n)
            .map(|i| {
                let plan = MixPlan::new(seed, timestep, i);
                (0..n).map(|j| plan.coeff(round, j)).collect()
            })
            .collect();
        product = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * product[k][j]).sum()).collect())
            .collect();
    }
    check(out.final_rows == product, || "final coefficient rows differ from the product".into())?;
    check(last_round == product, || "broadcast round-4 rows differ from the product".into())?;
    Ok(format!("n={n}, L={rounds}: {n} rows equal Π A^r"))
}

fn routing_config(loss_p: f64, steps: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        scenario: Scenario::Routing,
        steps: Some(steps),
        ..ExperimentConfig::default()
    };
    cfg.radio.loss_p = loss_p;
    cfg
}

fn aggregate_consistency_and_payload() -> (Outcome, Outcome) {
    let cfg = routing_config(0.5, 100);
    let n = cfg.peloton.n;
    let expected_bits = cfg.cap.payload_bits(n);
    let (mut messages, mut worst, mut bad_payload) = (0usize, 0.0f64, 0usize);
    let run = experiment::run_routing(&cfg, &mut |m, x| {
        let dot: f64 = m.coeff_row.iter().zip(x).map(|(&b, &v)| b as f64 * v).sum();
        worst = worst.max((dot - m.aggregate).abs());
        if m.payload_bits != expected_bits {
            bad_payload += 1;
        }
        messages += 1;
    });
    if let Err(e) = run {
        return (Err(e.to_string()), Err(e.to_string()));
    }
    let consistency = if worst <= 1e-9 {
        Ok(format!("{messages} messages over 100 steps, max |aggregate − b·X| {worst:.1e}"))
    } else {
        Err(format!("max |aggregate − b·X| {worst:e}"))
    };
    let payload = if bad_payload == 0 && messages > 0 {
        Ok(format!("{messages} messages, all {expected_bits} bits = {n}·ceil(log2 32) + 64"))
    } else {
        Err(format!("{bad_payload} of {messages} messages off {expected_bits} bits"))
    };
    (consistency, payload)
}

fn experiment_one() -> Outcome {
    let cfg = ExperimentConfig {
        scenario: Scenario::Matrix,
        steps: Some(200),
        ..ExperimentConfig::default()
    };
    let outputs = experiment::run_matrix(&cfg).map_err(|e| e.to_string())?;
    let mut means = Vec::new();
    for o in &outputs {
        check(o.reports.len() == 200, || format!("{}: {} steps", o.name, o.reports.len()))?;
        means.push(summarize(&o.reports).map_err(|e| e.to_string())?.mean_stress);
    }
    let [m20, m60, m90] = means[..] else {
        return Err(format!("expected three k values, got {}", means.len()));
    };
    check(m60 < 0.01, || format!("k=60 mean stress {m60:e}"))?;
    check(m20 >= m60 && m60 >= m90, || format!("ordering broken: {m20:e}, {m60:e}, {m90:e}"))?;
    Ok(format!("mean stress k=20 {m20:.2e}, k=60 {m60:.2e}, k=90 {m90:.2e}"))
}

fn experiment_two() -> Outcome {
    let lossy = experiment::run_routing(&routing_config(0.5, 200), &mut |_, _| {}).map_err(|e| e.to_string())?;
    let s = summarize(&lossy.reports).map_err(|e| e.to_string())?;
    check(s.mean_stress < 0.01, || format!("loss 0.5 mean stress {:e}", s.mean_stress))?;
    let min_rounds = lossy.reports.iter().map(|r| r.rounds).min().unwrap_or(0);
    check(min_rounds >= 3, || format!("only {min_rounds} rounds in some step"))?;
    let clean = experiment::run_routing(&routing_config(0.0, 200), &mut |_, _| {}).map_err(|e| e.to_string())?;
    for r in &clean.reports {
        check(r.method == "determined" && r.stress <= 1e-9, || {
            format!("loss 0 at t={}: {} with stress {:e}", r.time, r.method, r.stress)
        })?;
    }
    let worst_clean = clean.reports.iter().map(|r| r.stress).fold(0.0, f64::max);
    Ok(format!(
        "loss 0.5 mean stress {:.2e} (determined {:.0}%); loss 0: {} steps determined, max stress {worst_clean:.1e}",
        s.mean_stress,
        100.0 * s.determined_fraction,
        clean.reports.len()
    ))
}

fn dct_demo() -> Outcome {
    let mut cfg = ExperimentConfig {
        scenario: Scenario::DctDemo,
        ..ExperimentConfig::default()
    };
    cfg.dct.trials = 20;
    let trials = experiment::run_dct_demo(&cfg).map_err(|e| e.to_string())?;
    let wins = trials.iter().filter(|t| t.stress_column_removal < t.stress_zero_fill).count();
    check(wins >= 18, || format!("column removal better in only {wins}/20 seeds"))?;
    Ok(format!("column removal better in {wins}/20 seeds"))
}

fn metric_identities() -> Outcome {
    check(stress(&[3.0, -1.0, 2.0], &[3.0, -1.0, 2.0]).ok() == Some(0.0), || "stress(x, x) ≠ 0".into())?;
    check(stress(&[1.0, 1.0], &[1.0, 0.0]).ok() == Some(0.5), || "stress((1,1),(1,0)) ≠ 0.5".into())?;
    check(stress(&[3.0, 4.0], &[0.0, 0.0]).ok() == Some(1.0), || "stress(x, 0) ≠ 1".into())?;
    let mut rng = common::seeded(99);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(1..50);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-20.0..20.0)).collect();
        let e: Vec<f64> = (0..n).map(|_| rng.random_range(-20.0..20.0)).collect();
        let c = rng.random_range(0.01..100.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let base = stress(&x, &e).unwrap();
        let scaled = stress(
            &x.iter().map(|v| c * v).collect::<Vec<_>>(),
            &e.iter().map(|v| c * v).collect::<Vec<_>>(),
        )
        .unwrap();
        worst = worst.max((scaled - base).abs() / base.max(1.0));
    }
    check(worst <= 1e-12, || format!("scale covariance error {worst:e}"))?;
    Ok(format!("trivial values exact; scale covariance error {worst:.1e} over 1000 draws"))
}

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let matrix = ExperimentConfig {
            scenario: Scenario::Matrix,
            steps: Some(5),
            ..ExperimentConfig::default()
        };
        for o in experiment::run_matrix(&matrix).map_err(|e| e.to_string())? {
            experiment::write_run(dir.path(), &o).map_err(|e| e.to_string())?;
        }
        let routing = experiment::run_routing(&routing_config(0.5, 5), &mut |_, _| {}).map_err(|e| e.to_string())?;
        experiment::write_run(dir.path(), &routing).map_err(|e| e.to_string())?;
        let mut dct = ExperimentConfig {
            scenario: Scenario::DctDemo,
            ..ExperimentConfig::default()
        };
        dct.dct.trials = 3;
        let trials = experiment::run_dct_demo(&dct).map_err(|e| e.to_string())?;
        experiment::write_dct(dir.path(), &dct, &trials).map_err(|e| e.to_string())?;
        let trace = experiment::load_trace(&matrix).map_err(|e| e.to_string())?;
        experiment::write_simulation(dir.path(), &trace).map_err(|e| e.to_string())?;
    }
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    for name in &names {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).map_err(|e| format!("{name:?}: {e}"))?;
        check(a == b, || format!("{name:?} differs between runs"))?;
    }
    Ok(format!("{} report files byte-identical", names.len()))
}

struct Line {
    id: usize,
    name: &'static str,
    limit: Option<Duration>,
}

fn report(line: &Line, outcome: Outcome, elapsed: Duration) -> bool {
    let over = line.limit.is_some_and(|l| elapsed > l);
    let (ok, detail) = match outcome {
        Ok(d) if over => (false, format!("{d}; took longer than {:?}", line.limit.unwrap())),
        Ok(d) => (true, d),
        Err(e) => (false, e),
    };
    println!(
        "{} {:>2} {:<28} {:>8.2}s  {detail}",
        if ok { "PASS" } else { "FAIL" },
        line.id,
        line.name,
        elapsed.as_secs_f64()
    );
    ok
}

fn run(line: Line, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    report(&line, outcome, start.elapsed())
}

fn main() -> ExitCode {
    let secs = |s: u64| Some(Duration::from_secs(s));
    let mut ok = true;
    ok &= run(Line { id: 1, name: "LP oracle", limit: secs(10) }, lp_oracle);
    ok &= run(Line { id: 2, name: "exact recovery", limit: secs(60) }, exact_recovery);
    ok &= run(Line { id: 3, name: "product identity", limit: secs(1) }, product_identity);

    let start = Instant::now();
    let (consistency, payload) = aggregate_consistency_and_payload();
    let elapsed = start.elapsed();
    ok &= report(&Line { id: 4, name: "aggregate consistency", limit: None }, consistency, elapsed);

    ok &= run(Line { id: 5, name: "experiment 1 (matrix)", limit: secs(600) }, experiment_one);
    ok &= run(Line { id: 6, name: "experiment 2 (routing)", limit: secs(1200) }, experiment_two);
    ok &= run(Line { id: 7, name: "DCT demonstration", limit: secs(30) }, dct_demo);
    ok &= report(&Line { id: 8, name: "payload accounting", limit: None }, payload, elapsed);
    ok &= run(Line { id: 9, name: "metric identities", limit: None }, metric_identities);
    ok &= run(Line { id: 10, name: "determinism", limit: None }, determinism);
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
