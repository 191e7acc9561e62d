//! End-to-end runs: random-matrix aggregation, multi-round routing, and the
//! lost-data DCT demonstration.

mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Uniform};
use thiserror::Error;

pub use config::{parse_config_text, parse_override, ConfigError, DctParams, ExperimentConfig, GraphSource, Scenario};

use crate::graph::{knn_graph, GraphError, RiderPositions};
use crate::keyed;
use crate::lp::{dct_matrix, DenseMatrix, LinalgError, DEFAULT_FEAS_TOL};
use crate::metrics::{self, stress, MetricsError, StepReport};
use crate::mobility::{
    ingest_trace, simulate_race, velocities, write_position_csv, write_velocity_csv, MobilityError, RaceTrace,
    VelocityFrame,
};
use crate::protocol::{reconstruct, run_session, solve_measurements, AggregateMessage, ProtocolError, SessionParams};
use crate::sparsity::{recover, CsFormulation, Measurement, SparsityError};

/// Stress below which a demo reconstruction counts as recovered.
pub const RECOVERY_STRESS: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("trace: {0}")]
    Trace(#[from] MobilityError),
    #[error("input mismatch: {0}")]
    Input(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Sparsity(#[from] SparsityError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl ExperimentError {
    /// Bad configuration or input data, as opposed to a failure while
    /// computing.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            ExperimentError::Config(_) | ExperimentError::Trace(_) | ExperimentError::Input(_) | ExperimentError::Graph(_)
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, ExperimentError::Io { .. })
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One report file's worth of results.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub name: String,
    pub config: Vec<(String, String)>,
    pub rider_ids: Vec<u64>,
    pub reports: Vec<StepReport>,
    /// Reconstructed velocities, one frame per report.
    pub estimates: Vec<VelocityFrame>,
}

/// Ground-truth trace from the configured file or the peloton simulator.
pub fn load_trace(cfg: &ExperimentConfig) -> Result<RaceTrace, ExperimentError> {
    match &cfg.trace {
        Some(path) => {
            let file = File::open(path).map_err(|source| ConfigError::Read {
                path: path.clone(),
                source,
            })?;
            Ok(ingest_trace(std::io::BufReader::new(file), cfg.peloton.dt)?)
        }
        None => {
            let mut params = cfg.peloton.clone();
            params.seed = cfg.seed;
            Ok(simulate_race(&params)?)
        }
    }
}

/// Velocity frames to reconstruct, honouring `steps`.
fn frames_to_run(cfg: &ExperimentConfig, trace: &RaceTrace) -> Result<Vec<VelocityFrame>, ExperimentError> {
    let mut v = velocities(trace)?;
    if let Some(steps) = cfg.steps {
        v.truncate(steps);
    }
    if cfg.k_neighbors >= trace.rider_count() {
        return Err(ConfigError::Invalid(format!(
            "k_neighbors = {} needs more than {} riders",
            cfg.k_neighbors,
            trace.rider_count()
        ))
        .into());
    }
    Ok(v)
}

/// Sink-side position bookkeeping for the neighbour graph.
struct PositionTracker {
    source: GraphSource,
    estimate: RiderPositions,
}

impl PositionTracker {
    fn new(source: GraphSource, trace: &RaceTrace) -> Self {
        Self {
            source,
            estimate: trace.frames[0].clone(),
        }
    }

    /// Positions at the start of velocity frame `k`.
    fn positions<'a>(&'a self, trace: &'a RaceTrace, k: usize) -> &'a RiderPositions {
        match self.source {
            GraphSource::Truth => &trace.frames[k],
            GraphSource::Reconstructed => &self.estimate,
        }
    }

    /// Advances the estimate by one frame of reconstructed velocities; the
    /// lateral offsets stay as first observed.
    fn advance(&mut self, v: &[f64], dt: f64, time: f64) {
        self.estimate.time = time;
        for (p, v) in self.estimate.pos.iter_mut().zip(v) {
            p.s += v * dt;
        }
    }
}

/// Experiment 1: each timestep the sink receives `Y = AX` for a fresh
/// `k×n` ±1 matrix `A`. One output per configured `k`; for every `k` the
/// rows of `A` extend those used for smaller `k`.
pub fn run_matrix(cfg: &ExperimentConfig) -> Result<Vec<RunOutput>, ExperimentError> {
    cfg.validate()?;
    let trace = load_trace(cfg)?;
    let frames = frames_to_run(cfg, &trace)?;
    let n = trace.rider_count();
    let mut outputs = Vec::new();
    for &k in &cfg.k_measurements {
        let mut single = cfg.clone();
        single.k_measurements = vec![k];
        let mut tracker = PositionTracker::new(cfg.graph_source, &trace);
        let mut reports = Vec::with_capacity(frames.len());
        let mut estimates = Vec::with_capacity(frames.len());
        for (t, frame) in frames.iter().enumerate() {
            let graph = knn_graph(tracker.positions(&trace, t), cfg.k_neighbors)?;
            let a = measurement_matrix(cfg.seed, t as u64, k, n);
            let y = a.matvec(&frame.x)?;
            let rec = solve_measurements(&a, &y, &graph)?;
            reports.push(StepReport {
                time: frame.time,
                stress: stress(&frame.x, &rec.x)?,
                method: rec.method.to_string(),
                rows: k,
                rank: rec.rank,
                rounds: 0,
                uncoverable: 0,
                mean_payload_bits: 0.0,
            });
            tracker.advance(&rec.x, trace.dt, frame.time);
            estimates.push(VelocityFrame {
                time: frame.time,
                x: rec.x,
            });
        }
        outputs.push(RunOutput {
            name: format!("matrix_k{k}"),
            config: single.resolved(),
            rider_ids: trace.rider_ids.clone(),
            reports,
            estimates,
        });
    }
    Ok(outputs)
}

/// Rows drawn in sequence from a stream keyed by `(seed, timestep)`, so a
/// larger `k` extends a smaller one.
pub fn measurement_matrix(seed: u64, timestep: u64, k: usize, n: usize) -> DenseMatrix {
    let mut rng = keyed::rng(&[keyed::domain::MEASUREMENT, seed, timestep]);
    let entries = (0..k * n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    DenseMatrix::from_row_major(k, n, entries).expect("k*n entries")
}

/// Experiment 2: full multi-round collection every timestep. `observer`
/// sees every broadcast message, with the true readings of its timestep.
pub fn run_routing(
    cfg: &ExperimentConfig,
    observer: &mut dyn FnMut(&AggregateMessage, &[f64]),
) -> Result<RunOutput, ExperimentError> {
    cfg.validate()?;
    let trace = load_trace(cfg)?;
    let frames = frames_to_run(cfg, &trace)?;
    let mut radio = cfg.radio;
    radio.seed = cfg.seed;
    let mut tracker = PositionTracker::new(cfg.graph_source, &trace);
    let mut reports = Vec::with_capacity(frames.len());
    let mut estimates = Vec::with_capacity(frames.len());
    for (t, frame) in frames.iter().enumerate() {
        let params = SessionParams {
            cap: cfg.cap,
            seed: cfg.seed,
            timestep: t as u64,
        };
        // radios live in the present; the sink's graph uses the past
        let here = &trace.frames[t + 1];
        let outcome = run_session(&frame.x, here, &radio, &params, &mut |m| observer(m, &frame.x))?;
        let graph = knn_graph(tracker.positions(&trace, t), cfg.k_neighbors)?;
        let rec = reconstruct(&outcome.system, &graph)?;
        reports.push(StepReport {
            time: frame.time,
            stress: stress(&frame.x, &rec.x)?,
            method: rec.method.to_string(),
            rows: outcome.system.len(),
            rank: rec.rank,
            rounds: outcome.rounds,
            uncoverable: outcome.uncoverable.len(),
            mean_payload_bits: outcome.mean_payload_bits,
        });
        tracker.advance(&rec.x, trace.dt, frame.time);
        estimates.push(VelocityFrame {
            time: frame.time,
            x: rec.x,
        });
    }
    Ok(RunOutput {
        name: "routing".to_string(),
        config: cfg.resolved(),
        rider_ids: trace.rider_ids.clone(),
        reports,
        estimates,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DctTrial {
    pub seed: u64,
    /// Lost entries replaced by zero, full-length DCT.
    pub stress_zero_fill: f64,
    /// Lost entries dropped from the problem; sparse coefficients fitted
    /// through the received rows of the inverse DCT.
    pub stress_column_removal: f64,
}

impl DctTrial {
    pub fn recovered_zero_fill(&self) -> bool {
        self.stress_zero_fill < RECOVERY_STRESS
    }

    pub fn recovered_column_removal(&self) -> bool {
        self.stress_column_removal < RECOVERY_STRESS
    }
}

/// A DCT-sparse signal with lost entries, reconstructed by zero-filling
/// and by column removal. Both are scored on the received entries.
pub fn dct_trial(params: &DctParams, seed: u64) -> Result<DctTrial, ExperimentError> {
    let n = params.n;
    let mut rng = keyed::rng(&[keyed::domain::DCT_DEMO, seed]);
    let phi = dct_matrix(n)?;
    let mut coeffs = vec![0.0; n];
    let magnitude = Uniform::new(1.0, 2.0).expect("valid range");
    for i in index::sample(&mut rng, n, params.sparsity) {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        coeffs[i] = sign * magnitude.sample(&mut rng);
    }
    // orthonormal: X = φᵀ c
    let x = phi.transpose().matvec(&coeffs)?;
    let mut lost: Vec<usize> = index::sample(&mut rng, n, params.losses).into_vec();
    lost.sort_unstable();
    let received: Vec<usize> = (0..n).filter(|i| lost.binary_search(i).is_err()).collect();
    let x_received: Vec<f64> = received.iter().map(|&i| x[i]).collect();
    let a = DenseMatrix::from_row_major(
        params.k,
        n,
        (0..params.k * n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect(),
    )?;

    let mut zero_filled = x.clone();
    for &i in &lost {
        zero_filled[i] = 0.0;
    }
    let y = a.matvec(&zero_filled)?;

    let full = Measurement::new(a, y.clone())?;
    let est_a = recover(&full, &CsFormulation::BasisL1(phi.clone()), DEFAULT_FEAS_TOL)?;
    let est_a_received: Vec<f64> = received.iter().map(|&i| est_a[i]).collect();

    // the received entries are X' = Ψ C with Ψ the received rows of φ⁻¹ =
    // φᵀ, so the sink looks for the sparsest C with Y = A'ΨC
    let reduced = full.retain_columns(&received);
    let psi = phi.transpose().select_rows(&received);
    let in_coeffs = Measurement::new(reduced.matrix().matmul(&psi)?, y)?;
    let c = recover(&in_coeffs, &CsFormulation::BasisL1(DenseMatrix::identity(n)), DEFAULT_FEAS_TOL)?;
    let est_b = psi.matvec(&c)?;

    Ok(DctTrial {
        seed,
        stress_zero_fill: stress(&x_received, &est_a_received)?,
        stress_column_removal: stress(&x_received, &est_b)?,
    })
}

pub fn run_dct_demo(cfg: &ExperimentConfig) -> Result<Vec<DctTrial>, ExperimentError> {
    cfg.validate()?;
    (0..cfg.dct.trials as u64).map(|t| dct_trial(&cfg.dct, cfg.seed + t)).collect()
}

pub const DCT_HEADER: &str = "seed,stress_zero_fill,stress_column_removal,recovered_zero_fill,recovered_column_removal";

pub fn write_dct_report<W: Write>(
    mut out: W,
    config: &[(String, String)],
    trials: &[DctTrial],
) -> std::io::Result<()> {
    for (k, v) in config {
        writeln!(out, "#! {k}={v}")?;
    }
    writeln!(out, "{DCT_HEADER}")?;
    for t in trials {
        writeln!(
            out,
            "{},{},{},{},{}",
            t.seed,
            t.stress_zero_fill,
            t.stress_column_removal,
            t.recovered_zero_fill(),
            t.recovered_column_removal()
        )?;
    }
    let better = trials
        .iter()
        .filter(|t| t.stress_column_removal < t.stress_zero_fill)
        .count();
    writeln!(out, "# summary")?;
    writeln!(out, "# trials={}", trials.len())?;
    writeln!(out, "# column_removal_better={better}")?;
    out.flush()
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), ExperimentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(io_err(&path))?;
    Ok((path, BufWriter::new(file)))
}

/// Writes `<name>.csv` (report) and `<name>_velocities.csv` (estimates).
pub fn write_run(dir: &Path, output: &RunOutput) -> Result<Vec<PathBuf>, ExperimentError> {
    let (report_path, w) = create(dir, &format!("{}.csv", output.name))?;
    metrics::write_report(w, &output.config, &output.reports).map_err(|e| match e {
        MetricsError::Io(source) => ExperimentError::Io {
            path: report_path.clone(),
            source,
        },
        other => other.into(),
    })?;
    let (est_path, w) = create(dir, &format!("{}_velocities.csv", output.name))?;
    write_velocity_csv(w, &output.rider_ids, &output.estimates)?;
    Ok(vec![report_path, est_path])
}

pub fn write_dct(dir: &Path, cfg: &ExperimentConfig, trials: &[DctTrial]) -> Result<PathBuf, ExperimentError> {
    let (path, w) = create(dir, "dct_demo.csv")?;
    write_dct_report(w, &cfg.resolved(), trials).map_err(io_err(&path))?;
    Ok(path)
}

/// Writes `positions.csv` and `velocities.csv` for the configured race.
pub fn write_simulation(dir: &Path, trace: &RaceTrace) -> Result<Vec<PathBuf>, ExperimentError> {
    let (pos_path, w) = create(dir, "positions.csv")?;
    write_position_csv(w, trace)?;
    let (vel_path, w) = create(dir, "velocities.csv")?;
    write_velocity_csv(w, &trace.rider_ids, &velocities(trace)?)?;
    Ok(vec![pos_path, vel_path])
}

/// Per-frame stress between two velocity tables over the same riders and
/// times.
pub fn compare_velocities(
    truth: &(Vec<u64>, Vec<VelocityFrame>),
    estimate: &(Vec<u64>, Vec<VelocityFrame>),
) -> Result<Vec<(f64, f64)>, ExperimentError> {
    let (truth_ids, truth_frames) = truth;
    let (est_ids, est_frames) = estimate;
    let order: Vec<usize> = truth_ids
        .iter()
        .map(|id| {
            est_ids
                .iter()
                .position(|e| e == id)
                .ok_or_else(|| ExperimentError::Input(format!("rider {id} missing from the estimate")))
        })
        .collect::<Result<_, _>>()?;
    if est_ids.len() != truth_ids.len() {
        return Err(ExperimentError::Input(format!(
            "estimate has {} riders, truth has {}",
            est_ids.len(),
            truth_ids.len()
        )));
    }
    let mut out = Vec::new();
    for frame in truth_frames {
        let Some(est) = est_frames.iter().find(|e| e.time == frame.time) else {
            continue;
        };
        let aligned: Vec<f64> = order.iter().map(|&j| est.x[j]).collect();
        out.push((frame.time, stress(&frame.x, &aligned)?));
    }
    if out.is_empty() {
        return Err(ExperimentError::Input("no common timestamps".into()));
    }
    Ok(out)
}
