use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use peloton_cs::experiment::{
    self, compare_velocities, load_trace, parse_override, ConfigError, ExperimentConfig, ExperimentError, Scenario,
};
use peloton_cs::metrics::summarize;
use peloton_cs::mobility::read_velocity_csv;

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "peloton-cs", version, about = "Compressive velocity collection in a simulated peloton")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the race trace (positions.csv, velocities.csv)
    Simulate(RunArgs),
    /// Random ±1 measurement matrices, one report per k
    Matrix(RunArgs),
    /// Multi-round broadcast collection under packet loss
    Routing(RunArgs),
    /// Lost-entry recovery of a DCT-sparse signal
    DctDemo(RunArgs),
    /// Per-timestep stress between two velocity CSVs
    Stress {
        truth: PathBuf,
        estimate: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// key=value config file; a previous report works too
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one config key (repeatable)
    #[arg(long = "set", value_name = "K=V")]
    overrides: Vec<String>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

enum Failure {
    Config(String),
    Numerical(String),
    Io(String),
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else if e.is_io() {
            Failure::Io(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn load_config(args: &RunArgs, scenario: Option<Scenario>) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
                path: path.clone(),
                source,
            })?;
            ExperimentConfig::from_text(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = scenario {
        cfg.scenario = s;
    }
    for o in &args.overrides {
        let (k, v) = parse_override(o)?;
        cfg.set(&k, &v)?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = load_config(&args, None)?;
            let trace = load_trace(&cfg)?;
            for p in experiment::write_simulation(&cfg.out, &trace)? {
                println!("{}", p.display());
            }
        }
        Command::Matrix(args) => {
            let cfg = load_config(&args, Some(Scenario::Matrix))?;
            for output in experiment::run_matrix(&cfg)? {
                report(&cfg.out, &output)?;
            }
        }
        Command::Routing(args) => {
            let cfg = load_config(&args, Some(Scenario::Routing))?;
            let output = experiment::run_routing(&cfg, &mut |_, _| {})?;
            report(&cfg.out, &output)?;
        }
        Command::DctDemo(args) => {
            let cfg = load_config(&args, Some(Scenario::DctDemo))?;
            let trials = experiment::run_dct_demo(&cfg)?;
            for t in &trials {
                println!(
                    "seed {}: zero-fill stress {:.3e}{}, column removal stress {:.3e}{}",
                    t.seed,
                    t.stress_zero_fill,
                    if t.recovered_zero_fill() { " (recovered)" } else { " (not recovered)" },
                    t.stress_column_removal,
                    if t.recovered_column_removal() { " (recovered)" } else { " (not recovered)" },
                );
            }
            println!("{}", experiment::write_dct(&cfg.out, &cfg, &trials)?.display());
        }
        Command::Stress { truth, estimate } => {
            let read = |p: &Path| -> Result<_, Failure> {
                let f = File::open(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
                read_velocity_csv(BufReader::new(f)).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))
            };
            let rows = compare_velocities(&read(&truth)?, &read(&estimate)?)?;
            println!("time_s,stress");
            for (t, s) in &rows {
                println!("{t},{s}");
            }
            let mean = rows.iter().map(|(_, s)| s).sum::<f64>() / rows.len() as f64;
            println!("# mean_stress={mean}");
        }
    }
    Ok(())
}

fn report(dir: &Path, output: &experiment::RunOutput) -> Result<(), Failure> {
    let paths = experiment::write_run(dir, output)?;
    let s = summarize(&output.reports).map_err(|e| Failure::Numerical(e.to_string()))?;
    println!(
        "{}: mean stress {:.4e}, max {:.4e} at t={} s, determined {:.1}%, min rows {} -> {}",
        output.name,
        s.mean_stress,
        s.max_stress,
        s.max_stress_time,
        100.0 * s.determined_fraction,
        s.min_rows,
        paths[0].display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            log::error!("configuration error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numerical(m)) => {
            log::error!("numerical error: {m}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(Failure::Io(m)) => {
            log::error!("{m}");
            ExitCode::from(EXIT_IO)
        }
    }
}
