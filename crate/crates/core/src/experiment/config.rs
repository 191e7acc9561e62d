//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. A file containing any `#!`
//! lines (such as a report written by a previous run) is read from those
//! lines only, which lets a report be replayed as its own config.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::DEFAULT_K_NEIGHBORS;
use crate::mobility::{PelotonParams, SpeedProfile};
use crate::protocol::{Cap, DEFAULT_CAP};
use crate::radio::RadioParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected key=value, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("{key}: invalid value {value:?}: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Matrix,
    Routing,
    DctDemo,
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "matrix" => Ok(Scenario::Matrix),
            "routing" => Ok(Scenario::Routing),
            "dct-demo" => Ok(Scenario::DctDemo),
            _ => Err("expected matrix, routing or dct-demo".into()),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Matrix => "matrix",
            Scenario::Routing => "routing",
            Scenario::DctDemo => "dct-demo",
        })
    }
}

/// Where the sink takes rider positions for its neighbour graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphSource {
    /// Integrated from its own earlier velocity estimates, starting from
    /// the true first frame.
    Reconstructed,
    /// The true previous-frame positions.
    Truth,
}

impl FromStr for GraphSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "reconstructed" => Ok(GraphSource::Reconstructed),
            "truth" => Ok(GraphSource::Truth),
            _ => Err("expected reconstructed or truth".into()),
        }
    }
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphSource::Reconstructed => "reconstructed",
            GraphSource::Truth => "truth",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DctParams {
    pub n: usize,
    pub sparsity: usize,
    pub losses: usize,
    pub k: usize,
    pub trials: usize,
}

impl Default for DctParams {
    fn default() -> Self {
        Self {
            n: 100,
            sparsity: 10,
            losses: 10,
            k: 40,
            trials: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub peloton: PelotonParams,
    /// Position CSV to replay instead of simulating (sampled every `dt`).
    pub trace: Option<PathBuf>,
    pub radio: RadioParams,
    pub k_measurements: Vec<usize>,
    pub k_neighbors: usize,
    pub cap: Cap,
    /// Limit on reconstructed timesteps; all frames when `None`.
    pub steps: Option<usize>,
    pub graph_source: GraphSource,
    pub dct: DctParams,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Routing,
            seed: 1,
            peloton: PelotonParams::default(),
            trace: None,
            radio: RadioParams::default(),
            k_measurements: vec![20, 60, 90],
            k_neighbors: DEFAULT_K_NEIGHBORS,
            cap: Cap::Limit(DEFAULT_CAP),
            steps: None,
            graph_source: GraphSource::Reconstructed,
            dct: DctParams::default(),
            out: PathBuf::from("out"),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::InvalidValue {
        key: key.into(),
        value: value.into(),
        reason: e.to_string(),
    })
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Splits config text into `(key, value)` pairs in file order.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let embedded = text.lines().any(|l| l.trim_start().starts_with("#!"));
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let trimmed = raw.trim();
        let body = if embedded {
            match trimmed.strip_prefix("#!") {
                Some(rest) => rest.trim(),
                None => continue,
            }
        } else {
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            trimmed
        };
        let Some((key, value)) = body.split_once('=') else {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                text: raw.to_string(),
            });
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                text: raw.to_string(),
            });
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// Parses a `--set` style `key=value` override.
pub fn parse_override(text: &str) -> Result<(String, String), ConfigError> {
    match text.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(ConfigError::Syntax {
            line: 0,
            text: text.to_string(),
        }),
    }
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (k, v) in parse_config_text(text)? {
            cfg.set(&k, &v)?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let p = &mut self.peloton;
        match key {
            "scenario" => self.scenario = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "steps" => {
                self.steps = match value {
                    "all" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "trace" => {
                self.trace = match value {
                    "" | "none" => None,
                    v => Some(PathBuf::from(v)),
                }
            }
            "n" => p.n = parse(key, value)?,
            "duration" => p.duration = parse(key, value)?,
            "dt" => p.dt = parse(key, value)?,
            "speed_profile" => p.speed_profile = parse::<SpeedProfile>(key, value)?,
            "separation_gain" => p.separation_gain = parse(key, value)?,
            "alignment_gain" => p.alignment_gain = parse(key, value)?,
            "cohesion_gain" => p.cohesion_gain = parse(key, value)?,
            "neighbor_radius" => p.neighbor_radius = parse(key, value)?,
            "breakaway_rate" => p.breakaway_rate = parse(key, value)?,
            "breakaway_boost" => p.breakaway_boost = parse(key, value)?,
            "breakaway_duration" => p.breakaway_duration = parse(key, value)?,
            "initial_length" => p.initial_length = parse(key, value)?,
            "initial_speed_spread" => p.initial_speed_spread = parse(key, value)?,
            "range_m" => self.radio.range_m = parse(key, value)?,
            "loss_p" => self.radio.loss_p = parse(key, value)?,
            "k_measurements" => {
                self.k_measurements = value
                    .split(',')
                    .map(|k| parse(key, k.trim()))
                    .collect::<Result<_, _>>()?
            }
            "k_neighbors" => self.k_neighbors = parse(key, value)?,
            "cap_m" => {
                self.cap = match value {
                    "none" => Cap::Unlimited,
                    v => Cap::new(parse(key, v)?).map_err(|e| ConfigError::InvalidValue {
                        key: key.into(),
                        value: value.into(),
                        reason: e.to_string(),
                    })?,
                }
            }
            "graph_source" => self.graph_source = parse(key, value)?,
            "dct_n" => self.dct.n = parse(key, value)?,
            "dct_sparsity" => self.dct.sparsity = parse(key, value)?,
            "dct_losses" => self.dct.losses = parse(key, value)?,
            "dct_k" => self.dct.k = parse(key, value)?,
            "dct_trials" => self.dct.trials = parse(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Every setting that influences results, in a fixed order. `out` is
    /// left out so identical runs produce identical reports wherever they
    /// are written.
    pub fn resolved(&self) -> Vec<(String, String)> {
        let p = &self.peloton;
        let mut kv: Vec<(&str, String)> = vec![
            ("scenario", self.scenario.to_string()),
            ("seed", self.seed.to_string()),
            ("steps", self.steps.map_or("all".into(), |s| s.to_string())),
        ];
        match &self.trace {
            Some(path) => kv.extend([("trace", path.display().to_string()), ("dt", p.dt.to_string())]),
            None => kv.extend([
                ("n", p.n.to_string()),
                ("duration", p.duration.to_string()),
                ("dt", p.dt.to_string()),
                ("speed_profile", p.speed_profile.to_string()),
                ("separation_gain", p.separation_gain.to_string()),
                ("alignment_gain", p.alignment_gain.to_string()),
                ("cohesion_gain", p.cohesion_gain.to_string()),
                ("neighbor_radius", p.neighbor_radius.to_string()),
                ("breakaway_rate", p.breakaway_rate.to_string()),
                ("breakaway_boost", p.breakaway_boost.to_string()),
                ("breakaway_duration", p.breakaway_duration.to_string()),
                ("initial_length", p.initial_length.to_string()),
                ("initial_speed_spread", p.initial_speed_spread.to_string()),
            ]),
        }
        match self.scenario {
            Scenario::Matrix => kv.extend([
                ("k_measurements", join(&self.k_measurements)),
                ("k_neighbors", self.k_neighbors.to_string()),
                ("graph_source", self.graph_source.to_string()),
            ]),
            Scenario::Routing => kv.extend([
                ("range_m", self.radio.range_m.to_string()),
                ("loss_p", self.radio.loss_p.to_string()),
                (
                    "cap_m",
                    match self.cap {
                        Cap::Limit(m) => m.to_string(),
                        Cap::Unlimited => "none".into(),
                    },
                ),
                ("k_neighbors", self.k_neighbors.to_string()),
                ("graph_source", self.graph_source.to_string()),
            ]),
            Scenario::DctDemo => {
                kv.retain(|(k, _)| ["scenario", "seed"].contains(k));
                kv.extend([
                    ("dct_n", self.dct.n.to_string()),
                    ("dct_sparsity", self.dct.sparsity.to_string()),
                    ("dct_losses", self.dct.losses.to_string()),
                    ("dct_k", self.dct.k.to_string()),
                    ("dct_trials", self.dct.trials.to_string()),
                ])
            }
        }
        kv.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// Checks what the chosen scenario needs before any computation.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.trace.is_none() {
            self.peloton.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        } else if !(self.peloton.dt > 0.0) || !self.peloton.dt.is_finite() {
            return invalid(format!("dt must be positive, got {}", self.peloton.dt));
        }
        if self.steps == Some(0) {
            return invalid("steps must be at least 1".into());
        }
        match self.scenario {
            Scenario::Matrix => {
                if self.k_measurements.is_empty() || self.k_measurements.contains(&0) {
                    return invalid("k_measurements must list positive counts".into());
                }
            }
            Scenario::Routing => {
                let mut radio = self.radio;
                radio.seed = self.seed;
                radio.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
            }
            Scenario::DctDemo => {
                let d = &self.dct;
                if d.n == 0 || d.k == 0 || d.trials == 0 {
                    return invalid("dct_n, dct_k and dct_trials must be positive".into());
                }
                if d.sparsity == 0 || d.sparsity > d.n {
                    return invalid(format!("dct_sparsity must be in 1..={}", d.n));
                }
                if d.losses >= d.n {
                    return invalid(format!("dct_losses must be below dct_n = {}", d.n));
                }
            }
        }
        if self.k_neighbors == 0 {
            return invalid("k_neighbors must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_blanks_and_overrides() {
        let cfg = ExperimentConfig::from_text("# a run\n\nscenario = matrix\nk_measurements = 20, 60\nn=50\n").unwrap();
        assert_eq!(cfg.scenario, Scenario::Matrix);
        assert_eq!(cfg.k_measurements, vec![20, 60]);
        assert_eq!(cfg.peloton.n, 50);
        assert_eq!(parse_override("loss_p=0.5").unwrap(), ("loss_p".into(), "0.5".into()));
        assert!(parse_override("loss_p").is_err());
    }

    #[test]
    fn errors_name_the_problem() {
        assert!(matches!(
            ExperimentConfig::from_text("a\n"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(ExperimentConfig::from_text("colour=red"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(
            ExperimentConfig::from_text("loss_p=lots"),
            Err(ConfigError::InvalidValue { .. })
        ));
        assert!(matches!(ExperimentConfig::from_text("cap_m=1"), Err(ConfigError::InvalidValue { .. })));
        let cfg = ExperimentConfig::from_text("loss_p=1.5").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn resolved_config_round_trips_through_embedded_lines() {
        for scenario in ["matrix", "routing", "dct-demo"] {
            let mut cfg = ExperimentConfig::default();
            cfg.set("scenario", scenario).unwrap();
            cfg.set("speed_profile", "0:10,100:12.5").unwrap();
            cfg.set("cap_m", "none").unwrap();
            cfg.set("steps", "25").unwrap();
            let text: String = cfg
                .resolved()
                .iter()
                .map(|(k, v)| format!("#! {k}={v}\n"))
                .chain(["time_s,stress\n1,0.5\n# summary\n".to_string()])
                .collect();
            let back = ExperimentConfig::from_text(&text).unwrap();
            assert_eq!(back.resolved(), cfg.resolved());
        }
    }
}
