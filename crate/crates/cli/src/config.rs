//! Experiment configuration: a flat `key = value` file plus overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rgreedi_core::PartitionStrategy;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Experiment {
    CoverageRatio,
    Exemplar,
    Diversity,
    MatroidEllipse,
    TightInstance,
    BoundSuite,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::CoverageRatio,
        Experiment::Exemplar,
        Experiment::Diversity,
        Experiment::MatroidEllipse,
        Experiment::TightInstance,
        Experiment::BoundSuite,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Experiment::CoverageRatio => "coverage_ratio",
            Experiment::Exemplar => "exemplar",
            Experiment::Diversity => "diversity",
            Experiment::MatroidEllipse => "matroid_ellipse",
            Experiment::TightInstance => "tight_instance",
            Experiment::BoundSuite => "bound_suite",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.tag() == s)
            .ok_or_else(|| CliError::UnknownExperiment(s.to_string()))
    }
}

/// Deterministic partitions compared against the random one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedPartition {
    Block,
    RoundRobin,
}

impl FixedPartition {
    pub fn tag(self) -> &'static str {
        match self {
            FixedPartition::Block => "block",
            FixedPartition::RoundRobin => "round_robin",
        }
    }

    pub fn strategy(self) -> PartitionStrategy {
        match self {
            FixedPartition::Block => PartitionStrategy::Block,
            FixedPartition::RoundRobin => PartitionStrategy::RoundRobin,
        }
    }
}

/// Which value ratios are taken against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceMode {
    /// Exact optimum when enumerable (or known), centralized greedy otherwise.
    Auto,
    Opt,
    Greedy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub k_range: Vec<usize>,
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    pub partition_strategies: Vec<FixedPartition>,
    pub output_dir: PathBuf,
    pub reference: ReferenceMode,
    /// Record wall-clock time in the CSV. Off by default so output files
    /// stay byte-identical across runs.
    pub timing: bool,
    pub plot: bool,
    pub n: usize,
    pub universe: usize,
    pub density: f64,
    pub dim: usize,
    pub instance_seed: u64,
    pub fimi: Option<PathBuf>,
    pub l: usize,
    pub facilities: usize,
    pub modes: usize,
    pub grid: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::CoverageRatio,
            k_range: (1..=5).collect(),
            m: 4,
            trials: 20,
            seed: 0,
            partition_strategies: vec![FixedPartition::Block, FixedPartition::RoundRobin],
            output_dir: PathBuf::from("results"),
            reference: ReferenceMode::Auto,
            timing: false,
            plot: true,
            n: 20,
            universe: 50,
            density: 0.15,
            dim: 16,
            instance_seed: 0,
            fimi: None,
            l: 3,
            facilities: 16,
            modes: 4,
            grid: 30,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| CliError::config(key, format!("cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::config(
            key,
            format!("expected a boolean, got {value:?}"),
        )),
    }
}

/// `3`, `1:10` (inclusive) or `1,2,5`.
pub fn parse_k_range(value: &str) -> Result<Vec<usize>> {
    let key = "k_range";
    if let Some((lo, hi)) = value.split_once(':') {
        let lo: usize = parse_num(key, lo.trim())?;
        let hi: usize = parse_num(key, hi.trim())?;
        if lo > hi {
            return Err(CliError::config(key, format!("empty range {value}")));
        }
        return Ok((lo..=hi).collect());
    }
    value.split(',').map(|t| parse_num(key, t.trim())).collect()
}

impl ExperimentConfig {
    /// Sets one key. Keys use `snake_case`; `-` is accepted in place of `_`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let key = key.as_str();
        let value = value.trim();
        match key {
            "experiment" => self.experiment = value.parse()?,
            "k_range" => self.k_range = parse_k_range(value)?,
            "m" => self.m = parse_num(key, value)?,
            "trials" => self.trials = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "partition_strategies" => {
                self.partition_strategies = value
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(|t| match t {
                        "block" => Ok(FixedPartition::Block),
                        "round_robin" => Ok(FixedPartition::RoundRobin),
                        other => Err(CliError::config(key, format!("unknown strategy {other:?}"))),
                    })
                    .collect::<Result<_>>()?
            }
            "out" | "output_dir" => self.output_dir = PathBuf::from(value),
            "reference" => {
                self.reference = match value {
                    "auto" => ReferenceMode::Auto,
                    "opt" => ReferenceMode::Opt,
                    "greedy" => ReferenceMode::Greedy,
                    other => {
                        return Err(CliError::config(
                            key,
                            format!("unknown reference {other:?}"),
                        ))
                    }
                }
            }
            "timing" => self.timing = parse_bool(key, value)?,
            "plot" => self.plot = parse_bool(key, value)?,
            "n" => self.n = parse_num(key, value)?,
            "universe" => self.universe = parse_num(key, value)?,
            "density" => self.density = parse_num(key, value)?,
            "dim" | "d" => self.dim = parse_num(key, value)?,
            "instance_seed" => self.instance_seed = parse_num(key, value)?,
            "fimi" => self.fimi = (!value.is_empty()).then(|| PathBuf::from(value)),
            "l" => self.l = parse_num(key, value)?,
            "facilities" => self.facilities = parse_num(key, value)?,
            "modes" => self.modes = parse_num(key, value)?,
            "grid" => self.grid = parse_num(key, value)?,
            _ => return Err(CliError::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::config(
                    &format!("line {}", i + 1),
                    format!("expected key = value, got {raw:?}"),
                )
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_range.is_empty() {
            return Err(CliError::config("k_range", "must not be empty"));
        }
        if self.k_range.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::config("k_range", "must be strictly ascending"));
        }
        if self.k_range[0] == 0 {
            return Err(CliError::config("k_range", "k must be at least 1"));
        }
        if self.trials == 0 {
            return Err(CliError::config("trials", "must be at least 1"));
        }
        if self.m == 0 {
            return Err(CliError::config("m", "must be at least 1"));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(CliError::config("density", "must lie in (0, 1]"));
        }
        if self.experiment == Experiment::TightInstance && self.l < 2 {
            return Err(CliError::config("l", "tight instance needs l >= 2"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_text() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(
            "# comment\nexperiment = tight_instance\nk-range = 2:4  # inline\ntrials=7\n\npartition_strategies = round_robin\n",
        )
        .unwrap();
        assert_eq!(cfg.experiment, Experiment::TightInstance);
        assert_eq!(cfg.k_range, vec![2, 3, 4]);
        assert_eq!(cfg.trials, 7);
        assert_eq!(cfg.partition_strategies, vec![FixedPartition::RoundRobin]);
        cfg.validate().unwrap();
    }

    #[test]
    fn k_range_forms() {
        assert_eq!(parse_k_range("3").unwrap(), vec![3]);
        assert_eq!(parse_k_range("1,2,5").unwrap(), vec![1, 2, 5]);
        assert!(parse_k_range("5:1").is_err());
        assert!(parse_k_range("a:3").is_err());
    }

    #[test]
    fn rejects_bad_input() {
        let mut cfg = ExperimentConfig::default();
        assert!(matches!(
            cfg.set("experiment", "nope"),
            Err(CliError::UnknownExperiment(_))
        ));
        assert!(cfg.set("colour", "red").is_err());
        assert!(cfg.apply_text("just words").is_err());
        cfg.k_range = vec![3, 2];
        assert!(cfg.validate().is_err());
        cfg.k_range = vec![1];
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
    }
}
