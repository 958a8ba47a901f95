//! Hyperparameters and experiment configuration.
//!
//! The text format is flat `key = value` lines; `#` starts a comment. Keys
//! follow the usual LCS symbol names:
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `N` | maximum micro-ruleset size | 2000 |
//! | `F0` | fitness threshold for subsumption | 0.99 |
//! | `nu` | fitness exponent (only 1 is supported) | 1 |
//! | `chi` | crossover probability | 0.8 |
//! | `p_mut` | per-variable mutation probability | 0.04 |
//! | `delta` | fraction of mean fitness for deletion | 0.1 |
//! | `theta_GA` | GA interval | 50 |
//! | `theta_del` | experience threshold for deletion | 50 |
//! | `theta_sub` | experience threshold for subsumption | 50 |
//! | `theta_exploit` | experience threshold for inference | 10 |
//! | `tau` | tournament participation fraction | 0.4 |
//! | `P_hash` | Don't Care probability in covering | 0.33 |
//! | `doCorrectSetSubsumption` | | true |
//! | `doGASubsumption` | | true |
//! | `L` | linguistic terms per variable | 5 |
//! | `fitness_mode` | `signed` or `unsigned` | signed |
//! | `experience_mode` | `membership` or `unit` | membership |
//! | `schemes` | comma list of `vote`, `swin`, `ds` | vote,swin,ds |
//! | `epochs` | passes over the training split | 50 |
//! | `runs` | independent seeded runs | 30 |
//! | `base_seed` | seed of run 0; run r uses base_seed + r | 0 |
//! | `train_fraction` | shuffle-split training share | 0.9 |
//! | `record_timing` | write wall-clock times (false writes 0) | true |

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::inference::Scheme;
use crate::linguistic::{LinguisticPartition, DEFAULT_TERMS, MAX_TERMS};
use crate::rules::{ExperienceMode, FitnessMode, UpdateMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub population_size: usize,
    pub f0: f64,
    pub nu: f64,
    pub chi: f64,
    pub p_mut: f64,
    pub delta: f64,
    pub theta_ga: f64,
    pub theta_del: f64,
    pub theta_sub: f64,
    pub theta_exploit: f64,
    pub tau: f64,
    pub p_dont_care: f64,
    pub do_correct_set_subsumption: bool,
    pub do_ga_subsumption: bool,
    pub num_terms: usize,
    pub fitness_mode: FitnessMode,
    pub experience_mode: ExperienceMode,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            population_size: 2000,
            f0: 0.99,
            nu: 1.0,
            chi: 0.8,
            p_mut: 0.04,
            delta: 0.1,
            theta_ga: 50.0,
            theta_del: 50.0,
            theta_sub: 50.0,
            theta_exploit: 10.0,
            tau: 0.4,
            p_dont_care: 0.33,
            do_correct_set_subsumption: true,
            do_ga_subsumption: true,
            num_terms: DEFAULT_TERMS,
            fitness_mode: FitnessMode::Signed,
            experience_mode: ExperienceMode::Membership,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("chi", self.chi),
            ("p_mut", self.p_mut),
            ("tau", self.tau),
            ("P_hash", self.p_dont_care),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} = {p} is not a probability")));
            }
        }
        for (name, v) in [
            ("delta", self.delta),
            ("theta_GA", self.theta_ga),
            ("theta_del", self.theta_del),
            ("theta_sub", self.theta_sub),
            ("theta_exploit", self.theta_exploit),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} = {v} must be a finite value >= 0")));
            }
        }
        if !self.f0.is_finite() {
            return Err(Error::Config("F0 must be finite".into()));
        }
        if self.tau == 0.0 {
            return Err(Error::Config("tau must be positive".into()));
        }
        if self.nu != 1.0 {
            return Err(Error::Config(format!(
                "nu = {} is not supported; fitness is used linearly (nu = 1)",
                self.nu
            )));
        }
        if self.population_size == 0 {
            return Err(Error::Config("N must be positive".into()));
        }
        if !(2..=MAX_TERMS).contains(&self.num_terms) {
            return Err(Error::Config(format!("L must lie in 2..={MAX_TERMS}")));
        }
        Ok(())
    }

    pub fn partition(&self) -> LinguisticPartition {
        LinguisticPartition::new(self.num_terms).expect("validated partition size")
    }

    pub fn update_mode(&self) -> UpdateMode {
        UpdateMode {
            experience: self.experience_mode,
            fitness: self.fitness_mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub params: Hyperparameters,
    pub schemes: Vec<Scheme>,
    pub epochs: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub train_fraction: f64,
    pub record_timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            params: Hyperparameters::default(),
            schemes: Scheme::ALL.to_vec(),
            epochs: 50,
            runs: 30,
            base_seed: 0,
            train_fraction: 0.9,
            record_timing: true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Config(format!("{}: {e}", path.as_ref().display())))?;
        Self::parse(&text)
    }

    /// Parse `key = value` lines on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Set one key. Does not re-validate the whole config.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.params;
        match key {
            "N" => p.population_size = parse(key, value)?,
            "F0" => p.f0 = parse(key, value)?,
            "nu" => p.nu = parse(key, value)?,
            "chi" => p.chi = parse(key, value)?,
            "p_mut" => p.p_mut = parse(key, value)?,
            "delta" => p.delta = parse(key, value)?,
            "theta_GA" => p.theta_ga = parse(key, value)?,
            "theta_del" => p.theta_del = parse(key, value)?,
            "theta_sub" => p.theta_sub = parse(key, value)?,
            "theta_exploit" => p.theta_exploit = parse(key, value)?,
            "tau" => p.tau = parse(key, value)?,
            "P_hash" => p.p_dont_care = parse(key, value)?,
            "doCorrectSetSubsumption" => p.do_correct_set_subsumption = parse_bool(key, value)?,
            "doGASubsumption" => p.do_ga_subsumption = parse_bool(key, value)?,
            "L" | "partition_terms" => p.num_terms = parse(key, value)?,
            "fitness_mode" => {
                p.fitness_mode = match value {
                    "signed" => FitnessMode::Signed,
                    "unsigned" => FitnessMode::Unsigned,
                    _ => return Err(Error::Config(format!("fitness_mode: unknown value {value:?}"))),
                }
            }
            "experience_mode" => {
                p.experience_mode = match value {
                    "membership" => ExperienceMode::Membership,
                    "unit" => ExperienceMode::Unit,
                    _ => {
                        return Err(Error::Config(format!(
                            "experience_mode: unknown value {value:?}"
                        )))
                    }
                }
            }
            "schemes" | "scheme" => {
                self.schemes = value
                    .split(',')
                    .map(|s| s.trim().parse())
                    .collect::<Result<Vec<Scheme>>>()?
            }
            "epochs" => self.epochs = parse(key, value)?,
            "runs" => self.runs = parse(key, value)?,
            "base_seed" => self.base_seed = parse(key, value)?,
            "train_fraction" => self.train_fraction = parse(key, value)?,
            "record_timing" => self.record_timing = parse_bool(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.schemes.is_empty() {
            return Err(Error::Config("at least one scheme is required".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction = {} must lie strictly between 0 and 1",
                self.train_fraction
            )));
        }
        Ok(())
    }

    /// Canonical `key = value` rendering; parsing it yields the same config.
    pub fn render(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("N", p.population_size.to_string());
        line("F0", p.f0.to_string());
        line("nu", p.nu.to_string());
        line("chi", p.chi.to_string());
        line("p_mut", p.p_mut.to_string());
        line("delta", p.delta.to_string());
        line("theta_GA", p.theta_ga.to_string());
        line("theta_del", p.theta_del.to_string());
        line("theta_sub", p.theta_sub.to_string());
        line("theta_exploit", p.theta_exploit.to_string());
        line("tau", p.tau.to_string());
        line("P_hash", p.p_dont_care.to_string());
        line("doCorrectSetSubsumption", p.do_correct_set_subsumption.to_string());
        line("doGASubsumption", p.do_ga_subsumption.to_string());
        line("L", p.num_terms.to_string());
        line(
            "fitness_mode",
            match p.fitness_mode {
                FitnessMode::Signed => "signed",
                FitnessMode::Unsigned => "unsigned",
            }
            .into(),
        );
        line(
            "experience_mode",
            match p.experience_mode {
                ExperienceMode::Membership => "membership",
                ExperienceMode::Unit => "unit",
            }
            .into(),
        );
        line(
            "schemes",
            self.schemes.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(","),
        );
        line("epochs", self.epochs.to_string());
        line("runs", self.runs.to_string());
        line("base_seed", self.base_seed.to_string());
        line("train_fraction", self.train_fraction.to_string());
        line("record_timing", self.record_timing.to_string());
        out
    }

    /// SHA-256 of the canonical rendering, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.render().as_bytes()))
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got {value:?}"))),
    }
}
