//! Seeded multi-run experiments: split, train once, evaluate every scheme
//! on both splits, emit one result row per (run, scheme, split).

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::data::{generate_named, load_dataset, shuffle_split, Dataset, SplitPlan};
use crate::error::{Error, Result};
use crate::inference::Scheme;
use crate::learner::train;
use crate::metrics::evaluate;
use crate::rng::{stream_rng, Stream};

pub const RESULT_HEADER: [&str; 12] = [
    "run",
    "seed",
    "dataset",
    "scheme",
    "split",
    "epochs",
    "accuracy",
    "macro_f1",
    "mean_ignorance",
    "macro_rules",
    "micro_rules",
    "runtime_ms",
];

/// Where an experiment gets its data.
#[derive(Debug, Clone)]
pub enum DatasetSource {
    Csv(PathBuf),
    Generator { name: String, count: usize, seed: u64 },
}

impl DatasetSource {
    pub fn load(&self) -> Result<(String, Dataset)> {
        match self {
            DatasetSource::Csv(path) => {
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "dataset".into());
                Ok((name, load_dataset(path)?))
            }
            DatasetSource::Generator { name, count, seed } => {
                Ok((name.to_ascii_lowercase(), generate_named(name, *count, *seed)?))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub run: usize,
    pub seed: u64,
    pub dataset: String,
    pub scheme: Scheme,
    pub split: Split,
    pub epochs: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub mean_ignorance: Option<f64>,
    pub macro_rules: usize,
    pub micro_rules: usize,
    pub runtime_ms: u64,
}

impl ResultRow {
    fn record(&self) -> Vec<String> {
        vec![
            self.run.to_string(),
            self.seed.to_string(),
            self.dataset.clone(),
            self.scheme.to_string(),
            self.split.to_string(),
            self.epochs.to_string(),
            self.accuracy.to_string(),
            self.macro_f1.to_string(),
            self.mean_ignorance.map(|v| v.to_string()).unwrap_or_default(),
            self.macro_rules.to_string(),
            self.micro_rules.to_string(),
            self.runtime_ms.to_string(),
        ]
    }
}

/// One run: split with the run seed, train once, evaluate every scheme on
/// the same population. Each scheme draws ties from its own stream.
pub fn run_once(config: &ExperimentConfig, name: &str, data: &Dataset, run: usize) -> Result<Vec<ResultRow>> {
    let seed = config.base_seed.wrapping_add(run as u64);
    let (train_set, test_set) = shuffle_split(data, SplitPlan::new(config.train_fraction, seed)?)?;
    let started = Instant::now();
    let model = train(&train_set, &config.params, config.epochs, seed)?;
    let train_ms = started.elapsed().as_millis() as u64;
    let mut rows = Vec::with_capacity(2 * config.schemes.len());
    for &scheme in &config.schemes {
        let mut rng = stream_rng(seed, Stream::TieBreak(scheme));
        for (split, set) in [(Split::Train, &train_set), (Split::Test, &test_set)] {
            let started = Instant::now();
            let report = evaluate(&model, set, scheme, config.params.theta_exploit, &mut rng)?;
            let eval_ms = started.elapsed().as_millis() as u64;
            rows.push(ResultRow {
                run,
                seed,
                dataset: name.to_string(),
                scheme,
                split,
                epochs: config.epochs,
                accuracy: report.accuracy,
                macro_f1: report.macro_f1,
                mean_ignorance: report.mean_ignorance,
                macro_rules: report.macro_rules,
                micro_rules: report.micro_rules,
                runtime_ms: if config.record_timing { train_ms + eval_ms } else { 0 },
            });
        }
    }
    Ok(rows)
}

/// All runs of an experiment, executed on up to `workers` threads and
/// returned in run order.
pub fn run_experiment(config: &ExperimentConfig, name: &str, data: &Dataset, workers: usize) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let per_run: Vec<Result<Vec<ResultRow>>> = pool.install(|| {
        (0..config.runs)
            .into_par_iter()
            .map(|run| run_once(config, name, data, run))
            .collect()
    });
    let mut rows = Vec::new();
    for r in per_run {
        rows.extend(r?);
    }
    Ok(rows)
}

pub fn write_results<W: Write>(rows: &[ResultRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| Error::data(format!("csv write failed: {e}"));
    w.write_record(RESULT_HEADER).map_err(err)?;
    for row in rows {
        w.write_record(row.record()).map_err(err)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean and sample standard deviation of `field` over the rows of one
/// scheme and split.
pub fn summarize(rows: &[ResultRow], scheme: Scheme, split: Split, field: impl Fn(&ResultRow) -> f64) -> Option<(f64, f64)> {
    let values: Vec<f64> = rows
        .iter()
        .filter(|r| r.scheme == scheme && r.split == split)
        .map(field)
        .collect();
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Some((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::gen_rmaj;

    fn small_config() -> ExperimentConfig {
        let mut c = ExperimentConfig {
            runs: 1,
            epochs: 2,
            record_timing: false,
            ..ExperimentConfig::default()
        };
        c.params.population_size = 200;
        c
    }

    #[test]
    fn one_run_gives_six_rows_sharing_a_ruleset() {
        let data = gen_rmaj(120, 3);
        let rows = run_experiment(&small_config(), "rmaj", &data, 1).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.macro_rules == rows[0].macro_rules && r.micro_rules == rows[0].micro_rules));
        for r in &rows {
            assert_eq!(r.mean_ignorance.is_some(), r.scheme == Scheme::Ds);
        }
    }

    #[test]
    fn results_are_reproducible() {
        let data = gen_rmaj(120, 3);
        let mut c = small_config();
        c.runs = 2;
        let render = |rows: &[ResultRow]| {
            let mut buf = Vec::new();
            write_results(rows, &mut buf).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = render(&run_experiment(&c, "rmaj", &data, 1).unwrap());
        let b = render(&run_experiment(&c, "rmaj", &data, 2).unwrap());
        assert_eq!(a, b);
        assert!(a.starts_with(&RESULT_HEADER.join(",")));
        assert_eq!(a.lines().count(), 13);
    }

    #[test]
    fn adding_a_scheme_does_not_change_the_others() {
        let data = gen_rmaj(120, 5);
        let mut only_ds = small_config();
        only_ds.schemes = vec![Scheme::Ds];
        let all = run_experiment(&small_config(), "d", &data, 1).unwrap();
        let ds = run_experiment(&only_ds, "d", &data, 1).unwrap();
        let from_all: Vec<_> = all.into_iter().filter(|r| r.scheme == Scheme::Ds).collect();
        assert_eq!(from_all, ds);
    }

    #[test]
    fn summary_statistics() {
        let data = gen_rmaj(60, 1);
        let mut c = small_config();
        c.runs = 3;
        let rows = run_experiment(&c, "d", &data, 1).unwrap();
        let (mean, sd) = summarize(&rows, Scheme::Vote, Split::Test, |r| r.accuracy).unwrap();
        assert!((0.0..=1.0).contains(&mean) && sd >= 0.0);
        assert!(summarize(&[], Scheme::Vote, Split::Test, |r| r.accuracy).is_none());
    }
}
