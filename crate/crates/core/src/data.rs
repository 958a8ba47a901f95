//! Datasets: CSV ingestion, encoding and min-max normalization, seeded
//! shuffle splits, and the binary benchmark generators.
//!
//! CSV files have a header row and the class label in the last column.
//! `?` and the empty string denote a missing value.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

pub const MISSING_TOKENS: [&str; 2] = ["?", ""];

#[derive(Debug, Clone, PartialEq)]
pub enum RawCell {
    Number(f64),
    Text(String),
    Missing,
}

impl RawCell {
    fn parse(s: &str) -> RawCell {
        let s = s.trim();
        if MISSING_TOKENS.contains(&s) {
            RawCell::Missing
        } else {
            match s.parse::<f64>() {
                Ok(v) if v.is_finite() => RawCell::Number(v),
                _ => RawCell::Text(s.to_string()),
            }
        }
    }
}

/// A parsed but not yet encoded CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<RawCell>>,
    pub labels: Vec<String>,
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<RawTable> {
    let path = path.as_ref();
    let file = File::open(path)
        .map_err(|e| Error::data(format!("cannot read {}: {e}", path.display())))?;
    read_csv(file)
}

pub fn read_csv<R: Read>(reader: R) -> Result<RawTable> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = csv
        .headers()
        .map_err(|e| Error::data(format!("unreadable header: {e}")))?
        .clone();
    let width = header.len();
    if width < 2 {
        return Err(Error::data_at("need at least one feature and a class column", Some(1), None));
    }
    let feature_names: Vec<String> = header.iter().take(width - 1).map(|h| h.trim().to_string()).collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (k, record) in csv.records().enumerate() {
        // line 1 is the header
        let line = k + 2;
        let record = record.map_err(|e| Error::data_at(format!("unreadable record: {e}"), Some(line), None))?;
        if record.len() == 1 && record.get(0).is_some_and(|c| c.trim().is_empty()) {
            continue;
        }
        if record.len() != width {
            return Err(Error::data_at(
                format!("expected {width} fields, found {}", record.len()),
                Some(line),
                Some(record.len().min(width) + 1),
            ));
        }
        let label = record[width - 1].trim();
        if MISSING_TOKENS.contains(&label) {
            return Err(Error::data_at("missing class label", Some(line), Some(width)));
        }
        rows.push(record.iter().take(width - 1).map(RawCell::parse).collect());
        labels.push(label.to_string());
    }
    if rows.is_empty() {
        return Err(Error::data("no data rows"));
    }
    Ok(RawTable {
        feature_names,
        rows,
        labels,
    })
}

/// Sort class labels: numerically when every label is a number, otherwise
/// lexicographically.
fn order_labels(mut names: Vec<String>) -> Vec<String> {
    let numeric: Option<Vec<f64>> = names.iter().map(|s| s.parse::<f64>().ok()).collect();
    if numeric.is_some() {
        names.sort_by(|a, b| {
            let (x, y) = (a.parse::<f64>().unwrap(), b.parse::<f64>().unwrap());
            x.partial_cmp(&y).unwrap_or(Ordering::Equal).then_with(|| a.cmp(b))
        });
    } else {
        names.sort();
    }
    names
}

/// Encode categorical columns ordinally by first appearance, then min-max
/// scale every column over its non-missing values. Constant columns become 0.
pub fn encode_and_normalize(raw: &RawTable) -> Result<Dataset> {
    let dim = raw.feature_names.len();
    let m = raw.rows.len();
    let mut columns: Vec<Vec<Option<f64>>> = Vec::with_capacity(dim);
    for j in 0..dim {
        let categorical = raw.rows.iter().any(|r| matches!(r[j], RawCell::Text(_)));
        let mut codes: HashMap<String, usize> = HashMap::new();
        let mut col = Vec::with_capacity(m);
        for row in &raw.rows {
            let v = match &row[j] {
                RawCell::Missing => None,
                cell if categorical => {
                    let key = match cell {
                        RawCell::Number(v) => v.to_string(),
                        RawCell::Text(s) => s.clone(),
                        RawCell::Missing => unreachable!(),
                    };
                    let next = codes.len();
                    Some(*codes.entry(key).or_insert(next) as f64)
                }
                RawCell::Number(v) => Some(*v),
                RawCell::Text(_) => unreachable!(),
            };
            col.push(v);
        }
        let known = col.iter().flatten();
        let lo = known.clone().copied().fold(f64::INFINITY, f64::min);
        let hi = known.copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            return Err(Error::data_at(
                format!("column '{}' has no values", raw.feature_names[j]),
                None,
                Some(j + 1),
            ));
        }
        let span = hi - lo;
        for v in col.iter_mut().flatten() {
            *v = if span > 0.0 { ((*v - lo) / span).clamp(0.0, 1.0) } else { 0.0 };
        }
        columns.push(col);
    }

    let mut distinct: Vec<String> = raw.labels.clone();
    distinct.sort();
    distinct.dedup();
    let class_names = order_labels(distinct);
    let index: HashMap<&str, usize> = class_names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let labels = raw.labels.iter().map(|l| index[l.as_str()]).collect();
    let features = (0..m).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    Dataset::new(features, labels, class_names, raw.feature_names.clone())
}

/// Read, encode and normalize a CSV file in one go.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    encode_and_normalize(&load_csv(path)?)
}

/// Normalized instances with class indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<Option<f64>>>,
    labels: Vec<usize>,
    class_names: Vec<String>,
    feature_names: Vec<String>,
}

impl Dataset {
    pub fn new(
        features: Vec<Vec<Option<f64>>>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if class_names.is_empty() {
            return Err(Error::data("a dataset needs at least one class"));
        }
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                found: labels.len(),
            });
        }
        let dim = feature_names.len();
        for (i, (row, &label)) in features.iter().zip(&labels).enumerate() {
            if row.len() != dim {
                return Err(Error::data_at(
                    format!("expected {dim} features, found {}", row.len()),
                    Some(i + 1),
                    None,
                ));
            }
            if let Some(j) = row.iter().position(|c| c.is_some_and(|v| !(0.0..=1.0).contains(&v))) {
                return Err(Error::data_at("value outside [0, 1]", Some(i + 1), Some(j + 1)));
            }
            if label >= class_names.len() {
                return Err(Error::data_at(format!("class index {label} out of range"), Some(i + 1), None));
            }
        }
        Ok(Dataset {
            features,
            labels,
            class_names,
            feature_names,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.feature_names.len()
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn row(&self, i: usize) -> &[Option<f64>] {
        &self.features[i]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn rows(&self) -> &[Vec<Option<f64>>] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// The instances at `indices`, in that order, with the same class set.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Re-index labels against another class list (for instance a trained
    /// model's). Every class present here must appear in `class_names`.
    pub fn relabel(&self, class_names: &[String]) -> Result<Dataset> {
        let mapping = self
            .class_names
            .iter()
            .map(|c| {
                class_names
                    .iter()
                    .position(|k| k == c)
                    .ok_or_else(|| Error::data(format!("class '{c}' is unknown to the model")))
            })
            .collect::<Result<Vec<usize>>>()?;
        Ok(Dataset {
            features: self.features.clone(),
            labels: self.labels.iter().map(|&l| mapping[l]).collect(),
            class_names: class_names.to_vec(),
            feature_names: self.feature_names.clone(),
        })
    }

    /// Write in the loader's format: header, features, class name last.
    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push("class");
        w.write_record(&header).map_err(csv_error)?;
        for (row, &label) in self.features.iter().zip(&self.labels) {
            let mut record: Vec<String> = row
                .iter()
                .map(|c| c.map_or_else(|| "?".to_string(), |v| v.to_string()))
                .collect();
            record.push(self.class_names[label].clone());
            w.write_record(&record).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::data(format!("csv write failed: {e}"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitPlan {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitPlan {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::Config(format!("train fraction {train_fraction} must lie in (0, 1)")));
        }
        Ok(SplitPlan { train_fraction, seed })
    }

    /// Training instances out of `m`: `floor(f * m)`, kept within `[1, m - 1]`.
    pub fn train_count(&self, m: usize) -> usize {
        let raw = (self.train_fraction * m as f64 + 1e-9).floor() as usize;
        raw.clamp(1, m.saturating_sub(1).max(1))
    }
}

impl Default for SplitPlan {
    fn default() -> Self {
        SplitPlan {
            train_fraction: 0.9,
            seed: 0,
        }
    }
}

/// Seeded permutation; the first `train_count` instances train, the rest test.
pub fn shuffle_split(dataset: &Dataset, plan: SplitPlan) -> Result<(Dataset, Dataset)> {
    let m = dataset.len();
    if m < 2 {
        return Err(Error::data("a split needs at least two instances"));
    }
    SplitPlan::new(plan.train_fraction, plan.seed)?;
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut stream_rng(plan.seed, Stream::Split));
    let cut = plan.train_count(m);
    Ok((dataset.subset(&order[..cut]), dataset.subset(&order[cut..])))
}

/// `0` below one half, `1` otherwise.
pub fn binarize(x: f64) -> u8 {
    u8::from(x >= 0.5)
}

/// Big-endian value of a bit slice.
fn bits_value(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
}

/// Multiplexer with 3 address bits: the address (first three bits, MSB
/// first) selects one of the 8 following data bits.
pub fn rmux_class(x: &[f64]) -> usize {
    let bits: Vec<u8> = x.iter().map(|&v| binarize(v)).collect();
    let address = bits_value(&bits[..3]);
    bits[3 + address] as usize
}

/// Majority-on over 11 bits.
pub fn rmaj_class(x: &[f64]) -> usize {
    let ones = x.iter().filter(|&&v| binarize(v) == 1).count();
    usize::from(2 * ones > x.len())
}

/// Carry out of the sum of two equal-width binary numbers (MSB first).
pub fn rcar_class(x: &[f64]) -> usize {
    let bits: Vec<u8> = x.iter().map(|&v| binarize(v)).collect();
    let half = bits.len() / 2;
    let sum = bits_value(&bits[..half]) + bits_value(&bits[half..]);
    usize::from(sum >= 1 << half)
}

fn generate(count: usize, seed: u64, dim: usize, label: fn(&[f64]) -> usize) -> Dataset {
    let mut rng = stream_rng(seed, Stream::Generator);
    let mut features = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for _ in 0..count {
        let x: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>()).collect();
        labels.push(label(&x));
        features.push(x.into_iter().map(Some).collect());
    }
    Dataset {
        features,
        labels,
        class_names: vec!["0".into(), "1".into()],
        feature_names: (1..=dim).map(|j| format!("x{j}")).collect(),
    }
}

pub fn gen_rmux(count: usize, seed: u64) -> Dataset {
    generate(count, seed, 11, rmux_class)
}

pub fn gen_rmaj(count: usize, seed: u64) -> Dataset {
    generate(count, seed, 11, rmaj_class)
}

pub fn gen_rcar(count: usize, seed: u64) -> Dataset {
    generate(count, seed, 12, rcar_class)
}

/// Generator by name: `rmux`, `rmaj` or `rcar`.
pub fn generate_named(name: &str, count: usize, seed: u64) -> Result<Dataset> {
    if count == 0 {
        return Err(Error::input("count must be positive"));
    }
    match name.to_ascii_lowercase().as_str() {
        "rmux" => Ok(gen_rmux(count, seed)),
        "rmaj" => Ok(gen_rmaj(count, seed)),
        "rcar" => Ok(gen_rcar(count, seed)),
        other => Err(Error::input(format!("unknown generator '{other}' (expected rmux, rmaj or rcar)"))),
    }
}
