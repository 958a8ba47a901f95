//! Evaluation metrics. Everything here is deterministic except the
//! tie-breaking inside [`evaluate`], which draws from the caller's RNG.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::inference::{classify, explain_ds, Scheme};
use crate::learner::{Population, TrainedModel};

fn check_lengths(pred: &[usize], truth: &[usize]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: pred.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::input("metrics need at least one prediction"));
    }
    Ok(())
}

pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Macro-averaged F1 over all `num_classes` classes. A class with zero
/// precision and recall (including one never seen nor predicted) scores 0.
pub fn macro_f1(pred: &[usize], truth: &[usize], num_classes: usize) -> Result<f64> {
    check_lengths(pred, truth)?;
    if num_classes == 0 {
        return Err(Error::input("macro F1 over zero classes"));
    }
    if let Some(c) = pred.iter().chain(truth).find(|&&c| c >= num_classes) {
        return Err(Error::input(format!("class {c} outside {num_classes} classes")));
    }
    let mut tp = vec![0usize; num_classes];
    let mut predicted = vec![0usize; num_classes];
    let mut actual = vec![0usize; num_classes];
    for (&p, &t) in pred.iter().zip(truth) {
        predicted[p] += 1;
        actual[t] += 1;
        if p == t {
            tp[p] += 1;
        }
    }
    let total: f64 = (0..num_classes)
        .map(|c| {
            let precision = if predicted[c] > 0 { tp[c] as f64 / predicted[c] as f64 } else { 0.0 };
            let recall = if actual[c] > 0 { tp[c] as f64 / actual[c] as f64 } else { 0.0 };
            if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            }
        })
        .sum();
    Ok(total / num_classes as f64)
}

/// Average combined `m(Θ)` over the dataset; points without an experienced
/// matching rule count as totally ignorant.
pub fn mean_ignorance(model: &TrainedModel, data: &Dataset, theta_exploit: f64) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::input("mean ignorance over an empty dataset"));
    }
    let mut sum = 0.0;
    for x in data.rows() {
        sum += match explain_ds(model, x, theta_exploit)? {
            Some((m, _)) => m.ignorance(),
            None => 1.0,
        };
    }
    Ok(sum / data.len() as f64)
}

/// `(macro, micro)`: distinct rules and total numerosity.
pub fn ruleset_sizes(population: &Population) -> (usize, usize) {
    (population.macro_size(), population.micro_size())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub macro_f1: f64,
    /// Only computed for the DS scheme.
    pub mean_ignorance: Option<f64>,
    pub macro_rules: usize,
    pub micro_rules: usize,
}

/// Classify every instance of `data` and summarize.
pub fn evaluate<R: Rng>(
    model: &TrainedModel,
    data: &Dataset,
    scheme: Scheme,
    theta_exploit: f64,
    rng: &mut R,
) -> Result<EvalReport> {
    if data.num_classes() != model.num_classes() {
        return Err(Error::input(format!(
            "dataset has {} classes, model {}",
            data.num_classes(),
            model.num_classes()
        )));
    }
    let pred = data
        .rows()
        .iter()
        .map(|x| classify(model, x, scheme, theta_exploit, rng).map(|o| o.predicted_class))
        .collect::<Result<Vec<_>>>()?;
    let (macro_rules, micro_rules) = ruleset_sizes(&model.population);
    Ok(EvalReport {
        accuracy: accuracy(&pred, data.labels())?,
        macro_f1: macro_f1(&pred, data.labels(), model.num_classes())?,
        mean_ignorance: match scheme {
            Scheme::Ds => Some(mean_ignorance(model, data, theta_exploit)?),
            _ => None,
        },
        macro_rules,
        micro_rules,
    })
}
