//! Class inference from a trained population: the experience-filtered match
//! set is handed to one of three schemes.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::{combine_all, BeliefAssignment};
use crate::learner::{Population, TrainedModel};
use crate::linguistic::{InputProfile, LinguisticPartition};
use crate::rules::FuzzyRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Vote,
    Swin,
    Ds,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Vote, Scheme::Swin, Scheme::Ds];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Vote => "vote",
            Scheme::Swin => "swin",
            Scheme::Ds => "ds",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "vote" => Ok(Scheme::Vote),
            "swin" => Ok(Scheme::Swin),
            "ds" => Ok(Scheme::Ds),
            other => Err(Error::Config(format!(
                "unknown inference scheme '{other}' (expected vote, swin or ds)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceOutcome {
    pub predicted_class: usize,
    /// Pignistic probabilities (DS only).
    pub betp: Option<Vec<f64>>,
    /// Combined `m(Θ)` (DS only).
    pub ignorance: Option<f64>,
    pub tie_broken: bool,
}

impl InferenceOutcome {
    fn plain(predicted_class: usize, tie_broken: bool) -> Self {
        InferenceOutcome {
            predicted_class,
            betp: None,
            ignorance: None,
            tie_broken,
        }
    }
}

/// A rule together with its matching degree on the current input.
#[derive(Debug, Clone, Copy)]
pub struct Candidate<'a> {
    pub rule: &'a FuzzyRule,
    pub degree: f64,
}

/// Matching rules with `exp > theta_exploit`.
pub fn filtered_match_set<'a>(
    population: &'a Population,
    partition: &LinguisticPartition,
    x: &[Option<f64>],
    theta_exploit: f64,
) -> Result<Vec<Candidate<'a>>> {
    let profile = InputProfile::new(partition, x)?;
    let mut out = Vec::new();
    for rule in population.rules() {
        if rule.numerosity == 0 || !(rule.experience > theta_exploit) {
            continue;
        }
        if rule.dimension() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: rule.dimension(),
                found: x.len(),
            });
        }
        let degree = profile.degree(&rule.antecedent);
        if degree > 0.0 {
            out.push(Candidate { rule, degree });
        }
    }
    Ok(out)
}

/// Indices attaining the maximum under exact comparison.
fn arg_maxima(values: &[f64]) -> Vec<usize> {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == best)
        .map(|(i, _)| i)
        .collect()
}

fn pick<R: Rng>(tied: &[usize], rng: &mut R) -> (usize, bool) {
    if tied.len() == 1 {
        (tied[0], false)
    } else {
        (*tied.choose(rng).expect("nonempty tie set"), true)
    }
}

fn check_nonempty(matched: &[Candidate<'_>]) -> Result<()> {
    if matched.is_empty() {
        Err(Error::input("inference needs a nonempty match set"))
    } else {
        Ok(())
    }
}

fn check_classes(matched: &[Candidate<'_>], num_classes: usize) -> Result<()> {
    for c in matched {
        if c.rule.num_classes() != num_classes || c.rule.consequent >= num_classes {
            return Err(Error::input(format!(
                "rule does not fit a frame of {num_classes} classes"
            )));
        }
    }
    Ok(())
}

/// Weighted vote: class totals of `mu * F * num`, negative fitness included.
pub fn infer_vote<R: Rng>(
    matched: &[Candidate<'_>],
    num_classes: usize,
    rng: &mut R,
) -> Result<InferenceOutcome> {
    check_nonempty(matched)?;
    check_classes(matched, num_classes)?;
    let mut votes = vec![0.0; num_classes];
    for c in matched {
        votes[c.rule.consequent] += c.degree * c.rule.fitness * c.rule.numerosity as f64;
    }
    let (class, tie) = pick(&arg_maxima(&votes), rng);
    Ok(InferenceOutcome::plain(class, tie))
}

/// Single winner: the class of the rule maximizing `mu * F`.
pub fn infer_swin<R: Rng>(
    matched: &[Candidate<'_>],
    num_classes: usize,
    rng: &mut R,
) -> Result<InferenceOutcome> {
    check_nonempty(matched)?;
    check_classes(matched, num_classes)?;
    let scores: Vec<f64> = matched.iter().map(|c| c.degree * c.rule.fitness).collect();
    let mut classes: Vec<usize> = arg_maxima(&scores)
        .into_iter()
        .map(|k| matched[k].rule.consequent)
        .collect();
    classes.sort_unstable();
    classes.dedup();
    let (class, tie) = pick(&classes, rng);
    Ok(InferenceOutcome::plain(class, tie))
}

/// Combined evidence of a match set. Numerosity plays no role.
pub fn combined_evidence(matched: &[Candidate<'_>], num_classes: usize) -> Result<BeliefAssignment> {
    check_nonempty(matched)?;
    check_classes(matched, num_classes)?;
    let assignments = matched
        .iter()
        .map(|c| BeliefAssignment::from_partial_rule(c.degree, &c.rule.weights))
        .collect::<Result<Vec<_>>>()?;
    combine_all(&assignments)
}

/// Dempster-Shafer inference: fuse per-rule evidence and take the highest
/// pignistic probability.
pub fn infer_ds<R: Rng>(
    matched: &[Candidate<'_>],
    num_classes: usize,
    rng: &mut R,
) -> Result<InferenceOutcome> {
    let combined = combined_evidence(matched, num_classes)?;
    let betp = combined.pignistic();
    let (class, tie) = pick(&arg_maxima(&betp), rng);
    Ok(InferenceOutcome {
        predicted_class: class,
        betp: Some(betp),
        ignorance: Some(combined.ignorance()),
        tie_broken: tie,
    })
}

/// Dispatch over an already filtered match set; an empty set yields a
/// uniformly random class.
pub fn infer<R: Rng>(
    matched: &[Candidate<'_>],
    num_classes: usize,
    scheme: Scheme,
    rng: &mut R,
) -> Result<InferenceOutcome> {
    if num_classes == 0 {
        return Err(Error::input("cannot classify into zero classes"));
    }
    if matched.is_empty() {
        return Ok(InferenceOutcome::plain(rng.gen_range(0..num_classes), true));
    }
    match scheme {
        Scheme::Vote => infer_vote(matched, num_classes, rng),
        Scheme::Swin => infer_swin(matched, num_classes, rng),
        Scheme::Ds => infer_ds(matched, num_classes, rng),
    }
}

/// Test-phase classification of `x` by a trained model.
pub fn classify<R: Rng>(
    model: &TrainedModel,
    x: &[Option<f64>],
    scheme: Scheme,
    theta_exploit: f64,
    rng: &mut R,
) -> Result<InferenceOutcome> {
    check_input(model, x)?;
    let matched = filtered_match_set(&model.population, &model.partition(), x, theta_exploit)?;
    infer(&matched, model.num_classes(), scheme, rng)
}

/// The combined assignment and pignistic vector for `x`, or `None` when no
/// experienced rule matches.
pub fn explain_ds(
    model: &TrainedModel,
    x: &[Option<f64>],
    theta_exploit: f64,
) -> Result<Option<(BeliefAssignment, Vec<f64>)>> {
    check_input(model, x)?;
    let matched = filtered_match_set(&model.population, &model.partition(), x, theta_exploit)?;
    if matched.is_empty() {
        return Ok(None);
    }
    let combined = combined_evidence(&matched, model.num_classes())?;
    let betp = combined.pignistic();
    Ok(Some((combined, betp)))
}

fn check_input(model: &TrainedModel, x: &[Option<f64>]) -> Result<()> {
    if x.len() != model.dimension() {
        return Err(Error::DimensionMismatch {
            expected: model.dimension(),
            found: x.len(),
        });
    }
    Ok(())
}
