//! Fuzzy classifiers and their supervised parameter updates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linguistic::TermSet;

/// How fitness is derived from the class-weight vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitnessMode {
    /// `F = v_max - sum of the other weights`, in `(-1, 1]`.
    #[default]
    Signed,
    /// `F = v_max`, in `[0, 1]`.
    Unsigned,
}

/// How much experience a matched rule gains per update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperienceMode {
    /// The matching degree of the current input.
    #[default]
    Membership,
    /// One per matched input, regardless of degree.
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UpdateMode {
    pub experience: ExperienceMode,
    pub fitness: FitnessMode,
}

/// One macro-classifier. Serialized with the short keys
/// `antecedent, class, v, F, cm, exp, num, ts`; antecedent entries are
/// lists of 0-based term indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyRule {
    pub antecedent: Vec<TermSet>,
    #[serde(rename = "class")]
    pub consequent: usize,
    #[serde(rename = "v")]
    pub weights: Vec<f64>,
    #[serde(rename = "F")]
    pub fitness: f64,
    #[serde(rename = "cm")]
    pub correct_matching: Vec<f64>,
    #[serde(rename = "exp")]
    pub experience: f64,
    #[serde(rename = "num")]
    pub numerosity: u32,
    #[serde(rename = "ts")]
    pub timestamp: u64,
}

impl FuzzyRule {
    /// A fresh rule predicting `class` with full confidence: one-hot weights,
    /// no experience, fitness 1.
    pub fn new(antecedent: Vec<TermSet>, class: usize, num_classes: usize, timestamp: u64) -> Self {
        assert!(class < num_classes);
        let mut weights = vec![0.0; num_classes];
        weights[class] = 1.0;
        FuzzyRule {
            antecedent,
            consequent: class,
            weights,
            fitness: 1.0,
            correct_matching: vec![0.0; num_classes],
            experience: 0.0,
            numerosity: 1,
            timestamp,
        }
    }

    pub fn dimension(&self) -> usize {
        self.antecedent.len()
    }

    pub fn num_classes(&self) -> usize {
        self.weights.len()
    }

    /// The rule weight `w = max_i v_i`.
    pub fn rule_weight(&self) -> f64 {
        self.weights[self.consequent]
    }

    /// Total number of included terms; larger is more general.
    pub fn generality(&self) -> usize {
        self.antecedent.iter().map(|t| t.len()).sum()
    }

    /// Apply one match with degree `mu` on an input of class `correct_class`.
    pub fn update_on_match(&mut self, mu: f64, correct_class: usize, mode: UpdateMode) -> Result<()> {
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::input(format!(
                "matching degree {mu} outside (0, 1]; the rule cannot be in the match set"
            )));
        }
        if correct_class >= self.num_classes() {
            return Err(Error::input(format!(
                "class {correct_class} outside {} classes",
                self.num_classes()
            )));
        }
        self.experience += match mode.experience {
            ExperienceMode::Membership => mu,
            ExperienceMode::Unit => 1.0,
        };
        self.correct_matching[correct_class] += mu;
        for (v, cm) in self.weights.iter_mut().zip(&self.correct_matching) {
            *v = cm / self.experience;
        }
        self.refresh(mode.fitness);
        Ok(())
    }

    /// Recompute consequent and fitness from the current weight vector.
    pub fn refresh(&mut self, fitness: FitnessMode) {
        self.consequent = argmax_lowest(&self.weights);
        self.fitness = fitness_of(&self.weights, self.consequent, fitness);
    }

    /// `true` iff every variable of `self` includes at least the terms of
    /// `other`.
    pub fn is_more_general(&self, other: &FuzzyRule) -> Result<bool> {
        if self.dimension() != other.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: other.dimension(),
            });
        }
        Ok(self
            .antecedent
            .iter()
            .zip(&other.antecedent)
            .all(|(a, b)| a.is_superset_of(*b)))
    }

    /// Subsumption test: more general, same class, accurate (`F > f0`) and
    /// experienced (`exp > theta_sub`).
    pub fn can_subsume(&self, other: &FuzzyRule, f0: f64, theta_sub: f64) -> bool {
        self.consequent == other.consequent
            && self.fitness > f0
            && self.experience > theta_sub
            && self.is_more_general(other).unwrap_or(false)
    }

    /// Whether two macro-rules are the same classifier for deduplication.
    pub fn same_classifier(&self, other: &FuzzyRule) -> bool {
        self.consequent == other.consequent && self.antecedent == other.antecedent
    }
}

/// Index of the largest element, the lowest index on ties.
pub fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn fitness_of(weights: &[f64], max_index: usize, mode: FitnessMode) -> f64 {
    let vmax = weights[max_index];
    match mode {
        FitnessMode::Unsigned => vmax,
        FitnessMode::Signed => {
            let rest: f64 = weights
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != max_index)
                .map(|(_, v)| v)
                .sum();
            vmax - rest
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const SIGNED: UpdateMode = UpdateMode {
        experience: ExperienceMode::Membership,
        fitness: FitnessMode::Signed,
    };
    const UNSIGNED: UpdateMode = UpdateMode {
        experience: ExperienceMode::Membership,
        fitness: FitnessMode::Unsigned,
    };

    fn dc(dim: usize) -> Vec<TermSet> {
        vec![TermSet::full(5); dim]
    }

    #[test]
    fn fresh_rule_first_update_is_one_hot() {
        let mut r = FuzzyRule::new(dc(2), 0, 2, 0);
        r.update_on_match(1.0, 0, SIGNED).unwrap();
        assert_eq!(r.experience, 1.0);
        assert_eq!(r.correct_matching, vec![1.0, 0.0]);
        assert_eq!(r.weights, vec![1.0, 0.0]);
        assert_eq!(r.fitness, 1.0);
        assert_eq!(r.consequent, 0);
    }

    fn after_two_updates(mode: UpdateMode) -> FuzzyRule {
        let mut r = FuzzyRule::new(dc(2), 0, 2, 0);
        r.update_on_match(1.0, 0, mode).unwrap();
        r.update_on_match(0.5, 1, mode).unwrap();
        r
    }

    #[test]
    fn second_update_on_other_class() {
        // exp = 1.5, cm = (1, 0.5), v = (2/3, 1/3), F = 2/3 - 1/3
        let r = after_two_updates(SIGNED);
        assert_abs_diff_eq!(r.experience, 1.5);
        assert_eq!(r.correct_matching, vec![1.0, 0.5]);
        assert_abs_diff_eq!(r.weights[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.weights[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.fitness, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.rule_weight(), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn unsigned_fitness_is_max_weight() {
        let r = after_two_updates(UNSIGNED);
        assert_abs_diff_eq!(r.fitness, 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn update_rejects_non_matching_degree() {
        let mut r = FuzzyRule::new(dc(1), 0, 2, 0);
        assert!(r.update_on_match(0.0, 0, SIGNED).is_err());
        assert!(r.update_on_match(-0.1, 0, SIGNED).is_err());
        assert!(r.update_on_match(0.5, 2, SIGNED).is_err());
    }

    #[test]
    fn equal_weights_pick_lowest_class() {
        let mut r = FuzzyRule::new(dc(1), 1, 2, 0);
        r.update_on_match(0.5, 1, SIGNED).unwrap();
        r.update_on_match(0.5, 0, SIGNED).unwrap();
        assert_eq!(r.consequent, 0);
        assert_eq!(r.fitness, 0.0);
    }

    #[test]
    fn generality_examples() {
        let any = FuzzyRule::new(dc(1), 0, 2, 0);
        let small = FuzzyRule::new(vec![TermSet::single(0)], 0, 2, 0);
        let wider = FuzzyRule::new(vec![TermSet::from_terms(&[0, 1]).unwrap()], 0, 2, 0);
        assert!(any.is_more_general(&small).unwrap());
        assert!(small.is_more_general(&small).unwrap());
        assert!(!small.is_more_general(&wider).unwrap());
        assert!(any.is_more_general(&FuzzyRule::new(dc(2), 0, 2, 0)).is_err());
    }

    fn experienced(f: f64, exp: f64) -> FuzzyRule {
        let mut r = FuzzyRule::new(dc(2), 0, 2, 0);
        r.fitness = f;
        r.experience = exp;
        r
    }

    #[test]
    fn subsumption_conditions() {
        let tos = FuzzyRule::new(vec![TermSet::single(2), TermSet::single(1)], 0, 2, 0);
        assert!(experienced(1.0, 100.0).can_subsume(&tos, 0.99, 50.0));
        assert!(!experienced(0.99, 100.0).can_subsume(&tos, 0.99, 50.0));
        assert!(!experienced(1.0, 50.0).can_subsume(&tos, 0.99, 50.0));
        let other_class = FuzzyRule::new(tos.antecedent.clone(), 1, 2, 0);
        assert!(!experienced(1.0, 100.0).can_subsume(&other_class, 0.99, 50.0));
        assert!(!tos.clone().can_subsume(&experienced(1.0, 100.0), -1.0, -1.0));
    }

    #[test]
    fn json_keys_and_round_trip() {
        let r = after_two_updates(SIGNED);
        let s = serde_json::to_string(&r).unwrap();
        for key in ["\"antecedent\"", "\"class\"", "\"v\"", "\"F\"", "\"cm\"", "\"exp\"", "\"num\"", "\"ts\""] {
            assert!(s.contains(key), "{key} missing from {s}");
        }
        let back: FuzzyRule = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }

    fn arb_updates() -> impl Strategy<Value = Vec<(f64, usize)>> {
        proptest::collection::vec((0.001f64..=1.0, 0usize..4), 1..40)
    }

    fn arb_antecedent() -> impl Strategy<Value = Vec<TermSet>> {
        proptest::collection::vec((1u32..32).prop_map(|b| TermSet::from_bits(b).unwrap()), 3)
    }

    proptest! {
        #[test]
        fn weights_stay_normalized(updates in arb_updates()) {
            let mut r = FuzzyRule::new(dc(1), 0, 4, 0);
            for (mu, c) in updates {
                r.update_on_match(mu, c, SIGNED).unwrap();
                let sum: f64 = r.weights.iter().sum();
                prop_assert!((sum - 1.0).abs() <= 1e-9);
                prop_assert!((r.fitness - (2.0 * r.rule_weight() - 1.0)).abs() <= 1e-9);
                prop_assert!(r.fitness > -1.0 && r.fitness <= 1.0);
                prop_assert_eq!(r.consequent, argmax_lowest(&r.weights));
            }
        }

        #[test]
        fn unit_mode_agrees_on_full_matches(classes in proptest::collection::vec(0usize..3, 1..30)) {
            let mut a = FuzzyRule::new(dc(1), 0, 3, 0);
            let mut b = a.clone();
            let unit = UpdateMode { experience: ExperienceMode::Unit, ..SIGNED };
            for c in classes {
                a.update_on_match(1.0, c, SIGNED).unwrap();
                b.update_on_match(1.0, c, unit).unwrap();
            }
            prop_assert_eq!(a, b);
        }

        #[test]
        fn consequent_invariant_under_rescaling(
            cm in proptest::collection::vec(0.0f64..10.0, 3),
            scale in 0.01f64..100.0,
        ) {
            let exp: f64 = cm.iter().sum::<f64>() + 1e-3;
            let v1: Vec<f64> = cm.iter().map(|c| c / exp).collect();
            let v2: Vec<f64> = cm.iter().map(|c| (c * scale) / (exp * scale)).collect();
            let a1 = argmax_lowest(&v1);
            let a2 = argmax_lowest(&v2);
            // Rescaling may only perturb the last ulp; the argmax can differ
            // only between (numerically) tied entries.
            prop_assert!(a1 == a2 || (v1[a1] - v1[a2]).abs() <= 1e-12);
        }

        #[test]
        fn generality_is_a_partial_order(
            a in arb_antecedent(),
            b in arb_antecedent(),
            c in arb_antecedent(),
        ) {
            let ra = FuzzyRule::new(a, 0, 2, 0);
            let rb = FuzzyRule::new(b, 0, 2, 0);
            let rc = FuzzyRule::new(c, 0, 2, 0);
            prop_assert!(ra.is_more_general(&ra).unwrap());
            if ra.is_more_general(&rb).unwrap() && rb.is_more_general(&ra).unwrap() {
                prop_assert_eq!(&ra.antecedent, &rb.antecedent);
            }
            if ra.is_more_general(&rb).unwrap() && rb.is_more_general(&rc).unwrap() {
                prop_assert!(ra.is_more_general(&rc).unwrap());
            }
        }
    }
}
