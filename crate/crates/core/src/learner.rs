//! The supervised training loop: match and correct sets, covering, rule
//! updates, steady-state GA with subsumption, and deletion.

use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Hyperparameters};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linguistic::{InputProfile, LinguisticPartition, TermSet};
use crate::rng::{stream_rng, Stream, StreamRng};
use crate::rules::{FitnessMode, FuzzyRule};

/// A rule of the population that matches the current input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matched {
    pub index: usize,
    pub degree: f64,
}

/// The ruleset `[P]`: macro-rules with numerosities, kept in insertion order.
///
/// During a training step rules may transiently drop to numerosity zero
/// (subsumed or deleted); such rules are ignored everywhere and purged at the
/// end of the step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Population {
    rules: Vec<FuzzyRule>,
}

impl Population {
    pub fn new() -> Self {
        Population::default()
    }

    pub fn from_rules(rules: Vec<FuzzyRule>) -> Self {
        Population { rules }
    }

    pub fn rules(&self) -> &[FuzzyRule] {
        &self.rules
    }

    pub fn rules_mut(&mut self) -> &mut [FuzzyRule] {
        &mut self.rules
    }

    pub fn into_rules(self) -> Vec<FuzzyRule> {
        self.rules
    }

    pub fn is_empty(&self) -> bool {
        self.macro_size() == 0
    }

    pub fn macro_size(&self) -> usize {
        self.rules.iter().filter(|r| r.numerosity > 0).count()
    }

    pub fn micro_size(&self) -> usize {
        self.rules.iter().map(|r| r.numerosity as usize).sum()
    }

    pub fn push(&mut self, rule: FuzzyRule) -> usize {
        self.rules.push(rule);
        self.rules.len() - 1
    }

    /// Add one copy of `rule`, merging into an identical live macro-rule.
    pub fn insert_or_merge(&mut self, rule: FuzzyRule) -> Placement {
        if let Some(i) = self
            .rules
            .iter()
            .position(|r| r.numerosity > 0 && r.same_classifier(&rule))
        {
            self.rules[i].numerosity += rule.numerosity;
            Placement::Merged(i)
        } else {
            Placement::Inserted(self.push(rule))
        }
    }

    /// Rules with a strictly positive matching degree.
    pub fn match_set(&self, input: &InputProfile) -> Vec<Matched> {
        self.rules
            .iter()
            .enumerate()
            .filter(|(_, r)| r.numerosity > 0)
            .filter_map(|(index, r)| {
                let degree = input.degree(&r.antecedent);
                (degree > 0.0).then_some(Matched { index, degree })
            })
            .collect()
    }

    fn purge(&mut self) {
        self.rules.retain(|r| r.numerosity > 0);
    }
}

/// Where an offspring ended up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    SubsumedBy(usize),
    Merged(usize),
    Inserted(usize),
}

pub fn build_match_set(
    population: &Population,
    partition: &LinguisticPartition,
    x: &[Option<f64>],
) -> Result<Vec<Matched>> {
    let profile = InputProfile::new(partition, x)?;
    if let Some(r) = population.rules().first() {
        if r.dimension() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: r.dimension(),
                found: x.len(),
            });
        }
    }
    Ok(population.match_set(&profile))
}

pub fn build_correct_set(population: &Population, matched: &[Matched], class: usize) -> Vec<Matched> {
    matched
        .iter()
        .filter(|m| population.rules[m.index].consequent == class)
        .copied()
        .collect()
}

/// A rule predicting `class` whose antecedent fully matches `x`: each known
/// variable takes the terms with nonzero membership, then becomes Don't Care
/// with probability `p_dont_care`; missing variables are Don't Care.
pub fn covering<R: Rng>(
    partition: &LinguisticPartition,
    x: &[Option<f64>],
    class: usize,
    num_classes: usize,
    p_dont_care: f64,
    timestamp: u64,
    rng: &mut R,
) -> Result<FuzzyRule> {
    if class >= num_classes {
        return Err(Error::input(format!("class {class} outside {num_classes} classes")));
    }
    let dont_care = partition.dont_care();
    let antecedent = x
        .iter()
        .map(|cell| match cell {
            None => Ok(dont_care),
            Some(v) => {
                let support = partition.profile(*v)?.support();
                Ok(if rng.gen::<f64>() < p_dont_care {
                    dont_care
                } else {
                    support
                })
            }
        })
        .collect::<Result<Vec<TermSet>>>()?;
    Ok(FuzzyRule::new(antecedent, class, num_classes, timestamp))
}

/// `t - (sum num * ts) / (sum num) > theta_ga` over the correct set.
pub fn ga_should_trigger(population: &Population, correct: &[usize], t: u64, theta_ga: f64) -> bool {
    let (weighted, total) = correct
        .iter()
        .map(|&i| &population.rules[i])
        .filter(|r| r.numerosity > 0)
        .fold((0.0, 0.0), |(w, n), r| {
            (w + r.numerosity as f64 * r.timestamp as f64, n + r.numerosity as f64)
        });
    total > 0.0 && t as f64 - weighted / total > theta_ga
}

/// Tournament selection over the non-negative-fitness rules of the correct
/// set. Each micro-rule enters independently with probability `tau`; the
/// fittest entrant wins. Returns `None` when no rule is eligible.
pub fn select_parent<R: Rng>(
    population: &Population,
    correct: &[usize],
    tau: f64,
    rng: &mut R,
) -> Option<usize> {
    let eligible: Vec<usize> = correct
        .iter()
        .copied()
        .filter(|&i| {
            let r = &population.rules[i];
            r.numerosity > 0 && r.fitness >= 0.0
        })
        .collect();
    if eligible.is_empty() || tau <= 0.0 {
        return None;
    }
    loop {
        let mut best: Option<usize> = None;
        for &i in &eligible {
            let r = &population.rules[i];
            // at least one of `num` independent copies enters
            let enter = 1.0 - (1.0 - tau).powi(r.numerosity as i32);
            if rng.gen::<f64>() < enter
                && best.is_none_or(|b| r.fitness > population.rules[b].fitness)
            {
                best = Some(i);
            }
        }
        if best.is_some() {
            return best;
        }
    }
}

/// Uniform crossover of antecedents. With probability `chi` every variable
/// swaps between the children with probability 1/2.
pub fn crossover<R: Rng>(
    p1: &FuzzyRule,
    p2: &FuzzyRule,
    chi: f64,
    rng: &mut R,
) -> Result<(FuzzyRule, FuzzyRule)> {
    if p1.dimension() != p2.dimension() {
        return Err(Error::DimensionMismatch {
            expected: p1.dimension(),
            found: p2.dimension(),
        });
    }
    let mut c1 = p1.clone();
    let mut c2 = p2.clone();
    if rng.gen::<f64>() < chi {
        for (a, b) in c1.antecedent.iter_mut().zip(c2.antecedent.iter_mut()) {
            if rng.gen::<bool>() {
                std::mem::swap(a, b);
            }
        }
    }
    Ok((c1, c2))
}

/// With probability `p_mut` per variable, toggle one uniformly chosen term.
/// A toggle that would empty the set is re-rolled once, then skipped.
pub fn mutate<R: Rng>(antecedent: &mut [TermSet], num_terms: usize, p_mut: f64, rng: &mut R) {
    for terms in antecedent.iter_mut() {
        if rng.gen::<f64>() >= p_mut {
            continue;
        }
        let first = rng.gen_range(0..num_terms);
        if let Some(t) = terms.toggled(first) {
            *terms = t;
        } else if let Some(t) = terms.toggled(rng.gen_range(0..num_terms)) {
            *terms = t;
        }
    }
}

/// Offspring bookkeeping: no experience, weights inherited from the parent.
fn reset_child(child: &mut FuzzyRule, parent_weights: &[f64], fitness: FitnessMode, t: u64) {
    let sum: f64 = parent_weights.iter().sum();
    child.weights = if sum > 0.0 {
        parent_weights.iter().map(|v| v / sum).collect()
    } else {
        let n = parent_weights.len();
        vec![1.0 / n as f64; n]
    };
    child.correct_matching = vec![0.0; parent_weights.len()];
    child.experience = 0.0;
    child.numerosity = 1;
    child.timestamp = t;
    child.refresh(fitness);
}

/// GA subsumption of one child by its parents, else merge or insert.
pub fn ga_subsume_or_insert(
    population: &mut Population,
    parents: [usize; 2],
    child: FuzzyRule,
    params: &Hyperparameters,
) -> Placement {
    if params.do_ga_subsumption {
        for &p in &parents {
            let parent = &population.rules[p];
            if parent.numerosity > 0 && parent.can_subsume(&child, params.f0, params.theta_sub) {
                population.rules[p].numerosity += 1;
                return Placement::SubsumedBy(p);
            }
        }
    }
    population.insert_or_merge(child)
}

/// Deletion votes `num * penalty` per rule. Experienced rules whose fitness
/// is below `delta` times the population's mean (non-negative) fitness get
/// `penalty = mean / F`, never less than 1; everyone else gets 1.
pub fn deletion_votes(population: &Population, params: &Hyperparameters) -> Vec<f64> {
    let (sum_f, sum_n) = population
        .rules
        .iter()
        .fold((0.0, 0.0), |(f, n), r| {
            (f + r.numerosity as f64 * r.fitness.max(0.0), n + r.numerosity as f64)
        });
    let mean_f = if sum_n > 0.0 { sum_f / sum_n } else { 0.0 };
    population
        .rules
        .iter()
        .map(|r| {
            if r.numerosity == 0 {
                return 0.0;
            }
            let penalty = if r.experience > params.theta_del && r.fitness < params.delta * mean_f {
                (mean_f / r.fitness.max(1e-6)).max(1.0)
            } else {
                1.0
            };
            r.numerosity as f64 * penalty
        })
        .collect()
}

/// Roulette-wheel pick proportional to `votes`.
pub fn roulette<R: Rng>(votes: &[f64], rng: &mut R) -> Option<usize> {
    let total: f64 = votes.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut point = rng.gen::<f64>() * total;
    let mut last = None;
    for (i, &v) in votes.iter().enumerate() {
        if v <= 0.0 {
            continue;
        }
        if point < v {
            return Some(i);
        }
        point -= v;
        last = Some(i);
    }
    last
}

/// Remove micro-rules by roulette until the population fits in `N`.
/// Returns the number of micro-rules removed.
pub fn deletion<R: Rng>(population: &mut Population, params: &Hyperparameters, rng: &mut R) -> usize {
    let mut removed = 0;
    while population.micro_size() > params.population_size {
        let votes = deletion_votes(population, params);
        match roulette(&votes, rng) {
            Some(i) => population.rules[i].numerosity -= 1,
            None => break,
        }
        removed += 1;
    }
    removed
}

/// What happened during one training step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepReport {
    pub match_size: usize,
    pub correct_size: usize,
    pub covered: bool,
    pub subsumed: usize,
    pub ga_ran: bool,
    /// Micro-rules added by the GA (offspring, whether merged, subsumed or new).
    pub offspring: usize,
    pub deleted: usize,
}

/// Training state: population, clock, and the random streams.
#[derive(Debug, Clone)]
pub struct Trainer {
    params: Hyperparameters,
    partition: LinguisticPartition,
    num_classes: usize,
    dimension: usize,
    population: Population,
    t: u64,
    shuffle_rng: StreamRng,
    covering_rng: StreamRng,
    ga_rng: StreamRng,
}

impl Trainer {
    pub fn new(params: Hyperparameters, dimension: usize, num_classes: usize, seed: u64) -> Result<Self> {
        params.validate()?;
        if num_classes == 0 {
            return Err(Error::input("at least one class is required"));
        }
        Ok(Trainer {
            partition: params.partition(),
            params,
            num_classes,
            dimension,
            population: Population::new(),
            t: 0,
            shuffle_rng: stream_rng(seed, Stream::Shuffle),
            covering_rng: stream_rng(seed, Stream::Covering),
            ga_rng: stream_rng(seed, Stream::Genetic),
        })
    }

    pub fn with_population(mut self, population: Population) -> Self {
        self.population = population;
        self
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn population_mut(&mut self) -> &mut Population {
        &mut self.population
    }

    pub fn into_population(self) -> Population {
        self.population
    }

    pub fn params(&self) -> &Hyperparameters {
        &self.params
    }

    pub fn partition(&self) -> &LinguisticPartition {
        &self.partition
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn set_time(&mut self, t: u64) {
        self.t = t;
    }

    /// One pass of the training loop on a labelled point.
    pub fn train_step(&mut self, x: &[Option<f64>], class: usize) -> Result<StepReport> {
        if x.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: x.len(),
            });
        }
        if class >= self.num_classes {
            return Err(Error::input(format!(
                "class {class} outside the declared {} classes",
                self.num_classes
            )));
        }
        let profile = InputProfile::new(&self.partition, x)?;
        let mut matched = self.population.match_set(&profile);
        let mut correct = build_correct_set(&self.population, &matched, class);
        let mut report = StepReport::default();

        let support: f64 = correct.iter().map(|m| m.degree).sum();
        if support < 1.0 {
            let rule = covering(
                &self.partition,
                x,
                class,
                self.num_classes,
                self.params.p_dont_care,
                self.t,
                &mut self.covering_rng,
            )?;
            let degree = profile.degree(&rule.antecedent);
            let index = self.population.push(rule);
            let m = Matched { index, degree };
            matched.push(m);
            correct.push(m);
            report.covered = true;
        }
        report.match_size = matched.len();
        report.correct_size = correct.len();

        let mode = self.params.update_mode();
        for m in &matched {
            self.population.rules[m.index].update_on_match(m.degree, class, mode)?;
        }

        let correct: Vec<usize> = correct.iter().map(|m| m.index).collect();
        if self.params.do_correct_set_subsumption {
            report.subsumed = self.correct_set_subsumption(&correct);
        }
        if ga_should_trigger(&self.population, &correct, self.t, self.params.theta_ga) {
            report.ga_ran = self.ga_step(&correct);
            if report.ga_ran {
                report.offspring = 2;
            }
        }
        report.deleted = deletion(&mut self.population, &self.params, &mut self.ga_rng);
        self.population.purge();
        self.t += 1;
        Ok(report)
    }

    /// Absorb every rule of the correct set that the most general accurate,
    /// experienced rule can subsume. Returns the number of absorbed macro-rules.
    pub fn correct_set_subsumption(&mut self, correct: &[usize]) -> usize {
        let rules = &self.population.rules;
        let subsumer = correct
            .iter()
            .copied()
            .filter(|&i| {
                let r = &rules[i];
                r.numerosity > 0 && r.fitness > self.params.f0 && r.experience > self.params.theta_sub
            })
            .min_by(|&a, &b| {
                let (ra, rb) = (&rules[a], &rules[b]);
                rb.generality()
                    .cmp(&ra.generality())
                    .then(rb.experience.total_cmp(&ra.experience))
                    .then(a.cmp(&b))
            });
        let Some(s) = subsumer else { return 0 };
        let mut absorbed = 0;
        for &i in correct {
            if i == s || self.population.rules[i].numerosity == 0 {
                continue;
            }
            let (sub, other) = (&self.population.rules[s], &self.population.rules[i]);
            if sub.can_subsume(other, self.params.f0, self.params.theta_sub) {
                let n = other.numerosity;
                self.population.rules[s].numerosity += n;
                self.population.rules[i].numerosity = 0;
                absorbed += 1;
            }
        }
        absorbed
    }

    /// Run the GA on the correct set, adding two offspring. Returns `false`
    /// when no parent was eligible and the cycle was skipped. Deletion is
    /// left to the caller.
    pub fn ga_step(&mut self, correct: &[usize]) -> bool {
        let t = self.t;
        for &i in correct {
            self.population.rules[i].timestamp = t;
        }
        let tau = self.params.tau;
        let Some(p1) = select_parent(&self.population, correct, tau, &mut self.ga_rng) else {
            return false;
        };
        let Some(p2) = select_parent(&self.population, correct, tau, &mut self.ga_rng) else {
            return false;
        };
        let (r1, r2) = (&self.population.rules[p1], &self.population.rules[p2]);
        let (mut c1, mut c2) =
            crossover(r1, r2, self.params.chi, &mut self.ga_rng).expect("same dimension");
        let fitness = self.params.fitness_mode;
        reset_child(&mut c1, &r1.weights.clone(), fitness, t);
        reset_child(&mut c2, &r2.weights.clone(), fitness, t);
        let num_terms = self.partition.num_terms();
        for child in [c1, c2] {
            let mut child = child;
            mutate(&mut child.antecedent, num_terms, self.params.p_mut, &mut self.ga_rng);
            ga_subsume_or_insert(&mut self.population, [p1, p2], child, &self.params);
        }
        true
    }

    /// Train for `epochs` passes, each over a fresh permutation of `data`.
    pub fn fit(&mut self, data: &Dataset, epochs: usize) -> Result<()> {
        if data.dimension() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: data.dimension(),
            });
        }
        let mut order: Vec<usize> = (0..data.len()).collect();
        for _ in 0..epochs {
            order.shuffle(&mut self.shuffle_rng);
            for &i in &order {
                self.train_step(data.row(i), data.label(i))?;
            }
        }
        Ok(())
    }
}

/// Train a fresh population on `data`.
pub fn train(data: &Dataset, params: &Hyperparameters, epochs: usize, seed: u64) -> Result<TrainedModel> {
    if data.is_empty() {
        return Err(Error::input("cannot train on an empty dataset"));
    }
    let mut trainer = Trainer::new(params.clone(), data.dimension(), data.num_classes(), seed)?;
    trainer.fit(data, epochs)?;
    let config = ExperimentConfig {
        params: params.clone(),
        epochs,
        runs: 1,
        base_seed: seed,
        ..ExperimentConfig::default()
    };
    Ok(TrainedModel {
        header: ModelHeader {
            config_hash: config.hash(),
            class_names: data.class_names().to_vec(),
            feature_names: data.feature_names().to_vec(),
            dimension: data.dimension(),
            num_terms: params.num_terms,
        },
        population: trainer.into_population(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    pub config_hash: String,
    pub class_names: Vec<String>,
    pub feature_names: Vec<String>,
    pub dimension: usize,
    pub num_terms: usize,
}

/// A trained population together with what is needed to apply it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub header: ModelHeader,
    #[serde(rename = "rules")]
    pub population: Population,
}

impl TrainedModel {
    /// Wrap a hand-built population; classes and features get positional names.
    pub fn from_population(
        population: Population,
        dimension: usize,
        num_classes: usize,
        num_terms: usize,
    ) -> Self {
        TrainedModel {
            header: ModelHeader {
                config_hash: String::new(),
                class_names: (0..num_classes).map(|c| c.to_string()).collect(),
                feature_names: (1..=dimension).map(|j| format!("x{j}")).collect(),
                dimension,
                num_terms,
            },
            population,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.header.class_names.len()
    }

    pub fn dimension(&self) -> usize {
        self.header.dimension
    }

    pub fn partition(&self) -> LinguisticPartition {
        LinguisticPartition::new(self.header.num_terms).expect("validated on load")
    }

    pub fn save<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    pub fn load<R: Read>(reader: R) -> Result<Self> {
        let model: TrainedModel = serde_json::from_reader(reader)?;
        model.check()?;
        Ok(model)
    }

    fn check(&self) -> Result<()> {
        let partition = LinguisticPartition::new(self.header.num_terms)?;
        let n = self.num_classes();
        if n == 0 {
            return Err(Error::input("model declares no classes"));
        }
        for (k, r) in self.population.rules().iter().enumerate() {
            if r.dimension() != self.header.dimension {
                return Err(Error::DimensionMismatch {
                    expected: self.header.dimension,
                    found: r.dimension(),
                });
            }
            if r.weights.len() != n || r.correct_matching.len() != n || r.consequent >= n {
                return Err(Error::input(format!("rule {k} does not fit {n} classes")));
            }
            if r.numerosity == 0 {
                return Err(Error::input(format!("rule {k} has zero numerosity")));
            }
            for t in &r.antecedent {
                partition.check_termset(*t)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{ExperienceMode, UpdateMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const VS: usize = 0;
    const S: usize = 1;
    const M: usize = 2;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn p5() -> LinguisticPartition {
        LinguisticPartition::default()
    }

    fn dc(dim: usize) -> Vec<TermSet> {
        vec![TermSet::full(5); dim]
    }

    fn rule(ante: Vec<TermSet>, class: usize) -> FuzzyRule {
        FuzzyRule::new(ante, class, 2, 0)
    }

    fn accurate(ante: Vec<TermSet>, class: usize, exp: f64) -> FuzzyRule {
        let mut r = rule(ante, class);
        r.experience = exp;
        r.correct_matching[class] = exp;
        r
    }

    #[test]
    fn match_set_examples() {
        let empty = Population::new();
        assert!(build_match_set(&empty, &p5(), &[Some(0.3), Some(0.4)]).unwrap().is_empty());

        let pop = Population::from_rules(vec![rule(dc(2), 0), rule(dc(2), 1)]);
        assert_eq!(build_match_set(&pop, &p5(), &[Some(0.3), None]).unwrap().len(), 2);

        let pop = Population::from_rules(vec![rule(vec![TermSet::single(VS); 2], 0)]);
        assert!(build_match_set(&pop, &p5(), &[Some(0.9), Some(0.9)]).unwrap().is_empty());
        assert!(build_match_set(&pop, &p5(), &[Some(0.9)]).is_err());
    }

    #[test]
    fn correct_set_filters_by_class() {
        let pop = Population::from_rules(vec![rule(dc(1), 0), rule(dc(1), 1), rule(dc(1), 0)]);
        let matched = build_match_set(&pop, &p5(), &[Some(0.5)]).unwrap();
        let c0: Vec<usize> = build_correct_set(&pop, &matched, 0).iter().map(|m| m.index).collect();
        assert_eq!(c0, vec![0, 2]);
        let c1: Vec<usize> = build_correct_set(&pop, &matched, 1).iter().map(|m| m.index).collect();
        assert_eq!(c1, vec![1]);
        let only0 = Population::from_rules(vec![rule(dc(1), 0)]);
        let m = build_match_set(&only0, &p5(), &[Some(0.5)]).unwrap();
        assert_eq!(build_correct_set(&only0, &m, 0).len(), 1);
        assert!(build_correct_set(&only0, &m, 1).is_empty());
    }

    #[test]
    fn covering_examples() {
        let mut g = rng(1);
        let r = covering(&p5(), &[Some(0.5), Some(0.3), None], 1, 2, 0.0, 7, &mut g).unwrap();
        assert_eq!(r.antecedent[0], TermSet::single(M));
        assert_eq!(r.antecedent[1], TermSet::from_terms(&[S, M]).unwrap());
        assert_eq!(r.antecedent[2], TermSet::full(5));
        assert_eq!(r.consequent, 1);
        assert_eq!(r.weights, vec![0.0, 1.0]);
        assert_eq!(r.correct_matching, vec![0.0, 0.0]);
        assert_eq!((r.experience, r.fitness, r.numerosity, r.timestamp), (0.0, 1.0, 1, 7));
        let deg = p5().rule_matching_degree(&r.antecedent, &[Some(0.5), Some(0.3), None]).unwrap();
        assert!((deg - 1.0).abs() <= 1e-12);

        let r = covering(&p5(), &[Some(0.1), Some(0.7)], 0, 2, 1.0, 0, &mut g).unwrap();
        assert!(r.antecedent.iter().all(|t| t.is_full(5)));
        assert!(covering(&p5(), &[Some(0.1)], 2, 2, 0.0, 0, &mut g).is_err());
    }

    #[test]
    fn ga_trigger_boundary() {
        let mut r = rule(dc(1), 0);
        r.timestamp = 10;
        let pop = Population::from_rules(vec![r]);
        assert!(ga_should_trigger(&pop, &[0], 61, 50.0));
        assert!(!ga_should_trigger(&pop, &[0], 60, 50.0));
        assert!(!ga_should_trigger(&pop, &[], 1000, 50.0));
    }

    #[test]
    fn parent_selection() {
        let mut a = rule(dc(1), 0);
        a.fitness = 0.9;
        let mut b = rule(dc(1), 0);
        b.fitness = 0.1;
        let mut c = rule(dc(1), 0);
        c.fitness = -0.5;
        let pop = Population::from_rules(vec![a, b, c]);
        let mut g = rng(3);
        assert_eq!(select_parent(&pop, &[1], 0.4, &mut g), Some(1));
        for _ in 0..100 {
            assert_eq!(select_parent(&pop, &[0, 1], 1.0, &mut g), Some(0));
            assert_ne!(select_parent(&pop, &[0, 1, 2], 0.4, &mut g), Some(2));
        }
        assert_eq!(select_parent(&pop, &[2], 0.4, &mut g), None);
    }

    #[test]
    fn crossover_examples() {
        let mut g = rng(5);
        let p1 = rule(vec![TermSet::single(VS); 4], 0);
        let p2 = rule(dc(4), 0);
        let (c1, c2) = crossover(&p1, &p2, 0.0, &mut g).unwrap();
        assert_eq!((c1.antecedent.clone(), c2.antecedent.clone()), (p1.antecedent.clone(), p2.antecedent.clone()));
        let (c1, c2) = crossover(&p1, &p1, 1.0, &mut g).unwrap();
        assert_eq!((c1.antecedent.clone(), c2.antecedent.clone()), (p1.antecedent.clone(), p1.antecedent.clone()));
        for _ in 0..20 {
            let (c1, c2) = crossover(&p1, &p2, 1.0, &mut g).unwrap();
            for (a, b) in c1.antecedent.iter().zip(&c2.antecedent) {
                assert!(
                    (*a == TermSet::single(VS) && b.is_full(5)) || (a.is_full(5) && *b == TermSet::single(VS))
                );
            }
        }
        assert!(crossover(&p1, &rule(dc(3), 0), 1.0, &mut g).is_err());
    }

    #[test]
    fn mutation_examples() {
        let mut g = rng(9);
        let original = vec![TermSet::from_terms(&[1, 2]).unwrap(); 6];
        let mut a = original.clone();
        mutate(&mut a, 5, 0.0, &mut g);
        assert_eq!(a, original);

        for _ in 0..200 {
            let mut single = vec![TermSet::single(VS)];
            mutate(&mut single, 5, 1.0, &mut g);
            assert!(!single[0].is_empty());
        }

        let mut b = original.clone();
        mutate(&mut b, 5, 1.0, &mut g);
        for (x, y) in b.iter().zip(&original) {
            let diff = (x.bits() ^ y.bits()).count_ones();
            assert!(diff <= 1);
            assert!(!x.is_empty());
        }
    }

    fn params() -> Hyperparameters {
        Hyperparameters::default()
    }

    #[test]
    fn ga_step_children_subsumed_by_general_parent() {
        let parent = accurate(dc(2), 0, 100.0);
        let mut trainer = Trainer::new(params(), 2, 2, 1)
            .unwrap()
            .with_population(Population::from_rules(vec![parent]));
        trainer.set_time(200);
        assert!(trainer.ga_step(&[0]));
        let pop = trainer.population();
        assert_eq!(pop.macro_size(), 1);
        assert_eq!(pop.rules()[0].numerosity, 3);
        assert_eq!(pop.rules()[0].timestamp, 200);
    }

    #[test]
    fn duplicate_child_merges() {
        let mut pop = Population::from_rules(vec![rule(vec![TermSet::single(M)], 0)]);
        let child = rule(vec![TermSet::single(M)], 0);
        assert_eq!(pop.insert_or_merge(child), Placement::Merged(0));
        assert_eq!((pop.macro_size(), pop.micro_size()), (1, 2));
        let other = rule(vec![TermSet::single(M)], 1);
        assert_eq!(pop.insert_or_merge(other), Placement::Inserted(1));
    }

    #[test]
    fn deletion_restores_capacity() {
        let mut p = params();
        p.population_size = 3;
        let rules: Vec<FuzzyRule> = (0..5).map(|k| rule(vec![TermSet::single(k)], 0)).collect();
        let mut pop = Population::from_rules(rules);
        deletion(&mut pop, &p, &mut rng(2));
        assert_eq!(pop.micro_size(), 3);

        let mut pop = Population::from_rules((0..3).map(|k| rule(vec![TermSet::single(k)], 0)).collect());
        deletion(&mut pop, &p, &mut rng(2));
        assert_eq!(pop.micro_size(), 3);
    }

    /// Chi-square statistic with one degree of freedom.
    fn chi_square(observed: [f64; 2], expected_p: [f64; 2]) -> f64 {
        let n = observed[0] + observed[1];
        observed
            .iter()
            .zip(expected_p)
            .map(|(o, p)| (o - n * p).powi(2) / (n * p))
            .sum()
    }

    #[test]
    fn deletion_is_numerosity_proportional() {
        let mut a = rule(vec![TermSet::single(0)], 0);
        a.numerosity = 2;
        let pop = Population::from_rules(vec![a, rule(vec![TermSet::single(1)], 0)]);
        let votes = deletion_votes(&pop, &params());
        assert_eq!(votes, vec![2.0, 1.0]);
        let mut g = rng(11);
        let mut counts = [0.0; 2];
        for _ in 0..10_000 {
            counts[roulette(&votes, &mut g).unwrap()] += 1.0;
        }
        // 10.83 is the 0.1% critical value at one degree of freedom
        assert!(chi_square(counts, [2.0 / 3.0, 1.0 / 3.0]) < 10.83, "{counts:?}");
    }

    #[test]
    fn deletion_penalizes_experienced_unfit_rules() {
        let mut weak = rule(vec![TermSet::single(0)], 0);
        weak.experience = 100.0;
        weak.fitness = 0.01;
        let fresh = rule(vec![TermSet::single(1)], 0);
        let pop = Population::from_rules(vec![weak, fresh]);
        let votes = deletion_votes(&pop, &params());
        // mean fitness (0.01 + 1) / 2; penalty = mean / 0.01
        let mean = 1.01 / 2.0;
        assert!((votes[0] - mean / 0.01).abs() < 1e-9);
        assert_eq!(votes[1], 1.0);
        let total = votes[0] + votes[1];
        let mut g = rng(13);
        let mut counts = [0.0; 2];
        for _ in 0..10_000 {
            counts[roulette(&votes, &mut g).unwrap()] += 1.0;
        }
        assert!(chi_square(counts, [votes[0] / total, votes[1] / total]) < 10.83, "{counts:?}");
    }

    #[test]
    fn correct_set_subsumption_examples() {
        // no accurate rule
        let mut t = Trainer::new(params(), 1, 2, 0)
            .unwrap()
            .with_population(Population::from_rules(vec![rule(dc(1), 0), rule(vec![TermSet::single(M)], 0)]));
        assert_eq!(t.correct_set_subsumption(&[0, 1]), 0);

        // general accurate rule absorbs three specializations, not the other class
        let mut rules = vec![accurate(dc(2), 0, 100.0)];
        for k in 0..3 {
            let mut r = rule(vec![TermSet::single(k), TermSet::single(M)], 0);
            r.numerosity = k as u32 + 1;
            rules.push(r);
        }
        rules.push(rule(vec![TermSet::single(M); 2], 1));
        let mut t = Trainer::new(params(), 2, 2, 0)
            .unwrap()
            .with_population(Population::from_rules(rules));
        let micro = t.population().micro_size();
        assert_eq!(t.correct_set_subsumption(&[0, 1, 2, 3, 4]), 3);
        assert_eq!(t.population().rules()[0].numerosity, 7);
        assert_eq!(t.population().micro_size(), micro);
        t.population_mut().purge();
        assert_eq!(t.population().macro_size(), 2);
    }

    #[test]
    fn first_point_is_covered() {
        let mut t = Trainer::new(params(), 2, 2, 0).unwrap();
        let rep = t.train_step(&[Some(0.2), Some(0.9)], 1).unwrap();
        assert!(rep.covered);
        assert_eq!(t.population().macro_size(), 1);
        let r = &t.population().rules()[0];
        let deg = p5().rule_matching_degree(&r.antecedent, &[Some(0.2), Some(0.9)]).unwrap();
        assert!((deg - 1.0).abs() <= 1e-12);
        assert_eq!(r.experience, 1.0);
        assert_eq!(t.time(), 1);
        // the same point is now fully covered
        let rep = t.train_step(&[Some(0.2), Some(0.9)], 1).unwrap();
        assert!(!rep.covered);
        assert!(t.train_step(&[Some(0.2), Some(0.9)], 2).is_err());
        assert!(t.train_step(&[Some(0.2)], 0).is_err());
    }

    #[test]
    fn capacity_holds_on_a_toy_problem() {
        let mut p = params();
        p.population_size = 50;
        let mut t = Trainer::new(p, 2, 2, 4).unwrap();
        let mut g = rng(8);
        for _ in 0..100 {
            let x = [Some(g.gen::<f64>()), Some(g.gen::<f64>())];
            let c = usize::from(x[0].unwrap() > x[1].unwrap());
            t.train_step(&x, c).unwrap();
            assert!(t.population().micro_size() <= 50);
        }
    }

    #[test]
    fn unit_and_membership_modes_agree_with_full_matches() {
        let mut unit = params();
        unit.experience_mode = ExperienceMode::Unit;
        assert_eq!(
            unit.update_mode(),
            UpdateMode { experience: ExperienceMode::Unit, fitness: FitnessMode::Signed }
        );
        let mut a = Trainer::new(params(), 2, 2, 3).unwrap();
        let mut b = Trainer::new(unit, 2, 2, 3).unwrap();
        let mut g = rng(1);
        for _ in 0..500 {
            let x = [Some(g.gen_range(0..5) as f64 / 4.0), Some(g.gen_range(0..5) as f64 / 4.0)];
            let c = usize::from(x[0].unwrap() + x[1].unwrap() > 1.0);
            a.train_step(&x, c).unwrap();
            b.train_step(&x, c).unwrap();
        }
        assert_eq!(a.population(), b.population());
    }

    #[test]
    fn model_save_load_round_trip() {
        let data = crate::data::gen_rmaj(200, 1);
        let mut p = params();
        p.population_size = 200;
        let model = train(&data, &p, 2, 9).unwrap();
        let mut buf = Vec::new();
        model.save(&mut buf).unwrap();
        let back = TrainedModel::load(buf.as_slice()).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.header.dimension, 11);
        assert_eq!(back.header.num_terms, 5);
        assert_eq!(back.header.config_hash.len(), 64);
    }
}
