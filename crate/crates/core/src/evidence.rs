//! Belief assignments over the restricted core `{θ_1}, ..., {θ_n}, Θ`.
//!
//! Each matching rule contributes `m({θ_i}) = mu * v_i` and puts the rest on
//! total ignorance `Θ`. Under the conjunctive rule this family is closed: the
//! intersection of two singletons is either the singleton or empty, and
//! anything intersected with `Θ` is unchanged, so combination never creates
//! meta-class masses. The exponential power-set version lives in [`oracle`]
//! and is only used to check the fast path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalization tolerance for mass vectors.
pub const MASS_TOLERANCE: f64 = 1e-9;
/// Conflict at or above `1 - TOTAL_CONFLICT_EPS` counts as total conflict
/// and falls back to Yager's rule.
pub const TOTAL_CONFLICT_EPS: f64 = 1e-12;

/// A normalized belief assignment: `sum(singletons) + ignorance = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefAssignment {
    singletons: Vec<f64>,
    ignorance: f64,
}

impl BeliefAssignment {
    pub fn new(singletons: Vec<f64>, ignorance: f64) -> Result<Self> {
        if singletons.is_empty() {
            return Err(Error::input("belief assignment over an empty frame"));
        }
        if singletons.iter().chain([&ignorance]).any(|&m| !(m >= 0.0)) {
            return Err(Error::input("belief masses must be nonnegative"));
        }
        let total: f64 = singletons.iter().sum::<f64>() + ignorance;
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::input(format!("belief masses sum to {total}, not 1")));
        }
        Ok(BeliefAssignment {
            singletons,
            ignorance,
        })
    }

    /// Total ignorance: `m(Θ) = 1`.
    pub fn vacuous(num_classes: usize) -> Self {
        assert!(num_classes > 0);
        BeliefAssignment {
            singletons: vec![0.0; num_classes],
            ignorance: 1.0,
        }
    }

    /// Evidence of one rule matching with degree `mu` and class weights `v`
    /// (which must sum to one).
    pub fn from_rule(mu: f64, weights: &[f64]) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::input(format!("rule weights sum to {sum}, not 1")));
        }
        Self::from_partial_rule(mu, weights)
    }

    /// Like [`from_rule`](Self::from_rule) but accepts weights summing to
    /// less than one, as produced by unit experience updates. The shortfall
    /// goes to `Θ` together with `1 - mu`.
    pub fn from_partial_rule(mu: f64, weights: &[f64]) -> Result<Self> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::input(format!("matching degree {mu} outside [0, 1]")));
        }
        if weights.is_empty() || weights.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::input("rule weights must be nonnegative"));
        }
        let sum: f64 = weights.iter().sum();
        if sum > 1.0 + MASS_TOLERANCE {
            return Err(Error::input(format!("rule weights sum to {sum} > 1")));
        }
        let singletons: Vec<f64> = weights.iter().map(|v| mu * v).collect();
        let ignorance = if sum == 1.0 {
            1.0 - mu
        } else {
            (1.0 - singletons.iter().sum::<f64>()).max(0.0)
        };
        Ok(BeliefAssignment {
            singletons,
            ignorance,
        })
    }

    pub fn num_classes(&self) -> usize {
        self.singletons.len()
    }

    pub fn singletons(&self) -> &[f64] {
        &self.singletons
    }

    pub fn ignorance(&self) -> f64 {
        self.ignorance
    }

    pub fn is_vacuous(&self) -> bool {
        self.ignorance == 1.0
    }

    pub fn pignistic(&self) -> Vec<f64> {
        pignistic(self)
    }
}

/// The output of the conjunctive rule before normalization; `conflict` is
/// the mass accumulated on the empty set.
#[derive(Debug, Clone, PartialEq)]
pub struct UnnormalizedAssignment {
    pub singletons: Vec<f64>,
    pub ignorance: f64,
    pub conflict: f64,
}

impl UnnormalizedAssignment {
    pub fn vacuous(num_classes: usize) -> Self {
        UnnormalizedAssignment {
            singletons: vec![0.0; num_classes],
            ignorance: 1.0,
            conflict: 0.0,
        }
    }

    pub fn retained_mass(&self) -> f64 {
        self.singletons.iter().sum::<f64>() + self.ignorance
    }

    pub fn is_total_conflict(&self) -> bool {
        self.conflict >= 1.0 - TOTAL_CONFLICT_EPS
    }

    /// Dempster normalization, or Yager's rule on total conflict.
    pub fn normalize(&self) -> BeliefAssignment {
        let n = self.singletons.len();
        if self.is_total_conflict() {
            return BeliefAssignment::vacuous(n);
        }
        let retained = self.retained_mass();
        BeliefAssignment {
            singletons: self.singletons.iter().map(|b| b / retained).collect(),
            ignorance: self.ignorance / retained,
        }
    }
}

impl From<&BeliefAssignment> for UnnormalizedAssignment {
    fn from(m: &BeliefAssignment) -> Self {
        UnnormalizedAssignment {
            singletons: m.singletons.clone(),
            ignorance: m.ignorance,
            conflict: 0.0,
        }
    }
}

/// Conjunctive rule of combination restricted to singletons plus `Θ`.
pub fn conjunctive_combine(
    acc: &UnnormalizedAssignment,
    m: &BeliefAssignment,
) -> Result<UnnormalizedAssignment> {
    if acc.singletons.len() != m.num_classes() {
        return Err(Error::DimensionMismatch {
            expected: acc.singletons.len(),
            found: m.num_classes(),
        });
    }
    let (singletons, ignorance, lost) = conjunctive_step(&acc.singletons, acc.ignorance, m);
    Ok(UnnormalizedAssignment {
        singletons,
        ignorance,
        conflict: (acc.conflict + lost).min(1.0),
    })
}

/// One restricted conjunctive step. Returns the new singleton masses, the
/// new ignorance and the mass that landed on the empty set.
fn conjunctive_step(b: &[f64], theta: f64, m: &BeliefAssignment) -> (Vec<f64>, f64, f64) {
    let mut out = Vec::with_capacity(b.len());
    let mut same = 0.0;
    for (&bi, &mi) in b.iter().zip(&m.singletons) {
        same += bi * mi;
        out.push(bi * mi + bi * m.ignorance + theta * mi);
    }
    let sum_a: f64 = b.iter().sum();
    let sum_m: f64 = m.singletons.iter().sum();
    let lost = (sum_a * sum_m - same).max(0.0);
    (out, theta * m.ignorance, lost)
}

/// Result of fusing a list of assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct Combination {
    pub assignment: BeliefAssignment,
    /// Total conflict mass `K` of the unnormalized conjunctive sum.
    pub conflict: f64,
    /// Whether Yager's rule replaced Dempster's.
    pub yager: bool,
}

/// Fuse assignments with Dempster's rule, falling back to Yager's rule when
/// the evidence is in total conflict.
pub fn combine_all(assignments: &[BeliefAssignment]) -> Result<BeliefAssignment> {
    combine_all_detailed(assignments).map(|c| c.assignment)
}

/// [`combine_all`] with the conflict bookkeeping.
///
/// The fold renormalizes after every pairwise step. Keeping the running
/// assignment normalized avoids underflow when a large match set loses most
/// of its mass to conflict; the overall conflict is `1 - prod(retained_s)`.
/// Total conflict is declared when a single step retains at most
/// `TOTAL_CONFLICT_EPS` of the mass (an exact zero overall requires some
/// step to retain exactly zero).
pub fn combine_all_detailed(assignments: &[BeliefAssignment]) -> Result<Combination> {
    let first = assignments
        .first()
        .ok_or_else(|| Error::input("cannot combine an empty list of assignments"))?;
    let n = first.num_classes();
    let mut b = vec![0.0; n];
    let mut theta = 1.0;
    let mut log_retained = 0.0f64;
    for m in assignments {
        if m.num_classes() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.num_classes(),
            });
        }
        let (next, next_theta, _) = conjunctive_step(&b, theta, m);
        let retained: f64 = next.iter().sum::<f64>() + next_theta;
        if retained <= TOTAL_CONFLICT_EPS {
            return Ok(Combination {
                assignment: BeliefAssignment::vacuous(n),
                conflict: 1.0,
                yager: true,
            });
        }
        log_retained += retained.ln();
        b = next.into_iter().map(|x| x / retained).collect();
        theta = next_theta / retained;
    }
    Ok(Combination {
        assignment: BeliefAssignment {
            singletons: b,
            ignorance: theta,
        },
        conflict: -log_retained.exp_m1(),
        yager: false,
    })
}

/// Deferred-normalization fold: accumulate the unnormalized conjunctive sum
/// and normalize once at the end.
pub fn combine_all_deferred(assignments: &[BeliefAssignment]) -> Result<BeliefAssignment> {
    let first = assignments
        .first()
        .ok_or_else(|| Error::input("cannot combine an empty list of assignments"))?;
    let mut acc = UnnormalizedAssignment::vacuous(first.num_classes());
    for m in assignments {
        acc = conjunctive_combine(&acc, m)?;
    }
    Ok(acc.normalize())
}

/// Pairwise Dempster combination.
pub fn dempster_combine(a: &BeliefAssignment, b: &BeliefAssignment) -> Result<BeliefAssignment> {
    let acc = conjunctive_combine(&UnnormalizedAssignment::from(a), b)?;
    Ok(acc.normalize())
}

/// Pignistic probabilities `BetP(θ_i) = m({θ_i}) + m(Θ) / n`.
pub fn pignistic(m: &BeliefAssignment) -> Vec<f64> {
    let share = m.ignorance / m.num_classes() as f64;
    m.singletons.iter().map(|b| b + share).collect()
}

/// Brute-force belief algebra over the full power set `2^Θ`, for frames of
/// at most [`oracle::MAX_FRAME`] hypotheses. Subsets are bitmasks; index 0
/// is the empty set.
pub mod oracle {
    use super::*;

    pub const MAX_FRAME: usize = 5;

    #[derive(Debug, Clone, PartialEq)]
    pub struct PowerSetMass {
        n: usize,
        masses: Vec<f64>,
    }

    impl PowerSetMass {
        /// A mass function satisfying `m >= 0`, `m(∅) = 0`, `sum m = 1`.
        pub fn new(n: usize, masses: Vec<f64>) -> Result<Self> {
            check_frame(n)?;
            if masses.len() != 1 << n {
                return Err(Error::DimensionMismatch {
                    expected: 1 << n,
                    found: masses.len(),
                });
            }
            if masses.iter().any(|&m| !(m >= 0.0)) || masses[0] != 0.0 {
                return Err(Error::input("masses must be nonnegative with m(∅) = 0"));
            }
            let total: f64 = masses.iter().sum();
            if (total - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::input(format!("masses sum to {total}")));
            }
            Ok(PowerSetMass { n, masses })
        }

        pub fn from_restricted(m: &BeliefAssignment) -> Result<Self> {
            let n = m.num_classes();
            check_frame(n)?;
            let mut masses = vec![0.0; 1 << n];
            for (i, &b) in m.singletons().iter().enumerate() {
                masses[1 << i] = b;
            }
            masses[(1 << n) - 1] = m.ignorance();
            Ok(PowerSetMass { n, masses })
        }

        pub fn n(&self) -> usize {
            self.n
        }

        pub fn mass(&self, subset: usize) -> f64 {
            self.masses[subset]
        }

        pub fn masses(&self) -> &[f64] {
            &self.masses
        }

        pub fn theta(&self) -> usize {
            (1 << self.n) - 1
        }

        /// Mass on subsets that are neither singletons nor `Θ`.
        pub fn meta_class_mass(&self) -> f64 {
            (1..self.theta())
                .filter(|s: &usize| s.count_ones() > 1)
                .map(|s| self.masses[s])
                .sum()
        }

        /// `BetP(θ) = sum over A containing θ of m(A) / |A|`, over the
        /// non-empty subsets.
        pub fn pignistic(&self) -> Vec<f64> {
            (0..self.n)
                .map(|i| {
                    (1..=self.theta())
                        .filter(|a| a & (1 << i) != 0)
                        .map(|a| self.masses[a] / a.count_ones() as f64)
                        .sum()
                })
                .collect()
        }
    }

    /// Unnormalized conjunctive combination: `masses[∅]` is left at zero and
    /// the conflict is reported separately.
    #[derive(Debug, Clone, PartialEq)]
    pub struct PowerSetCombination {
        pub masses: PowerSetMass,
        pub conflict: f64,
    }

    impl PowerSetCombination {
        pub fn dempster(&self) -> PowerSetMass {
            let scale = 1.0 - self.conflict;
            PowerSetMass {
                n: self.masses.n,
                masses: self.masses.masses.iter().map(|m| m / scale).collect(),
            }
        }
    }

    fn check_frame(n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::input("empty frame"));
        }
        if n > MAX_FRAME {
            return Err(Error::Refused(format!(
                "power-set combination over {n} hypotheses ({} subsets)",
                1usize << n
            )));
        }
        Ok(())
    }

    /// `(m1 ∩ m2)(A) = sum over B ∩ C = A of m1(B) m2(C)`.
    pub fn powerset_combine_oracle(m1: &PowerSetMass, m2: &PowerSetMass) -> Result<PowerSetCombination> {
        if m1.n != m2.n {
            return Err(Error::DimensionMismatch {
                expected: m1.n,
                found: m2.n,
            });
        }
        check_frame(m1.n)?;
        let size = 1 << m1.n;
        let mut out = vec![0.0; size];
        for b in 0..size {
            for c in 0..size {
                out[b & c] += m1.masses[b] * m2.masses[c];
            }
        }
        let conflict = out[0];
        out[0] = 0.0;
        Ok(PowerSetCombination {
            masses: PowerSetMass { n: m1.n, masses: out },
            conflict,
        })
    }
}
