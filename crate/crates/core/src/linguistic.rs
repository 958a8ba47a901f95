//! Homogeneous triangular partitions of `[0, 1]` and fuzzy matching.
//!
//! A partition with `L` terms places term `j` (0-based) at peak
//! `p_j = j / (L - 1)` with support half-width `h = 1 / (L - 1)`, so
//! neighbouring triangles cross at 0.5 and the memberships at any point sum
//! to one. With the default `L = 5` the terms read vS, S, M, L, vL.
//!
//! A rule antecedent holds one [`TermSet`] per input variable. A term set's
//! membership is the bounded sum `min(1, sum_j mu_j(x))` of its terms, which
//! makes the full set (Don't Care) match everything with degree 1. The
//! matching degree of a whole antecedent is the product over variables,
//! with missing values contributing 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TERMS: usize = 5;
/// Term sets are `u32` bitmasks.
pub const MAX_TERMS: usize = 32;

const FIVE_TERM_LABELS: [&str; 5] = ["vS", "S", "M", "L", "vL"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinguisticPartition {
    num_terms: usize,
}

impl Default for LinguisticPartition {
    fn default() -> Self {
        LinguisticPartition {
            num_terms: DEFAULT_TERMS,
        }
    }
}

impl LinguisticPartition {
    pub fn new(num_terms: usize) -> Result<Self> {
        if !(2..=MAX_TERMS).contains(&num_terms) {
            return Err(Error::input(format!(
                "a partition needs between 2 and {MAX_TERMS} terms, got {num_terms}"
            )));
        }
        Ok(LinguisticPartition { num_terms })
    }

    pub fn num_terms(&self) -> usize {
        self.num_terms
    }

    pub fn peak(&self, term: usize) -> f64 {
        term as f64 / (self.num_terms - 1) as f64
    }

    pub fn half_width(&self) -> f64 {
        1.0 / (self.num_terms - 1) as f64
    }

    pub fn label(&self, term: usize) -> String {
        if self.num_terms == FIVE_TERM_LABELS.len() && term < FIVE_TERM_LABELS.len() {
            FIVE_TERM_LABELS[term].to_string()
        } else {
            format!("T{term}")
        }
    }

    /// The Don't Care term set for this partition.
    pub fn dont_care(&self) -> TermSet {
        TermSet::full(self.num_terms)
    }

    /// Triangular membership `max(0, 1 - |x - p_j| / h)` of `x` in term `term`.
    pub fn term_membership(&self, term: usize, x: f64) -> Result<f64> {
        check_unit(x)?;
        if term >= self.num_terms {
            return Err(Error::input(format!(
                "term index {term} outside partition of {} terms",
                self.num_terms
            )));
        }
        Ok(self.membership_unchecked(term, x))
    }

    #[inline]
    fn membership_unchecked(&self, term: usize, x: f64) -> f64 {
        let scaled = (x - self.peak(term)).abs() * (self.num_terms - 1) as f64;
        (1.0 - scaled).max(0.0)
    }

    /// The (at most two) terms with nonzero membership at `x`.
    pub fn profile(&self, x: f64) -> Result<TermProfile> {
        check_unit(x)?;
        Ok(self.profile_unchecked(x))
    }

    fn profile_unchecked(&self, x: f64) -> TermProfile {
        let top = self.num_terms - 1;
        let lower = ((x * top as f64).floor() as usize).min(top - 1);
        TermProfile {
            lower,
            lower_degree: self.membership_unchecked(lower, x),
            upper_degree: self.membership_unchecked(lower + 1, x),
        }
    }

    /// Bounded-sum membership of `x` in a term set.
    pub fn termset_membership(&self, terms: TermSet, x: f64) -> Result<f64> {
        check_unit(x)?;
        self.check_termset(terms)?;
        let sum: f64 = terms
            .terms()
            .map(|j| self.membership_unchecked(j, x))
            .sum();
        Ok(sum.min(1.0))
    }

    pub(crate) fn check_termset(&self, terms: TermSet) -> Result<()> {
        if terms.is_empty() {
            return Err(Error::input("empty term set"));
        }
        if terms.bits() >> self.num_terms != 0 {
            return Err(Error::input(format!(
                "term set {:?} references terms beyond a partition of {}",
                terms.terms().collect::<Vec<_>>(),
                self.num_terms
            )));
        }
        Ok(())
    }

    /// Product matching degree of an antecedent against an input vector.
    /// `None` cells are missing values and match with degree 1.
    pub fn rule_matching_degree(&self, antecedent: &[TermSet], x: &[Option<f64>]) -> Result<f64> {
        if antecedent.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: antecedent.len(),
                found: x.len(),
            });
        }
        let mut degree = 1.0;
        for (&terms, &cell) in antecedent.iter().zip(x) {
            if let Some(v) = cell {
                degree *= self.termset_membership(terms, v)?;
            } else {
                self.check_termset(terms)?;
            }
        }
        Ok(degree)
    }
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::input(format!("value {x} outside [0, 1]")))
    }
}

/// Memberships of a scalar in the two adjacent terms `lower` and `lower + 1`;
/// every other term has membership 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermProfile {
    pub lower: usize,
    pub lower_degree: f64,
    pub upper_degree: f64,
}

impl TermProfile {
    #[inline]
    pub fn degree(&self, terms: TermSet) -> f64 {
        let bits = terms.bits() >> self.lower;
        if bits & 3 == 3 {
            // both neighbours: the strong partition sums to exactly one
            return 1.0;
        }
        let mut sum = 0.0;
        if bits & 1 != 0 {
            sum += self.lower_degree;
        }
        if bits & 2 != 0 {
            sum += self.upper_degree;
        }
        sum.min(1.0)
    }

    /// Terms with strictly positive membership.
    pub fn support(&self) -> TermSet {
        let mut bits = 0u32;
        if self.lower_degree > 0.0 {
            bits |= 1 << self.lower;
        }
        if self.upper_degree > 0.0 {
            bits |= 1 << (self.lower + 1);
        }
        TermSet(bits)
    }
}

/// An input vector pre-resolved against a partition, so that matching many
/// rules costs one table lookup per variable.
#[derive(Debug, Clone)]
pub struct InputProfile {
    cells: Vec<Option<TermProfile>>,
}

impl InputProfile {
    pub fn new(partition: &LinguisticPartition, x: &[Option<f64>]) -> Result<Self> {
        let cells = x
            .iter()
            .map(|cell| cell.map(|v| partition.profile(v)).transpose())
            .collect::<Result<Vec<_>>>()?;
        Ok(InputProfile { cells })
    }

    pub fn dimension(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Option<TermProfile>] {
        &self.cells
    }

    /// Matching degree of an antecedent of the same dimension. Stops early
    /// once the product hits zero.
    #[inline]
    pub fn degree(&self, antecedent: &[TermSet]) -> f64 {
        debug_assert_eq!(antecedent.len(), self.cells.len());
        let mut degree = 1.0;
        for (terms, cell) in antecedent.iter().zip(&self.cells) {
            if let Some(profile) = cell {
                degree *= profile.degree(*terms);
                if degree == 0.0 {
                    return 0.0;
                }
            }
        }
        degree
    }
}

/// A nonempty set of linguistic terms, stored as a bitmask over term indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub struct TermSet(u32);

impl TermSet {
    pub fn from_terms(terms: &[usize]) -> Result<Self> {
        let mut bits = 0u32;
        for &t in terms {
            if t >= MAX_TERMS {
                return Err(Error::input(format!("term index {t} exceeds {MAX_TERMS}")));
            }
            bits |= 1 << t;
        }
        Self::from_bits(bits)
    }

    pub fn from_bits(bits: u32) -> Result<Self> {
        if bits == 0 {
            Err(Error::input("empty term set"))
        } else {
            Ok(TermSet(bits))
        }
    }

    pub fn single(term: usize) -> Self {
        assert!(term < MAX_TERMS);
        TermSet(1 << term)
    }

    pub fn full(num_terms: usize) -> Self {
        assert!((1..=MAX_TERMS).contains(&num_terms));
        TermSet(if num_terms == MAX_TERMS {
            u32::MAX
        } else {
            (1u32 << num_terms) - 1
        })
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, term: usize) -> bool {
        term < MAX_TERMS && self.0 & (1 << term) != 0
    }

    pub fn is_full(self, num_terms: usize) -> bool {
        self == TermSet::full(num_terms)
    }

    pub fn is_superset_of(self, other: TermSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn union(self, other: TermSet) -> TermSet {
        TermSet(self.0 | other.0)
    }

    /// Flip one term's inclusion; `None` if that would empty the set.
    pub fn toggled(self, term: usize) -> Option<TermSet> {
        let bits = self.0 ^ (1 << term);
        (bits != 0).then_some(TermSet(bits))
    }

    pub fn terms(self) -> impl Iterator<Item = usize> {
        (0..MAX_TERMS).filter(move |&t| self.0 & (1 << t) != 0)
    }
}

impl std::fmt::Debug for TermSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.terms()).finish()
    }
}

impl From<TermSet> for Vec<usize> {
    fn from(t: TermSet) -> Self {
        t.terms().collect()
    }
}

impl TryFrom<Vec<usize>> for TermSet {
    type Error = Error;

    fn try_from(terms: Vec<usize>) -> Result<Self> {
        TermSet::from_terms(&terms)
    }
}
