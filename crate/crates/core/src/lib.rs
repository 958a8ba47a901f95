//! # fuzzy-ucs
//!
//! A Michigan-style learning fuzzy-classifier system (Fuzzy-UCS) with three
//! interchangeable class-inference schemes:
//!
//! * **vote**: per-class sums of `mu * F * num` over the match set,
//! * **swin**: the class of the single rule maximizing `mu * F`,
//! * **ds**: every matching rule contributes a belief assignment over the
//!   singleton classes and total ignorance; the assignments are fused with
//!   Dempster's rule (Yager's rule on total conflict) and the class with the
//!   highest pignistic probability wins.
//!
//! Training is supervised and online: covering creates rules that fully match
//! the current input, matched rules update their class weights, and a
//! steady-state GA with subsumption and deletion evolves the ruleset.
//!
//! ```
//! use fuzzy_ucs::prelude::*;
//!
//! let data = gen_rmaj(300, 7);
//! let params = Hyperparameters::default();
//! let model = train(&data, &params, 2, 42).unwrap();
//! let mut rng = stream_rng(42, Stream::TieBreak(Scheme::Ds));
//! let report = evaluate(&model, &data, Scheme::Ds, params.theta_exploit, &mut rng).unwrap();
//! assert!(report.micro_rules <= params.population_size);
//! ```

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod data;
pub mod error;
pub mod evidence;
pub mod experiment;
pub mod grid;
pub mod inference;
pub mod learner;
pub mod linguistic;
pub mod metrics;
pub mod rng;
pub mod rules;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::config::{ExperimentConfig, Hyperparameters};
    pub use crate::data::{
        encode_and_normalize, gen_rcar, gen_rmaj, gen_rmux, load_csv, shuffle_split, Dataset,
        SplitPlan,
    };
    pub use crate::evidence::{combine_all, pignistic, BeliefAssignment};
    pub use crate::inference::{classify, explain_ds, InferenceOutcome, Scheme};
    pub use crate::learner::{train, Population, TrainedModel, Trainer};
    pub use crate::linguistic::{LinguisticPartition, TermSet};
    pub use crate::metrics::{accuracy, evaluate, macro_f1, EvalReport};
    pub use crate::rng::{stream_rng, Stream};
    pub use crate::rules::{ExperienceMode, FitnessMode, FuzzyRule, UpdateMode};
}
