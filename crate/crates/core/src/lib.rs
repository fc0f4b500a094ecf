//! Logarithmically asymptotically optimal (LAO) error exponents for testing
//! many hypotheses about discrete distributions.
//!
//! The crate is organised bottom-up:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`simplex`] | distributions, empirical types, entropy, divergence, type-class probabilities, sampling |
//! | [`projection`] | divergence minimisation over divergence balls and their complements, plus a grid oracle |
//! | [`single`] | single-object LAO tests: compatibility, reliability matrix, decision rules, identification, rejection |
//! | [`multi`] | compound tests for independent objects, renumbering, pair identification, statistically dependent pairs |
//! | [`empirics`] | exact finite-N error probabilities, Monte Carlo estimates, exponent fits |
//! | [`extended`] | serde helpers writing `+inf` as `"inf"` |
//!
//! All exponents are reported in the logarithm base carried by [`LogBase`]
//! (bits by default). `f64::INFINITY` is a legitimate exponent value.

pub mod empirics;
pub mod extended;
pub mod multi;
pub mod projection;
pub mod simplex;
pub mod single;

pub use empirics::{
    exact_error_matrix, exponent_fit, fit_entry, mc_error_matrix, sandwich_check,
    wilson_interval, EntryFit, ErrorMatrixExact, ExponentFit, McEstimate, SandwichEntry,
};
pub use multi::{
    compound_lao, compound_reliability, dependent_pair_lao, identify_pair,
    compound_sweep, pair_identification_exponent, product_hypothesis, renumbered_family,
    CompoundLao, CompoundReliability, CompoundRule, CompoundSpec, DependentPairFamily,
    DependentPairLao, DependentPairSpec, SweepAxis, SweepPoint, SweepProbe,
};
pub use projection::{
    discretization_bound, grid_oracle_min_div, min_div_in_ball, min_div_outside_balls,
    BallConstraint, GridPoint, OracleResult, ProjectionResult, ProjectionStatus,
    SolverTolerances, SOLVER,
};
pub use simplex::{
    divergence, empirical_type, entropy, enumerate_types, sample, type_class_log_prob, type_count,
    Alphabet,
    Distribution, EmpiricalType, LogBase, Sample, TypeIter,
};
pub use single::{
    build_rule, check_compatibility, classify, compatible_spec, identification_condition,
    identification_reliability, rejection_reliability_matrix, rejection_rule, reliability_matrix,
    BindingTerm, Classifier, CompatibilityCondition, CompatibilityReport, DecisionRule,
    DiagonalSpec, HypothesisFamily, IdentificationCheck, RejectionMatrix, RejectionSpec,
    ReliabilityMatrix,
};

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("alphabet mismatch: expected {expected} symbols, found {found}")]
    AlphabetMismatch { expected: usize, found: usize },

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("radius must be a nonnegative number, got {0}")]
    NegativeRadius(f64),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("hypotheses {first} and {second} are not distinct (divergence {divergence:e})")]
    NotDistinct {
        first: usize,
        second: usize,
        divergence: f64,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("size guard exceeded: {0}")]
    GuardExceeded(String),

    #[error("region is empty: {0}")]
    EmptyRegion(String),

    #[error("precondition violated ({condition}): {detail}")]
    Precondition { condition: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;
