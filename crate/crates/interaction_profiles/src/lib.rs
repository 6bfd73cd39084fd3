//! Inference of pairwise temporal interaction profiles from ordered
//! exposure/contagion sequences.
//!
//! A corpus is a set of sequences; each sequence is an ordered list of
//! exposures to entities, each exposure carrying a binary outcome (the
//! *contagion*: a retweet, a click, a choice). The model assigns every
//! ordered entity pair `(x, y)` a nonnegative coefficient vector `beta`
//! over a kernel feature map `phi(gap)`, defining the hazard
//!
//! ```text
//! H(x | y at gap d) = exp(-beta_xy . phi(d))
//! ```
//!
//! i.e. the probability that an exposure to `x` turns into a contagion
//! given that `y` appeared `d` steps earlier. Fitting maximizes a Bernoulli
//! likelihood over all (target, source, gap) observations; the problem is
//! convex and splits into one independent subproblem per target entity,
//! solved by projected gradient descent under `beta >= 0`.
//!
//! The crate covers the full pipeline: observation assembly
//! ([`data`]), kernel families ([`kernels`]), likelihood and gradients
//! ([`likelihood`]), the solver ([`solver`]), a seeded synthetic-sequence
//! generator ([`synth`]), baseline predictors ([`baselines`]), evaluation
//! metrics ([`metrics`]), a cross-validation harness ([`evaluation`]) and
//! text file formats plus a small CLI ([`io`], [`cli`]).
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod baselines;
pub mod cli;
pub mod data;
pub mod evaluation;
pub mod io;
pub mod kernels;
pub mod likelihood;
pub mod metrics;
pub mod solver;
pub mod synth;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// The input corpus or observation set is empty.
    #[error("no data")]
    NoData,

    /// An event references an entity index outside the vocabulary.
    #[error("unknown entity index {index} (vocabulary size {vocab_size})")]
    UnknownEntity { index: u32, vocab_size: usize },

    /// A duplicate label was inserted into a vocabulary.
    #[error("duplicate entity label {label:?}")]
    DuplicateLabel { label: String },

    /// A sequence must contain at least one event.
    #[error("empty sequence")]
    EmptySequence,

    /// Coefficient vector rejected: wrong length, negative entry, or
    /// background below the floor.
    #[error("invalid beta vector: {reason}")]
    InvalidBeta { reason: String },

    /// A parameter point violated `beta >= 0` or the background floor.
    #[error("infeasible point")]
    InfeasiblePoint,

    /// NLL or gradient evaluated to a non-finite value at a feasible point.
    #[error("numerical failure: {context}")]
    NumericalFailure { context: String },

    /// Queried a pair absent from a fitted beta matrix.
    #[error("pair not fitted: ({target}, {origin})")]
    PairNotFitted { target: u32, origin: u32 },

    /// Beta matrices cannot be compared (different kernels or pair sets).
    #[error("incomparable matrices: {reason}")]
    IncomparableMatrices { reason: String },

    /// A configuration struct violates its invariants.
    #[error("invalid configuration: {reason}")]
    InvalidConfig { reason: String },

    /// A subproblem fit failed; carries the target entity index.
    #[error("subproblem for target {target} failed: {source}")]
    SubproblemFailed {
        target: u32,
        #[source]
        source: Box<Error>,
    },

    /// Cross-validation needs at least as many sequences as folds.
    #[error("sequenceCount < foldCount ({sequences} < {folds})")]
    TooFewSequences { sequences: usize, folds: usize },

    /// A fold's test split produced no observations.
    #[error("degenerate fold {fold}: empty test observation set")]
    DegenerateFold { fold: usize },

    /// Text format parse failure with a 1-based line number.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Strict-mode loader rejected a label outside the supplied vocabulary.
    #[error("line {line}: unknown entity label {label:?} (strict mode)")]
    UnknownLabel { line: usize, label: String },

    /// I/O failure wrapping the underlying error with the path involved.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
