//! Cross-validation harness: sequence-level fold planning and the
//! fit/evaluate loop producing per-fold and aggregated metric reports.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::{fit_icir, fit_kernel_model, fit_naive, EmpiricalPredictor, Predictor};
use crate::data::{assemble_observations_with, AssemblyOptions, Corpus, ObservationSet};
use crate::kernels::{BetaMatrix, BetaVector, KernelSpec};
use crate::metrics::{mse_beta, EvalReport};
use crate::solver::SolverConfig;
use crate::{Error, Result};

/// Assignment of every sequence to exactly one test fold.
#[derive(Debug, Clone)]
pub struct FoldPlan {
    fold_count: usize,
    assignment: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    pub fn fold_count(&self) -> usize {
        self.fold_count
    }

    /// Fold id per sequence index.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }
}

/// Shuffles sequence indices with the seed and deals them round-robin
/// into `fold_count` folds, so fold sizes differ by at most one.
pub fn plan_folds(sequence_count: usize, fold_count: usize, seed: u64) -> Result<FoldPlan> {
    if fold_count < 1 {
        return Err(Error::InvalidConfig {
            reason: "fold_count must be at least 1".into(),
        });
    }
    if sequence_count < fold_count {
        return Err(Error::TooFewSequences {
            sequences: sequence_count,
            folds: fold_count,
        });
    }
    let mut order: Vec<usize> = (0..sequence_count).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut assignment = vec![0usize; sequence_count];
    for (position, &sequence) in order.iter().enumerate() {
        assignment[sequence] = position % fold_count;
    }
    Ok(FoldPlan {
        fold_count,
        assignment,
        seed,
    })
}

/// Models the harness can fit and evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ModelKind {
    /// Full pairwise model, bump-kernel family.
    Rbf,
    /// Full pairwise model, linear-decay family.
    Exp,
    /// Diagonal-only restriction (bump-kernel family).
    Icir,
    /// Per-target frequency baseline.
    Naive,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ModelKind::Rbf => "rbf",
            ModelKind::Exp => "exp",
            ModelKind::Icir => "icir",
            ModelKind::Naive => "naive",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub models: Vec<ModelKind>,
    /// Windowing and prefix skipping applied to both splits. The RBF
    /// max shift is taken from `assembly.max_gap`.
    pub assembly: AssemblyOptions,
    pub solver: SolverConfig,
    /// Ground-truth matrix; enables the coefficient-recovery metric for
    /// models of the same kernel family.
    pub truth: Option<BetaMatrix>,
    /// Testing hook: score the empirical test-frequency predictor in
    /// place of every requested model, so RSS and JS collapse to 0 and
    /// BCF1 to 1. Never set in normal runs.
    pub empirical_sanity: bool,
}

/// Mean and sample (n-1) standard deviation across folds; a single fold
/// reports a standard deviation of 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricStats {
    pub mean: f64,
    pub stddev: f64,
}

fn stats(values: &[f64]) -> MetricStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let stddev = if values.len() > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    MetricStats { mean, stddev }
}

#[derive(Debug, Clone)]
pub struct ModelSummary {
    pub rss: MetricStats,
    pub js_divergence: MetricStats,
    pub bcf1: MetricStats,
    pub mse_beta: Option<MetricStats>,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    /// Per-fold reports in fold order, per model.
    pub folds: BTreeMap<ModelKind, Vec<EvalReport>>,
    pub summary: BTreeMap<ModelKind, ModelSummary>,
}

/// Re-expresses `fitted` over the truth's pair set, filling pairs the fit
/// never saw with background-only vectors, so matrices are comparable.
pub fn complete_over(fitted: &BetaMatrix, truth: &BetaMatrix) -> Result<BetaMatrix> {
    if fitted.kernel() != truth.kernel() {
        return Err(Error::IncomparableMatrices {
            reason: format!(
                "kernel mismatch: {} vs {}",
                fitted.kernel(),
                truth.kernel()
            ),
        });
    }
    let mut out = BetaMatrix::new(truth.kernel(), truth.entity_count());
    for (t, s, _) in truth.iter() {
        let v = fitted
            .get(t, s)
            .cloned()
            .unwrap_or_else(|| BetaVector::null(truth.kernel()));
        out.insert(t, s, v)?;
    }
    Ok(out)
}

fn subset_corpus(corpus: &Corpus, keep: impl Fn(usize) -> bool) -> Corpus {
    Corpus::new(
        corpus.vocabulary.clone(),
        corpus
            .sequences
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, s)| s.clone())
            .collect(),
    )
}

fn fit_and_score(
    model: ModelKind,
    train: &ObservationSet,
    test: &ObservationSet,
    cfg: &ExperimentConfig,
) -> Result<EvalReport> {
    if cfg.empirical_sanity {
        let pred = EmpiricalPredictor::from_observations(test);
        return Ok(EvalReport::compute(&pred, test, None));
    }
    let rbf = KernelSpec::Rbf {
        max_shift: cfg.assembly.max_gap,
    };
    let (pred, fitted): (Box<dyn Predictor>, Option<BetaMatrix>) = match model {
        ModelKind::Rbf => {
            let (p, fit) = fit_kernel_model(train, rbf, &cfg.solver)?;
            (Box::new(p), Some(fit.beta))
        }
        ModelKind::Exp => {
            let (p, fit) = fit_kernel_model(train, KernelSpec::Exp, &cfg.solver)?;
            (Box::new(p), Some(fit.beta))
        }
        ModelKind::Icir => {
            let p = fit_icir(train, rbf, &cfg.solver)?;
            let beta = p.beta().clone();
            (Box::new(p), Some(beta))
        }
        ModelKind::Naive => (Box::new(fit_naive(train)?), None),
    };
    let mse = match (&fitted, &cfg.truth) {
        (Some(beta), Some(truth)) if beta.kernel() == truth.kernel() => {
            Some(mse_beta(&complete_over(beta, truth)?, truth)?)
        }
        _ => None,
    };
    Ok(EvalReport::compute(pred.as_ref(), test, mse))
}

/// Runs the full protocol: for every fold, assemble train/test
/// observation sets from the sequence split, fit every model on the
/// train side, evaluate all metrics on the test side; then aggregate.
///
/// A single-fold plan means in-sample evaluation: train and test are both
/// the whole corpus.
pub fn run_experiment(
    corpus: &Corpus,
    plan: &FoldPlan,
    cfg: &ExperimentConfig,
) -> Result<ExperimentResult> {
    if corpus.sequences.len() != plan.assignment.len() {
        return Err(Error::InvalidConfig {
            reason: format!(
                "fold plan covers {} sequences, corpus has {}",
                plan.assignment.len(),
                corpus.sequences.len()
            ),
        });
    }
    if cfg.models.is_empty() {
        return Err(Error::InvalidConfig {
            reason: "no models requested".into(),
        });
    }
    let mut folds: BTreeMap<ModelKind, Vec<EvalReport>> = BTreeMap::new();
    for fold in 0..plan.fold_count {
        let (train_corpus, test_corpus) = if plan.fold_count == 1 {
            (subset_corpus(corpus, |_| true), subset_corpus(corpus, |_| true))
        } else {
            (
                subset_corpus(corpus, |i| plan.assignment[i] != fold),
                subset_corpus(corpus, |i| plan.assignment[i] == fold),
            )
        };
        if test_corpus.sequences.is_empty() {
            return Err(Error::DegenerateFold { fold });
        }
        let train = assemble_observations_with(&train_corpus, &cfg.assembly)?;
        let test = assemble_observations_with(&test_corpus, &cfg.assembly)?;
        if test.is_empty() {
            return Err(Error::DegenerateFold { fold });
        }
        for &model in &cfg.models {
            let report = fit_and_score(model, &train, &test, cfg)?;
            folds.entry(model).or_default().push(report);
        }
    }

    let mut summary = BTreeMap::new();
    for (&model, reports) in &folds {
        let rss: Vec<f64> = reports.iter().map(|r| r.rss).collect();
        let js: Vec<f64> = reports.iter().map(|r| r.js_divergence).collect();
        let bcf1: Vec<f64> = reports.iter().map(|r| r.bcf1).collect();
        let mse: Option<Vec<f64>> = reports.iter().map(|r| r.mse_beta).collect();
        summary.insert(
            model,
            ModelSummary {
                rss: stats(&rss),
                js_divergence: stats(&js),
                bcf1: stats(&bcf1),
                mse_beta: mse.as_deref().map(stats),
            },
        );
    }
    Ok(ExperimentResult { folds, summary })
}
