//! Prediction interface shared by all models, the naive frequency
//! baseline, and the non-interacting (diagonal-only) restriction of the
//! kernel model.

use std::collections::HashMap;

use crate::data::{EntityId, ObservationSet};
use crate::kernels::{BetaMatrix, KernelSpec};
use crate::solver::{FitResult, SolverConfig};
use crate::{Error, Result};

/// A fitted model queried per (target, source, gap) cell. Outputs are
/// probabilities in [0, 1].
pub trait Predictor {
    fn predict(&self, target: EntityId, source: EntityId, gap: u32) -> f64;
}

/// Per-exposure contagion counts of each target, recovered from the
/// minimum-gap cells: every kept exposure event produces exactly one
/// observation at `gap = min_gap`, so those cells recount the events.
fn per_target_rates(obs: &ObservationSet) -> (Vec<Option<f64>>, f64) {
    let mut hits = vec![0u64; obs.entity_count()];
    let mut totals = vec![0u64; obs.entity_count()];
    for c in obs.cells() {
        if c.gap == obs.min_gap() {
            hits[c.target.index()] += c.contagions;
            totals[c.target.index()] += c.total;
        }
    }
    let grand_hits: u64 = hits.iter().sum();
    let grand_total: u64 = totals.iter().sum();
    let global = if grand_total > 0 {
        grand_hits as f64 / grand_total as f64
    } else {
        0.0
    };
    let rates = hits
        .iter()
        .zip(&totals)
        .map(|(&h, &n)| (n > 0).then(|| h as f64 / n as f64))
        .collect();
    (rates, global)
}

/// Constant-per-target baseline: the target's contagion frequency across
/// its exposures, regardless of source or gap.
#[derive(Debug, Clone)]
pub struct NaivePredictor {
    rates: Vec<f64>,
    global: f64,
}

impl Predictor for NaivePredictor {
    fn predict(&self, target: EntityId, _source: EntityId, _gap: u32) -> f64 {
        self.rates
            .get(target.index())
            .copied()
            .unwrap_or(self.global)
    }
}

pub fn fit_naive(obs: &ObservationSet) -> Result<NaivePredictor> {
    if obs.is_empty() {
        return Err(Error::NoData);
    }
    let (rates, global) = per_target_rates(obs);
    Ok(NaivePredictor {
        rates: rates.into_iter().map(|r| r.unwrap_or(global)).collect(),
        global,
    })
}

/// Predictor over a fitted coefficient matrix.
///
/// Pairs absent from the matrix (possible when evaluating on held-out
/// data) fall back to the mean background hazard of the target's fitted
/// pairs; targets with no fitted pair at all fall back to the training
/// contagion rate.
#[derive(Debug, Clone)]
pub struct KernelPredictor {
    beta: BetaMatrix,
    target_fallback: Vec<f64>,
}

impl KernelPredictor {
    pub fn new(beta: BetaMatrix, train_rate: f64) -> Self {
        let mut sums = vec![(0.0f64, 0u32); beta.entity_count()];
        for (t, _, b) in beta.iter() {
            let e = &mut sums[t.index()];
            e.0 += (-b.background()).exp();
            e.1 += 1;
        }
        let target_fallback = sums
            .into_iter()
            .map(|(s, n)| if n > 0 { s / n as f64 } else { train_rate })
            .collect();
        Self {
            beta,
            target_fallback,
        }
    }

    pub fn beta(&self) -> &BetaMatrix {
        &self.beta
    }
}

impl Predictor for KernelPredictor {
    fn predict(&self, target: EntityId, source: EntityId, gap: u32) -> f64 {
        match self.beta.get(target, source) {
            Some(b) => b.hazard(gap),
            None => self
                .target_fallback
                .get(target.index())
                .copied()
                .unwrap_or(0.0),
        }
    }
}

/// Non-interacting restriction: kernels fitted on same-entity cells only.
/// Off-diagonal queries receive the target's own background hazard
/// `exp(-β_xx[0])`, the model's only estimate for foreign sources.
#[derive(Debug, Clone)]
pub struct IcirPredictor {
    beta: BetaMatrix,
    background: Vec<f64>,
}

impl IcirPredictor {
    /// Diagonal coefficient matrix (pairs (x, x) only).
    pub fn beta(&self) -> &BetaMatrix {
        &self.beta
    }
}

impl Predictor for IcirPredictor {
    fn predict(&self, target: EntityId, source: EntityId, gap: u32) -> f64 {
        if target == source {
            if let Some(b) = self.beta.get(target, source) {
                return b.hazard(gap);
            }
        }
        self.background.get(target.index()).copied().unwrap_or(0.0)
    }
}

pub fn fit_icir(
    obs: &ObservationSet,
    kernel: KernelSpec,
    cfg: &SolverConfig,
) -> Result<IcirPredictor> {
    let diagonal: Vec<_> = obs
        .cells()
        .iter()
        .filter(|c| c.target == c.source)
        .copied()
        .collect();
    if diagonal.is_empty() {
        return Err(Error::NoData);
    }
    let diag_obs = ObservationSet::from_cells(
        diagonal,
        obs.entity_count(),
        obs.max_gap(),
        obs.min_gap(),
    );
    let fit = crate::solver::fit(&diag_obs, kernel, cfg)?;
    let (_, train_rate) = per_target_rates(obs);
    let background = (0..obs.entity_count() as u32)
        .map(|x| {
            fit.beta
                .get(EntityId(x), EntityId(x))
                .map(|b| (-b.background()).exp())
                .unwrap_or(train_rate)
        })
        .collect();
    Ok(IcirPredictor {
        beta: fit.beta,
        background,
    })
}

/// Fits the full kernel model and wraps it as a predictor. Returns the
/// underlying fit alongside so callers keep iteration diagnostics.
pub fn fit_kernel_model(
    obs: &ObservationSet,
    kernel: KernelSpec,
    cfg: &SolverConfig,
) -> Result<(KernelPredictor, FitResult)> {
    let fit = crate::solver::fit(obs, kernel, cfg)?;
    let (_, train_rate) = per_target_rates(obs);
    Ok((KernelPredictor::new(fit.beta.clone(), train_rate), fit))
}

/// Memorizes the empirical frequency of every populated cell: the perfect
/// in-sample predictor, useful as a metric fixed point.
#[derive(Debug, Clone)]
pub struct EmpiricalPredictor {
    frequencies: HashMap<(u32, u32, u32), f64>,
    fallback: f64,
}

impl EmpiricalPredictor {
    pub fn from_observations(obs: &ObservationSet) -> Self {
        let frequencies = obs
            .cells()
            .iter()
            .map(|c| ((c.target.0, c.source.0, c.gap), c.frequency()))
            .collect();
        let total: u64 = obs.cells().iter().map(|c| c.total).sum();
        let hits: u64 = obs.cells().iter().map(|c| c.contagions).sum();
        Self {
            frequencies,
            fallback: if total > 0 {
                hits as f64 / total as f64
            } else {
                0.0
            },
        }
    }
}

impl Predictor for EmpiricalPredictor {
    fn predict(&self, target: EntityId, source: EntityId, gap: u32) -> f64 {
        self.frequencies
            .get(&(target.0, source.0, gap))
            .copied()
            .unwrap_or(self.fallback)
    }
}

/// Bernoulli negative log-likelihood of arbitrary predictions over the
/// cells, for model comparison. Predictions are clamped away from {0, 1}
/// to keep the value finite.
pub fn predictor_nll<P: Predictor + ?Sized>(pred: &P, obs: &ObservationSet) -> f64 {
    const CLAMP: f64 = 1e-12;
    let mut nll = 0.0;
    for c in obs.cells() {
        let p = pred
            .predict(c.target, c.source, c.gap)
            .clamp(CLAMP, 1.0 - CLAMP);
        let hits = c.contagions as f64;
        let misses = (c.total - c.contagions) as f64;
        nll -= hits * p.ln() + misses * (1.0 - p).ln();
    }
    nll
}
