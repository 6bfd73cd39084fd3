//! Projected-gradient minimizer for the per-target subproblems.
//!
//! Each subproblem is smooth and convex over the feasible set
//! `{β : β ≥ 0, background entries ≥ EPS_BG}`, which is convex, so a
//! projected gradient method with Armijo backtracking converges to the
//! global minimum. Subproblems are fitted in parallel; every subproblem
//! run is deterministic, so results do not depend on the worker count.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::data::{EntityId, ObservationSet};
use crate::kernels::{BetaMatrix, BetaVector, KernelSpec, EPS_BG};
use crate::likelihood::{gradient, neg_log_likelihood, slice_subproblems, Subproblem};
use crate::{Error, Result};

/// Line-search step floor; below this the iterate cannot move in floating
/// point and the current point is accepted as stationary.
const MIN_STEP: f64 = 1e-18;

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Relative NLL decrease below which the iteration stops.
    pub tolerance: f64,
    /// Sufficient-decrease constant of the Armijo condition.
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub initial_step: f64,
    /// Starting value for background coordinates.
    pub init_background: f64,
    /// Starting value for all other coordinates.
    pub init_other: f64,
    /// Reserved for randomized initialization strategies; the default
    /// deterministic initialization ignores it.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            tolerance: 1e-9,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            initial_step: 1.0,
            init_background: std::f64::consts::LN_2,
            init_other: 0.01,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_iterations >= 1
            && self.tolerance > 0.0
            && self.armijo_c > 0.0
            && self.armijo_c < 1.0
            && self.backtrack_factor > 0.0
            && self.backtrack_factor < 1.0
            && self.initial_step > 0.0
            && self.init_background > 0.0
            && self.init_other >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig {
                reason: "solver parameters out of range".into(),
            })
        }
    }
}

/// Outcome of one subproblem minimization.
#[derive(Debug, Clone)]
pub struct SubproblemFit {
    /// Flat parameter vector in the subproblem layout.
    pub params: Vec<f64>,
    pub final_nll: f64,
    pub iterations: usize,
    /// True when the run stopped on the tolerance or at a stationary
    /// point, false when the iteration budget ran out.
    pub converged: bool,
}

/// Outcome of fitting every subproblem of an observation set.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub beta: BetaMatrix,
    /// Sum of per-subproblem NLLs, accumulated in target order.
    pub final_nll: f64,
    pub nll: BTreeMap<EntityId, f64>,
    pub iterations: BTreeMap<EntityId, usize>,
    pub converged: BTreeMap<EntityId, bool>,
}

impl FitResult {
    pub fn all_converged(&self) -> bool {
        self.converged.values().all(|&c| c)
    }
}

/// Clamps each coordinate to its feasible range.
fn project(params: &mut [f64], dim: usize) {
    for (i, p) in params.iter_mut().enumerate() {
        let floor = if i % dim == 0 { EPS_BG } else { 0.0 };
        if *p < floor {
            *p = floor;
        }
    }
}

/// Minimizes one subproblem with projected gradient descent and Armijo
/// backtracking. Returns a feasible point; NLL never increases across
/// accepted steps.
pub fn fit_subproblem(
    sub: &Subproblem,
    kernel: KernelSpec,
    cfg: &SolverConfig,
) -> Result<SubproblemFit> {
    cfg.validate()?;
    let dim = kernel.dimension();
    let mut x: Vec<f64> = (0..sub.param_len(kernel))
        .map(|i| {
            if i % dim == 0 {
                cfg.init_background.max(EPS_BG)
            } else {
                cfg.init_other
            }
        })
        .collect();
    let mut f = neg_log_likelihood(sub, &x, kernel)?;
    if !f.is_finite() {
        return Err(Error::NumericalFailure {
            context: "non-finite objective at the initial point".into(),
        });
    }

    let mut iterations = 0;
    let mut converged = false;
    let mut cand = vec![0.0; x.len()];
    while iterations < cfg.max_iterations {
        let g = gradient(sub, &x, kernel)?;
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure {
                context: format!("non-finite gradient at iteration {iterations}"),
            });
        }

        let mut step = cfg.initial_step;
        let (fc, moved) = loop {
            for (c, (&xi, &gi)) in cand.iter_mut().zip(x.iter().zip(&g)) {
                *c = xi - step * gi;
            }
            project(&mut cand, dim);
            // Armijo sufficient decrease along the projected direction.
            let dir_slope: f64 = g
                .iter()
                .zip(cand.iter().zip(&x))
                .map(|(gi, (ci, xi))| gi * (ci - xi))
                .sum();
            let fc = neg_log_likelihood(sub, &cand, kernel)?;
            if fc <= f + cfg.armijo_c * dir_slope {
                break (fc, cand != x);
            }
            step *= cfg.backtrack_factor;
            if step < MIN_STEP {
                break (f, false);
            }
        };
        iterations += 1;
        if !moved {
            converged = true;
            break;
        }
        let rel = (f - fc) / f.abs().max(1.0);
        std::mem::swap(&mut x, &mut cand);
        f = fc;
        if rel < cfg.tolerance {
            converged = true;
            break;
        }
    }

    Ok(SubproblemFit {
        params: x,
        final_nll: f,
        iterations,
        converged,
    })
}

/// Unpacks a subproblem's flat parameter vector into per-pair vectors.
fn insert_blocks(
    beta: &mut BetaMatrix,
    sub: &Subproblem,
    params: &[f64],
    kernel: KernelSpec,
) -> Result<()> {
    let dim = kernel.dimension();
    for (slot, &source) in sub.sources().iter().enumerate() {
        let block = params[slot * dim..(slot + 1) * dim].to_vec();
        beta.insert(sub.target(), source, BetaVector::new(kernel, block)?)?;
    }
    Ok(())
}

/// Fits every per-target subproblem of `obs` and assembles the pairwise
/// coefficient matrix.
///
/// Subproblems run in a parallel map; outputs are merged in target order,
/// so the result is identical for any worker count.
pub fn fit(obs: &ObservationSet, kernel: KernelSpec, cfg: &SolverConfig) -> Result<FitResult> {
    let subs = slice_subproblems(obs)?;
    let fits: Vec<Result<SubproblemFit>> = subs
        .par_iter()
        .map(|sub| {
            fit_subproblem(sub, kernel, cfg).map_err(|e| Error::SubproblemFailed {
                target: sub.target().0,
                source: Box::new(e),
            })
        })
        .collect();

    let mut beta = BetaMatrix::new(kernel, obs.entity_count());
    let mut final_nll = 0.0;
    let mut nll = BTreeMap::new();
    let mut iterations = BTreeMap::new();
    let mut converged = BTreeMap::new();
    for (sub, fit) in subs.iter().zip(fits) {
        let fit = fit?;
        insert_blocks(&mut beta, sub, &fit.params, kernel)?;
        final_nll += fit.final_nll;
        nll.insert(sub.target(), fit.final_nll);
        iterations.insert(sub.target(), fit.iterations);
        converged.insert(sub.target(), fit.converged);
    }
    Ok(FitResult {
        beta,
        final_nll,
        nll,
        iterations,
        converged,
    })
}
