//! Bernoulli negative log-likelihood over observation cells, its analytic
//! gradient, and the per-target subproblem slicing that makes the
//! optimization separable.
//!
//! For a cell with gap Δ, contagion count `c` and total `n`, writing
//! `z = β · φ(Δ)` and `H = exp(-z)`, the cell contributes
//! `c·z - (n-c)·ln(1 - e^{-z})`. The miss term is evaluated through
//! `expm1` so it stays accurate both for tiny z (H near 1) and huge z
//! (H near 0).

use crate::data::{EntityId, ObservationSet};
use crate::kernels::{KernelSpec, EPS_BG};
use crate::{Error, Result};

/// One aggregated cell inside a subproblem, with its source resolved to a
/// parameter-block index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubproblemCell {
    /// Index into the subproblem's source list.
    pub source_slot: usize,
    pub gap: u32,
    pub contagions: u64,
    pub total: u64,
}

/// The observations targeting one entity, with a flat parameter layout:
/// the coefficient vector of source `sources[k]` occupies the contiguous
/// block `[k·dim, (k+1)·dim)` where `dim` is the kernel dimension.
///
/// Subproblems over distinct targets share no parameters, so the full
/// likelihood is their exact sum and each can be minimized independently.
#[derive(Debug, Clone)]
pub struct Subproblem {
    target: EntityId,
    sources: Vec<EntityId>,
    cells: Vec<SubproblemCell>,
}

impl Subproblem {
    /// Builds a subproblem from parts. `sources` must be strictly
    /// increasing and every cell's slot must index into it.
    pub fn new(
        target: EntityId,
        sources: Vec<EntityId>,
        cells: Vec<SubproblemCell>,
    ) -> Result<Self> {
        if sources.is_empty() || cells.is_empty() {
            return Err(Error::NoData);
        }
        if !sources.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidBeta {
                reason: "subproblem sources must be strictly increasing".into(),
            });
        }
        if cells.iter().any(|c| c.source_slot >= sources.len()) {
            return Err(Error::InvalidBeta {
                reason: "cell source slot out of range".into(),
            });
        }
        Ok(Self {
            target,
            sources,
            cells,
        })
    }

    pub fn target(&self) -> EntityId {
        self.target
    }

    pub fn sources(&self) -> &[EntityId] {
        &self.sources
    }

    pub fn cells(&self) -> &[SubproblemCell] {
        &self.cells
    }

    /// Length of the flat parameter vector under `kernel`.
    pub fn param_len(&self, kernel: KernelSpec) -> usize {
        self.sources.len() * kernel.dimension()
    }

    pub fn observation_count(&self) -> u64 {
        self.cells.iter().map(|c| c.total).sum()
    }
}

/// Splits an observation set into one subproblem per distinct target.
/// The subproblems partition the cells exactly.
pub fn slice_subproblems(obs: &ObservationSet) -> Result<Vec<Subproblem>> {
    if obs.is_empty() {
        return Err(Error::NoData);
    }
    let mut out = Vec::new();
    let cells = obs.cells();
    let mut start = 0;
    while start < cells.len() {
        let target = cells[start].target;
        let mut end = start;
        while end < cells.len() && cells[end].target == target {
            end += 1;
        }
        let run = &cells[start..end];
        // Cells are sorted by (target, source, gap), so distinct sources
        // appear as ordered runs.
        let mut sources: Vec<EntityId> = Vec::new();
        for c in run {
            if sources.last() != Some(&c.source) {
                sources.push(c.source);
            }
        }
        let sub_cells = run
            .iter()
            .map(|c| SubproblemCell {
                source_slot: sources.binary_search(&c.source).expect("source present"),
                gap: c.gap,
                contagions: c.contagions,
                total: c.total,
            })
            .collect();
        out.push(Subproblem {
            target,
            sources,
            cells: sub_cells,
        });
        start = end;
    }
    Ok(out)
}

/// `β · φ(gap)` for one source's coefficient block.
fn block_dot(kernel: KernelSpec, block: &[f64], gap: u32) -> f64 {
    match kernel {
        KernelSpec::Rbf { max_shift } => {
            let d = gap as f64;
            let mut z = block[0];
            for s in 0..=max_shift {
                let r = d - s as f64;
                z += block[s as usize + 1] * (0.5 * r * r);
            }
            z
        }
        KernelSpec::Exp => block[0] + block[1] * gap as f64,
    }
}

/// Verifies the flat parameter vector is feasible for `source_count`
/// blocks: right length, finite, nonnegative, background entries at or
/// above the floor.
pub fn check_feasible(params: &[f64], kernel: KernelSpec, source_count: usize) -> Result<()> {
    let dim = kernel.dimension();
    if params.len() != source_count * dim {
        return Err(Error::InfeasiblePoint);
    }
    for (i, &p) in params.iter().enumerate() {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InfeasiblePoint);
        }
        if i % dim == 0 && p < EPS_BG {
            return Err(Error::InfeasiblePoint);
        }
    }
    Ok(())
}

/// Negative log-likelihood of the subproblem at `params`.
pub fn neg_log_likelihood(sub: &Subproblem, params: &[f64], kernel: KernelSpec) -> Result<f64> {
    check_feasible(params, kernel, sub.sources.len())?;
    let dim = kernel.dimension();
    let mut nll = 0.0;
    for cell in &sub.cells {
        let base = cell.source_slot * dim;
        let z = block_dot(kernel, &params[base..base + dim], cell.gap);
        let hits = cell.contagions as f64;
        let misses = (cell.total - cell.contagions) as f64;
        nll += hits * z;
        if misses > 0.0 {
            // ln(1 - e^{-z}) via expm1; z >= EPS_BG keeps it finite.
            nll -= misses * (-(-z).exp_m1()).ln();
        }
    }
    Ok(nll)
}

/// Analytic gradient of [`neg_log_likelihood`] in the subproblem layout.
///
/// Per cell and coefficient k: `φ_k(Δ) · (c - (n-c)/expm1(z))`, which is
/// `c·φ_k - (n-c)·φ_k·H/(1-H)`.
pub fn gradient(sub: &Subproblem, params: &[f64], kernel: KernelSpec) -> Result<Vec<f64>> {
    check_feasible(params, kernel, sub.sources.len())?;
    let dim = kernel.dimension();
    let mut grad = vec![0.0; params.len()];
    let mut phi = vec![0.0; dim];
    for cell in &sub.cells {
        let base = cell.source_slot * dim;
        let z = block_dot(kernel, &params[base..base + dim], cell.gap);
        let hits = cell.contagions as f64;
        let misses = (cell.total - cell.contagions) as f64;
        // expm1 overflows to +inf for huge z, sending the miss term to 0,
        // which is the correct limit (H -> 0).
        let factor = hits - misses / z.exp_m1();
        kernel.feature_map_into(cell.gap, &mut phi);
        for (g, p) in grad[base..base + dim].iter_mut().zip(&phi) {
            *g += factor * p;
        }
    }
    Ok(grad)
}
