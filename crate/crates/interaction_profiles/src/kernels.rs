//! Interaction kernels and the hazard parameterization.
//!
//! A hazard is `H(Δ) = exp(-β · φ(Δ))` where `φ` is a nonnegative feature
//! map of the order-time gap and `β` is a nonnegative coefficient vector
//! whose first entry is a background rate. Nonnegativity of both is what
//! keeps the Bernoulli negative log-likelihood convex, so it is enforced
//! at construction.

use std::collections::BTreeMap;
use std::fmt;

use crate::data::{EntityId, Vocabulary};
use crate::{Error, Result};

/// Lower bound for the background coefficient. Keeps `H < 1` strictly so
/// the miss term `ln(1 - H)` stays finite.
pub const EPS_BG: f64 = 1e-6;

/// Feature map family for the gap `Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelSpec {
    /// Quadratic bumps around integer centers `0..=max_shift`:
    /// `φ(Δ) = [1, (Δ-0)²/2, (Δ-1)²/2, ..., (Δ-S)²/2]`.
    Rbf { max_shift: u32 },
    /// Linear decay: `φ(Δ) = [1, Δ]`.
    Exp,
}

impl KernelSpec {
    /// Number of coefficients, background included.
    pub fn dimension(self) -> usize {
        match self {
            KernelSpec::Rbf { max_shift } => max_shift as usize + 2,
            KernelSpec::Exp => 2,
        }
    }

    /// Writes `φ(gap)` into `out`, which must have length `dimension()`.
    pub fn feature_map_into(self, gap: u32, out: &mut [f64]) {
        assert_eq!(out.len(), self.dimension(), "feature buffer length");
        out[0] = 1.0;
        match self {
            KernelSpec::Rbf { max_shift } => {
                let d = gap as f64;
                for s in 0..=max_shift {
                    let r = d - s as f64;
                    out[s as usize + 1] = 0.5 * r * r;
                }
            }
            KernelSpec::Exp => {
                out[1] = gap as f64;
            }
        }
    }

    pub fn feature_map(self, gap: u32) -> Vec<f64> {
        let mut out = vec![0.0; self.dimension()];
        self.feature_map_into(gap, &mut out);
        out
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Rbf { .. } => write!(f, "RBF"),
            KernelSpec::Exp => write!(f, "EXP"),
        }
    }
}

/// A feasible coefficient vector for one ordered entity pair.
///
/// Invariants (checked at construction): length matches the kernel
/// dimension, every entry is finite and `>= 0`, and the background entry
/// is `>= EPS_BG`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaVector {
    kernel: KernelSpec,
    coefficients: Vec<f64>,
}

impl BetaVector {
    pub fn new(kernel: KernelSpec, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != kernel.dimension() {
            return Err(Error::InvalidBeta {
                reason: format!(
                    "expected {} coefficients for {kernel}, got {}",
                    kernel.dimension(),
                    coefficients.len()
                ),
            });
        }
        for (k, &c) in coefficients.iter().enumerate() {
            if !c.is_finite() {
                return Err(Error::InvalidBeta {
                    reason: format!("coefficient {k} is not finite"),
                });
            }
            if c < 0.0 {
                return Err(Error::InvalidBeta {
                    reason: format!("coefficient {k} is negative ({c})"),
                });
            }
        }
        if coefficients[0] < EPS_BG {
            return Err(Error::InvalidBeta {
                reason: format!(
                    "background coefficient {} is below {EPS_BG}",
                    coefficients[0]
                ),
            });
        }
        Ok(Self {
            kernel,
            coefficients,
        })
    }

    /// Background-only vector: `β = [EPS_BG, 0, ..., 0]`.
    pub fn null(kernel: KernelSpec) -> Self {
        let mut coefficients = vec![0.0; kernel.dimension()];
        coefficients[0] = EPS_BG;
        Self {
            kernel,
            coefficients,
        }
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn background(&self) -> f64 {
        self.coefficients[0]
    }

    /// `β · φ(gap)`, computed without materializing the feature vector.
    pub fn dot_features(&self, gap: u32) -> f64 {
        let b = &self.coefficients;
        match self.kernel {
            KernelSpec::Rbf { max_shift } => {
                let d = gap as f64;
                let mut z = b[0];
                for s in 0..=max_shift {
                    let r = d - s as f64;
                    z += b[s as usize + 1] * (0.5 * r * r);
                }
                z
            }
            KernelSpec::Exp => b[0] + b[1] * gap as f64,
        }
    }

    /// Contagion probability `H(gap) = exp(-β · φ(gap))`.
    pub fn hazard(&self, gap: u32) -> f64 {
        (-self.dot_features(gap)).exp()
    }
}

/// Hazard relative to the pair's own background level:
/// `H(gap) - exp(-β₀)`. Under feasibility the value is never positive;
/// it peaks (approaches zero) at the gaps where the source depresses
/// adoption least, so the maximizing gap is where the interaction is
/// strongest in favor of adoption.
pub fn profile_intensity(beta: &BetaVector, gap: u32) -> f64 {
    beta.hazard(gap) - (-beta.background()).exp()
}

/// Per-pair coefficient vectors for a set of ordered entity pairs, all
/// sharing one kernel.
#[derive(Debug, Clone)]
pub struct BetaMatrix {
    kernel: KernelSpec,
    entity_count: usize,
    pairs: BTreeMap<(EntityId, EntityId), BetaVector>,
}

impl BetaMatrix {
    pub fn new(kernel: KernelSpec, entity_count: usize) -> Self {
        Self {
            kernel,
            entity_count,
            pairs: BTreeMap::new(),
        }
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn entity_count(&self) -> usize {
        self.entity_count
    }

    pub fn insert(&mut self, target: EntityId, source: EntityId, beta: BetaVector) -> Result<()> {
        if beta.kernel() != self.kernel {
            return Err(Error::InvalidBeta {
                reason: format!(
                    "kernel mismatch: matrix holds {}, vector is {}",
                    self.kernel,
                    beta.kernel()
                ),
            });
        }
        self.pairs.insert((target, source), beta);
        Ok(())
    }

    pub fn get(&self, target: EntityId, source: EntityId) -> Option<&BetaVector> {
        self.pairs.get(&(target, source))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs in (target, source) order.
    pub fn iter(&self) -> impl Iterator<Item = (EntityId, EntityId, &BetaVector)> {
        self.pairs.iter().map(|(&(t, s), b)| (t, s, b))
    }

    /// Renumbers every pair from `from` ids to `to` ids by matching
    /// labels. Entity numbering is a per-corpus artifact of label
    /// interning order, so matrices crossing corpus boundaries must be
    /// remapped before ids are compared.
    pub fn remap(&self, from: &Vocabulary, to: &Vocabulary) -> Result<Self> {
        let mut out = Self::new(self.kernel, to.len());
        let lookup = |id: EntityId| -> Result<EntityId> {
            let label = from.label(id).ok_or(Error::UnknownEntity {
                index: id.0,
                vocab_size: from.len(),
            })?;
            to.get(label).ok_or_else(|| Error::InvalidBeta {
                reason: format!("entity label {label:?} is absent from the target vocabulary"),
            })
        };
        for (t, s, v) in self.iter() {
            out.insert(lookup(t)?, lookup(s)?, v.clone())?;
        }
        Ok(out)
    }
}
