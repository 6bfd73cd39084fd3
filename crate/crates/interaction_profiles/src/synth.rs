//! Seeded synthetic sequence generator driven by a ground-truth
//! coefficient matrix.
//!
//! Reproducibility contract: the RNG is ChaCha8. `random_beta` consumes a
//! single stream seeded with `seed`, drawing coefficients in (target,
//! source, coefficient) order. `generate` gives sequence `k` its own
//! substream (`set_stream(k)`) of the corpus seed; within a step the draws
//! are (1) entity, (2) source index under [`CombinationRule::SingleSource`]
//! only, (3) outcome. Parallel and serial generation therefore produce the
//! same corpus, and fixtures are stable across platforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::{Corpus, EntityId, ExposureEvent, Sequence, Vocabulary};
use crate::kernels::{BetaMatrix, BetaVector, KernelSpec, EPS_BG};
use crate::{Error, Result};

/// How the hazards of the window's exposures combine into one contagion
/// probability for the new event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombinationRule {
    /// Every exposure in the window makes an independent attempt:
    /// `p = 1 - Π_j (1 - H_j)`.
    IndependentAttempts,
    /// One exposure is drawn uniformly from the window and acts alone:
    /// `p = H_j` for the drawn `j`.
    SingleSource,
}

#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub entity_count: usize,
    pub sequence_count: usize,
    /// Events per sequence.
    pub max_length: usize,
    pub kernel: KernelSpec,
    /// History window in steps. `None` uses the RBF max shift; for the
    /// EXP kernel, which has no natural cutoff, `None` means the whole
    /// history.
    pub window: Option<u32>,
    pub seed: u64,
    pub rule: CombinationRule,
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.entity_count < 1 || self.max_length < 1 {
            return Err(Error::InvalidConfig {
                reason: "entity_count and max_length must be at least 1".into(),
            });
        }
        Ok(())
    }

    fn effective_window(&self) -> u32 {
        self.window.unwrap_or(match self.kernel {
            KernelSpec::Rbf { max_shift } => max_shift,
            KernelSpec::Exp => u32::MAX,
        })
    }
}

/// Dense uniform ground truth: every ordered pair gets coefficients drawn
/// uniformly in [0,1], floored at [`EPS_BG`]. Deterministic per seed.
pub fn random_beta(entity_count: usize, kernel: KernelSpec, seed: u64) -> BetaMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = kernel.dimension();
    let mut beta = BetaMatrix::new(kernel, entity_count);
    for target in 0..entity_count as u32 {
        for source in 0..entity_count as u32 {
            let coeffs: Vec<f64> = (0..dim)
                .map(|_| rng.random_range(0.0..=1.0f64).max(EPS_BG))
                .collect();
            let v = BetaVector::new(kernel, coeffs).expect("floored uniform draw is feasible");
            beta.insert(EntityId(target), EntityId(source), v)
                .expect("kernel matches");
        }
    }
    beta
}

/// Marginal contagion probability of a target given its window, under a
/// combination rule. `window` holds (source, gap) pairs, the Δ=0 self-pair
/// included. For [`CombinationRule::SingleSource`] this is the mean hazard
/// (the source is drawn uniformly).
pub fn contagion_probability(
    beta: &BetaMatrix,
    target: EntityId,
    window: &[(EntityId, u32)],
    rule: CombinationRule,
) -> Result<f64> {
    let hazard = |source: EntityId, gap: u32| -> Result<f64> {
        beta.get(target, source)
            .map(|b| b.hazard(gap))
            .ok_or(Error::PairNotFitted {
                target: target.0,
                origin: source.0,
            })
    };
    match rule {
        CombinationRule::IndependentAttempts => {
            let mut survival = 1.0;
            for &(source, gap) in window {
                survival *= 1.0 - hazard(source, gap)?;
            }
            Ok(1.0 - survival)
        }
        CombinationRule::SingleSource => {
            let mut sum = 0.0;
            for &(source, gap) in window {
                sum += hazard(source, gap)?;
            }
            Ok(sum / window.len() as f64)
        }
    }
}

fn generate_sequence(
    true_beta: &BetaMatrix,
    cfg: &GenConfig,
    sequence_index: u64,
) -> Result<Sequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(sequence_index);
    let window = cfg.effective_window();
    let mut events: Vec<ExposureEvent> = Vec::with_capacity(cfg.max_length);
    for i in 0..cfg.max_length {
        let entity = EntityId(rng.random_range(0..cfg.entity_count as u32));
        let max_gap = (i as u32).min(window);
        let p = match cfg.rule {
            CombinationRule::IndependentAttempts => {
                let mut survival = 1.0;
                for gap in 0..=max_gap {
                    let source = if gap == 0 {
                        entity
                    } else {
                        events[i - gap as usize].entity
                    };
                    let b = true_beta.get(entity, source).ok_or(Error::PairNotFitted {
                        target: entity.0,
                        origin: source.0,
                    })?;
                    survival *= 1.0 - b.hazard(gap);
                }
                1.0 - survival
            }
            CombinationRule::SingleSource => {
                let gap = rng.random_range(0..=max_gap);
                let source = if gap == 0 {
                    entity
                } else {
                    events[i - gap as usize].entity
                };
                let b = true_beta.get(entity, source).ok_or(Error::PairNotFitted {
                    target: entity.0,
                    origin: source.0,
                })?;
                b.hazard(gap)
            }
        };
        let contagion = rng.random_bool(p);
        events.push(ExposureEvent::new(entity, contagion));
    }
    Sequence::new(events)
}

/// Generates `cfg.sequence_count` sequences of length `cfg.max_length`
/// from the ground truth, with the numeric vocabulary `0..entity_count`.
pub fn generate(true_beta: &BetaMatrix, cfg: &GenConfig) -> Result<Corpus> {
    cfg.validate()?;
    if true_beta.kernel() != cfg.kernel {
        return Err(Error::InvalidConfig {
            reason: format!(
                "config kernel {} does not match ground truth kernel {}",
                cfg.kernel,
                true_beta.kernel()
            ),
        });
    }
    for target in 0..cfg.entity_count as u32 {
        for source in 0..cfg.entity_count as u32 {
            if true_beta.get(EntityId(target), EntityId(source)).is_none() {
                return Err(Error::PairNotFitted { target, origin: source });
            }
        }
    }
    let sequences: Vec<Sequence> = (0..cfg.sequence_count as u64)
        .into_par_iter()
        .map(|k| generate_sequence(true_beta, cfg, k))
        .collect::<Result<_>>()?;
    Ok(Corpus::new(Vocabulary::numeric(cfg.entity_count), sequences))
}
