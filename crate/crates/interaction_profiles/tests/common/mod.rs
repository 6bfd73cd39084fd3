//! Oracles and builders shared by the integration suites. Everything here
//! recomputes results through a second, simpler route so the library is
//! checked against independent arithmetic, not against itself.

#![allow(dead_code)]

use std::process::Command;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use interaction_profiles::data::{Corpus, EntityId, ExposureEvent, Sequence, Vocabulary};
use interaction_profiles::kernels::KernelSpec;
use interaction_profiles::likelihood::{neg_log_likelihood, Subproblem};

/// Central-difference gradient of the subproblem NLL. Probe points must
/// stay feasible, so callers sample coordinates away from the bounds.
pub fn fd_gradient(sub: &Subproblem, params: &[f64], kernel: KernelSpec) -> Vec<f64> {
    let f = |p: &[f64]| neg_log_likelihood(sub, p, kernel).unwrap();
    let mut g = vec![0.0; params.len()];
    for i in 0..params.len() {
        let h = 1e-6 * (1.0 + params[i].abs());
        let mut hi = params.to_vec();
        let mut lo = params.to_vec();
        hi[i] += h;
        lo[i] -= h;
        g[i] = (f(&hi) - f(&lo)) / (hi[i] - lo[i]);
    }
    g
}

/// Relative disagreement used for gradient comparisons.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / f64::max(1.0, a.abs() + b.abs())
}

/// A corpus of uniformly random entities with i.i.d. outcome flags. Not a
/// model draw; used where only the observation layout matters.
pub fn random_corpus(
    seed: u64,
    entities: usize,
    sequences: usize,
    len: usize,
    contagion_p: f64,
) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = Vocabulary::numeric(entities);
    let seqs = (0..sequences)
        .map(|_| {
            Sequence::new(
                (0..len)
                    .map(|_| {
                        let e = rng.random_range(0..entities as u32);
                        ExposureEvent::new(EntityId(e), rng.random_bool(contagion_p))
                    })
                    .collect(),
            )
            .unwrap()
        })
        .collect();
    Corpus::new(vocab, seqs)
}

/// A corpus where every sequence repeats a single entity, so only
/// diagonal pairs ever appear in the observations.
pub fn per_entity_corpus(
    seed: u64,
    entities: usize,
    sequences_per_entity: usize,
    len: usize,
    contagion_p: &[f64],
) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = Vocabulary::numeric(entities);
    let mut seqs = Vec::new();
    for e in 0..entities {
        for _ in 0..sequences_per_entity {
            seqs.push(
                Sequence::new(
                    (0..len)
                        .map(|_| {
                            ExposureEvent::new(
                                EntityId(e as u32),
                                rng.random_bool(contagion_p[e]),
                            )
                        })
                        .collect(),
                )
                .unwrap(),
            );
        }
    }
    Corpus::new(vocab, seqs)
}

/// Interior feasible point for a subproblem with `blocks` source blocks:
/// backgrounds in [0.05, 2], other coordinates in [0.01, 1], far enough
/// from the bounds for central differences.
pub fn random_interior_point(rng: &mut ChaCha8Rng, kernel: KernelSpec, blocks: usize) -> Vec<f64> {
    let dim = kernel.dimension();
    (0..dim * blocks)
        .map(|i| {
            if i % dim == 0 {
                rng.random_range(0.05..2.0)
            } else {
                rng.random_range(0.01..1.0)
            }
        })
        .collect()
}

/// Exhaustive-minimum oracle for a single-source EXP subproblem: the NLL
/// is recomputed from its closed form and minimized over the grid
/// [0, 5]^2 with step 1e-3. Nodes where the likelihood degenerates
/// evaluate to infinity and drop out on their own.
pub fn grid_min_nll_exp(sub: &Subproblem) -> f64 {
    assert_eq!(sub.sources().len(), 1, "grid oracle is two-dimensional");
    let cells: Vec<(f64, f64, f64)> = sub
        .cells()
        .iter()
        .map(|c| (c.gap as f64, c.contagions as f64, (c.total - c.contagions) as f64))
        .collect();
    let nll_at = |b0: f64, b1: f64| -> f64 {
        let mut acc = 0.0;
        for &(gap, hits, misses) in &cells {
            let z = b0 + b1 * gap;
            acc += hits * z - misses * (-(-z).exp_m1()).ln();
        }
        acc
    };
    use rayon::prelude::*;
    (0..=5000u32)
        .into_par_iter()
        .map(|i| {
            let b0 = i as f64 * 1e-3;
            let mut best = f64::INFINITY;
            for j in 0..=5000u32 {
                let v = nll_at(b0, j as f64 * 1e-3);
                if v < best {
                    best = v;
                }
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Runs the packaged binary with the given arguments and environment
/// overrides, returning (stdout, stderr, success).
pub fn run_iprofile_env(args: &[&str], envs: &[(&str, &str)]) -> (String, String, bool) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_iprofile"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("failed to spawn the packaged binary");
    (
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
        out.status.success(),
    )
}

pub fn run_iprofile(args: &[&str]) -> (String, String, bool) {
    run_iprofile_env(args, &[])
}
