//! Numerical verification of the likelihood machinery: the analytic
//! gradient against central finite differences, and convexity along
//! random segments.
//!
//! Run with: cargo run --example check_gradients

use interaction_profiles::data::assemble_observations;
use interaction_profiles::kernels::KernelSpec;
use interaction_profiles::likelihood::{gradient, neg_log_likelihood, slice_subproblems};
use interaction_profiles::synth::{generate, random_beta, CombinationRule, GenConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let kernel = KernelSpec::Rbf { max_shift: 2 };
    let truth = random_beta(2, kernel, 1);
    let corpus = generate(
        &truth,
        &GenConfig {
            entity_count: 2,
            sequence_count: 40,
            max_length: 20,
            kernel,
            window: None,
            seed: 1,
            rule: CombinationRule::IndependentAttempts,
        },
    )
    .unwrap();
    let obs = assemble_observations(&corpus, 2, 4).unwrap();
    let subs = slice_subproblems(&obs).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);

    let mut worst_rel = 0.0f64;
    let mut worst_convexity = 0.0f64;
    for sub in &subs {
        let n = sub.param_len(kernel);
        for _ in 0..20 {
            let point: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.5)).collect();

            // Central differences, one coordinate at a time.
            let g = gradient(sub, &point, kernel).unwrap();
            for i in 0..n {
                let h = 1e-6 * (1.0 + point[i].abs());
                let mut lo = point.clone();
                let mut hi = point.clone();
                lo[i] -= h;
                hi[i] += h;
                let fd = (neg_log_likelihood(sub, &hi, kernel).unwrap()
                    - neg_log_likelihood(sub, &lo, kernel).unwrap())
                    / (2.0 * h);
                let rel = (g[i] - fd).abs() / g[i].abs().max(1.0);
                worst_rel = worst_rel.max(rel);
            }

            // Midpoint convexity: f((a+b)/2) <= (f(a)+f(b))/2.
            let other: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.5)).collect();
            let mid: Vec<f64> = point
                .iter()
                .zip(&other)
                .map(|(a, b)| 0.5 * (a + b))
                .collect();
            let gap = neg_log_likelihood(sub, &mid, kernel).unwrap()
                - 0.5
                    * (neg_log_likelihood(sub, &point, kernel).unwrap()
                        + neg_log_likelihood(sub, &other, kernel).unwrap());
            worst_convexity = worst_convexity.max(gap);
        }
    }

    println!("worst gradient relative error: {worst_rel:.3e}");
    println!("worst midpoint convexity violation: {worst_convexity:.3e} (<= 0 means convex)");
    assert!(worst_rel <= 1e-5);
    assert!(worst_convexity <= 1e-9);
    println!("analytic gradient and convexity verified");
}
