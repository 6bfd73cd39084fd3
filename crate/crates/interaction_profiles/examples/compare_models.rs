//! Cross-validated comparison of the kernel models against the naive and
//! diagonal-constrained baselines, including recovery error against the
//! generating truth.
//!
//! Run with: cargo run --example compare_models

use interaction_profiles::data::AssemblyOptions;
use interaction_profiles::evaluation::{plan_folds, run_experiment, ExperimentConfig, ModelKind};
use interaction_profiles::io::format_summary_table;
use interaction_profiles::kernels::KernelSpec;
use interaction_profiles::solver::SolverConfig;
use interaction_profiles::synth::{generate, random_beta, CombinationRule, GenConfig};

fn main() {
    let kernel = KernelSpec::Rbf { max_shift: 1 };
    let truth = random_beta(4, kernel, 123);
    let corpus = generate(
        &truth,
        &GenConfig {
            entity_count: 4,
            sequence_count: 1200,
            max_length: 40,
            kernel,
            window: None,
            seed: 5,
            rule: CombinationRule::IndependentAttempts,
        },
    )
    .unwrap();

    let plan = plan_folds(corpus.sequences.len(), 5, 0).unwrap();
    let cfg = ExperimentConfig {
        models: vec![
            ModelKind::Rbf,
            ModelKind::Exp,
            ModelKind::Icir,
            ModelKind::Naive,
        ],
        assembly: AssemblyOptions {
            max_gap: 1,
            skip_prefix: 8,
            min_gap: 0,
        },
        solver: SolverConfig::default(),
        truth: Some(truth),
        empirical_sanity: false,
    };
    let result = run_experiment(&corpus, &plan, &cfg).unwrap();

    print!("{}", format_summary_table(&result));

    let rbf = &result.summary[&ModelKind::Rbf];
    let naive = &result.summary[&ModelKind::Naive];
    println!(
        "\nfull model rss {:.4} vs naive {:.4}: the per-pair kernels explain\n\
         the gap-dependent structure a per-target constant cannot",
        rbf.rss.mean, naive.rss.mean
    );
}
