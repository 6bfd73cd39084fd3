//! The on-disk formats: sequence files, coefficient files, and what strict
//! vocabulary checking rejects.
//!
//! Run with: cargo run --example sequence_files

use interaction_profiles::io::{
    format_beta, format_sequences, load_beta, load_sequences, load_sequences_strict, save_beta,
    save_sequences,
};
use interaction_profiles::kernels::KernelSpec;
use interaction_profiles::synth::{generate, random_beta, CombinationRule, GenConfig};

fn main() {
    let kernel = KernelSpec::Exp;
    let truth = random_beta(2, kernel, 42);
    let corpus = generate(
        &truth,
        &GenConfig {
            entity_count: 2,
            sequence_count: 3,
            max_length: 8,
            kernel,
            window: Some(2),
            seed: 42,
            rule: CombinationRule::SingleSource,
        },
    )
    .unwrap();

    // One line per sequence; each token is label:flag.
    println!("sequence file:");
    print!("{}", format_sequences(&corpus).unwrap());

    // Coefficient rows carry entity labels, never numeric ids, so files
    // outlive any particular load order.
    println!("\ncoefficient file:");
    print!("{}", format_beta(&truth, &corpus.vocabulary).unwrap());

    let dir = tempfile::tempdir().unwrap();
    let seq_path = dir.path().join("corpus.txt");
    let beta_path = dir.path().join("truth.beta");
    save_sequences(&seq_path, &corpus).unwrap();
    save_beta(&beta_path, &truth, &corpus.vocabulary).unwrap();

    let reloaded = load_sequences(&seq_path).unwrap();
    let (reloaded_beta, _) = load_beta(&beta_path).unwrap();
    assert_eq!(reloaded.sequences, corpus.sequences);
    assert_eq!(reloaded_beta.len(), truth.len());
    println!("\nround trip preserved {} sequences", reloaded.sequences.len());

    // Strict mode pins the vocabulary: unknown labels are an error with the
    // offending line, instead of being interned silently.
    std::fs::write(&seq_path, "0:0,1:1\n0:1,mystery:0\n").unwrap();
    match load_sequences_strict(&seq_path, &corpus.vocabulary) {
        Err(e) => println!("strict load refused: {e}"),
        Ok(_) => unreachable!("unknown label must not load in strict mode"),
    }
}
