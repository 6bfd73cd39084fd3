//! Command-line surface: corpus generation, fitting, cross-validated
//! evaluation, and profile export.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::data::{assemble_observations_with, AssemblyOptions};
use crate::evaluation::{plan_folds, run_experiment, ExperimentConfig, ModelKind};
use crate::io;
use crate::kernels::KernelSpec;
use crate::solver::{fit, SolverConfig};
use crate::synth::{generate, random_beta, CombinationRule, GenConfig};
use crate::{Error, Result};

/// Environment variable overriding the default worker thread count.
pub const THREADS_ENV: &str = "IPROFILE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "iprofile",
    version,
    about = "Pairwise interaction-profile models over exposure sequences",
    after_help = "Worker thread count: --threads flag if given, otherwise the \
IPROFILE_THREADS environment variable, otherwise all logical CPUs. Results \
do not depend on the thread count."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus and its ground-truth coefficients.
    Generate(GenerateArgs),
    /// Fit per-pair coefficients to a sequence file.
    Fit(FitArgs),
    /// Cross-validated model comparison, written as a flat text report.
    Eval(EvalArgs),
    /// Tabulate per-pair hazard and intensity curves from coefficients.
    Profile(ProfileArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Rbf,
    Exp,
}

impl KernelArg {
    fn to_spec(self, max_shift: u32) -> KernelSpec {
        match self {
            KernelArg::Rbf => KernelSpec::Rbf { max_shift },
            KernelArg::Exp => KernelSpec::Exp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    /// Each prior exposure tries to convert independently.
    Independent,
    /// One prior exposure is drawn as the sole candidate influence.
    Single,
}

impl From<RuleArg> for CombinationRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Independent => CombinationRule::IndependentAttempts,
            RuleArg::Single => CombinationRule::SingleSource,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Rbf,
    Exp,
    Icir,
    Naive,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Rbf => ModelKind::Rbf,
            ModelArg::Exp => ModelKind::Exp,
            ModelArg::Icir => ModelKind::Icir,
            ModelArg::Naive => ModelKind::Naive,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Number of distinct entities.
    #[arg(long)]
    pub entities: usize,
    /// Number of sequences to draw.
    #[arg(long)]
    pub sequences: usize,
    /// Events per sequence.
    #[arg(long, default_value_t = 50)]
    pub max_length: usize,
    #[arg(long, value_enum, default_value_t = KernelArg::Rbf)]
    pub kernel: KernelArg,
    /// Largest gap with its own coefficient (rbf kernel only).
    #[arg(long, default_value_t = 20)]
    pub max_shift: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = RuleArg::Independent)]
    pub rule: RuleArg,
    /// Output sequence file.
    #[arg(long)]
    pub out: PathBuf,
    /// Output ground-truth coefficient file.
    #[arg(long)]
    pub beta_out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input sequence file.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = KernelArg::Rbf)]
    pub kernel: KernelArg,
    /// Largest gap with its own coefficient; also the history window.
    #[arg(long, default_value_t = 20)]
    pub max_shift: u32,
    /// Leading exposures per sequence that are never targets.
    #[arg(long, default_value_t = 10)]
    pub skip_prefix: usize,
    /// Smallest gap assembled into observations.
    #[arg(long, default_value_t = 0)]
    pub min_gap: u32,
    /// Relative NLL decrease at which iteration stops.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    /// Worker threads (0 = all logical CPUs).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output coefficient file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Input sequence file.
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated list of models to compare.
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_values_t = [ModelArg::Rbf, ModelArg::Exp, ModelArg::Icir, ModelArg::Naive]
    )]
    pub models: Vec<ModelArg>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    /// Seed for the fold shuffle.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ground-truth coefficient file; enables the recovery error metric.
    #[arg(long)]
    pub truth_beta: Option<PathBuf>,
    /// Output report file.
    #[arg(long)]
    pub report: PathBuf,
    /// Largest gap with its own coefficient; also the history window.
    #[arg(long, default_value_t = 20)]
    pub max_shift: u32,
    /// Leading exposures per sequence that are never targets.
    #[arg(long, default_value_t = 10)]
    pub skip_prefix: usize,
    /// Smallest gap assembled into observations.
    #[arg(long, default_value_t = 0)]
    pub min_gap: u32,
    /// Relative NLL decrease at which iteration stops.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_iter: usize,
    /// Worker threads (0 = all logical CPUs).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Testing hook: score empirical test frequencies instead of fits.
    #[arg(long, hide = true)]
    pub sanity_empirical: bool,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Input coefficient file.
    #[arg(long)]
    pub beta: PathBuf,
    /// Output CSV file.
    #[arg(long)]
    pub out: PathBuf,
    /// Largest gap to tabulate (default: max shift, or 20 for exp).
    #[arg(long)]
    pub max_gap: Option<u32>,
}

/// Runs `job` inside a dedicated thread pool sized by the `--threads`
/// flag, the environment variable, or the machine, in that order.
fn with_pool<T: Send>(
    threads: Option<usize>,
    job: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    let n = threads.unwrap_or_else(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.parse().ok())
            .unwrap_or(0)
    });
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::InvalidConfig {
            reason: format!("thread pool: {e}"),
        })?;
    pool.install(job)
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let kernel = a.kernel.to_spec(a.max_shift);
    let truth = random_beta(a.entities, kernel, a.seed);
    let cfg = GenConfig {
        entity_count: a.entities,
        sequence_count: a.sequences,
        max_length: a.max_length,
        kernel,
        window: None,
        seed: a.seed,
        rule: a.rule.into(),
    };
    let corpus = generate(&truth, &cfg)?;
    io::save_sequences(&a.out, &corpus)?;
    io::save_beta(&a.beta_out, &truth, &corpus.vocabulary)?;
    println!(
        "wrote {} sequences to {}",
        corpus.sequences.len(),
        a.out.display()
    );
    println!("wrote ground-truth coefficients to {}", a.beta_out.display());
    Ok(())
}

fn cmd_fit(a: FitArgs) -> Result<()> {
    let corpus = io::load_sequences(&a.data)?;
    let options = AssemblyOptions {
        max_gap: a.max_shift,
        skip_prefix: a.skip_prefix,
        min_gap: a.min_gap,
    };
    let obs = assemble_observations_with(&corpus, &options)?;
    let kernel = a.kernel.to_spec(a.max_shift);
    let cfg = SolverConfig {
        max_iterations: a.max_iter,
        tolerance: a.tol,
        ..SolverConfig::default()
    };
    let result = with_pool(a.threads, || fit(&obs, kernel, &cfg))?;
    io::save_beta(&a.out, &result.beta, &corpus.vocabulary)?;

    let mut summary = String::new();
    let mut converged_count = 0usize;
    for (t, nll) in &result.nll {
        let label = corpus.vocabulary.label(*t).unwrap_or("?");
        let converged = result.converged[t];
        converged_count += converged as usize;
        let _ = writeln!(
            summary,
            "target {label}: nll={nll:e} iterations={} converged={converged}",
            result.iterations[t]
        );
    }
    let _ = writeln!(
        summary,
        "total: nll={:e} targets={} converged={converged_count}/{}",
        result.final_nll,
        result.nll.len(),
        result.nll.len()
    );
    print!("{summary}");
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let corpus = io::load_sequences(&a.data)?;
    // Entity ids are per-corpus; rekey the truth matrix by label so it
    // lines up with the ids this corpus assigns.
    let truth = match &a.truth_beta {
        Some(path) => {
            let (beta, vocab) = io::load_beta(path)?;
            Some(beta.remap(&vocab, &corpus.vocabulary)?)
        }
        None => None,
    };
    let plan = plan_folds(corpus.sequences.len(), a.folds, a.seed)?;
    let mut models: Vec<ModelKind> = Vec::new();
    for m in &a.models {
        let kind = ModelKind::from(*m);
        if !models.contains(&kind) {
            models.push(kind);
        }
    }
    let cfg = ExperimentConfig {
        models,
        assembly: AssemblyOptions {
            max_gap: a.max_shift,
            skip_prefix: a.skip_prefix,
            min_gap: a.min_gap,
        },
        solver: SolverConfig {
            max_iterations: a.max_iter,
            tolerance: a.tol,
            ..SolverConfig::default()
        },
        truth,
        empirical_sanity: a.sanity_empirical,
    };
    let result = with_pool(a.threads, || run_experiment(&corpus, &plan, &cfg))?;
    io::save_report(&a.report, &result)?;
    print!("{}", io::format_summary_table(&result));
    Ok(())
}

fn cmd_profile(a: ProfileArgs) -> Result<()> {
    let (beta, vocab) = io::load_beta(&a.beta)?;
    io::save_profile(&a.out, &beta, &vocab, a.max_gap)?;
    println!(
        "wrote profile rows for {} pairs to {}",
        beta.len(),
        a.out.display()
    );
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Profile(a) => cmd_profile(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn model_list_splits_on_commas() {
        let cli = Cli::parse_from([
            "iprofile", "eval", "--data", "d.txt", "--report", "r.txt", "--models", "rbf,naive",
        ]);
        match cli.command {
            Command::Eval(a) => assert_eq!(a.models, vec![ModelArg::Rbf, ModelArg::Naive]),
            _ => panic!("expected eval"),
        }
    }

    #[test]
    fn defaults_match_documented_values() {
        let cli = Cli::parse_from([
            "iprofile", "generate", "--entities", "2", "--sequences", "3", "--out", "o", "--beta-out", "b",
        ]);
        match cli.command {
            Command::Generate(a) => {
                assert_eq!(a.max_length, 50);
                assert_eq!(a.max_shift, 20);
                assert_eq!(a.rule, RuleArg::Independent);
                assert_eq!(a.kernel, KernelArg::Rbf);
            }
            _ => panic!("expected generate"),
        }
        let cli = Cli::parse_from(["iprofile", "eval", "--data", "d", "--report", "r"]);
        match cli.command {
            Command::Eval(a) => {
                assert_eq!(a.folds, 5);
                assert_eq!(a.models.len(), 4);
                assert_eq!(a.tol, 1e-9);
                assert_eq!(a.max_iter, 5000);
            }
            _ => panic!("expected eval"),
        }
    }

    #[test]
    fn rule_and_kernel_flags_parse() {
        let cli = Cli::parse_from([
            "iprofile", "generate", "--entities", "2", "--sequences", "3", "--kernel", "exp",
            "--rule", "single", "--out", "o", "--beta-out", "b",
        ]);
        match cli.command {
            Command::Generate(a) => {
                assert_eq!(a.kernel, KernelArg::Exp);
                assert_eq!(CombinationRule::from(a.rule), CombinationRule::SingleSource);
            }
            _ => panic!("expected generate"),
        }
    }
}
