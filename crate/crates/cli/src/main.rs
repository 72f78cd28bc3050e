//! `wsd-ue`: uncertainty estimation pipeline for WSD classifiers.
//!
//! Exit codes: 0 success, 1 internal failure, 2 invalid input or usage.

mod commands;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wsd_ue::context::ContextMode;
use wsd_ue::effects::Effect;
use wsd_ue::scores::ScoreName;
use wsd_ue::Exec;

#[derive(Debug, Parser)]
#[command(name = "wsd-ue", version, about = "Uncertainty estimation for word sense disambiguation")]
struct Cli {
    /// Run every instance loop on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    /// Directory holding `sim.toml` and `effects.toml` overrides.
    #[arg(long, global = true, env = "WSD_UE_CONFIG_DIR")]
    config_dir: Option<PathBuf>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a native corpus from the evaluation-framework XML + gold keys,
    /// or enrich an existing native corpus.
    Import(ImportArgs),
    /// Compute uncertainty scores from predictive samples.
    Score(ScoreArgs),
    /// RCC, RPP and F1 for score record files.
    Metrics(MetricsArgs),
    /// Derive context-reduced corpora.
    Context(ContextArgs),
    /// Lexical effect tables and the joint regression.
    Effects(EffectsArgs),
    /// Synthetic corpus and predictive samples.
    Simulate(SimulateArgs),
    /// Score distributions: 20-bin histograms and skewness.
    Report(ReportArgs),
    /// Mean uncertainty and F1 across context sizes.
    Curve(CurveArgs),
    /// Compare two cohorts scored with the same score.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct ImportArgs {
    /// Framework XML file.
    #[arg(long, requires = "gold", required_unless_present = "corpus")]
    xml: Option<PathBuf>,
    /// Gold key file matching `--xml`.
    #[arg(long, requires = "xml")]
    gold: Option<PathBuf>,
    /// Existing native corpus to enrich instead.
    #[arg(long, conflicts_with_all = ["xml", "gold", "inventory", "name"])]
    corpus: Option<PathBuf>,
    /// Sense inventory JSONL filling candidate lists.
    #[arg(long)]
    inventory: Option<PathBuf>,
    /// Lexical metadata JSONL.
    #[arg(long)]
    metadata: Option<PathBuf>,
    /// CoNLL-U dependency parses.
    #[arg(long)]
    conllu: Option<PathBuf>,
    /// Dataset label (default: XML file stem).
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LossArg {
    ZeroOne,
    CrossEntropy,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    samples: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "mp,smp,pv,bald")]
    scores: Vec<ScoreName>,
    /// `auto`, `deterministic` or `row:N`.
    #[arg(long, default_value = "auto", value_parser = commands::parse_mp_source)]
    mp_source: wsd_ue::scores::MpSource,
    #[arg(long, value_enum, default_value = "zero-one")]
    loss: LossArg,
    /// Score the aligned subset instead of failing on a misalignment.
    #[arg(long)]
    partial: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    /// Score record files (`.csv` or `.jsonl`).
    #[arg(long, required = true, num_args = 1..)]
    records: Vec<PathBuf>,
    /// Dataset label for the table.
    #[arg(long, default_value = "dataset")]
    dataset: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ContextArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// `wc` (word window) or `dp` (dependency hops).
    #[arg(long)]
    mode: ContextMode,
    /// Comma list of sizes, `whole` for the unreduced context.
    #[arg(long, default_value = "0,1,3,whole")]
    params: String,
    /// Replace dropped tokens by `[MASK]` instead of deleting them.
    #[arg(long)]
    mask: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EffectsArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Score record file, usually SMP.
    #[arg(long)]
    records: PathBuf,
    /// Effects to analyse (default: every entry of the config).
    #[arg(long, value_delimiter = ',')]
    effect: Vec<Effect>,
    /// Effect level configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Student's t-test instead of Welch's.
    #[arg(long)]
    student: bool,
    /// Aggregate lemmas across POS.
    #[arg(long)]
    lemma_only: bool,
    /// Also fit the joint OLS regression.
    #[arg(long)]
    regress: bool,
    /// Predictors for `--regress`. dHypo exists only for nouns, so adding it
    /// restricts the fit to nouns and requires dropping POS.
    #[arg(long, value_delimiter = ',', default_value = "POS,nMorph,nGT,nPD,dSyno")]
    regress_effects: Vec<Effect>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Simulator configuration (TOML or `.json`).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Override the instance count.
    #[arg(long)]
    n: Option<usize>,
    /// Emit one run per context size, e.g. `0,1,3,whole`.
    #[arg(long)]
    context_series: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Csv,
    Json,
    Md,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long, required = true, num_args = 1..)]
    records: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: ReportFormat,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    /// Only misclassified instances.
    #[arg(long)]
    wrong_only: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CurveArgs {
    /// `PARAM=RECORDS`, one per context size.
    #[arg(long, required = true, num_args = 1..)]
    run: Vec<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// Rejected input detected by the command layer itself.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct InputError(pub String);

fn exit_code(err: &anyhow::Error) -> u8 {
    let input = err.chain().any(|cause| {
        cause.downcast_ref::<InputError>().is_some()
            || cause
                .downcast_ref::<wsd_ue::Error>()
                .is_some_and(wsd_ue::Error::is_input_error)
    });
    if input {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let exec = if cli.sequential { Exec::Sequential } else { Exec::Parallel };
    let ctx = commands::Ctx { exec, config_dir: cli.config_dir };

    let outcome = std::panic::catch_unwind(|| match cli.command {
        Command::Import(a) => commands::import(&ctx, a),
        Command::Score(a) => commands::score(&ctx, a),
        Command::Metrics(a) => commands::metrics(&ctx, a),
        Command::Context(a) => commands::context(&ctx, a),
        Command::Effects(a) => commands::effects(&ctx, a),
        Command::Simulate(a) => commands::simulate(&ctx, a),
        Command::Report(a) => report::report(a),
        Command::Curve(a) => commands::curve(a),
        Command::Compare(a) => commands::compare(a),
    });
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
        Err(_) => {
            eprintln!("error: internal failure");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_kind() {
        let domain = anyhow::Error::new(wsd_ue::Error::Domain("x".into())).context("while scoring");
        assert_eq!(exit_code(&domain), 2);
        assert_eq!(exit_code(&anyhow::Error::new(InputError("bad".into()))), 2);
        let disk = std::io::Error::other("disk on fire");
        assert_eq!(exit_code(&anyhow::Error::new(disk)), 1);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
