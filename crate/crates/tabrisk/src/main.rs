//! Thin CLI over [`tabrisk::runner`]. All logic lives in the library;
//! this binary only parses flags, dispatches, and maps errors to exit
//! codes (0 success, 2 config, 3 data, 4 leakage guard).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tabrisk::runner::{
    cmd_evaluate, cmd_external_validate, cmd_prepare, cmd_report, cmd_train, load_config,
    CohortReport, EvalMode, EvalOverrides, RunnerError,
};

#[derive(Parser)]
#[command(
    name = "tabrisk",
    version,
    about = "Train and validate hybrid soft-voting risk classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArg {
    /// Bundle directory receiving (or holding) all experiment artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    out: OutArg,
    /// Decision threshold override, in (0, 1).
    #[arg(long)]
    tau: Option<f64>,
    /// Bootstrap resample count override.
    #[arg(long)]
    bootstrap: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CliEvalMode {
    Natural,
    Balanced,
}

impl From<CliEvalMode> for EvalMode {
    fn from(m: CliEvalMode) -> Self {
        match m {
            CliEvalMode::Natural => EvalMode::Natural,
            CliEvalMode::Balanced => EvalMode::Balanced,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate the config and data files, then write the split plan.
    Prepare {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutArg,
        /// Split seed override.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit the frozen pipeline, the four base learners, and both hybrids.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutArg,
        /// Split seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Decision threshold override, in (0, 1).
        #[arg(long)]
        tau: Option<f64>,
        /// Bootstrap resample count override.
        #[arg(long)]
        bootstrap: Option<usize>,
    },
    /// Score the held-out internal test split.
    Evaluate {
        #[command(flatten)]
        args: ScoreArgs,
        /// natural keeps the test prevalence; balanced undersamples the
        /// majority class to a 50/50 mix.
        #[arg(long, value_enum)]
        eval_mode: Option<CliEvalMode>,
    },
    /// Score the external cohort through the frozen pipeline.
    ExternalValidate {
        #[command(flatten)]
        args: ScoreArgs,
        /// Feature crosswalk override (column names only; a sensitivity
        /// analysis, nothing is refit).
        #[arg(long)]
        mapping: Option<PathBuf>,
    },
    /// Render SVG plots, the attenuation table, and summary.md.
    Report {
        #[command(flatten)]
        out: OutArg,
    },
}

fn print_report(report: &CohortReport) {
    println!("cohort {} (prevalence {:.3})", report.cohort, report.prevalence);
    for (name, m) in &report.models {
        println!(
            "  {name}: AUROC {:.4} [{:.4}, {:.4}]  AUPRC {:.4} [{:.4}, {:.4}]  Brier {:.4}",
            m.auroc, m.auroc_ci[0], m.auroc_ci[1], m.auprc, m.auprc_ci[0], m.auprc_ci[1], m.brier
        );
    }
    println!(
        "  ΔAUROC {:+.4} (DeLong p = {:.4}); McNemar b = {}, c = {}, p = {:.4}",
        report.tests.delong.delta_auc,
        report.tests.delong.p,
        report.tests.mcnemar.b,
        report.tests.mcnemar.c,
        report.tests.mcnemar.p
    );
}

fn run(cli: Cli) -> Result<(), RunnerError> {
    match cli.command {
        Command::Prepare { config, out, seed } => {
            let mut cfg = load_config(&config)?;
            cfg.apply_overrides(seed, None, None, None, None);
            let prepared = cmd_prepare(&cfg, &out.out)?;
            println!(
                "prepared {} rows (prevalence {:.3}) -> {} train / {} test",
                prepared.primary.rows,
                prepared.primary.prevalence,
                prepared.split.train_rows,
                prepared.split.test_rows
            );
            if let Some(ext) = &prepared.external {
                println!("external cohort: {} rows (prevalence {:.3})", ext.rows, ext.prevalence);
            }
            Ok(())
        }
        Command::Train { config, out, seed, tau, bootstrap } => {
            let mut cfg = load_config(&config)?;
            cfg.apply_overrides(seed, tau, bootstrap, None, None);
            let manifest = cmd_train(&cfg, &out.out)?;
            println!(
                "trained {} models on {} oversampled rows (SVM pair on {}); bundle at {}",
                manifest.model_files.len(),
                manifest.smote.rows_after,
                manifest.svm_subsample.taken,
                out.out.display()
            );
            Ok(())
        }
        Command::Evaluate { args, eval_mode } => {
            let overrides = EvalOverrides {
                tau: args.tau,
                bootstrap: args.bootstrap,
                mode: eval_mode.map(EvalMode::from),
                mapping: None,
            };
            print_report(&cmd_evaluate(&args.out.out, &overrides)?);
            Ok(())
        }
        Command::ExternalValidate { args, mapping } => {
            let overrides = EvalOverrides {
                tau: args.tau,
                bootstrap: args.bootstrap,
                mode: None,
                mapping,
            };
            print_report(&cmd_external_validate(&args.out.out, &overrides)?);
            Ok(())
        }
        Command::Report { out } => {
            let summary = cmd_report(&out.out)?;
            for p in &summary.plots {
                println!("wrote {}", p.display());
            }
            match &summary.attenuation {
                Some(t) => println!("attenuation table: {} -> {}", t.from_cohort, t.to_cohort),
                None => println!("attenuation skipped (needs internal_test and external reports)"),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
