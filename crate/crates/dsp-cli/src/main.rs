//! `dsp`: differential spatial prediction from the command line.
//!
//! Subcommands: `synth`, `learn`, `field`, `predict`, `eval`, `compare`,
//! `curves`. Every run is reproducible from `--seed`; artifacts written
//! with the same seed are byte-identical across runs. Errors go to stderr
//! prefixed `error:` and flip the exit code.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "dsp", version, about = "Differential spatial prediction toolkit")]
struct Cli {
    /// Global seed; all module streams derive from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// JSON config file (unknown keys are rejected).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset CSV.
    Synth {
        /// Number of samples (>= 10).
        #[arg(long)]
        n: Option<usize>,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn per-point powers and write the assignment plus a training log.
    Learn {
        /// Training dataset CSV.
        #[arg(long)]
        data: PathBuf,
        /// Agent variant: dqn, ddqn, dudqn or rsv-dudqn.
        #[arg(long)]
        variant: Option<String>,
        /// Episode budget.
        #[arg(long)]
        episodes: Option<usize>,
        /// Power assignment JSON output.
        #[arg(long, default_value = "powers.json")]
        out: PathBuf,
        /// JSON-lines training log output.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Per-episode error curve CSV output.
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Final online-network snapshot JSON output.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Interpolate a power assignment into a queryable power field.
    Field {
        /// Power assignment JSON (from `learn`).
        #[arg(long)]
        assignment: PathBuf,
        /// Dataset the assignment was learned on (coverage check).
        #[arg(long)]
        data: PathBuf,
        /// Exponent for interpolating the powers themselves.
        #[arg(long)]
        field_power: Option<f64>,
        /// Power field JSON output.
        #[arg(long, default_value = "field.json")]
        out: PathBuf,
    },
    /// Differential predictions for query points.
    Predict {
        /// Power field JSON (from `field`).
        #[arg(long)]
        field: PathBuf,
        /// Training dataset CSV.
        #[arg(long)]
        train: PathBuf,
        /// Query CSV with header `x,y`.
        #[arg(long)]
        queries: PathBuf,
        /// Output CSV (`x,y,power,prediction`); stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error metrics between a prediction file and an actual file.
    Eval {
        /// CSV holding the predictions (column `prediction` or `value`).
        #[arg(long)]
        predicted: PathBuf,
        /// CSV holding the ground truth (column `value`).
        #[arg(long)]
        actual: PathBuf,
        /// Write <out>.json / <out>.csv instead of printing JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit the JSON report (default when neither flag is given).
        #[arg(long)]
        json: bool,
        /// Emit the CSV report.
        #[arg(long)]
        csv: bool,
    },
    /// Train/test comparison of classic IDW against learned-power pipelines.
    Compare {
        /// Dataset CSV.
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated models: classic plus any of dqn, ddqn, dudqn,
        /// rsv-dudqn.
        #[arg(long, default_value = "classic,rsv-dudqn")]
        models: String,
        /// Episode budget for pipeline models.
        #[arg(long)]
        episodes: Option<usize>,
        /// Write <out>.json / <out>.csv instead of printing JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit the JSON report (default when neither flag is given).
        #[arg(long)]
        json: bool,
        /// Emit the CSV report.
        #[arg(long)]
        csv: bool,
    },
    /// Reduce a training log to a per-episode error curve CSV.
    Curves {
        /// JSON-lines training log (from `learn --log`).
        #[arg(long)]
        log: PathBuf,
        /// Trailing smoothing window.
        #[arg(long)]
        window: Option<usize>,
        /// Output CSV (`episode,raw_error,smoothed_error`); stdout when
        /// omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    env_logger::Builder::from_env(
        env_logger::Env::new()
            .filter("DSP_LOG_LEVEL")
            .default_filter_or("error"),
    )
    .init();

    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.unwrap_or(cfg.seed);
    cfg = cfg.with_seed(seed);

    match cli.command {
        Command::Synth { n, out } => commands::synth(&cfg, n, out.as_deref()),
        Command::Learn {
            data,
            variant,
            episodes,
            out,
            log,
            curve,
            checkpoint,
        } => commands::learn(
            cfg,
            &data,
            variant.as_deref(),
            episodes,
            &out,
            log.as_deref(),
            curve.as_deref(),
            checkpoint.as_deref(),
        ),
        Command::Field {
            assignment,
            data,
            field_power,
            out,
        } => commands::field(&cfg, &assignment, &data, field_power, &out),
        Command::Predict {
            field,
            train,
            queries,
            out,
        } => commands::predict(&cfg, &field, &train, &queries, out.as_deref()),
        Command::Eval {
            predicted,
            actual,
            out,
            json,
            csv,
        } => commands::eval(&predicted, &actual, out.as_deref(), json, csv),
        Command::Compare {
            data,
            models,
            episodes,
            out,
            json,
            csv,
        } => commands::compare(cfg, &data, &models, episodes, out.as_deref(), json, csv),
        Command::Curves { log, window, out } => {
            commands::curves(&cfg, &log, window, out.as_deref())
        }
    }
}
