use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use oztal::commands::{self, EvalOptions, LocalizeOptions, SweepGrid, SweepOptions};
use oztal::synth::SynthConfig;
use oztal::{LocalizerConfig, Result};

#[derive(Parser)]
#[command(
    name = "oztal",
    version,
    about = "Online zero-shot temporal action localization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Localize actions in every video of a feature manifest
    Localize(LocalizeArgs),
    /// Compute mAP at tIoU thresholds
    Eval(EvalArgs),
    /// Evaluate a grid over the action threshold and memory length
    Sweep(SweepArgs),
    /// Generate a seeded synthetic benchmark
    Synth(SynthArgs),
}

#[derive(Args)]
struct PipelineArgs {
    /// Action threshold on refined scores
    #[arg(long, default_value_t = 10.0)]
    tau: f64,
    /// Memory bank capacity; 0 disables memory enhancement
    #[arg(long, default_value_t = 20)]
    lq: usize,
    /// Fusion threshold on cos(x_t, memory mean)
    #[arg(long, default_value_t = 0.8, allow_negative_numbers = true)]
    theta: f64,
    /// Logit scale applied to cosine similarities
    #[arg(long, default_value_t = 100.0)]
    scale: f64,
    /// Use recency weights that sum to one
    #[arg(long)]
    normalized_weights: bool,
    /// Skip L2 renormalization of the fused feature
    #[arg(long)]
    no_renormalize: bool,
    /// Threshold raw class scores without the background penalty
    #[arg(long)]
    no_background: bool,
    #[arg(long, env = "OZTAL_JOBS", default_value_t = 1)]
    jobs: usize,
}

impl PipelineArgs {
    fn config(&self) -> LocalizerConfig {
        let cfg = LocalizerConfig {
            action_threshold: self.tau,
            fusion_threshold: self.theta,
            logit_scale: self.scale,
            normalized_memory_weights: self.normalized_weights,
            renormalize_fused: !self.no_renormalize,
            background_refinement: !self.no_background,
            ..LocalizerConfig::default()
        };
        commands::with_memory_len(cfg, self.lq)
    }
}

#[derive(Args)]
struct LocalizeArgs {
    /// Directory containing manifest.json
    #[arg(long)]
    features: PathBuf,
    /// Text bank prefix (PREFIX.json and PREFIX.bin)
    #[arg(long)]
    textbank: PathBuf,
    /// Prediction log to write (JSON lines)
    #[arg(long)]
    out: PathBuf,
    /// Per-step diagnostics (JSON lines)
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    preds: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.4,0.5,0.6,0.7")]
    tiou: Vec<f64>,
    /// JSON file {"splits": [[class, ...], ...]}; results are averaged over splits
    #[arg(long)]
    splits: Option<PathBuf>,
    /// Also write the results as JSON
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    textbank: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    /// e.g. "tau=5:20:2.5;lq=0,5,10,20,40"
    #[arg(long)]
    grid: String,
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.4,0.5,0.6,0.7")]
    tiou: Vec<f64>,
    /// CSV output; standard output when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 3)]
    classes: usize,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long, default_value_t = 5)]
    videos: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Timesteps per video
    #[arg(long, default_value_t = 300)]
    timesteps: usize,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Localize(args) => {
            commands::localize(&LocalizeOptions {
                features: args.features,
                textbank: args.textbank,
                out: args.out,
                config: args.pipeline.config(),
                trace: args.trace,
                jobs: args.pipeline.jobs,
            })?;
        }
        Command::Eval(args) => {
            let summary = commands::evaluate(&EvalOptions {
                preds: args.preds,
                gt: args.gt,
                tiou: args.tiou,
                splits: args.splits,
                json: args.json,
            })?;
            print!(
                "{}",
                commands::format_table(&summary.thresholds, &summary.map, summary.average)
            );
        }
        Command::Sweep(args) => {
            let config = args.pipeline.config();
            let grid = SweepGrid::parse(&args.grid, &config)?;
            let rows = commands::sweep(&SweepOptions {
                features: args.features,
                textbank: args.textbank,
                gt: args.gt,
                grid,
                config,
                tiou: args.tiou.clone(),
                jobs: args.pipeline.jobs,
            })?;
            let csv = commands::sweep_csv(&args.tiou, &rows);
            match args.out {
                Some(path) => {
                    std::fs::write(&path, csv).map_err(|e| oztal::Error::Io { path, source: e })?
                }
                None => print!("{csv}"),
            }
        }
        Command::Synth(args) => {
            let paths = commands::synthesize(
                &SynthConfig {
                    classes: args.classes,
                    dim: args.dim,
                    videos: args.videos,
                    seed: args.seed,
                    noise: args.noise,
                    timesteps: args.timesteps,
                    ..SynthConfig::default()
                },
                &args.out,
            )?;
            eprintln!(
                "wrote {} / {}.{{json,bin}} / {}",
                paths.features_dir.display(),
                paths.textbank_prefix.display(),
                paths.ground_truth.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
