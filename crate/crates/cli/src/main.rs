use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use sapsom::experiments::{self, Record, Report};
use sapsom::{harness, Config, ModelArtifact};

#[derive(Parser)]
#[command(name = "sapsom", version, about = "Self-organizing world model for the cart-pole")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pretrain the map, then learn transitions by random exploration.
    Train(TrainArgs),
    /// Compare true and predicted one-step motion in the (theta, theta_dot) plane.
    PhasePortrait(EvalArgs<EpisodeCount<5>>),
    /// Per-horizon angle RMSE of virtual episodes under random action sequences.
    PredictRmse(EvalArgs<RmseArgs>),
    /// Closed-loop balancing of the upright pole.
    Balance(EvalArgs<EpisodeCount<100>>),
    /// Controlled tilt towards theta = 0.2 for goal theta_dot 0, 0.25, ..., 5.
    TiltSweep(EvalArgs<RunCount>),
    /// Balancing around goal angles -0.2, -0.175, ..., 0.2.
    TiltedBalance(EvalArgs<RunCount>),
    /// Pursue the goal named in the config file and write every episode trace.
    Imitate(EvalArgs<EpisodeCount<5>>),
}

#[derive(Args)]
struct TrainArgs {
    /// Config file; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Model file to write; the metrics CSV goes next to it.
    #[arg(long, default_value = "model.sapsom")]
    out: PathBuf,
    /// Skip transition learning.
    #[arg(long)]
    pretrain_only: bool,
}

#[derive(Args)]
struct EvalArgs<E: Args> {
    #[arg(long)]
    model: PathBuf,
    /// Planner and goal settings; the environment comes from the model file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Evaluation seed; defaults to the model's training seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the CSV files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[command(flatten)]
    extra: E,
}

#[derive(Args)]
struct EpisodeCount<const N: usize> {
    #[arg(long, default_value_t = N)]
    episodes: usize,
}

#[derive(Args)]
struct RunCount {
    /// Runs per goal.
    #[arg(long, default_value_t = 20)]
    runs: usize,
}

#[derive(Args)]
struct RmseArgs {
    #[arg(long, default_value_t = 100)]
    sequences: usize,
    #[arg(long, default_value_t = 7)]
    horizon: usize,
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p).with_context(|| format!("reading config {}", p.display())),
        None => Ok(Config::default()),
    }
}

struct Eval {
    artifact: ModelArtifact,
    config: Config,
    seed: u64,
    out: PathBuf,
}

impl Eval {
    fn open<E: Args>(args: &EvalArgs<E>) -> Result<Self> {
        let artifact = ModelArtifact::load(&args.model)
            .with_context(|| format!("loading model {}", args.model.display()))?;
        let config = load_config(args.config.as_deref())?;
        fs::create_dir_all(&args.out)
            .with_context(|| format!("creating {}", args.out.display()))?;
        Ok(Self {
            seed: args.seed.unwrap_or(artifact.seed()),
            artifact,
            config,
            out: args.out.clone(),
        })
    }

    fn finish<R: Record, S: Record>(&self, report: &Report<R, S>) -> Result<()> {
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        let (records, summary) = report.write_csv(&self.out)?;
        let mut stdout = io::stdout().lock();
        let table = fs::read_to_string(&summary)
            .with_context(|| format!("reading back {}", summary.display()))?;
        stdout.write_all(table.as_bytes())?;
        writeln!(
            stdout,
            "# seed {}; wrote {} and {}",
            report.seed,
            records.display(),
            summary.display()
        )?;
        Ok(())
    }
}

fn train(args: &TrainArgs) -> Result<()> {
    let mut config = load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        config.training.seed = seed;
    }
    let outcome = harness::train(&config, args.pretrain_only)?;
    let metrics = harness::save_training(&outcome, &args.out)?;
    println!(
        "trained {}x{} map, seed {}; wrote {} and {}",
        config.training.rows,
        config.training.cols,
        config.training.seed,
        args.out.display(),
        metrics.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => train(&args),
        Command::PhasePortrait(args) => {
            let e = Eval::open(&args)?;
            e.finish(&experiments::phase_portrait(
                &e.artifact,
                args.extra.episodes,
                e.seed,
            )?)
        }
        Command::PredictRmse(args) => {
            let e = Eval::open(&args)?;
            e.finish(&experiments::prediction_rmse(
                &e.artifact,
                args.extra.sequences,
                args.extra.horizon,
                e.seed,
            )?)
        }
        Command::Balance(args) => {
            let e = Eval::open(&args)?;
            e.finish(&experiments::balance(
                &e.artifact,
                args.extra.episodes,
                &e.config.plan,
                e.seed,
            )?)
        }
        Command::TiltSweep(args) => {
            let e = Eval::open(&args)?;
            e.finish(&experiments::tilt_sweep(
                &e.artifact,
                &experiments::tilt_goals(),
                args.extra.runs,
                &e.config.plan,
                e.seed,
            )?)
        }
        Command::TiltedBalance(args) => {
            let e = Eval::open(&args)?;
            let report = experiments::tilted_balance_sweep(
                &e.artifact,
                &experiments::tilted_balance_goals(),
                args.extra.runs,
                &e.config.plan,
                e.seed,
            )?;
            e.finish(&report)?;
            if let Some(r) = experiments::tilt_correlation(&report.summary) {
                println!("# goal/tilt correlation {r:.4}");
            }
            Ok(())
        }
        Command::Imitate(args) => {
            let e = Eval::open(&args)?;
            let base = args
                .config
                .as_deref()
                .and_then(Path::parent)
                .unwrap_or(Path::new("."));
            let Some(goal) = e.config.goal.resolve(base)? else {
                bail!("imitate needs a goal: set goal_demo, or goal_mean and goal_precision");
            };
            let (report, traces) =
                experiments::imitate(&e.artifact, &goal, args.extra.episodes, &e.config.plan, e.seed)?;
            harness::write_traces(&e.out, &traces)?;
            e.finish(&report)
        }
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
