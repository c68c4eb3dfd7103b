//! Training entry point and file output shared by the command-line tool.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{Agent, TrainingEvent};
use crate::config::Config;
use crate::env::{CartPole, EnvState};
use crate::error::{Error, Result};
use crate::experiments::{trace_rows, write_records, Record};
use crate::persist::ModelArtifact;
use crate::planner::EpisodeTrace;

/// One row of the training metrics CSV.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub episode: usize,
    pub phase: String,
    pub steps: usize,
    pub mean_quantization_error: f64,
    /// Empty during pretraining.
    pub mean_prediction_residual: Option<f64>,
}

impl Record for MetricsRecord {
    const HEADER: &'static [&'static str] = &[
        "episode",
        "phase",
        "steps",
        "mean_quantization_error",
        "mean_prediction_residual",
    ];
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub artifact: ModelArtifact,
    pub metrics: Vec<MetricsRecord>,
}

/// Trains a fresh agent on the cart-pole described by `config`.
///
/// The whole run is a function of the config; `config.training.seed` seeds the single
/// random stream. With `pretrain_only` the transition matrices stay zero.
pub fn train(config: &Config, pretrain_only: bool) -> Result<TrainOutcome> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.training.seed);
    let mut env = CartPole::new(config.env)?;
    let mut agent = Agent::new(
        config.training.clone(),
        EnvState::DIM,
        CartPole::ACTIONS,
        &mut rng,
    )?;
    let mut metrics = Vec::new();
    let mut record = |e: &TrainingEvent| {
        if let TrainingEvent::EpisodeEnd(m) = e {
            metrics.push(MetricsRecord {
                episode: m.episode,
                phase: m.phase.as_str().to_string(),
                steps: m.steps,
                mean_quantization_error: m.mean_quantization_error,
                mean_prediction_residual: m.mean_prediction_residual,
            });
        }
    };
    agent.pretrain(&mut env, &mut rng, &mut record)?;
    if !pretrain_only {
        agent.explore_and_learn(&mut env, &mut rng, &mut record)?;
    }
    agent.freeze();
    Ok(TrainOutcome {
        artifact: ModelArtifact::from_agent(&agent, config.env),
        metrics,
    })
}

/// Writes `<model>` and `<model stem>_metrics.csv` next to it.
pub fn save_training(outcome: &TrainOutcome, model_path: &Path) -> Result<PathBuf> {
    if let Some(dir) = model_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    outcome.artifact.save(model_path)?;
    let stem = model_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into());
    let metrics = model_path.with_file_name(format!("{stem}_metrics.csv"));
    write_records(&metrics, &outcome.metrics)?;
    Ok(metrics)
}

/// Writes each trace as `episode_<k>.csv` under `dir`.
pub fn write_traces(dir: &Path, traces: &[EpisodeTrace]) -> Result<Vec<PathBuf>> {
    traces
        .iter()
        .enumerate()
        .map(|(k, trace)| {
            let path = dir.join(format!("episode_{k:03}.csv"));
            write_records(&path, &trace_rows(trace))?;
            Ok(path)
        })
        .collect()
}
