//! Evaluation pipelines over a trained artifact. Each returns a [`Report`] of per-run
//! records plus summary rows computed from exactly those records.
//!
//! Independent cells (episodes, sequences, goal × run pairs) draw from their own ChaCha
//! stream of the report seed and run in parallel; record order is fixed by cell index.

use std::fs::File;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::env::{CartPole, EnvState};
use crate::error::{Error, Result};
use crate::persist::ModelArtifact;
use crate::planner::{rollout, run_task, EpisodeTrace, Goal, PlanConfig};
use crate::transition::ActionId;

/// Goal angle of the controlled-tilt task.
pub const TILT_GOAL_ANGLE: f64 = 0.2;
/// First and last state index averaged by the tilted-balance sweep.
pub const TILT_WINDOW: (usize, usize) = (50, 100);

/// A CSV row type with a fixed column list.
pub trait Record: Serialize + DeserializeOwned {
    const HEADER: &'static [&'static str];
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report<R, S> {
    pub experiment: &'static str,
    pub seed: u64,
    pub records: Vec<R>,
    pub summary: Vec<S>,
    pub warnings: Vec<String>,
}

impl<R: Record, S: Record> Report<R, S> {
    /// Writes `<experiment>_records.csv` and `<experiment>_summary.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        let records = dir.join(format!("{}_records.csv", self.experiment));
        let summary = dir.join(format!("{}_summary.csv", self.experiment));
        write_records(&records, &self.records)?;
        write_records(&summary, &self.summary)?;
        Ok((records, summary))
    }
}

pub fn write_records<T: Record>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    w.write_record(T::HEADER)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_records<T: Record>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header = r.headers()?.clone();
    if !header.iter().eq(T::HEADER.iter().copied()) {
        return Err(Error::InvalidInput(format!(
            "{}: expected columns {:?}",
            path.display(),
            T::HEADER
        )));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Sample standard deviation (n − 1 denominator); 0 for fewer than two values.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Pearson correlation; `None` when either series is constant or lengths differ.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(xs), mean(ys));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        None
    } else {
        Some(sxy / (sxx * syy).sqrt())
    }
}

fn cell_rng(seed: u64, cell: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(cell as u64);
    rng
}

fn warnings_for(artifact: &ModelArtifact) -> Vec<String> {
    if artifact.is_untrained() {
        vec!["transition matrices are all zero; the model looks untrained".into()]
    } else {
        Vec::new()
    }
}

fn random_actions(rng: &mut ChaCha8Rng, n: usize) -> Vec<ActionId> {
    (0..n).map(|_| rng.random_range(0..CartPole::ACTIONS)).collect()
}

/// Runs one closed-loop task episode from a fresh reset.
fn task_episode(
    artifact: &ModelArtifact,
    goal: &Goal,
    plan: &PlanConfig,
    rng: &mut ChaCha8Rng,
) -> Result<EpisodeTrace> {
    let mut env = CartPole::new(artifact.env)?;
    env.reset_state(rng);
    run_task(
        &mut env,
        goal,
        plan,
        &artifact.map,
        &artifact.model,
        artifact.env.max_steps as usize,
    )
}

// ---------------------------------------------------------------------------
// Phase portrait

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub episode: usize,
    pub t: usize,
    pub theta: f64,
    pub theta_dot: f64,
    pub action: ActionId,
    pub d_theta: f64,
    pub d_theta_dot: f64,
    pub pred_d_theta: f64,
    pub pred_d_theta_dot: f64,
    pub left_d_theta: f64,
    pub left_d_theta_dot: f64,
    pub right_d_theta: f64,
    pub right_d_theta_dot: f64,
}

impl Record for PhaseRecord {
    const HEADER: &'static [&'static str] = &[
        "episode",
        "t",
        "theta",
        "theta_dot",
        "action",
        "d_theta",
        "d_theta_dot",
        "pred_d_theta",
        "pred_d_theta_dot",
        "left_d_theta",
        "left_d_theta_dot",
        "right_d_theta",
        "right_d_theta_dot",
    ];
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub states: usize,
    /// Fraction of states where true and predicted angular accelerations share a sign.
    pub sign_agreement: f64,
    pub mean_angle_error: f64,
    /// Fraction of states whose imagined left push raises `theta_dot`.
    pub left_raises_theta_dot: f64,
    /// Fraction of states whose imagined right push lowers `theta_dot`.
    pub right_lowers_theta_dot: f64,
}

impl Record for PhaseSummary {
    const HEADER: &'static [&'static str] = &[
        "states",
        "sign_agreement",
        "mean_angle_error",
        "left_raises_theta_dot",
        "right_lowers_theta_dot",
    ];
}

fn fraction(records: &[PhaseRecord], pred: impl Fn(&PhaseRecord) -> bool) -> f64 {
    records.iter().filter(|r| pred(r)).count() as f64 / records.len() as f64
}

pub fn summarize_phase(records: &[PhaseRecord]) -> Vec<PhaseSummary> {
    if records.is_empty() {
        return Vec::new();
    }
    let errors: Vec<f64> = records
        .iter()
        .map(|r| (r.pred_d_theta - r.d_theta).abs())
        .collect();
    vec![PhaseSummary {
        states: records.len(),
        sign_agreement: fraction(records, |r| {
            r.d_theta_dot.signum() == r.pred_d_theta_dot.signum()
        }),
        mean_angle_error: mean(&errors),
        left_raises_theta_dot: fraction(records, |r| r.left_d_theta_dot > 0.0),
        right_lowers_theta_dot: fraction(records, |r| r.right_d_theta_dot < 0.0),
    }]
}

/// Plays random-action episodes and compares each true one-step change of `(theta,
/// theta_dot)` with the model's prediction for the executed action and for both pushes.
pub fn phase_portrait(
    artifact: &ModelArtifact,
    episodes: usize,
    seed: u64,
) -> Result<Report<PhaseRecord, PhaseSummary>> {
    let per_episode: Vec<Vec<PhaseRecord>> = (0..episodes)
        .into_par_iter()
        .map(|episode| {
            let mut rng = cell_rng(seed, episode);
            let mut env = CartPole::new(artifact.env)?;
            let mut u = env.reset_state(&mut rng);
            let mut rows = Vec::new();
            for t in 0.. {
                let action = rng.random_range(0..CartPole::ACTIONS);
                let delta = |a: ActionId| -> Result<(f64, f64)> {
                    let p = rollout(&u.to_array(), &[a], &artifact.map, &artifact.model)?;
                    Ok((p[0].state[2] - u.theta, p[0].state[3] - u.theta_dot))
                };
                let (pred_d_theta, pred_d_theta_dot) = delta(action)?;
                let (left_d_theta, left_d_theta_dot) = delta(CartPole::PUSH_LEFT)?;
                let (right_d_theta, right_d_theta_dot) = delta(CartPole::PUSH_RIGHT)?;
                let step = env.step_state(action)?;
                let next = step.next_state;
                rows.push(PhaseRecord {
                    episode,
                    t,
                    theta: u.theta,
                    theta_dot: u.theta_dot,
                    action,
                    d_theta: next.theta - u.theta,
                    d_theta_dot: next.theta_dot - u.theta_dot,
                    pred_d_theta,
                    pred_d_theta_dot,
                    left_d_theta,
                    left_d_theta_dot,
                    right_d_theta,
                    right_d_theta_dot,
                });
                u = next;
                if step.done {
                    break;
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let records: Vec<PhaseRecord> = per_episode.into_iter().flatten().collect();
    Ok(Report {
        experiment: "phase_portrait",
        seed,
        summary: summarize_phase(&records),
        records,
        warnings: warnings_for(artifact),
    })
}

// ---------------------------------------------------------------------------
// Multi-step prediction error

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RmseRecord {
    pub sequence: usize,
    pub t: usize,
    pub action: ActionId,
    pub theta: f64,
    pub predicted_theta: f64,
    pub error: f64,
}

impl Record for RmseRecord {
    const HEADER: &'static [&'static str] =
        &["sequence", "t", "action", "theta", "predicted_theta", "error"];
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RmseSummary {
    pub t: usize,
    pub sequences: usize,
    pub rmse: f64,
}

impl Record for RmseSummary {
    const HEADER: &'static [&'static str] = &["t", "sequences", "rmse"];
}

pub fn summarize_rmse(records: &[RmseRecord]) -> Vec<RmseSummary> {
    let horizon = records.iter().map(|r| r.t).max().unwrap_or(0);
    (1..=horizon)
        .map(|t| {
            let sq: Vec<f64> = records
                .iter()
                .filter(|r| r.t == t)
                .map(|r| r.error * r.error)
                .collect();
            RmseSummary {
                t,
                sequences: sq.len(),
                rmse: mean(&sq).sqrt(),
            }
        })
        .collect()
}

/// From random starts, compares a virtual episode under a random action sequence with
/// the real one; `t` counts steps into the future. The real trajectory keeps integrating
/// past a done signal so every sequence spans the full horizon.
pub fn prediction_rmse(
    artifact: &ModelArtifact,
    sequences: usize,
    horizon: usize,
    seed: u64,
) -> Result<Report<RmseRecord, RmseSummary>> {
    let per_sequence: Vec<Vec<RmseRecord>> = (0..sequences)
        .into_par_iter()
        .map(|sequence| {
            let mut rng = cell_rng(seed, sequence);
            let mut env = CartPole::new(artifact.env)?;
            let u0 = env.reset_state(&mut rng);
            let actions = random_actions(&mut rng, horizon);
            let predicted = rollout(&u0.to_array(), &actions, &artifact.map, &artifact.model)?;
            actions
                .iter()
                .zip(&predicted)
                .enumerate()
                .map(|(i, (&action, p))| {
                    let theta = env.step_state(action)?.next_state.theta;
                    Ok(RmseRecord {
                        sequence,
                        t: i + 1,
                        action,
                        theta,
                        predicted_theta: p.state[2],
                        error: p.state[2] - theta,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let records: Vec<RmseRecord> = per_sequence.into_iter().flatten().collect();
    Ok(Report {
        experiment: "prediction_rmse",
        seed,
        summary: summarize_rmse(&records),
        records,
        warnings: warnings_for(artifact),
    })
}

// ---------------------------------------------------------------------------
// Balancing

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BalanceRecord {
    pub episode: usize,
    pub steps: usize,
    pub done_reason: String,
}

impl Record for BalanceRecord {
    const HEADER: &'static [&'static str] = &["episode", "steps", "done_reason"];
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BalanceSummary {
    pub episodes: usize,
    pub max_steps: usize,
    pub at_cap: usize,
    pub mean_steps: f64,
    pub sd_steps: f64,
}

impl Record for BalanceSummary {
    const HEADER: &'static [&'static str] =
        &["episodes", "max_steps", "at_cap", "mean_steps", "sd_steps"];
}

pub fn summarize_balance(records: &[BalanceRecord], max_steps: usize) -> Vec<BalanceSummary> {
    if records.is_empty() {
        return Vec::new();
    }
    let steps: Vec<f64> = records.iter().map(|r| r.steps as f64).collect();
    vec![BalanceSummary {
        episodes: records.len(),
        max_steps,
        at_cap: records.iter().filter(|r| r.steps >= max_steps).count(),
        mean_steps: mean(&steps),
        sd_steps: sample_sd(&steps),
    }]
}

/// Closed-loop balancing with the upright goal `u = 0`, precision `(0, 0, 1, 1)`.
pub fn balance(
    artifact: &ModelArtifact,
    episodes: usize,
    plan: &PlanConfig,
    seed: u64,
) -> Result<Report<BalanceRecord, BalanceSummary>> {
    let goal = Goal::balance();
    let records: Vec<BalanceRecord> = (0..episodes)
        .into_par_iter()
        .map(|episode| {
            let trace = task_episode(artifact, &goal, plan, &mut cell_rng(seed, episode))?;
            Ok(BalanceRecord {
                episode,
                steps: trace.steps(),
                done_reason: trace.done_reason.to_string(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(Report {
        experiment: "balance",
        seed,
        summary: summarize_balance(&records, artifact.env.max_steps as usize),
        records,
        warnings: warnings_for(artifact),
    })
}

// ---------------------------------------------------------------------------
// Controlled tilt

/// Goal angular velocities 0, 0.25, ..., 5.
pub fn tilt_goals() -> Vec<f64> {
    (0..=20).map(|i| i as f64 * 0.25).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TiltRecord {
    pub goal_theta_dot: f64,
    pub run: usize,
    pub final_theta: f64,
    pub final_theta_dot: f64,
    pub steps: usize,
    pub n_left: usize,
    pub n_right: usize,
    /// `(n_left - n_right) / (n_left + n_right)`.
    pub action_excess: f64,
    pub correct_side: bool,
    pub done_reason: String,
}

impl Record for TiltRecord {
    const HEADER: &'static [&'static str] = &[
        "goal_theta_dot",
        "run",
        "final_theta",
        "final_theta_dot",
        "steps",
        "n_left",
        "n_right",
        "action_excess",
        "correct_side",
        "done_reason",
    ];
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TiltSummary {
    pub goal_theta_dot: f64,
    pub runs: usize,
    pub mean_final_theta_dot: f64,
    pub sd_final_theta_dot: f64,
    pub mean_action_excess: f64,
    pub mean_steps: f64,
    pub correct_side_rate: f64,
}

impl Record for TiltSummary {
    const HEADER: &'static [&'static str] = &[
        "goal_theta_dot",
        "runs",
        "mean_final_theta_dot",
        "sd_final_theta_dot",
        "mean_action_excess",
        "mean_steps",
        "correct_side_rate",
    ];
}

pub fn summarize_tilt(records: &[TiltRecord]) -> Vec<TiltSummary> {
    records
        .chunk_by(|a, b| a.goal_theta_dot == b.goal_theta_dot)
        .map(|group| {
            let col = |f: fn(&TiltRecord) -> f64| group.iter().map(f).collect::<Vec<_>>();
            let finals = col(|r| r.final_theta_dot);
            TiltSummary {
                goal_theta_dot: group[0].goal_theta_dot,
                runs: group.len(),
                mean_final_theta_dot: mean(&finals),
                sd_final_theta_dot: sample_sd(&finals),
                mean_action_excess: mean(&col(|r| r.action_excess)),
                mean_steps: mean(&col(|r| r.steps as f64)),
                correct_side_rate: mean(&col(|r| if r.correct_side { 1.0 } else { 0.0 })),
            }
        })
        .collect()
}

/// For each goal `theta_dot`, tilts the pole towards `theta = 0.2` and records the
/// state at the done signal.
pub fn tilt_sweep(
    artifact: &ModelArtifact,
    goals: &[f64],
    runs: usize,
    plan: &PlanConfig,
    seed: u64,
) -> Result<Report<TiltRecord, TiltSummary>> {
    let records: Vec<TiltRecord> = (0..goals.len() * runs)
        .into_par_iter()
        .map(|cell| {
            let (goal_theta_dot, run) = (goals[cell / runs], cell % runs);
            let goal = Goal::tilt(TILT_GOAL_ANGLE, goal_theta_dot);
            let trace = task_episode(artifact, &goal, plan, &mut cell_rng(seed, cell))?;
            let last = EnvState::from_slice(trace.final_state())?;
            let n_left = trace
                .actions
                .iter()
                .filter(|&&a| a == CartPole::PUSH_LEFT)
                .count();
            let n_right = trace.steps() - n_left;
            let action_excess = if trace.steps() == 0 {
                0.0
            } else {
                (n_left as f64 - n_right as f64) / trace.steps() as f64
            };
            Ok(TiltRecord {
                goal_theta_dot,
                run,
                final_theta: last.theta,
                final_theta_dot: last.theta_dot,
                steps: trace.steps(),
                n_left,
                n_right,
                action_excess,
                correct_side: last.theta.signum() == TILT_GOAL_ANGLE.signum(),
                done_reason: trace.done_reason.to_string(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(Report {
        experiment: "tilt_sweep",
        seed,
        summary: summarize_tilt(&records),
        records,
        warnings: warnings_for(artifact),
    })
}

// ---------------------------------------------------------------------------
// Tilted balancing

/// Goal angles -0.2, -0.175, ..., 0.2.
pub fn tilted_balance_goals() -> Vec<f64> {
    (-8..=8).map(|i| i as f64 * 0.025).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TiltedBalanceRecord {
    pub goal_theta: f64,
    pub run: usize,
    /// Mean `theta` over states `window_start..=window_end`.
    pub mean_tilt: f64,
    pub window_start: usize,
    pub window_end: usize,
    pub steps: usize,
    pub done_reason: String,
}

impl Record for TiltedBalanceRecord {
    const HEADER: &'static [&'static str] = &[
        "goal_theta",
        "run",
        "mean_tilt",
        "window_start",
        "window_end",
        "steps",
        "done_reason",
    ];
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TiltedBalanceSummary {
    pub goal_theta: f64,
    pub runs: usize,
    pub mean_tilt: f64,
    pub sd_tilt: f64,
    pub mean_steps: f64,
}

impl Record for TiltedBalanceSummary {
    const HEADER: &'static [&'static str] =
        &["goal_theta", "runs", "mean_tilt", "sd_tilt", "mean_steps"];
}

pub fn summarize_tilted_balance(records: &[TiltedBalanceRecord]) -> Vec<TiltedBalanceSummary> {
    records
        .chunk_by(|a, b| a.goal_theta == b.goal_theta)
        .map(|group| {
            let tilts: Vec<f64> = group.iter().map(|r| r.mean_tilt).collect();
            let steps: Vec<f64> = group.iter().map(|r| r.steps as f64).collect();
            TiltedBalanceSummary {
                goal_theta: group[0].goal_theta,
                runs: group.len(),
                mean_tilt: mean(&tilts),
                sd_tilt: sample_sd(&tilts),
                mean_steps: mean(&steps),
            }
        })
        .collect()
}

/// State window averaged for a run that observed `states` states (initial one included).
///
/// Runs ending before the window opens fall back to the whole run.
pub fn tilt_window(states: usize) -> (usize, usize) {
    let last = states.saturating_sub(1);
    let (start, end) = TILT_WINDOW;
    if last < start {
        (0, last)
    } else {
        (start, end.min(last))
    }
}

/// For each goal angle, balances the pole around it (goal `theta_dot = 0`) and averages
/// the achieved tilt over the settled part of the run.
pub fn tilted_balance_sweep(
    artifact: &ModelArtifact,
    goals: &[f64],
    runs: usize,
    plan: &PlanConfig,
    seed: u64,
) -> Result<Report<TiltedBalanceRecord, TiltedBalanceSummary>> {
    let records: Vec<TiltedBalanceRecord> = (0..goals.len() * runs)
        .into_par_iter()
        .map(|cell| {
            let (goal_theta, run) = (goals[cell / runs], cell % runs);
            let goal = Goal::tilt(goal_theta, 0.0);
            let trace = task_episode(artifact, &goal, plan, &mut cell_rng(seed, cell))?;
            let (window_start, window_end) = tilt_window(trace.states.len());
            let thetas: Vec<f64> = trace.states[window_start..=window_end]
                .iter()
                .map(|s| s[2])
                .collect();
            Ok(TiltedBalanceRecord {
                goal_theta,
                run,
                mean_tilt: mean(&thetas),
                window_start,
                window_end,
                steps: trace.steps(),
                done_reason: trace.done_reason.to_string(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(Report {
        experiment: "tilted_balance",
        seed,
        summary: summarize_tilted_balance(&records),
        records,
        warnings: warnings_for(artifact),
    })
}

/// Correlation between goal angle and mean achieved tilt across the summary rows.
pub fn tilt_correlation(summary: &[TiltedBalanceSummary]) -> Option<f64> {
    let goals: Vec<f64> = summary.iter().map(|s| s.goal_theta).collect();
    let tilts: Vec<f64> = summary.iter().map(|s| s.mean_tilt).collect();
    pearson(&goals, &tilts)
}

// ---------------------------------------------------------------------------
// Imitation traces

/// One row of an episode trace; readable back as a goal demonstration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
    /// Action taken in this state; empty on the final row.
    pub action: Option<ActionId>,
    pub done: bool,
}

impl Record for TraceRow {
    const HEADER: &'static [&'static str] =
        &["t", "x", "x_dot", "theta", "theta_dot", "action", "done"];
}

pub fn trace_rows(trace: &EpisodeTrace) -> Vec<TraceRow> {
    let last = trace.states.len().saturating_sub(1);
    trace
        .states
        .iter()
        .enumerate()
        .map(|(t, s)| TraceRow {
            t,
            x: s[0],
            x_dot: s[1],
            theta: s[2],
            theta_dot: s[3],
            action: trace.actions.get(t).copied(),
            done: t == last && trace.done_reason.is_done(),
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ImitateRecord {
    pub episode: usize,
    pub steps: usize,
    pub final_distance: f64,
    pub mean_distance: f64,
    pub done_reason: String,
}

impl Record for ImitateRecord {
    const HEADER: &'static [&'static str] =
        &["episode", "steps", "final_distance", "mean_distance", "done_reason"];
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ImitateSummary {
    pub episodes: usize,
    pub mean_steps: f64,
    pub sd_steps: f64,
    pub mean_final_distance: f64,
}

impl Record for ImitateSummary {
    const HEADER: &'static [&'static str] =
        &["episodes", "mean_steps", "sd_steps", "mean_final_distance"];
}

pub fn summarize_imitate(records: &[ImitateRecord]) -> Vec<ImitateSummary> {
    if records.is_empty() {
        return Vec::new();
    }
    let steps: Vec<f64> = records.iter().map(|r| r.steps as f64).collect();
    let finals: Vec<f64> = records.iter().map(|r| r.final_distance).collect();
    vec![ImitateSummary {
        episodes: records.len(),
        mean_steps: mean(&steps),
        sd_steps: sample_sd(&steps),
        mean_final_distance: mean(&finals),
    }]
}

/// Episodes towards an arbitrary goal, keeping each full trace.
pub fn imitate(
    artifact: &ModelArtifact,
    goal: &Goal,
    episodes: usize,
    plan: &PlanConfig,
    seed: u64,
) -> Result<(Report<ImitateRecord, ImitateSummary>, Vec<EpisodeTrace>)> {
    let traces: Vec<EpisodeTrace> = (0..episodes)
        .into_par_iter()
        .map(|episode| task_episode(artifact, goal, plan, &mut cell_rng(seed, episode)))
        .collect::<Result<_>>()?;
    let records: Vec<ImitateRecord> = traces
        .iter()
        .enumerate()
        .map(|(episode, tr)| ImitateRecord {
            episode,
            steps: tr.steps(),
            final_distance: *tr.distances.last().unwrap_or(&0.0),
            mean_distance: mean(&tr.distances),
            done_reason: tr.done_reason.to_string(),
        })
        .collect();
    let report = Report {
        experiment: "imitate",
        seed,
        summary: summarize_imitate(&records),
        records,
        warnings: warnings_for(artifact),
    };
    Ok((report, traces))
}
