//! Goals from a single demonstration, virtual episodes, and greedy forward search.

use serde::{Deserialize, Serialize};

use crate::env::{DoneReason, Environment};
use crate::error::{check_dim, check_finite, Error, Result};
use crate::som::{SomMap, UnitIndex};
use crate::transition::{ActionId, TransitionModel};

/// Precisions below this are dropped when a goal is read from a demonstration.
pub const DEFAULT_PRECISION_FLOOR: f64 = 0.01;

/// Largest number of action sequences a single planning call may enumerate.
pub const MAX_SEQUENCES: usize = 1_000_000;

/// Target mean state and per-component precision in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Goal {
    mean: Vec<f64>,
    precision: Vec<f64>,
}

impl Goal {
    pub fn new(mean: Vec<f64>, precision: Vec<f64>) -> Result<Self> {
        check_dim(mean.len(), precision.len())?;
        check_finite(&mean, "goal mean")?;
        if precision.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidInput("goal precisions must lie in [0, 1]".into()));
        }
        if !precision.iter().any(|&p| p > 0.0) {
            return Err(Error::InvalidInput("goal needs at least one positive precision".into()));
        }
        Ok(Self { mean, precision })
    }

    /// Imprints a goal from demonstrated states: componentwise mean and capped inverse
    /// (population) variance. Constant components get precision 1; precisions below
    /// `precision_floor` are dropped to 0.
    pub fn from_demo<S: AsRef<[f64]>>(states: &[S], precision_floor: f64) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidInput("demonstration is empty".into()))?;
        let dim = first.as_ref().len();
        let n = states.len() as f64;
        let mut mean = vec![0.0; dim];
        for s in states {
            let s = s.as_ref();
            check_dim(dim, s.len())?;
            check_finite(s, "demonstration state")?;
            for (m, v) in mean.iter_mut().zip(s) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for s in states {
            for ((acc, v), m) in var.iter_mut().zip(s.as_ref()).zip(&mean) {
                *acc += (v - m) * (v - m);
            }
        }
        let precision = var
            .iter()
            .map(|v| {
                let v = v / n;
                let p = if v > 0.0 { (1.0 / v).min(1.0) } else { 1.0 };
                if p < precision_floor {
                    0.0
                } else {
                    p
                }
            })
            .collect();
        Self::new(mean, precision)
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn precision(&self) -> &[f64] {
        &self.precision
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Precision-weighted squared distance `sum_i pi_i (u_i - g_i)^2`.
    pub fn distance(&self, u: &[f64]) -> f64 {
        self.mean
            .iter()
            .zip(&self.precision)
            .zip(u)
            .map(|((g, p), x)| if *p == 0.0 { 0.0 } else { p * (x - g) * (x - g) })
            .sum()
    }

    /// Upright, stationary pole anywhere on the track.
    pub fn balance() -> Self {
        Self::tilt(0.0, 0.0)
    }

    /// Pole at angle `theta` with angular velocity `theta_dot`; cart ignored.
    pub fn tilt(theta: f64, theta_dot: f64) -> Self {
        Self {
            mean: vec![0.0, 0.0, theta, theta_dot],
            precision: vec![0.0, 0.0, 1.0, 1.0],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlanConfig {
    /// Lookahead depth.
    pub tau: usize,
    /// Replan after every executed action; otherwise the whole planned sequence runs open loop.
    pub replan_every_step: bool,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self {
            tau: 1,
            replan_every_step: true,
        }
    }
}

impl PlanConfig {
    pub fn sequence_count(&self, actions: usize) -> Result<usize> {
        if self.tau == 0 {
            return Err(Error::Config("planning depth tau must be at least 1".into()));
        }
        let mut count: usize = 1;
        for _ in 0..self.tau {
            count = count
                .checked_mul(actions)
                .filter(|&c| c <= MAX_SEQUENCES)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "{actions}^{} action sequences exceed the limit of {MAX_SEQUENCES}",
                        self.tau
                    ))
                })?;
        }
        Ok(count)
    }
}

/// One imagined step of a virtual episode.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictedStep {
    pub unit: UnitIndex,
    pub state: Vec<f64>,
    /// The transition matrix had never seen the source unit under this action.
    pub unlearned: bool,
}

/// Imagined successor unit of `state` under `action`.
fn imagine(
    map: &SomMap,
    model: &TransitionModel,
    state: &[f64],
    action: ActionId,
) -> Result<(UnitIndex, bool)> {
    let winner = map.find_winner(state)?;
    let m = model.predict_mode(action, winner)?;
    Ok((m.unit, m.unlearned))
}

/// Plays a virtual episode: each predicted state is the decoded mode successor of the
/// previous estimate. The environment is never touched.
pub fn rollout(
    u0: &[f64],
    actions: &[ActionId],
    map: &SomMap,
    model: &TransitionModel,
) -> Result<Vec<PredictedStep>> {
    check_dim(map.units(), model.units())?;
    let mut out = Vec::with_capacity(actions.len());
    let mut state = u0.to_vec();
    for &a in actions {
        let (unit, unlearned) = imagine(map, model, &state, a)?;
        state = map.decode(unit)?.to_vec();
        out.push(PredictedStep {
            unit,
            state: state.clone(),
            unlearned,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    /// Minimizing sequence; the lexicographically smallest on ties.
    pub sequence: Vec<ActionId>,
    /// Goal distance of the sequence's final predicted state.
    pub distance: f64,
}

impl Plan {
    pub fn first_action(&self) -> ActionId {
        self.sequence[0]
    }
}

/// Greedy forward search over every action sequence of length `tau`, scored by the goal
/// distance of the final predicted state.
pub fn plan(
    u0: &[f64],
    goal: &Goal,
    config: &PlanConfig,
    map: &SomMap,
    model: &TransitionModel,
) -> Result<Plan> {
    config.sequence_count(model.action_count())?;
    check_dim(map.units(), model.units())?;
    check_dim(map.dim(), goal.dim())?;
    let start = map.find_winner(u0)?;
    let mut search = Search {
        map,
        model,
        goal,
        depth: config.tau,
        prefix: Vec::with_capacity(config.tau),
        best: None,
    };
    search.expand(start)?;
    let (sequence, distance) = search
        .best
        .ok_or_else(|| Error::Internal("no action sequence was evaluated".into()))?;
    Ok(Plan { sequence, distance })
}

/// Depth-first enumeration sharing rollout prefixes; visits sequences in lexicographic order.
struct Search<'a> {
    map: &'a SomMap,
    model: &'a TransitionModel,
    goal: &'a Goal,
    depth: usize,
    prefix: Vec<ActionId>,
    best: Option<(Vec<ActionId>, f64)>,
}

impl Search<'_> {
    fn expand(&mut self, winner: UnitIndex) -> Result<()> {
        for a in 0..self.model.action_count() {
            let next = self.model.predict_mode(a, winner)?.unit;
            self.prefix.push(a);
            let predicted = self.map.decode(next)?;
            if self.prefix.len() == self.depth {
                let d = self.goal.distance(predicted);
                if self.best.as_ref().is_none_or(|(_, b)| d < *b) {
                    self.best = Some((self.prefix.clone(), d));
                }
            } else {
                let w = self.map.find_winner(predicted)?;
                self.expand(w)?;
            }
            self.prefix.pop();
        }
        Ok(())
    }
}

/// Closed-loop record of one task episode.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeTrace {
    /// Observed states, starting with the state the task began in.
    pub states: Vec<Vec<f64>>,
    pub actions: Vec<ActionId>,
    /// Goal distance of each entry of `states`.
    pub distances: Vec<f64>,
    pub done_reason: DoneReason,
    pub plan_calls: usize,
}

impl EpisodeTrace {
    pub fn steps(&self) -> usize {
        self.actions.len()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Drives `env` from its current state towards `goal`: observe, plan, execute, repeat
/// until the environment signals done or `max_steps` actions were taken.
///
/// The caller resets the environment.
pub fn run_task<E: Environment + ?Sized>(
    env: &mut E,
    goal: &Goal,
    config: &PlanConfig,
    map: &SomMap,
    model: &TransitionModel,
    max_steps: usize,
) -> Result<EpisodeTrace> {
    check_dim(model.action_count(), env.action_count())?;
    let mut u = env.observe();
    let mut trace = EpisodeTrace {
        distances: vec![goal.distance(&u)],
        states: vec![u.clone()],
        actions: Vec::new(),
        done_reason: DoneReason::None,
        plan_calls: 0,
    };
    let mut queued: Vec<ActionId> = Vec::new();
    while trace.steps() < max_steps {
        if queued.is_empty() {
            let p = plan(&u, goal, config, map, model)?;
            trace.plan_calls += 1;
            queued = if config.replan_every_step {
                vec![p.first_action()]
            } else {
                p.sequence
            };
            queued.reverse();
        }
        let a = queued.pop().expect("queue refilled above");
        let t = env.step(a)?;
        u = t.observation;
        trace.actions.push(a);
        trace.distances.push(goal.distance(&u));
        trace.states.push(u.clone());
        if t.done {
            trace.done_reason = t.reason;
            break;
        }
    }
    Ok(trace)
}
