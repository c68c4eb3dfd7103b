//! Training: SOM pretraining under decaying schedules, then joint representation and
//! transition learning under uniformly random exploration.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::som::{recognition_density, MapGeometry, RecognitionDensity, SomMap};
use crate::transition::{ActionId, TransitionModel};

/// Exponential interpolation `start * (end / start)^(e / (total - 1))` over episodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecaySchedule {
    pub start: f64,
    pub end: f64,
    pub total_episodes: usize,
}

impl DecaySchedule {
    pub fn new(start: f64, end: f64, total_episodes: usize) -> Result<Self> {
        if !(start > 0.0 && end > 0.0 && start.is_finite() && end.is_finite()) {
            return Err(Error::Config(format!(
                "schedule endpoints must be positive, got {start} -> {end}"
            )));
        }
        Ok(Self {
            start,
            end,
            total_episodes,
        })
    }

    pub fn value(&self, episode: usize) -> f64 {
        if episode == 0 || self.total_episodes <= 1 {
            self.start
        } else if episode + 1 >= self.total_episodes {
            self.end
        } else {
            let t = episode as f64 / (self.total_episodes - 1) as f64;
            self.start * (self.end / self.start).powf(t)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub rows: usize,
    pub cols: usize,
    pub pretrain_episodes: usize,
    pub joint_episodes: usize,
    pub pretrain_sigma_start: f64,
    pub pretrain_sigma_end: f64,
    pub pretrain_eta_start: f64,
    pub pretrain_eta_end: f64,
    /// Base width of the adaptive neighbourhood during joint training.
    pub sigma0: f64,
    /// Constant SOM learning rate during joint training.
    pub eta0: f64,
    /// Transition learning rate.
    pub gamma: f64,
    /// Codebooks start uniform in `[-init_range, init_range]`.
    pub init_range: f64,
    /// Base width for densities computed while frozen; `None` means a quarter of the map diameter.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eval_sigma0: Option<f64>,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            rows: 16,
            cols: 16,
            pretrain_episodes: 1000,
            joint_episodes: 3000,
            pretrain_sigma_start: 8.0,
            pretrain_sigma_end: 0.3,
            pretrain_eta_start: 0.1,
            pretrain_eta_end: 0.01,
            sigma0: 4.0,
            eta0: 0.05,
            gamma: 0.05,
            init_range: 0.05,
            eval_sigma0: None,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        MapGeometry::new(self.rows, self.cols).map_err(|e| Error::Config(e.to_string()))?;
        self.sigma_schedule()?;
        self.eta_schedule()?;
        for (name, v) in [
            ("pretrain_eta_start", self.pretrain_eta_start),
            ("pretrain_eta_end", self.pretrain_eta_end),
            ("eta0", self.eta0),
            ("gamma", self.gamma),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if !(self.sigma0.is_finite() && self.sigma0 > 0.0) {
            return Err(Error::Config("sigma0 must be positive".into()));
        }
        if self.eval_sigma0.is_some_and(|s| !(s.is_finite() && s > 0.0)) {
            return Err(Error::Config("eval_sigma0 must be positive".into()));
        }
        if !(self.init_range.is_finite() && self.init_range >= 0.0) {
            return Err(Error::Config("init_range must be non-negative".into()));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<MapGeometry> {
        MapGeometry::new(self.rows, self.cols)
    }

    pub fn sigma_schedule(&self) -> Result<DecaySchedule> {
        DecaySchedule::new(
            self.pretrain_sigma_start,
            self.pretrain_sigma_end,
            self.pretrain_episodes,
        )
    }

    pub fn eta_schedule(&self) -> Result<DecaySchedule> {
        DecaySchedule::new(
            self.pretrain_eta_start,
            self.pretrain_eta_end,
            self.pretrain_episodes,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Pretrain,
    Joint,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Pretrain => "pretrain",
            Phase::Joint => "joint",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeMetrics {
    pub phase: Phase,
    pub episode: usize,
    pub steps: usize,
    pub mean_quantization_error: f64,
    /// Mean squared transition residual before each update; absent while pretraining.
    pub mean_prediction_residual: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TrainingEvent {
    SomUpdate { episode: usize, step: usize },
    TransitionUpdate {
        episode: usize,
        step: usize,
        action: ActionId,
        residual: f64,
    },
    EpisodeEnd(EpisodeMetrics),
}

/// Instrumentation hook for the training loops.
pub trait TrainingObserver {
    fn on_event(&mut self, event: &TrainingEvent);
}

impl TrainingObserver for () {
    fn on_event(&mut self, _: &TrainingEvent) {}
}

impl<F: FnMut(&TrainingEvent)> TrainingObserver for F {
    fn on_event(&mut self, event: &TrainingEvent) {
        self(event)
    }
}

/// A state map with per-action transition matrices on top.
#[derive(Clone, Debug, PartialEq)]
pub struct Agent {
    pub map: SomMap,
    pub model: TransitionModel,
    config: TrainingConfig,
    frozen: bool,
}

impl Agent {
    /// Fresh agent: random codebooks, zero transition matrices.
    pub fn new<R: Rng + ?Sized>(
        config: TrainingConfig,
        dim: usize,
        actions: usize,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        let geometry = config.geometry()?;
        let map = SomMap::random_uniform(geometry, dim, config.init_range, rng);
        let model = TransitionModel::zeros(geometry.units(), actions);
        Ok(Self {
            map,
            model,
            config,
            frozen: false,
        })
    }

    pub fn from_parts(map: SomMap, model: TransitionModel, config: TrainingConfig) -> Result<Self> {
        if map.units() != model.units() {
            return Err(Error::DimensionMismatch {
                expected: map.units(),
                got: model.units(),
            });
        }
        Ok(Self {
            map,
            model,
            config,
            frozen: false,
        })
    }

    pub fn config(&self) -> &TrainingConfig {
        &self.config
    }

    /// Switches learning off: subsequent calls leave map and matrices untouched.
    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn unfreeze(&mut self) {
        self.frozen = false;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Joint-phase SOM learning rate currently in effect.
    pub fn eta(&self) -> f64 {
        if self.frozen {
            0.0
        } else {
            self.config.eta0
        }
    }

    pub fn gamma(&self) -> f64 {
        if self.frozen {
            0.0
        } else {
            self.config.gamma
        }
    }

    /// Base width for recognition densities: the training `sigma0` while learning,
    /// the evaluation width once frozen.
    pub fn density_sigma0(&self) -> f64 {
        if self.frozen {
            self.config
                .eval_sigma0
                .unwrap_or_else(|| 0.25 * self.map.geometry().diameter())
        } else {
            self.config.sigma0
        }
    }

    pub fn density(&self, u: &[f64]) -> Result<RecognitionDensity> {
        self.map.density(u, self.density_sigma0())
    }

    fn check_env<E: Environment + ?Sized>(&self, env: &E) -> Result<()> {
        if env.action_count() != self.model.action_count() {
            return Err(Error::DimensionMismatch {
                expected: self.model.action_count(),
                got: env.action_count(),
            });
        }
        Ok(())
    }

    /// Standard Kohonen training under random actions, with the width and rate decayed
    /// per episode. No transition learning.
    pub fn pretrain<E, R>(
        &mut self,
        env: &mut E,
        rng: &mut R,
        observer: &mut dyn TrainingObserver,
    ) -> Result<()>
    where
        E: Environment + ?Sized,
        R: RngCore,
    {
        self.check_env(env)?;
        let sigma = self.config.sigma_schedule()?;
        let eta = self.config.eta_schedule()?;
        let actions = env.action_count();
        for episode in 0..self.config.pretrain_episodes {
            let (sigma_e, eta_e) = if self.frozen {
                (sigma.value(episode), 0.0)
            } else {
                (sigma.value(episode), eta.value(episode))
            };
            let mut u = env.reset(rng);
            let mut qe_sum = 0.0;
            let mut steps = 0;
            loop {
                let m = self.map.match_input(&u)?;
                qe_sum += m.min_distance;
                let h = self.map.neighborhood(m.winner, sigma_e)?;
                self.map.update(&u, eta_e, &h)?;
                observer.on_event(&TrainingEvent::SomUpdate {
                    episode,
                    step: steps,
                });

                let a = rng.random_range(0..actions);
                let t = env.step(a)?;
                steps += 1;
                u = t.observation;
                if t.done {
                    break;
                }
            }
            observer.on_event(&TrainingEvent::EpisodeEnd(EpisodeMetrics {
                phase: Phase::Pretrain,
                episode,
                steps,
                mean_quantization_error: qe_sum / steps as f64,
                mean_prediction_residual: None,
            }));
        }
        Ok(())
    }

    /// Joint learning. Per step: adaptive-width SOM update on `u_t` and density `p_t`;
    /// a uniformly random action; density `p_{t+1}` of the observed successor on the
    /// updated map; one least-squares step on that action's matrix.
    pub fn explore_and_learn<E, R>(
        &mut self,
        env: &mut E,
        rng: &mut R,
        observer: &mut dyn TrainingObserver,
    ) -> Result<()>
    where
        E: Environment + ?Sized,
        R: RngCore,
    {
        self.check_env(env)?;
        let actions = env.action_count();
        let sigma0 = self.config.sigma0;
        let (eta, gamma) = (self.eta(), self.gamma());
        for episode in 0..self.config.joint_episodes {
            let u0 = env.reset(rng);
            // Activation of the current state on the current map. The successor's
            // activation from the previous step is reused: the map has not changed since.
            let mut current = self.activation(&u0, sigma0)?;
            let mut u = u0;
            let mut qe_sum = 0.0;
            let mut residual_sum = 0.0;
            let mut steps = 0;
            loop {
                let (qe, h) = current;
                qe_sum += qe;
                self.map.update(&u, eta, &h)?;
                observer.on_event(&TrainingEvent::SomUpdate {
                    episode,
                    step: steps,
                });
                let p = recognition_density(&h)?;

                let a = rng.random_range(0..actions);
                let t = env.step(a)?;

                let next = self.activation(&t.observation, sigma0)?;
                let p_next = recognition_density(&next.1)?;
                let residual = self
                    .model
                    .learn(a, p.as_slice(), p_next.as_slice(), gamma)?;
                observer.on_event(&TrainingEvent::TransitionUpdate {
                    episode,
                    step: steps,
                    action: a,
                    residual,
                });
                residual_sum += residual;
                steps += 1;

                if t.done {
                    break;
                }
                u = t.observation;
                current = next;
            }
            observer.on_event(&TrainingEvent::EpisodeEnd(EpisodeMetrics {
                phase: Phase::Joint,
                episode,
                steps,
                mean_quantization_error: qe_sum / steps as f64,
                mean_prediction_residual: Some(residual_sum / steps as f64),
            }));
        }
        Ok(())
    }

    /// Quantization error and adaptive-width activation of `u`.
    fn activation(&self, u: &[f64], sigma0: f64) -> Result<(f64, Vec<f64>)> {
        let m = self.map.match_input(u)?;
        let h = self.map.neighborhood(m.winner, m.adaptive_width(sigma0))?;
        Ok((m.min_distance, h))
    }

    /// Full schedule: pretraining followed by joint learning.
    pub fn train<E, R>(
        &mut self,
        env: &mut E,
        rng: &mut R,
        observer: &mut dyn TrainingObserver,
    ) -> Result<()>
    where
        E: Environment + ?Sized,
        R: RngCore,
    {
        self.pretrain(env, rng, observer)?;
        self.explore_and_learn(env, rng, observer)
    }
}
