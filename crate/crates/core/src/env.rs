//! Environments: the discrete-action contract the agent trains against, and the
//! cart-pole reference implementation.

use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::transition::ActionId;

/// Why an episode ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DoneReason {
    None,
    /// Pole angle beyond the limit.
    Angle,
    /// Cart beyond the track border.
    Position,
    StepCap,
    /// Terminal state of an environment without a finer classification.
    Terminal,
}

impl DoneReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            DoneReason::None => "none",
            DoneReason::Angle => "angle",
            DoneReason::Position => "position",
            DoneReason::StepCap => "step_cap",
            DoneReason::Terminal => "terminal",
        }
    }

    pub fn is_done(&self) -> bool {
        *self != DoneReason::None
    }
}

impl fmt::Display for DoneReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Observation after one environment step.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub observation: Vec<f64>,
    pub done: bool,
    pub reason: DoneReason,
}

/// Minimal contract for a discrete-action environment with a real-valued observation.
pub trait Environment {
    fn action_count(&self) -> usize;

    /// Starts a new episode and returns its first observation.
    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64>;

    fn step(&mut self, action: ActionId) -> Result<Transition>;

    fn observe(&self) -> Vec<f64>;
}

/// Cart-pole state `(x, x_dot, theta, theta_dot)`; `theta > 0` is a tilt to the right.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnvState {
    pub x: f64,
    pub x_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

impl EnvState {
    pub const DIM: usize = 4;

    pub fn new(x: f64, x_dot: f64, theta: f64, theta_dot: f64) -> Self {
        Self {
            x,
            x_dot,
            theta,
            theta_dot,
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.x_dot, self.theta, self.theta_dot]
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        match *v {
            [x, x_dot, theta, theta_dot] => Ok(Self::new(x, x_dot, theta, theta_dot)),
            _ => Err(Error::DimensionMismatch {
                expected: Self::DIM,
                got: v.len(),
            }),
        }
    }

    /// Reflection through the track centre.
    pub fn mirrored(self) -> Self {
        Self::new(-self.x, -self.x_dot, -self.theta, -self.theta_dot)
    }

    fn check_finite(&self) -> Result<()> {
        check_finite(&self.to_array(), "cart-pole state")
    }
}

impl From<[f64; 4]> for EnvState {
    fn from(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvParams {
    pub gravity: f64,
    pub cart_mass: f64,
    pub pole_mass: f64,
    pub pole_half_length: f64,
    pub force_mag: f64,
    pub dt: f64,
    /// Radians; 15 degrees.
    pub theta_limit: f64,
    pub x_limit: f64,
    pub max_steps: u32,
    pub reset_range: f64,
}

impl Default for EnvParams {
    fn default() -> Self {
        Self {
            gravity: 9.8,
            cart_mass: 1.0,
            pole_mass: 0.1,
            pole_half_length: 0.5,
            force_mag: 10.0,
            dt: 0.02,
            theta_limit: 15f64.to_radians(),
            x_limit: 2.4,
            max_steps: 200,
            reset_range: 0.05,
        }
    }
}

impl EnvParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gravity", self.gravity),
            ("cart_mass", self.cart_mass),
            ("pole_mass", self.pole_mass),
            ("pole_half_length", self.pole_half_length),
            ("force_mag", self.force_mag),
            ("dt", self.dt),
            ("theta_limit", self.theta_limit),
            ("x_limit", self.x_limit),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.theta_limit >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::Config("theta_limit must be below pi/2".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        if !(self.reset_range >= 0.0 && self.reset_range.is_finite()) {
            return Err(Error::Config("reset_range must be non-negative".into()));
        }
        Ok(())
    }

    /// One explicit Euler step of the frictionless cart-pole. Pure: no episode bookkeeping.
    pub fn integrate(&self, s: EnvState, action: ActionId) -> EnvState {
        let force = if action == CartPole::PUSH_RIGHT {
            self.force_mag
        } else {
            -self.force_mag
        };
        let total_mass = self.cart_mass + self.pole_mass;
        let pole_moment = self.pole_mass * self.pole_half_length;
        let (sin, cos) = s.theta.sin_cos();

        let temp = (force + pole_moment * s.theta_dot * s.theta_dot * sin) / total_mass;
        let theta_acc = (self.gravity * sin - cos * temp)
            / (self.pole_half_length * (4.0 / 3.0 - self.pole_mass * cos * cos / total_mass));
        let x_acc = temp - pole_moment * theta_acc * cos / total_mass;

        EnvState {
            x: s.x + self.dt * s.x_dot,
            x_dot: s.x_dot + self.dt * x_acc,
            theta: s.theta + self.dt * s.theta_dot,
            theta_dot: s.theta_dot + self.dt * theta_acc,
        }
    }

    fn done_reason(&self, s: &EnvState, steps: u32) -> DoneReason {
        if s.theta.abs() > self.theta_limit {
            DoneReason::Angle
        } else if s.x.abs() > self.x_limit {
            DoneReason::Position
        } else if steps >= self.max_steps {
            DoneReason::StepCap
        } else {
            DoneReason::None
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepResult {
    pub next_state: EnvState,
    pub done: bool,
    pub done_reason: DoneReason,
}

#[derive(Clone, Debug)]
pub struct CartPole {
    params: EnvParams,
    state: EnvState,
    steps: u32,
}

impl CartPole {
    pub const PUSH_LEFT: ActionId = 0;
    pub const PUSH_RIGHT: ActionId = 1;
    pub const ACTIONS: usize = 2;

    pub fn new(params: EnvParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            state: EnvState::default(),
            steps: 0,
        })
    }

    pub fn params(&self) -> &EnvParams {
        &self.params
    }

    pub fn state(&self) -> EnvState {
        self.state
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    /// Each component uniform in `[-reset_range, reset_range]`; zeroes the step counter.
    pub fn reset_state<R: Rng + ?Sized>(&mut self, rng: &mut R) -> EnvState {
        let r = self.params.reset_range;
        let mut draw = || if r > 0.0 { rng.random_range(-r..=r) } else { 0.0 };
        self.state = EnvState::new(draw(), draw(), draw(), draw());
        self.steps = 0;
        self.state
    }

    /// Overwrites the physical state; the step counter is left alone.
    pub fn set_state(&mut self, state: EnvState) -> Result<()> {
        state.check_finite()?;
        self.state = state;
        Ok(())
    }

    pub fn step_state(&mut self, action: ActionId) -> Result<StepResult> {
        if action >= Self::ACTIONS {
            return Err(Error::InvalidInput(format!("cart-pole has no action {action}")));
        }
        self.state.check_finite()?;
        self.state = self.params.integrate(self.state, action);
        self.steps += 1;
        let done_reason = self.params.done_reason(&self.state, self.steps);
        Ok(StepResult {
            next_state: self.state,
            done: done_reason != DoneReason::None,
            done_reason,
        })
    }
}

impl Environment for CartPole {
    fn action_count(&self) -> usize {
        Self::ACTIONS
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.reset_state(rng).to_array().to_vec()
    }

    fn step(&mut self, action: ActionId) -> Result<Transition> {
        let r = self.step_state(action)?;
        Ok(Transition {
            observation: r.next_state.to_array().to_vec(),
            done: r.done,
            reason: r.done_reason,
        })
    }

    fn observe(&self) -> Vec<f64> {
        self.state.to_array().to_vec()
    }
}
