//! A self-organizing map world model for discrete-action control.
//!
//! A Kohonen map learns a sparse, topographic code for environment states; one transition
//! matrix per action learns how map activity moves when that action is taken. Together
//! they support open-loop "virtual episodes" and greedy forward search towards goals
//! imprinted from a single demonstration. [`CartPole`] is the reference environment.

pub mod agent;
pub mod config;
pub mod env;
pub mod error;
pub mod experiments;
pub mod harness;
pub mod persist;
pub mod planner;
pub mod som;
pub mod transition;

pub use agent::{Agent, DecaySchedule, TrainingConfig, TrainingEvent, TrainingObserver};
pub use env::{CartPole, DoneReason, EnvParams, EnvState, Environment, StepResult, Transition};
pub use config::{Config, GoalSpec};
pub use error::{Error, Result};
pub use persist::ModelArtifact;
pub use planner::{plan, rollout, run_task, EpisodeTrace, Goal, Plan, PlanConfig};
pub use som::{MapGeometry, RecognitionDensity, SomMap, UnitIndex};
pub use transition::{ActionId, TransitionModel};
