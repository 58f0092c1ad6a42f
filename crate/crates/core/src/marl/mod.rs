//! Two-agent environment and MADDPG training.

mod env;
mod maddpg;
mod nn;

pub use env::{EnvState, Environment, MarlConfig, Model, RunMemory, StepOutcome};
pub use maddpg::{
    discounted_return, execute, train, Agent, AgentNets, EpisodeLog, ReplayBuffer, StepRecord,
    TrainedPolicies, TrainingRun, Transition, CHECKPOINT_VERSION,
};
pub use nn::{Adam, Mlp, Trace};
