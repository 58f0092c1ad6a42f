use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::env::{EnvState, Environment, MarlConfig, Model, StepOutcome};
use super::nn::{Adam, Mlp};
use crate::error::{Error, Result};
use crate::rng;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agent {
    Ca,
    Sa,
}

/// Actor, centralized critic, their target copies and optimizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentNets {
    pub actor: Mlp,
    pub critic: Mlp,
    pub actor_target: Mlp,
    pub critic_target: Mlp,
    pub actor_opt: Adam,
    pub critic_opt: Adam,
}

impl AgentNets {
    fn new(obs: usize, act: usize, joint: usize, cfg: &MarlConfig, r: &mut rng::Rng) -> AgentNets {
        let h = cfg.hidden;
        let actor = Mlp::new(&[obs, h, h, act], true, r);
        let critic = Mlp::new(&[joint, h, h, 1], false, r);
        AgentNets {
            actor_opt: Adam::new(actor.params.len(), cfg.lr_actor, cfg.adam_beta1),
            critic_opt: Adam::new(critic.params.len(), cfg.lr_critic, cfg.adam_beta1),
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor,
            critic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub o_ca: Vec<f64>,
    pub o_sa: Vec<f64>,
    pub a_ca: Vec<f64>,
    pub a_sa: Vec<f64>,
    pub r_ca: f64,
    pub r_sa: f64,
    pub next_ca: Vec<f64>,
    pub next_sa: Vec<f64>,
    pub done: bool,
}

#[derive(Debug, Clone, Default)]
pub struct ReplayBuffer {
    pub capacity: usize,
    items: Vec<Transition>,
    next: usize,
    pub pushed: u64,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> ReplayBuffer {
        ReplayBuffer { capacity, items: Vec::new(), next: 0, pushed: 0 }
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
        self.pushed += 1;
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn sample(&self, n: usize, r: &mut rng::Rng) -> Vec<&Transition> {
        (0..n).map(|_| &self.items[r.random_range(0..self.items.len())]).collect()
    }
}

/// Both agents' networks plus bookkeeping. Serialized as the checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPolicies {
    pub version: u32,
    pub model: Model,
    pub ca: AgentNets,
    pub sa: AgentNets,
    pub obs_ca: usize,
    pub obs_sa: usize,
    pub act_ca: usize,
    pub act_sa: usize,
    pub steps: u64,
    pub updates: u64,
    pub buffer_len: usize,
    pub buffer_pushed: u64,
}

/// Forward return `Σ γ^t r_t`, accumulated left to right.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    let mut total = 0.0;
    let mut disc = 1.0;
    for r in rewards {
        total += disc * r;
        disc *= gamma;
    }
    total
}

impl TrainedPolicies {
    pub fn new(model: Model, cfg: &MarlConfig, n_data: usize, seed: u64) -> Result<TrainedPolicies> {
        cfg.validate()?;
        let (obs_ca, obs_sa) = (cfg.ca_obs_dim(), cfg.sa_obs_dim(n_data));
        let (act_ca, act_sa) = (cfg.ca_action_dim(), cfg.sa_action_dim(n_data));
        let joint = obs_ca + obs_sa + act_ca + act_sa;
        let mut r = rng::stream(seed, "policy-init");
        let ca = AgentNets::new(obs_ca, act_ca, joint, cfg, &mut r);
        let sa = AgentNets::new(obs_sa, act_sa, joint, cfg, &mut r);
        Ok(TrainedPolicies {
            version: CHECKPOINT_VERSION,
            model,
            ca,
            sa,
            obs_ca,
            obs_sa,
            act_ca,
            act_sa,
            steps: 0,
            updates: 0,
            buffer_len: 0,
            buffer_pushed: 0,
        })
    }

    pub fn nets(&self, a: Agent) -> &AgentNets {
        match a {
            Agent::Ca => &self.ca,
            Agent::Sa => &self.sa,
        }
    }

    pub fn nets_mut(&mut self, a: Agent) -> &mut AgentNets {
        match a {
            Agent::Ca => &mut self.ca,
            Agent::Sa => &mut self.sa,
        }
    }

    fn check_dims(&self, env: &Environment) -> Result<()> {
        let cfg = &env.cfg;
        let n = env.n_data();
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::config(format!("checkpoint version {} is not supported", self.version)));
        }
        if (self.obs_ca, self.obs_sa, self.act_ca, self.act_sa)
            != (cfg.ca_obs_dim(), cfg.sa_obs_dim(n), cfg.ca_action_dim(), cfg.sa_action_dim(n))
        {
            return Err(Error::config("policy dimensions do not match the environment"));
        }
        Ok(())
    }

    /// Deterministic actions; the skeptical action is zero for models without one.
    pub fn act(&self, model: Model, o_ca: &[f64], o_sa: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let ca = self.ca.actor.forward(o_ca);
        let sa = if model.uses_sa() { self.sa.actor.forward(o_sa) } else { vec![0.0; self.act_sa] };
        (ca, sa)
    }

    fn joint(o_ca: &[f64], o_sa: &[f64], a_ca: &[f64], a_sa: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(o_ca.len() + o_sa.len() + a_ca.len() + a_sa.len());
        x.extend_from_slice(o_ca);
        x.extend_from_slice(o_sa);
        x.extend_from_slice(a_ca);
        x.extend_from_slice(a_sa);
        x
    }

    /// Bellman targets `r + γ·Q'(o', μ'(o'))`, zero bootstrap on terminal steps.
    pub fn targets(&self, agent: Agent, batch: &[&Transition], gamma: f64, uses_sa: bool) -> Vec<f64> {
        let nets = self.nets(agent);
        batch
            .iter()
            .map(|t| {
                let r = if agent == Agent::Ca { t.r_ca } else { t.r_sa };
                if t.done {
                    return r;
                }
                let a_ca = self.ca.actor_target.forward(&t.next_ca);
                let a_sa = if uses_sa { self.sa.actor_target.forward(&t.next_sa) } else { vec![0.0; self.act_sa] };
                let q = nets.critic_target.forward(&Self::joint(&t.next_ca, &t.next_sa, &a_ca, &a_sa))[0];
                r + gamma * q
            })
            .collect()
    }

    /// Mean squared Bellman error against fixed targets, with its gradient.
    pub fn critic_loss_grad(&self, agent: Agent, batch: &[&Transition], targets: &[f64]) -> (f64, Vec<f64>) {
        let critic = &self.nets(agent).critic;
        let mut grads = vec![0.0; critic.params.len()];
        let mut loss = 0.0;
        let b = batch.len() as f64;
        for (t, y) in batch.iter().zip(targets) {
            let trace = critic.trace(&Self::joint(&t.o_ca, &t.o_sa, &t.a_ca, &t.a_sa));
            let err = trace.output()[0] - y;
            loss += err * err / b;
            critic.backward(&trace, &[2.0 * err / b], Some(&mut grads), false);
        }
        (loss, grads)
    }

    /// `-mean Q_i(o, a)` with the agent's own action replaced by its actor's
    /// output, and the gradient with respect to the actor parameters.
    pub fn actor_loss_grad(&self, agent: Agent, batch: &[&Transition]) -> (f64, Vec<f64>) {
        let nets = self.nets(agent);
        let mut grads = vec![0.0; nets.actor.params.len()];
        let mut loss = 0.0;
        let b = batch.len() as f64;
        let o_len = self.obs_ca + self.obs_sa;
        for t in batch {
            let obs = if agent == Agent::Ca { &t.o_ca } else { &t.o_sa };
            let at = nets.actor.trace(obs);
            let a = at.output();
            let x = match agent {
                Agent::Ca => Self::joint(&t.o_ca, &t.o_sa, a, &t.a_sa),
                Agent::Sa => Self::joint(&t.o_ca, &t.o_sa, &t.a_ca, a),
            };
            let ct = nets.critic.trace(&x);
            loss -= ct.output()[0] / b;
            let gx = nets.critic.backward(&ct, &[-1.0 / b], None, true);
            let start = match agent {
                Agent::Ca => o_len,
                Agent::Sa => o_len + self.act_ca,
            };
            let ga = &gx[start..start + a.len()];
            nets.actor.backward(&at, ga, Some(&mut grads), false);
        }
        (loss, grads)
    }

    /// One MADDPG update on a minibatch: critics, then actors, then targets.
    pub fn update(&mut self, batch: &[&Transition], cfg: &MarlConfig, uses_sa: bool) {
        let agents: &[Agent] = if uses_sa { &[Agent::Ca, Agent::Sa] } else { &[Agent::Ca] };
        for &agent in agents {
            let y = self.targets(agent, batch, cfg.gamma, uses_sa);
            let (_, g) = self.critic_loss_grad(agent, batch, &y);
            let nets = self.nets_mut(agent);
            nets.critic_opt.step(&mut nets.critic.params, &g);
            let (_, g) = self.actor_loss_grad(agent, batch);
            let nets = self.nets_mut(agent);
            nets.actor_opt.step(&mut nets.actor.params, &g);
        }
        for &agent in agents {
            let nets = self.nets_mut(agent);
            nets.critic_target.soft_update(&nets.critic, cfg.tau);
            nets.actor_target.soft_update(&nets.actor, cfg.tau);
        }
        self.updates += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub statement: String,
    /// Canonical forms of the statement's atoms.
    pub atoms: Vec<String>,
    pub rho: f64,
    pub proved: bool,
    pub checks_passed: bool,
    pub r_ca: f64,
    pub r_sa: f64,
    pub terminated: bool,
    pub success: bool,
    pub n_features: usize,
    pub harvested: usize,
    /// Digest of all λ arrays after the step.
    pub lambda_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub episode: usize,
    pub seed: u64,
    pub model: Model,
    pub steps: Vec<StepRecord>,
    pub return_ca: f64,
    pub return_sa: f64,
}

impl EpisodeLog {
    /// Ended by a statement crossing the threshold and passing the checks.
    pub fn succeeded(&self) -> bool {
        self.steps.iter().any(|s| s.success)
    }
}

fn lambda_digest(state: &EnvState) -> String {
    let mut h = rng::tag("lambda");
    for p in &state.lambda {
        for w in &p.0 {
            h = rng::derive(h, w.to_bits());
        }
    }
    format!("{h:016x}")
}

fn record(state: &EnvState, out: &StepOutcome) -> StepRecord {
    StepRecord {
        t: state.t - 1,
        statement: out.statement.to_prefix(),
        atoms: out.statement.atomic_formulae().iter().map(|a| format!("{}", a.canonical)).collect(),
        rho: out.rho,
        proved: out.proved,
        checks_passed: out.checks_passed,
        r_ca: out.rewards.0,
        r_sa: out.rewards.1,
        terminated: out.terminated,
        success: out.success,
        n_features: out.n_features,
        harvested: out.harvested,
        lambda_digest: lambda_digest(state),
    }
}

fn finish(episode: usize, seed: u64, model: Model, steps: Vec<StepRecord>, gamma: f64) -> EpisodeLog {
    let r_ca: Vec<f64> = steps.iter().map(|s| s.r_ca).collect();
    let r_sa: Vec<f64> = steps.iter().map(|s| s.r_sa).collect();
    EpisodeLog {
        episode,
        seed,
        model,
        return_ca: discounted_return(&r_ca, gamma),
        return_sa: discounted_return(&r_sa, gamma),
        steps,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRun {
    pub policies: TrainedPolicies,
    /// Every training episode, the last one possibly cut by the step budget.
    pub episodes: Vec<EpisodeLog>,
}

/// MADDPG for `env.cfg.training_steps` environment steps. Regression-only
/// models skip learning and return the initial policies.
pub fn train(env: &mut Environment, seed: u64) -> Result<TrainingRun> {
    let cfg = env.cfg.clone();
    let model = env.model;
    let mut policies = TrainedPolicies::new(model, &cfg, env.n_data(), seed)?;
    policies.check_dims(env)?;
    let mut episodes = Vec::new();
    if !model.learns() || cfg.training_steps == 0 {
        return Ok(TrainingRun { policies, episodes });
    }
    let uses_sa = model.uses_sa();
    let mut buffer = ReplayBuffer::new(cfg.buffer_size);
    let mut noise = rng::stream(seed, "exploration");
    let mut sampler = rng::stream(seed, "replay");
    let total = cfg.training_steps;
    let mut step = 0;
    let mut episode = 0;
    while step < total {
        let ep_seed = rng::derive(seed, episode as u64);
        let mut state = env.reset(ep_seed);
        let mut records = Vec::new();
        while !state.terminated && step < total {
            let o_ca = env.obs_ca(&state);
            let o_sa = env.obs_sa(&state);
            let sigma = cfg.noise_start + (cfg.noise_end - cfg.noise_start) * step as f64 / total as f64;
            let (mut a_ca, mut a_sa) = policies.act(model, &o_ca, &o_sa);
            for a in a_ca.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut noise);
                *a = (*a + sigma * z).clamp(-1.0, 1.0);
            }
            if uses_sa {
                for a in a_sa.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut noise);
                    *a = (*a + sigma * z).clamp(-1.0, 1.0);
                }
            }
            let out = env.step(&mut state, &a_ca, &a_sa)?;
            records.push(record(&state, &out));
            buffer.push(Transition {
                next_ca: env.obs_ca(&state),
                next_sa: env.obs_sa(&state),
                o_ca,
                o_sa,
                a_ca,
                a_sa,
                r_ca: out.rewards.0,
                r_sa: out.rewards.1,
                done: out.terminated,
            });
            if buffer.len() >= cfg.batch_size {
                let batch = buffer.sample(cfg.batch_size, &mut sampler);
                policies.update(&batch, &cfg, uses_sa);
            }
            step += 1;
        }
        episodes.push(finish(episode, ep_seed, model, records, cfg.gamma));
        episode += 1;
    }
    policies.steps = step as u64;
    policies.buffer_len = buffer.len();
    policies.buffer_pushed = buffer.pushed;
    Ok(TrainingRun { policies, episodes })
}

/// Evaluation episodes without exploration noise or learning.
pub fn execute(policies: &TrainedPolicies, env: &mut Environment, n_episodes: usize, seed: u64) -> Result<Vec<EpisodeLog>> {
    policies.check_dims(env)?;
    let model = env.model;
    let mut logs = Vec::with_capacity(n_episodes);
    for episode in 0..n_episodes {
        let ep_seed = rng::derive(rng::derive(seed, rng::tag("execute")), episode as u64);
        let mut state = env.reset(ep_seed);
        let mut records = Vec::new();
        while !state.terminated {
            let (a_ca, a_sa) = if model.learns() {
                policies.act(model, &env.obs_ca(&state), &env.obs_sa(&state))
            } else {
                (vec![0.0; policies.act_ca], vec![0.0; policies.act_sa])
            };
            let out = env.step(&mut state, &a_ca, &a_sa)?;
            records.push(record(&state, &out));
        }
        logs.push(finish(episode, ep_seed, model, records, env.cfg.gamma));
    }
    Ok(logs)
}
