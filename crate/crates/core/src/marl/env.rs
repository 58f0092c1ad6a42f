use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prover::{
    canonical_key, noisy_rho, nondegeneracy_with, prove, NondegeneracyChecks, PremiseSet,
};
use crate::regression::{run_conjecturer_with, Patch, PriorKey, Priors, RegressorConfig, PRIOR_COUNT, PRIOR_MAX};
use crate::rng;
use crate::statements::{parse, AtomicFormula, CanonicalForm, Statement};
use crate::surfaces::{Datapoint, SurfaceKind};

/// System variants compared in the ablations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Model {
    /// Regression alone: random controls every step, λ fixed at 1, no early stop.
    #[serde(rename = "OnlyCA")]
    OnlyCa,
    /// Both agents with the exact provability score.
    M0,
    /// Both agents with noisy provability and a lower threshold.
    M0Noise,
    /// Both agents; provability only decides termination.
    M1,
    /// Conjecturing agent with provability; λ fixed at 1.
    M2,
}

impl Model {
    pub const ALL: [Model; 5] = [Model::OnlyCa, Model::M0, Model::M0Noise, Model::M1, Model::M2];

    pub fn name(self) -> &'static str {
        match self {
            Model::OnlyCa => "Only-CA",
            Model::M0 => "M0",
            Model::M0Noise => "M0+Noise",
            Model::M1 => "M1",
            Model::M2 => "M2",
        }
    }

    pub fn from_name(s: &str) -> Option<Model> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        Model::ALL.into_iter().find(|m| {
            let n: String = m.name().chars().filter(|c| c.is_ascii_alphanumeric()).collect();
            n.eq_ignore_ascii_case(&key)
        })
    }

    pub fn uses_sa(self) -> bool {
        matches!(self, Model::M0 | Model::M0Noise | Model::M1)
    }

    pub fn learns(self) -> bool {
        self != Model::OnlyCa
    }

    pub fn rho_rewarded(self) -> bool {
        matches!(self, Model::M0 | Model::M0Noise | Model::M2)
    }

    pub fn early_termination(self) -> bool {
        self != Model::OnlyCa
    }

    pub fn noisy(self) -> bool {
        self == Model::M0Noise
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarlConfig {
    pub episode_len: usize,
    /// Number of feature-spotter patches, the largest feature count.
    pub n_patches: usize,
    pub init_fraction: f64,
    pub block_size: usize,
    pub top_k: usize,
    /// Largest λ change per selected slot and step.
    pub lambda_step: f64,
    /// Largest prior change per step.
    pub prior_step: f64,
    pub beta: f64,
    pub beta_cap: f64,
    pub r_term: f64,
    pub gamma: f64,
    pub hidden: usize,
    pub lr_critic: f64,
    pub lr_actor: f64,
    pub adam_beta1: f64,
    pub buffer_size: usize,
    pub batch_size: usize,
    pub tau: f64,
    pub noise_start: f64,
    pub noise_end: f64,
    pub training_steps: usize,
    pub prover_budget: u64,
    pub threshold: f64,
    pub noisy_sigma: f64,
    pub noisy_threshold: f64,
    pub check_universal: bool,
    pub check_tautology: bool,
    pub check_duplicate: bool,
}

impl Default for MarlConfig {
    fn default() -> Self {
        MarlConfig {
            episode_len: 50,
            n_patches: 4,
            init_fraction: 0.25,
            block_size: 5,
            top_k: 8,
            lambda_step: 0.25,
            prior_step: 0.5,
            beta: 0.05,
            beta_cap: 1.5,
            r_term: 10.0,
            gamma: 0.99,
            hidden: 64,
            lr_critic: 1e-3,
            lr_actor: 1e-4,
            adam_beta1: 0.0,
            buffer_size: 50_000,
            batch_size: 128,
            tau: 0.01,
            noise_start: 0.3,
            noise_end: 0.05,
            training_steps: 3000,
            prover_budget: crate::prover::DEFAULT_BUDGET,
            threshold: crate::prover::THRESHOLD,
            noisy_sigma: crate::prover::NOISY_SIGMA,
            noisy_threshold: crate::prover::NOISY_THRESHOLD,
            check_universal: true,
            check_tautology: true,
            check_duplicate: true,
        }
    }
}

impl MarlConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::config(m));
        if self.episode_len == 0 || self.n_patches == 0 || self.block_size == 0 || self.top_k == 0 {
            return bad("episode length, patch count, block size and top-k must be positive");
        }
        if !(0.0..=1.0).contains(&self.init_fraction) {
            return bad("init_fraction must lie in [0, 1]");
        }
        if !(0.0..1.0).contains(&self.gamma) || !(0.0..=1.0).contains(&self.tau) {
            return bad("gamma must lie in [0, 1) and tau in [0, 1]");
        }
        if self.hidden == 0 || self.batch_size == 0 || self.buffer_size < self.batch_size {
            return bad("network width, batch and buffer sizes are inconsistent");
        }
        if self.prover_budget == 0 {
            return bad("prover budget must be positive");
        }
        if self.noisy_sigma < 0.0 || self.lambda_step < 0.0 || self.prior_step < 0.0 {
            return bad("noise and step sizes must be nonnegative");
        }
        Ok(())
    }

    pub fn checks(&self) -> NondegeneracyChecks {
        NondegeneracyChecks {
            universal: self.check_universal,
            tautology: self.check_tautology,
            duplicate: self.check_duplicate,
        }
    }

    /// Conjecturing-agent action width: one delta per prior plus the feature count.
    pub fn ca_action_dim(&self) -> usize {
        PRIOR_COUNT + 1
    }

    pub fn ca_obs_dim(&self) -> usize {
        PRIOR_COUNT + 1 + 2 * self.n_patches + 2
    }

    pub fn blocks(&self, n_data: usize) -> usize {
        n_data.div_ceil(self.block_size)
    }

    pub fn slots(&self, n_data: usize) -> usize {
        self.n_patches * self.blocks(n_data)
    }

    /// Skeptical-agent action width: a selection score and a delta per slot.
    pub fn sa_action_dim(&self, n_data: usize) -> usize {
        2 * self.slots(n_data)
    }

    pub fn sa_obs_dim(&self, n_data: usize) -> usize {
        self.slots(n_data) + CLASSES.len() + 2
    }
}

const CLASSES: [SurfaceKind; 4] =
    [SurfaceKind::Sphere, SurfaceKind::Torus, SurfaceKind::KleinBottle, SurfaceKind::DisjointUnion];

#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub t: usize,
    /// One weight array per patch.
    pub lambda: Vec<Patch>,
    pub priors: Priors,
    pub n_features: usize,
    pub last_statement: Option<Statement>,
    /// Score as seen by the agents (0 when it is hidden from them).
    pub last_rho: f64,
    /// Accuracy of the last statement on each surface class.
    pub last_class_accuracy: [f64; 4],
    pub premises: PremiseSet,
    pub terminated: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub statement: Statement,
    /// Score compared with the threshold (noisy for the noisy model).
    pub rho: f64,
    /// Whether the prover certified the statement.
    pub proved: bool,
    pub rewards: (f64, f64),
    pub terminated: bool,
    /// Termination came from the provability threshold, not the time limit.
    pub success: bool,
    pub checks_passed: bool,
    pub harvested: usize,
    pub n_features: usize,
}

/// Data, premises and the run-level memory shared by all episodes of a run:
/// harvested premises and the statements that ended earlier episodes.
/// What a run remembers across episodes: harvested premises as statement
/// text and the keys of statements that already ended an episode.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMemory {
    pub harvested: Vec<String>,
    pub terminal_keys: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Environment {
    pub data: Vec<Datapoint>,
    pub model: Model,
    pub cfg: MarlConfig,
    pub regression: RegressorConfig,
    pub premises: PremiseSet,
    pub terminal_keys: Vec<String>,
}

impl Environment {
    pub fn new(
        data: Vec<Datapoint>,
        premises: PremiseSet,
        model: Model,
        cfg: MarlConfig,
        regression: RegressorConfig,
    ) -> Result<Environment> {
        if data.is_empty() {
            return Err(Error::param("environment needs data"));
        }
        cfg.validate()?;
        regression.validate()?;
        premises.check_consistent(&data)?;
        Ok(Environment { data, model, cfg, regression, premises, terminal_keys: Vec::new() })
    }

    pub fn n_data(&self) -> usize {
        self.data.len()
    }

    pub fn memory(&self) -> RunMemory {
        RunMemory {
            harvested: self.premises.harvested().map(|a| a.statement().to_prefix()).collect(),
            terminal_keys: self.terminal_keys.clone(),
        }
    }

    /// Replays a saved memory onto a fresh environment.
    pub fn restore(&mut self, memory: &RunMemory) -> Result<()> {
        let atoms = memory
            .harvested
            .iter()
            .map(|text| {
                AtomicFormula::from_statement(&parse(text)?)
                    .ok_or_else(|| Error::param(format!("harvested premise `{text}` is not an equality")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.premises.harvest(atoms);
        self.terminal_keys.extend(memory.terminal_keys.iter().cloned());
        Ok(())
    }

    pub fn reset(&self, seed: u64) -> EnvState {
        let n = self.data.len();
        let lambda = if self.model.uses_sa() {
            let mut r = rng::stream(seed, "lambda-init");
            let k = libm::round(self.cfg.init_fraction * n as f64) as usize;
            (0..self.cfg.n_patches)
                .map(|_| {
                    let mut idx: Vec<usize> = (0..n).collect();
                    idx.shuffle(&mut r);
                    let mut w = vec![0.0; n];
                    for &i in &idx[..k] {
                        w[i] = r.random_range(0.0..=1.0);
                    }
                    Patch(w)
                })
                .collect()
        } else {
            vec![Patch::uniform(n); self.cfg.n_patches]
        };
        EnvState {
            t: 0,
            lambda,
            priors: Priors::default(),
            n_features: 1,
            last_statement: None,
            last_rho: 0.0,
            last_class_accuracy: [0.0; 4],
            premises: self.premises.clone(),
            terminated: false,
            seed,
        }
    }

    fn apply_sa(&self, state: &mut EnvState, sa: &[f64]) {
        let slots = self.cfg.slots(self.data.len());
        let blocks = self.cfg.blocks(self.data.len());
        let (mask, delta) = sa.split_at(slots);
        let mut order: Vec<usize> = (0..slots).filter(|&i| mask[i] > 0.0).collect();
        order.sort_by(|&a, &b| mask[b].total_cmp(&mask[a]).then(a.cmp(&b)));
        for &slot in order.iter().take(self.cfg.top_k) {
            let (patch, block) = (slot / blocks, slot % blocks);
            let d = self.cfg.lambda_step * delta[slot].clamp(-1.0, 1.0);
            let start = block * self.cfg.block_size;
            let end = (start + self.cfg.block_size).min(self.data.len());
            for w in &mut state.lambda[patch].0[start..end] {
                *w = (*w + d).clamp(0.0, 1.0);
            }
        }
    }

    fn apply_ca(&self, state: &mut EnvState, ca: &[f64]) {
        if self.model == Model::OnlyCa {
            let mut r = rng::stream_indexed(state.seed, "only-ca", state.t as u64);
            for p in state.priors.0.iter_mut() {
                *p = r.random_range(-PRIOR_MAX..=PRIOR_MAX);
            }
            state.n_features = r.random_range(1..=self.cfg.n_patches);
            return;
        }
        for k in PriorKey::all() {
            let v = state.priors.get(k) + self.cfg.prior_step * ca[k.index()].clamp(-1.0, 1.0);
            state.priors.set(k, v);
        }
        let a = (ca[PRIOR_COUNT].clamp(-1.0, 1.0) + 1.0) / 2.0;
        let extra = libm::round(a * (self.cfg.n_patches - 1) as f64) as usize;
        state.n_features = 1 + extra.min(self.cfg.n_patches - 1);
    }

    /// One simultaneous move. `ca` and `sa` are raw actions in `[-1, 1]`;
    /// `sa` is ignored by models without a skeptical agent.
    pub fn step(&mut self, state: &mut EnvState, ca: &[f64], sa: &[f64]) -> Result<StepOutcome> {
        if state.terminated || state.t >= self.cfg.episode_len {
            return Err(Error::Contract("step on a terminated episode".into()));
        }
        if ca.len() != self.cfg.ca_action_dim() {
            return Err(Error::config("conjecturing action has the wrong width"));
        }
        if self.model.uses_sa() {
            if sa.len() != self.cfg.sa_action_dim(self.data.len()) {
                return Err(Error::config("skeptical action has the wrong width"));
            }
            self.apply_sa(state, sa);
        }
        self.apply_ca(state, ca);

        let n = self.data.len();
        let patches: Vec<Patch> = state.lambda[..state.n_features]
            .iter()
            .map(|p| if p.total() > 0.0 { p.clone() } else { Patch::uniform(n) })
            .collect();
        let mut reg = self.regression.clone();
        reg.priors = state.priors;
        reg.seed = rng::derive(state.seed, state.t as u64);
        let excluded: BTreeSet<CanonicalForm> =
            state.premises.premises().iter().map(|p| p.atom.canonical.clone()).collect();
        let conjecture = run_conjecturer_with(&self.data, &patches, &reg, &excluded)?;
        let statement = conjecture.statement;

        let outcome = prove(&statement, &state.premises, self.cfg.prover_budget)?;
        let verdict = nondegeneracy_with(&statement, &self.data, &state.premises, &self.terminal_keys, self.cfg.checks());
        let harvested = state.premises.harvest(verdict.harvest.iter().cloned());
        self.premises.harvest(verdict.harvest);
        let (rho, threshold) = if self.model.noisy() {
            let seed = rng::derive(rng::derive(state.seed, rng::tag("noise")), state.t as u64);
            (noisy_rho(&outcome, self.cfg.noisy_sigma, seed), self.cfg.noisy_threshold)
        } else {
            (outcome.rho, self.cfg.threshold)
        };
        let terminal = self.model.early_termination() && verdict.pass && rho >= threshold;

        let mut r_ca = (self.cfg.beta * statement.tree_size() as f64).min(self.cfg.beta_cap);
        let mut r_sa = 0.0;
        if terminal {
            self.terminal_keys.push(canonical_key(&statement));
            if self.model.rho_rewarded() {
                r_ca += self.cfg.r_term;
                r_sa -= self.cfg.r_term;
            }
        }

        for (slot, kind) in state.last_class_accuracy.iter_mut().zip(CLASSES) {
            let (hit, total) = self
                .data
                .iter()
                .filter(|d| d.labels.kind == kind)
                .fold((0usize, 0usize), |(h, t), d| (h + statement.evaluate(&d.features) as usize, t + 1));
            *slot = if total == 0 { 0.0 } else { hit as f64 / total as f64 };
        }
        state.last_rho = if self.model.rho_rewarded() { rho } else { 0.0 };
        state.last_statement = Some(statement.clone());
        state.t += 1;
        state.terminated = terminal || state.t >= self.cfg.episode_len;
        Ok(StepOutcome {
            statement,
            rho,
            proved: outcome.proved(),
            rewards: (r_ca, r_sa),
            terminated: state.terminated,
            success: terminal,
            checks_passed: verdict.pass,
            harvested,
            n_features: state.n_features,
        })
    }

    pub fn obs_ca(&self, state: &EnvState) -> Vec<f64> {
        let mut o: Vec<f64> = state.priors.0.iter().map(|p| p / PRIOR_MAX).collect();
        o.push(state.n_features as f64 / self.cfg.n_patches as f64);
        for p in &state.lambda {
            let n = p.0.len().max(1) as f64;
            let mean = p.total() / n;
            let var = p.0.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / n;
            o.push(mean);
            o.push(libm::sqrt(var));
        }
        o.push(state.last_rho);
        o.push(state.t as f64 / self.cfg.episode_len as f64);
        o
    }

    pub fn obs_sa(&self, state: &EnvState) -> Vec<f64> {
        let bs = self.cfg.block_size;
        let mut o = Vec::with_capacity(self.cfg.sa_obs_dim(self.data.len()));
        for p in &state.lambda {
            for chunk in p.0.chunks(bs) {
                o.push(chunk.iter().sum::<f64>() / chunk.len() as f64);
            }
        }
        o.extend_from_slice(&state.last_class_accuracy);
        o.push(state.last_rho);
        o.push(state.t as f64 / self.cfg.episode_len as f64);
        o
    }
}
