//! The run-config document.
//!
//! One TOML file with the sections `[surfaces]`, `[regression]`, `[prover]`,
//! `[marl]` and `[harness]`. A training spec adds an `[experiment]` table, an
//! ablation suite adds `[[cell]]` entries. Missing keys take their defaults;
//! `forge default-config` prints every key with its default.

use std::path::Path;

use forge_core::harness::{
    DatasetId, ExperimentSpec, SizeModel, DEFAULT_EVAL_EPISODES, DEFAULT_PER_CLASS, DEFAULT_RESAMPLES,
    DEFAULT_SEEDS,
};
use forge_core::marl::{MarlConfig, Model};
use forge_core::prover::PremiseGroup;
use forge_core::regression::RegressorConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Overrides `harness.seed` when set.
pub const SEED_ENV: &str = "FORGE_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfacesSection {
    pub per_class: usize,
    pub sizes: SizeModel,
}

impl Default for SurfacesSection {
    fn default() -> Self {
        SurfacesSection { per_class: DEFAULT_PER_CLASS, sizes: SizeModel::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProverSection {
    /// Procedure steps before the prover gives up.
    pub budget: u64,
    pub threshold: f64,
    pub noisy_sigma: f64,
    pub noisy_threshold: f64,
    pub check_universal: bool,
    pub check_tautology: bool,
    pub check_duplicate: bool,
}

impl Default for ProverSection {
    fn default() -> Self {
        let m = MarlConfig::default();
        ProverSection {
            budget: m.prover_budget,
            threshold: m.threshold,
            noisy_sigma: m.noisy_sigma,
            noisy_threshold: m.noisy_threshold,
            check_universal: m.check_universal,
            check_tautology: m.check_tautology,
            check_duplicate: m.check_duplicate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarlSection {
    pub episode_len: usize,
    pub n_patches: usize,
    pub init_fraction: f64,
    pub block_size: usize,
    pub top_k: usize,
    pub lambda_step: f64,
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
}

impl Default for MarlSection {
    fn default() -> Self {
        let m = MarlConfig::default();
        MarlSection {
            episode_len: m.episode_len,
            n_patches: m.n_patches,
            init_fraction: m.init_fraction,
            block_size: m.block_size,
            top_k: m.top_k,
            lambda_step: m.lambda_step,
            prior_step: m.prior_step,
            beta: m.beta,
            beta_cap: m.beta_cap,
            r_term: m.r_term,
            gamma: m.gamma,
            hidden: m.hidden,
            lr_critic: m.lr_critic,
            lr_actor: m.lr_actor,
            adam_beta1: m.adam_beta1,
            buffer_size: m.buffer_size,
            batch_size: m.batch_size,
            tau: m.tau,
            noise_start: m.noise_start,
            noise_end: m.noise_end,
            training_steps: m.training_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessSection {
    /// Master seed.
    pub seed: u64,
    /// Training seeds of every cell.
    pub seeds: Vec<u64>,
    pub eval_episodes: usize,
    pub resamples: usize,
}

impl Default for HarnessSection {
    fn default() -> Self {
        HarnessSection {
            seed: 0,
            seeds: DEFAULT_SEEDS.to_vec(),
            eval_episodes: DEFAULT_EVAL_EPISODES,
            resamples: DEFAULT_RESAMPLES,
        }
    }
}

/// A dataset/model pair; unset fields fall back to the sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub dataset: DatasetId,
    pub model: Model,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_class: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_episodes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub premises: Option<Vec<PremiseGroup>>,
}

impl CellSpec {
    pub fn new(dataset: DatasetId, model: Model) -> CellSpec {
        CellSpec {
            dataset,
            model,
            per_class: None,
            seeds: None,
            training_steps: None,
            eval_episodes: None,
            premises: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub surfaces: SurfacesSection,
    pub regression: RegressorConfig,
    pub prover: ProverSection,
    pub marl: MarlSection,
    pub harness: HarnessSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<CellSpec>,
    #[serde(rename = "cell", skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<CellSpec>,
}

impl RunConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| CliError::format(origin, e.message()))
    }

    /// Reads, applies the seed override from the environment and validates.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })?;
        let mut cfg = RunConfig::from_toml(&text, path)?;
        cfg.apply_seed_env()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply_seed_env(&mut self) -> Result<()> {
        if let Some(seed) = seed_from_env()? {
            self.harness.seed = seed;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.marl().validate()?;
        self.regression.validate()?;
        self.surfaces.sizes.validate()?;
        if self.harness.resamples == 0 {
            return Err(CliError::Config("harness.resamples must be positive".into()));
        }
        for c in self.experiment.iter().chain(&self.cells) {
            self.spec(c).validate()?;
        }
        Ok(())
    }

    pub fn marl(&self) -> MarlConfig {
        let (m, p) = (&self.marl, &self.prover);
        MarlConfig {
            episode_len: m.episode_len,
            n_patches: m.n_patches,
            init_fraction: m.init_fraction,
            block_size: m.block_size,
            top_k: m.top_k,
            lambda_step: m.lambda_step,
            prior_step: m.prior_step,
            beta: m.beta,
            beta_cap: m.beta_cap,
            r_term: m.r_term,
            gamma: m.gamma,
            hidden: m.hidden,
            lr_critic: m.lr_critic,
            lr_actor: m.lr_actor,
            adam_beta1: m.adam_beta1,
            buffer_size: m.buffer_size,
            batch_size: m.batch_size,
            tau: m.tau,
            noise_start: m.noise_start,
            noise_end: m.noise_end,
            training_steps: m.training_steps,
            prover_budget: p.budget,
            threshold: p.threshold,
            noisy_sigma: p.noisy_sigma,
            noisy_threshold: p.noisy_threshold,
            check_universal: p.check_universal,
            check_tautology: p.check_tautology,
            check_duplicate: p.check_duplicate,
        }
    }

    /// Resolves a cell against the section defaults.
    pub fn spec(&self, cell: &CellSpec) -> ExperimentSpec {
        ExperimentSpec {
            dataset: cell.dataset,
            model: cell.model,
            per_class: cell.per_class.unwrap_or(self.surfaces.per_class),
            seeds: cell.seeds.clone().unwrap_or_else(|| self.harness.seeds.clone()),
            training_steps: cell.training_steps.unwrap_or(self.marl.training_steps),
            eval_episodes: cell.eval_episodes.unwrap_or(self.harness.eval_episodes),
            premises: cell.premises.clone(),
            sizes: self.surfaces.sizes,
        }
    }

    pub fn cell_specs(&self) -> Vec<ExperimentSpec> {
        self.cells.iter().map(|c| self.spec(c)).collect()
    }
}

pub fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("{SEED_ENV}={v} is not an unsigned integer"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Config(format!("{SEED_ENV}: {e}"))),
    }
}
