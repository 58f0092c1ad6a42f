use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use forge_core::harness::{
    assemble_report, build_experiment, compute_metrics, dataset_seed, evaluation_seed, generate_dataset, run_cell,
    training_seed, CellLogs, DatasetId, ExperimentSpec, Metric, DEFAULT_EVAL_EPISODES, DEFAULT_PER_CLASS,
};
use forge_core::marl::{execute, train, EpisodeLog};
use serde::{Deserialize, Serialize};

use crate::config::{seed_from_env, RunConfig};
use crate::error::{CliError, Result};
use crate::formats::{read_json, read_jsonl, read_text, write_dataset, write_json, write_jsonl, write_text, Checkpoint};
use crate::report::write_report;

#[derive(Debug, Parser)]
#[command(name = "forge", version, about = "Conjecture generation over triangulated-surface invariants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the run config with every key at its default.
    DefaultConfig,
    /// Generate a dataset as JSON lines.
    GenData {
        #[arg(long)]
        dataset: DatasetId,
        #[arg(long, default_value_t = DEFAULT_PER_CLASS)]
        per_class: usize,
        /// Master seed; falls back to FORGE_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Run config supplying `[surfaces.sizes]`.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train every seed of the `[experiment]` in a run config.
    Train {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value = "run")]
        out: PathBuf,
    },
    /// Evaluate a checkpoint without exploration noise.
    Eval {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EVAL_EPISODES)]
        episodes: usize,
        /// Episode log; defaults to `<ckpt stem>.eval.jsonl` beside the checkpoint.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every `[[cell]]` of a suite and write logs, checkpoints and the report.
    Ablate {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild the report of an ablation directory from its logs.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

/// Index of an ablation output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteManifest {
    pub cells: Vec<ManifestCell>,
    pub failures: Vec<ManifestFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestCell {
    pub spec: ExperimentSpec,
    /// Pooled evaluation episodes, relative to the directory.
    pub logs: String,
    pub checkpoints: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestFailure {
    pub spec: ExperimentSpec,
    pub error: String,
}

pub const MANIFEST: &str = "cells.json";
pub const SUITE_CONFIG: &str = "config.toml";
pub const REPORT_DIR: &str = "report";

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::DefaultConfig => {
            print!("{}", RunConfig::default().to_toml());
            Ok(())
        }
        Command::GenData { dataset, per_class, seed, out, config } => gen_data(dataset, per_class, seed, &out, config.as_deref()),
        Command::Train { spec, out } => train_cmd(&spec, &out),
        Command::Eval { ckpt, episodes, out } => eval_cmd(&ckpt, episodes, out),
        Command::Ablate { suite, out } => ablate(&suite, &out),
        Command::Report { input } => report_cmd(&input).map(|_| ()),
    }
}

fn gen_data(id: DatasetId, per_class: usize, seed: Option<u64>, out: &Path, config: Option<&Path>) -> Result<()> {
    let sizes = match config {
        Some(p) => RunConfig::load(p)?.surfaces.sizes,
        None => Default::default(),
    };
    let master = match seed {
        Some(s) => s,
        None => seed_from_env()?.unwrap_or(0),
    };
    let samples = generate_dataset(id, per_class, &sizes, dataset_seed(master, id))?;
    write_dataset(out, &samples)?;
    println!("{} surfaces -> {}", samples.len(), out.display());
    Ok(())
}

fn train_cmd(spec_path: &Path, out: &Path) -> Result<()> {
    let cfg = RunConfig::load(spec_path)?;
    let cell = cfg
        .experiment
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("{} has no [experiment] table", spec_path.display())))?;
    let spec = cfg.spec(cell);
    let master = cfg.harness.seed;
    let exp = build_experiment(&spec, master)?;
    let (marl, reg) = (cfg.marl(), cfg.regression.clone());
    for &seed in &spec.seeds {
        eprintln!("training {} seed {seed}", spec.label());
        let mut env = exp.environment(&marl, &reg)?;
        let run = train(&mut env, training_seed(master, seed))?;
        let ckpt = out.join(format!("checkpoint-seed{seed}.json"));
        Checkpoint::new(spec.clone(), cfg.clone(), seed, env.memory(), run.policies).save(&ckpt)?;
        write_jsonl(&out.join(format!("training-seed{seed}.jsonl")), &run.episodes)?;
        println!("{}", ckpt.display());
    }
    Ok(())
}

fn eval_cmd(ckpt_path: &Path, episodes: usize, out: Option<PathBuf>) -> Result<()> {
    if episodes == 0 {
        return Err(CliError::Config("--episodes must be positive".into()));
    }
    let ck = Checkpoint::load(ckpt_path)?;
    let exp = build_experiment(&ck.spec, ck.master_seed)?;
    let mut env = exp.environment(&ck.config.marl(), &ck.config.regression)?;
    env.restore(&ck.memory)?;
    let logs = execute(&ck.policies, &mut env, episodes, evaluation_seed(ck.master_seed, ck.seed))?;
    let out = out.unwrap_or_else(|| ckpt_path.with_extension("eval.jsonl"));
    write_jsonl(&out, &logs)?;
    let m = compute_metrics(&logs, &exp.premises)?;
    let summary: Vec<String> = Metric::ALL.iter().map(|&k| format!("{}={:.2}", k.name(), m.get(k))).collect();
    println!("{} statements, {} unique atomics, {}", m.total_statements, m.unique_atomics, summary.join(" "));
    println!("{}", out.display());
    Ok(())
}

fn cell_stem(i: usize, spec: &ExperimentSpec) -> String {
    let model: String = spec.model.name().chars().filter(|c| c.is_ascii_alphanumeric()).collect();
    format!("cell{i:02}-{}-{model}", spec.dataset)
}

fn ablate(suite: &Path, dir: &Path) -> Result<()> {
    let cfg = RunConfig::load(suite)?;
    let master = cfg.harness.seed;
    let (marl, reg) = (cfg.marl(), cfg.regression.clone());
    write_text(&dir.join(SUITE_CONFIG), &cfg.to_toml())?;
    let mut manifest = SuiteManifest { cells: Vec::new(), failures: Vec::new() };
    let mut logs = Vec::new();
    for (i, spec) in cfg.cell_specs().into_iter().enumerate() {
        eprintln!("cell {}", spec.label());
        let cell = match run_cell(&spec, &marl, &reg, master) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("cell {} failed: {e}", spec.label());
                manifest.failures.push(ManifestFailure { spec, error: e.to_string() });
                continue;
            }
        };
        let stem = cell_stem(i, &spec);
        let log_name = format!("logs/{stem}.jsonl");
        let cell_logs = cell.logs();
        write_jsonl(&dir.join(&log_name), &cell_logs.evaluation)?;
        let mut checkpoints = Vec::new();
        for r in &cell.runs {
            let name = format!("checkpoints/{stem}-seed{}.json", r.seed);
            Checkpoint::new(spec.clone(), cfg.clone(), r.seed, r.memory.clone(), r.policies.clone()).save(&dir.join(&name))?;
            checkpoints.push(name);
        }
        manifest.cells.push(ManifestCell { spec, logs: log_name, checkpoints });
        logs.push(cell_logs);
    }
    write_json(&dir.join(MANIFEST), &manifest)?;
    let report = assemble_report(&logs, cfg.harness.resamples, master)?;
    let written = write_report(&report, &dir.join(REPORT_DIR))?;
    println!("{} cells, {} failed, {} report files under {}", manifest.cells.len(), manifest.failures.len(), written.len(), dir.join(REPORT_DIR).display());
    match manifest.failures.first() {
        Some(f) => Err(CliError::Core(forge_core::Error::Contract(format!(
            "{} of {} cells failed, first {}: {}",
            manifest.failures.len(),
            manifest.failures.len() + manifest.cells.len(),
            f.spec.label(),
            f.error
        )))),
        None => Ok(()),
    }
}

/// Recomputes the report of an ablation directory from its config and logs.
pub fn report_cmd(dir: &Path) -> Result<Vec<PathBuf>> {
    let cfg_path = dir.join(SUITE_CONFIG);
    let cfg = RunConfig::from_toml(&read_text(&cfg_path)?, &cfg_path)?;
    let manifest: SuiteManifest = read_json(&dir.join(MANIFEST))?;
    let cells = manifest
        .cells
        .iter()
        .map(|c| Ok(CellLogs { spec: c.spec.clone(), evaluation: read_jsonl::<EpisodeLog>(&dir.join(&c.logs))? }))
        .collect::<Result<Vec<_>>>()?;
    let report = assemble_report(&cells, cfg.harness.resamples, cfg.harness.seed)?;
    let written = write_report(&report, &dir.join(REPORT_DIR))?;
    println!("{} report files under {}", written.len(), dir.join(REPORT_DIR).display());
    Ok(written)
}
