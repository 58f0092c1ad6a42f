use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::data::{datapoints, generate_dataset, DatasetId, Sample, SizeModel};
use super::metrics::{annotate, compute_metrics, EpisodeCounts, GalleryEntry, Metric, MetricsRow};
use super::stats::{cluster_bootstrap, pairwise_sigma, BootstrapResult, Pairwise};
use crate::error::{Error, Result};
use crate::marl::{execute, train, EpisodeLog, Environment, MarlConfig, Model, RunMemory, TrainedPolicies};
use crate::prover::{PremiseGroup, PremiseSet};
use crate::regression::RegressorConfig;
use crate::rng;

pub const DEFAULT_PER_CLASS: usize = 100;
pub const DEFAULT_EVAL_EPISODES: usize = 15;
pub const DEFAULT_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
pub const PER_CLASS_RANGE: core::ops::RangeInclusive<usize> = 50..=200;

/// One cell of an ablation: a dataset, a model and the training seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub dataset: DatasetId,
    pub model: Model,
    pub per_class: usize,
    pub seeds: Vec<u64>,
    pub training_steps: usize,
    pub eval_episodes: usize,
    /// Must match the dataset's pairing when given.
    pub premises: Option<Vec<PremiseGroup>>,
    pub sizes: SizeModel,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec::new(DatasetId::D0, Model::M0)
    }
}

impl ExperimentSpec {
    pub fn new(dataset: DatasetId, model: Model) -> ExperimentSpec {
        ExperimentSpec {
            dataset,
            model,
            per_class: DEFAULT_PER_CLASS,
            seeds: DEFAULT_SEEDS.to_vec(),
            training_steps: MarlConfig::default().training_steps,
            eval_episodes: DEFAULT_EVAL_EPISODES,
            premises: None,
            sizes: SizeModel::default(),
        }
    }

    pub fn label(&self) -> String {
        format!("{}/{}", self.dataset, self.model.name())
    }

    pub fn validate(&self) -> Result<()> {
        self.sizes.validate()?;
        if !PER_CLASS_RANGE.contains(&self.per_class) {
            return Err(Error::config(format!(
                "per_class {} is outside {}..={}",
                self.per_class,
                PER_CLASS_RANGE.start(),
                PER_CLASS_RANGE.end()
            )));
        }
        if self.seeds.is_empty() || self.eval_episodes == 0 {
            return Err(Error::config("an experiment needs seeds and evaluation episodes"));
        }
        if let Some(groups) = &self.premises {
            let given: BTreeSet<_> = groups.iter().collect();
            let paired: BTreeSet<_> = self.dataset.premise_groups().iter().collect();
            if given != paired {
                return Err(Error::config(format!(
                    "{} is paired with {:?}, not {:?}",
                    self.dataset,
                    self.dataset.premise_groups(),
                    groups
                )));
            }
        }
        Ok(())
    }
}

pub fn dataset_seed(master: u64, id: DatasetId) -> u64 {
    rng::derive(master, rng::tag(id.name()))
}

pub fn training_seed(master: u64, seed: u64) -> u64 {
    rng::derive(rng::derive(master, rng::tag("train")), seed)
}

pub fn evaluation_seed(master: u64, seed: u64) -> u64 {
    rng::derive(rng::derive(master, rng::tag("eval")), seed)
}

/// Data, premises and wiring of one cell. The data depends only on the
/// dataset, the class size and the master seed, so all models see the same
/// surfaces.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub spec: ExperimentSpec,
    pub samples: Vec<Sample>,
    pub premises: PremiseSet,
}

pub fn build_experiment(spec: &ExperimentSpec, seed: u64) -> Result<Experiment> {
    spec.validate()?;
    let samples = generate_dataset(spec.dataset, spec.per_class, &spec.sizes, dataset_seed(seed, spec.dataset))?;
    Ok(Experiment { spec: spec.clone(), samples, premises: spec.dataset.premises() })
}

impl Experiment {
    pub fn environment(&self, marl: &MarlConfig, regression: &RegressorConfig) -> Result<Environment> {
        let cfg = MarlConfig { training_steps: self.spec.training_steps, ..marl.clone() };
        Environment::new(datapoints(&self.samples), self.premises.clone(), self.spec.model, cfg, regression.clone())
    }
}

/// Training and evaluation of one seed. Evaluation continues in the
/// training environment, so harvested premises and earlier terminal
/// statements carry over.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    pub policies: TrainedPolicies,
    pub training: Vec<EpisodeLog>,
    pub evaluation: Vec<EpisodeLog>,
    /// Memory at the end of training, where evaluation starts from.
    pub memory: RunMemory,
}

pub fn run_seed(
    exp: &Experiment,
    marl: &MarlConfig,
    regression: &RegressorConfig,
    master: u64,
    seed: u64,
) -> Result<SeedRun> {
    let mut env = exp.environment(marl, regression)?;
    let run = train(&mut env, training_seed(master, seed))?;
    let memory = env.memory();
    let evaluation = execute(&run.policies, &mut env, exp.spec.eval_episodes, evaluation_seed(master, seed))?;
    Ok(SeedRun {
        seed,
        policies: run.policies,
        training: run.episodes,
        evaluation,
        memory,
    })
}

/// Pooled evaluation logs of a cell: what the report is computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellLogs {
    pub spec: ExperimentSpec,
    pub evaluation: Vec<EpisodeLog>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub spec: ExperimentSpec,
    pub runs: Vec<SeedRun>,
    pub metrics: MetricsRow,
}

impl CellResult {
    pub fn logs(&self) -> CellLogs {
        CellLogs {
            spec: self.spec.clone(),
            evaluation: self.runs.iter().flat_map(|r| r.evaluation.iter().cloned()).collect(),
        }
    }
}

pub fn run_cell(spec: &ExperimentSpec, marl: &MarlConfig, regression: &RegressorConfig, master: u64) -> Result<CellResult> {
    let exp = build_experiment(spec, master)?;
    let runs = spec
        .seeds
        .iter()
        .map(|&s| run_seed(&exp, marl, regression, master, s))
        .collect::<Result<Vec<_>>>()?;
    let pooled: Vec<EpisodeLog> = runs.iter().flat_map(|r| r.evaluation.iter().cloned()).collect();
    let metrics = compute_metrics(&pooled, &exp.premises)?;
    Ok(CellResult { spec: spec.clone(), runs, metrics })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub dataset: DatasetId,
    pub model: Model,
    pub unique_atomics: usize,
    pub total_statements: u64,
    pub episodes: usize,
    /// One interval per entry of [`Metric::ALL`].
    pub intervals: Vec<(Metric, BootstrapResult)>,
    pub witnesses: u64,
}

impl TableRow {
    pub fn interval(&self, m: Metric) -> BootstrapResult {
        self.intervals.iter().find(|(k, _)| *k == m).expect("every metric").1
    }
}

/// Pairwise ratios and effective σ of row `i` over column `j` for one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseMatrix {
    pub title: String,
    pub metric: Metric,
    pub labels: Vec<String>,
    pub entries: Vec<Vec<Pairwise>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryRow {
    pub cell: String,
    pub entry: GalleryEntry,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub table: Vec<TableRow>,
    /// Models compared on one dataset.
    pub model_matrices: Vec<PairwiseMatrix>,
    /// Datasets compared for one model.
    pub dataset_matrices: Vec<PairwiseMatrix>,
    /// Distinct statements that mention any concept, per cell.
    pub gallery: Vec<GalleryRow>,
}

fn cell_seed(seed: u64, label: &str, metric: Metric) -> u64 {
    rng::derive(rng::derive(seed, rng::tag(label)), rng::tag(metric.name()))
}

fn matrix(
    title: String,
    cells: &[(&CellLogs, MetricsRow)],
    label: impl Fn(&ExperimentSpec) -> String,
    metric: Metric,
    resamples: usize,
    seed: u64,
) -> Result<PairwiseMatrix> {
    let labels: Vec<String> = cells.iter().map(|(c, _)| label(&c.spec)).collect();
    let mut entries = Vec::with_capacity(cells.len());
    for (ca, ma) in cells {
        let mut row = Vec::with_capacity(cells.len());
        for (cb, mb) in cells {
            let s = cell_seed(seed, &format!("{}|{}|{}", title, ca.spec.label(), cb.spec.label()), metric);
            row.push(pairwise_sigma(&ma.episodes, &mb.episodes, |e: &[&EpisodeCounts]| metric.percent(e), resamples, s)?);
        }
        entries.push(row);
    }
    Ok(PairwiseMatrix { title, metric, labels, entries })
}

/// Table rows, pairwise matrices and the gallery from pooled evaluation logs.
/// Concepts are detected relative to each dataset's paired premises.
pub fn assemble_report(cells: &[CellLogs], resamples: usize, seed: u64) -> Result<Report> {
    let mut report = Report::default();
    let mut computed = Vec::with_capacity(cells.len());
    for cell in cells {
        let premises = cell.spec.dataset.premises();
        let m = compute_metrics(&cell.evaluation, &premises)?;
        let label = cell.spec.label();
        let intervals = Metric::ALL
            .iter()
            .map(|&k| {
                let b = cluster_bootstrap(&m.episodes, |e: &[&EpisodeCounts]| k.percent(e), resamples, cell_seed(seed, &label, k))?;
                Ok((k, b))
            })
            .collect::<Result<Vec<_>>>()?;
        report.table.push(TableRow {
            dataset: cell.spec.dataset,
            model: cell.spec.model,
            unique_atomics: m.unique_atomics,
            total_statements: m.total_statements,
            episodes: m.episodes.len(),
            intervals,
            witnesses: m.witnesses(),
        });
        let mut seen = BTreeSet::new();
        for entry in annotate(&cell.evaluation, &premises)? {
            if entry.flags.any() && seen.insert(entry.statement.clone()) {
                report.gallery.push(GalleryRow { cell: label.clone(), entry });
            }
        }
        computed.push((cell, m));
    }
    let datasets: BTreeSet<DatasetId> = cells.iter().map(|c| c.spec.dataset).collect();
    for d in datasets {
        let group: Vec<_> = computed.iter().filter(|(c, _)| c.spec.dataset == d).cloned().collect();
        if group.len() < 2 {
            continue;
        }
        for metric in Metric::HEADLINE {
            let title = format!("models on {d}");
            report.model_matrices.push(matrix(title, &group, |s| s.model.name().to_string(), metric, resamples, seed)?);
        }
    }
    let models: BTreeSet<Model> = cells.iter().map(|c| c.spec.model).collect();
    for model in models {
        let group: Vec<_> = computed.iter().filter(|(c, _)| c.spec.model == model).cloned().collect();
        if group.len() < 2 {
            continue;
        }
        for metric in Metric::HEADLINE {
            let title = format!("datasets for {}", model.name());
            report.dataset_matrices.push(matrix(title, &group, |s| s.dataset.name().to_string(), metric, resamples, seed)?);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub spec: ExperimentSpec,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub cells: Vec<CellResult>,
    pub failures: Vec<CellFailure>,
    pub report: Report,
}

/// Runs every cell; a failing cell is recorded and the rest still run.
pub fn run_ablation_suite(
    specs: &[ExperimentSpec],
    marl: &MarlConfig,
    regression: &RegressorConfig,
    resamples: usize,
    seed: u64,
) -> Result<SuiteOutcome> {
    let mut cells = Vec::new();
    let mut failures = Vec::new();
    for spec in specs {
        match run_cell(spec, marl, regression, seed) {
            Ok(c) => cells.push(c),
            Err(error) => failures.push(CellFailure { spec: spec.clone(), error }),
        }
    }
    let logs: Vec<CellLogs> = cells.iter().map(CellResult::logs).collect();
    let report = assemble_report(&logs, resamples, seed)?;
    Ok(SuiteOutcome { cells, failures, report })
}

/// Proven statements with any concept flag, for inspection when no witness
/// turns up.
pub fn nearest_misses(report: &Report) -> Vec<&GalleryRow> {
    report.gallery.iter().filter(|g| g.entry.proved).collect()
}
