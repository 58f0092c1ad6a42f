//! On-disk formats: dataset and log JSONL, checkpoints.
//!
//! Every JSON object is written with fields in declaration order, one record
//! per line, so equal inputs give byte-identical files.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use forge_core::harness::{ExperimentSpec, Sample};
use forge_core::marl::{RunMemory, TrainedPolicies, CHECKPOINT_VERSION};
use forge_core::surfaces::{boundary_matrices, exact_rank, Datapoint, Labels, SparseMatrix, SurfaceKind};
use forge_core::{Feature, FeatureVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.into(), source })
        }
        _ => Ok(()),
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    create_parent(path)?;
    fs::write(path, text).map_err(|source| CliError::Write { path: path.into(), source })
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::format(path, e))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::format(path, e))
}

pub fn write_jsonl<'a, T: Serialize + 'a>(path: &Path, records: impl IntoIterator<Item = &'a T>) -> Result<()> {
    create_parent(path)?;
    let io = |source| CliError::Write { path: path.into(), source };
    let mut w = BufWriter::new(fs::File::create(path).map_err(io)?);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| CliError::format(path, e))?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let f = fs::File::open(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|source| CliError::Read { path: path.into(), source })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| CliError::format(path, format!("line {}: {e}", i + 1)))?;
        out.push(record);
    }
    Ok(out)
}

/// A sparse integer matrix as `(row, col, value)` triplets, column-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub rows: usize,
    pub cols: usize,
    pub triplets: Vec<(usize, usize, i64)>,
}

impl MatrixRecord {
    pub fn of(m: &SparseMatrix) -> MatrixRecord {
        MatrixRecord { rows: m.rows(), cols: m.cols(), triplets: m.triplets() }
    }

    pub fn matrix(&self) -> SparseMatrix {
        SparseMatrix::from_triplets(self.rows, self.cols, &self.triplets)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub r1: i64,
    pub r2: i64,
    pub n1: i64,
    pub n2: i64,
    pub h1: i64,
    pub w1: i64,
    pub h2: i64,
    pub w2: i64,
}

impl FeatureRecord {
    pub fn of(f: &FeatureVector) -> FeatureRecord {
        let g = |x| f.get(x);
        FeatureRecord {
            r1: g(Feature::R1),
            r2: g(Feature::R2),
            n1: g(Feature::N1),
            n2: g(Feature::N2),
            h1: g(Feature::H1),
            w1: g(Feature::W1),
            h2: g(Feature::H2),
            w2: g(Feature::W2),
        }
    }
}

/// One line of a dataset file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub index: usize,
    pub kind: SurfaceKind,
    pub seed: u64,
    pub size: usize,
    pub v: i64,
    pub e: i64,
    pub f: i64,
    /// `∂1`, vertices × edges.
    pub d1: MatrixRecord,
    /// `∂2`, edges × faces.
    pub d2: MatrixRecord,
    pub features: FeatureRecord,
    pub labels: Labels,
}

impl DatasetRecord {
    pub fn of(index: usize, s: &Sample) -> DatasetRecord {
        let m = boundary_matrices(&s.surface);
        DatasetRecord {
            index,
            kind: s.kind,
            seed: s.seed,
            size: s.size,
            v: s.datapoint.v(),
            e: s.datapoint.e(),
            f: s.datapoint.f(),
            d1: MatrixRecord::of(&m.d1),
            d2: MatrixRecord::of(&m.d2),
            features: FeatureRecord::of(&s.datapoint.features),
            labels: s.datapoint.labels,
        }
    }

    /// Checks shapes, `∂1∂2 = 0` and the stored statistics against the
    /// matrices, then returns the datapoint.
    pub fn datapoint(&self) -> std::result::Result<Datapoint, String> {
        let (d1, d2) = (self.d1.matrix(), self.d2.matrix());
        if (d1.rows(), d1.cols(), d2.rows(), d2.cols()) != (self.v as usize, self.e as usize, self.e as usize, self.f as usize) {
            return Err(format!("record {}: matrix shapes disagree with V/E/F", self.index));
        }
        if !d1.mul(&d2).is_zero() {
            return Err(format!("record {}: d1·d2 is not zero", self.index));
        }
        let ranks = |m: &SparseMatrix| exact_rank(m) as i64;
        let features = FeatureVector::from_dims(self.v, self.e, self.f, ranks(&d1), ranks(&d2));
        if FeatureRecord::of(&features) != self.features {
            return Err(format!("record {}: features disagree with the matrices", self.index));
        }
        let labels = Labels { b0: features.b0(), b1: features.b1(), b2: features.b2(), chi: features.chi(), kind: self.kind };
        if labels != self.labels {
            return Err(format!("record {}: labels disagree with the matrices", self.index));
        }
        Ok(Datapoint { features, labels })
    }
}

pub fn write_dataset(path: &Path, samples: &[Sample]) -> Result<()> {
    let records: Vec<DatasetRecord> = samples.iter().enumerate().map(|(i, s)| DatasetRecord::of(i, s)).collect();
    write_jsonl(path, &records)
}

pub fn read_dataset(path: &Path) -> Result<Vec<Datapoint>> {
    read_jsonl::<DatasetRecord>(path)?
        .iter()
        .map(|r| r.datapoint().map_err(|m| CliError::format(path, m)))
        .collect()
}

pub const CHECKPOINT_FORMAT: &str = "forge-checkpoint";

/// Trained policies with everything needed to rebuild their environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub spec: ExperimentSpec,
    pub config: RunConfig,
    pub master_seed: u64,
    /// Training seed within the cell.
    pub seed: u64,
    /// Harvested premises and terminal keys at the end of training.
    pub memory: RunMemory,
    pub policies: TrainedPolicies,
}

impl Checkpoint {
    pub fn new(spec: ExperimentSpec, config: RunConfig, seed: u64, memory: RunMemory, policies: TrainedPolicies) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            master_seed: config.harness.seed,
            spec,
            config,
            seed,
            memory,
            policies,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Checkpoint> {
        let c: Checkpoint = read_json(path)?;
        if c.format != CHECKPOINT_FORMAT || c.version != CHECKPOINT_VERSION {
            return Err(CliError::format(
                path,
                format!("expected {CHECKPOINT_FORMAT} version {CHECKPOINT_VERSION}, found {} version {}", c.format, c.version),
            ));
        }
        Ok(c)
    }
}
