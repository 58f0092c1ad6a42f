//! Two-stage genetic symbolic regression: feature spotters find atomic
//! formulae on weighted patches of the data, then a scaffolder combines them
//! into one Boolean statement.

mod conjecturer;
mod scaffold;
mod spotter;
mod tree;

pub use conjecturer::{run_conjecturer, run_conjecturer_with, Conjecture};
pub use scaffold::{scaffold, scaffold_with, Scaffold};
pub use spotter::{spot_features, spot_features_with};

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Feature, FeatureVector};
use crate::statements::{ArithOp, Statement, Term};
use crate::surfaces::Datapoint;

pub const PRIOR_MAX: f64 = 2.0;
pub const PRIOR_COUNT: usize = 17;

/// Operator classes that carry a prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OpClass {
    Add,
    Sub,
    Mul,
    Eq,
    And,
    Implies,
    Not,
}

impl OpClass {
    pub const ALL: [OpClass; 7] = [
        OpClass::Add,
        OpClass::Sub,
        OpClass::Mul,
        OpClass::Eq,
        OpClass::And,
        OpClass::Implies,
        OpClass::Not,
    ];

    fn of_arith(op: ArithOp) -> OpClass {
        match op {
            ArithOp::Add => OpClass::Add,
            ArithOp::Sub => OpClass::Sub,
            ArithOp::Mul => OpClass::Mul,
        }
    }
}

/// Slot of a prior in the fixed 17-entry vocabulary: seven operators, eight
/// features, the length prior and the nested-negation penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PriorKey {
    Op(OpClass),
    Feature(Feature),
    Length,
    NestedNot,
}

impl PriorKey {
    pub fn index(self) -> usize {
        match self {
            PriorKey::Op(o) => o as usize,
            PriorKey::Feature(f) => 7 + f.index(),
            PriorKey::Length => 15,
            PriorKey::NestedNot => 16,
        }
    }

    pub fn all() -> [PriorKey; PRIOR_COUNT] {
        core::array::from_fn(|i| match i {
            0..=6 => PriorKey::Op(OpClass::ALL[i]),
            7..=14 => PriorKey::Feature(Feature::ALL[i - 7]),
            15 => PriorKey::Length,
            _ => PriorKey::NestedNot,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            PriorKey::Op(o) => match o {
                OpClass::Add => "op_add",
                OpClass::Sub => "op_sub",
                OpClass::Mul => "op_mul",
                OpClass::Eq => "op_eq",
                OpClass::And => "op_and",
                OpClass::Implies => "op_implies",
                OpClass::Not => "op_not",
            },
            PriorKey::Feature(f) => match f {
                Feature::R1 => "feat_r1",
                Feature::R2 => "feat_r2",
                Feature::N1 => "feat_n1",
                Feature::N2 => "feat_n2",
                Feature::H1 => "feat_h1",
                Feature::W1 => "feat_w1",
                Feature::H2 => "feat_h2",
                Feature::W2 => "feat_w2",
            },
            PriorKey::Length => "length",
            PriorKey::NestedNot => "nested_not",
        }
    }
}

/// Prior values `p_k`, each clamped to `[-PRIOR_MAX, PRIOR_MAX]`.
/// Positive values encourage a class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Priors(pub [f64; PRIOR_COUNT]);

impl Default for Priors {
    fn default() -> Self {
        Priors([0.0; PRIOR_COUNT])
    }
}

impl Priors {
    pub fn get(&self, k: PriorKey) -> f64 {
        self.0[k.index()]
    }

    pub fn set(&mut self, k: PriorKey, v: f64) {
        self.0[k.index()] = v.clamp(-PRIOR_MAX, PRIOR_MAX);
    }

    pub fn clamped(mut self) -> Self {
        for p in &mut self.0 {
            *p = p.clamp(-PRIOR_MAX, PRIOR_MAX);
        }
        self
    }

    /// `Σ_k p_k(s)`: one term per operator or feature class present, the
    /// length prior times `tree_size / 10`, and the nested-negation prior per
    /// occurrence.
    pub fn score(&self, s: &Statement) -> f64 {
        let usage = Usage::of(s);
        let mut total = 0.0;
        for (i, &present) in usage.ops.iter().enumerate() {
            if present {
                total += self.0[i];
            }
        }
        for (i, &present) in usage.features.iter().enumerate() {
            if present {
                total += self.0[7 + i];
            }
        }
        total + self.get(PriorKey::Length) * s.tree_size() as f64 / 10.0
            + self.get(PriorKey::NestedNot) * s.nested_not_count() as f64
    }
}

#[derive(Default)]
struct Usage {
    ops: [bool; 7],
    features: [bool; 8],
}

impl Usage {
    fn of(s: &Statement) -> Usage {
        let mut u = Usage::default();
        u.statement(s);
        u
    }

    fn statement(&mut self, s: &Statement) {
        match s {
            Statement::Eq(a, b) => {
                self.ops[OpClass::Eq as usize] = true;
                self.term(a);
                self.term(b);
            }
            Statement::And(a, b) => {
                self.ops[OpClass::And as usize] = true;
                self.statement(a);
                self.statement(b);
            }
            Statement::Implies(a, b) => {
                self.ops[OpClass::Implies as usize] = true;
                self.statement(a);
                self.statement(b);
            }
            Statement::Not(a) => {
                self.ops[OpClass::Not as usize] = true;
                self.statement(a);
            }
        }
    }

    fn term(&mut self, t: &Term) {
        match t {
            Term::Var(f) => self.features[f.index()] = true,
            Term::Const(_) => {}
            Term::Bin(op, a, b) => {
                self.ops[OpClass::of_arith(*op) as usize] = true;
                self.term(a);
                self.term(b);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegressorConfig {
    /// Accuracy sharpness in `exp(alpha·(1 - W))`.
    pub alpha: f64,
    pub priors: Priors,
    pub population_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    /// Size cap for a whole statement.
    pub max_size: usize,
    pub max_depth: usize,
    /// Size cap for a spotted atom.
    pub atom_max_size: usize,
    /// Generated constants lie in `[-const_range, const_range]`.
    pub const_range: i64,
    pub scaffold_population: usize,
    pub scaffold_generations: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub p_constant: f64,
    pub seed: u64,
}

impl Default for RegressorConfig {
    fn default() -> Self {
        RegressorConfig {
            alpha: 4.0,
            priors: Priors::default(),
            population_size: 256,
            generations: 20,
            tournament_size: 4,
            max_size: 31,
            max_depth: 8,
            atom_max_size: 11,
            const_range: 4,
            scaffold_population: 64,
            scaffold_generations: 10,
            p_crossover: 0.6,
            p_mutation: 0.35,
            p_constant: 0.05,
            seed: 0,
        }
    }
}

impl RegressorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::param("alpha must be positive"));
        }
        if self.population_size == 0 || self.tournament_size == 0 || self.scaffold_population == 0 {
            return Err(Error::param("population and tournament sizes must be positive"));
        }
        if self.max_size < 3 || self.atom_max_size < 3 || self.max_depth < 2 {
            return Err(Error::param("size caps must admit at least one atom"));
        }
        if self.priors.0.iter().any(|p| !p.is_finite() || p.abs() > PRIOR_MAX) {
            return Err(Error::param("priors must lie in [-2, 2]"));
        }
        if self.const_range < 0 {
            return Err(Error::param("const_range must be nonnegative"));
        }
        Ok(())
    }
}

/// Attention weights `λ_i` of one patch, one per datapoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Patch(pub Vec<f64>);

impl Patch {
    pub fn uniform(n: usize) -> Patch {
        Patch(vec![1.0; n])
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Pointwise maximum, the rule for datapoints seen by several patches.
    pub fn union(patches: &[Patch]) -> Patch {
        let n = patches.first().map_or(0, |p| p.0.len());
        Patch(
            (0..n)
                .map(|i| patches.iter().map(|p| p.0[i]).fold(0.0, f64::max))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub best: Statement,
    pub loss: f64,
    pub weighted_accuracy: f64,
    pub evaluations: u64,
}

/// `W = Σ λ_i s(d_i) / Σ λ_i`.
pub fn weighted_accuracy(s: &Statement, data: &[Datapoint], patch: &Patch) -> Result<f64> {
    check_patch(data.len(), patch)?;
    let total = patch.total();
    let hit: f64 = data
        .iter()
        .zip(&patch.0)
        .filter(|(d, _)| s.evaluate(&d.features))
        .map(|(_, w)| w)
        .sum();
    Ok(hit / total)
}

pub(crate) fn check_patch(n: usize, patch: &Patch) -> Result<()> {
    if patch.0.len() != n {
        return Err(Error::param(alloc::format!(
            "patch has {} weights for {n} datapoints",
            patch.0.len()
        )));
    }
    if patch.0.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(Error::param("patch weights must lie in [0, 1]"));
    }
    if patch.total() <= 0.0 {
        return Err(Error::ZeroWeight);
    }
    Ok(())
}

/// `exp(exp(alpha·(1 - W)) - Σp)`.
pub fn loss_value(w: f64, prior_sum: f64, alpha: f64) -> f64 {
    libm::exp(libm::exp(alpha * (1.0 - w)) - prior_sum)
}

pub fn loss(s: &Statement, data: &[Datapoint], patch: &Patch, cfg: &RegressorConfig) -> Result<f64> {
    let w = weighted_accuracy(s, data, patch)?;
    Ok(loss_value(w, cfg.priors.score(s), cfg.alpha))
}

/// Distinct feature vectors with the patch weights summed over duplicates;
/// evaluation cost then scales with the number of distinct vectors.
#[derive(Debug, Clone)]
pub(crate) struct Compressed {
    pub points: Vec<FeatureVector>,
    pub weights: Vec<f64>,
    pub total: f64,
}

impl Compressed {
    pub fn new(data: &[Datapoint], patch: &Patch) -> Result<Compressed> {
        check_patch(data.len(), patch)?;
        let mut map: BTreeMap<FeatureVector, usize> = BTreeMap::new();
        let mut points = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (d, &w) in data.iter().zip(&patch.0) {
            if w == 0.0 {
                continue;
            }
            let idx = *map.entry(d.features).or_insert_with(|| {
                points.push(d.features);
                weights.push(0.0);
                points.len() - 1
            });
            weights[idx] += w;
        }
        Ok(Compressed { points, weights, total: patch.total() })
    }

    pub fn accuracy(&self, s: &Statement) -> f64 {
        let hit: f64 = self
            .points
            .iter()
            .zip(&self.weights)
            .filter(|(x, _)| s.evaluate(x))
            .map(|(_, w)| w)
            .sum();
        hit / self.total
    }
}

/// Ordering key shared by both stages: loss, then size, then printed text.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Fitness {
    pub loss: f64,
    pub size: usize,
    pub text: alloc::string::String,
    pub accuracy: f64,
}

impl Fitness {
    pub fn better_than(&self, other: &Fitness) -> bool {
        self.cmp_key(other) == core::cmp::Ordering::Less
    }

    pub fn cmp_key(&self, other: &Fitness) -> core::cmp::Ordering {
        self.loss
            .total_cmp(&other.loss)
            .then(self.size.cmp(&other.size))
            .then_with(|| self.text.cmp(&other.text))
    }
}
