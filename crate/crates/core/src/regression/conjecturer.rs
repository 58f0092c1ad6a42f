use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::{scaffold_with, spot_features_with, Patch, RegressionResult, RegressorConfig};
use crate::error::{Error, Result};
use crate::statements::{AtomicFormula, CanonicalForm, Statement};
use crate::surfaces::Datapoint;

/// Output of one full conjecturing round.
#[derive(Debug, Clone, PartialEq)]
pub struct Conjecture {
    pub statement: Statement,
    /// Loss and accuracy on the union patch.
    pub result: RegressionResult,
    pub atoms: Vec<AtomicFormula>,
    pub atom_results: Vec<RegressionResult>,
}

/// Spotters on each patch, then the scaffolder on their union.
pub fn run_conjecturer(
    data: &[Datapoint],
    patches: &[Patch],
    cfg: &RegressorConfig,
) -> Result<(Statement, RegressionResult)> {
    let c = run_conjecturer_with(data, patches, cfg, &BTreeSet::new())?;
    Ok((c.statement, c.result))
}

pub fn run_conjecturer_with(
    data: &[Datapoint],
    patches: &[Patch],
    cfg: &RegressorConfig,
    excluded: &BTreeSet<CanonicalForm>,
) -> Result<Conjecture> {
    if patches.is_empty() {
        return Err(Error::param("at least one patch is required"));
    }
    let spotted = spot_features_with(data, patches, cfg, excluded)?;
    let (atoms, atom_results): (Vec<_>, Vec<_>) = spotted.into_iter().unzip();
    let union = Patch::union(patches);
    let (statement, result) = scaffold_with(&atoms, data, &union, cfg)?;
    Ok(Conjecture { statement, result, atoms, atom_results })
}
