use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand_distr::{Distribution, StandardNormal};

use super::premises::PremiseSet;
use super::prove::{ProofOutcome, Skeleton};
use crate::rng;
use crate::statements::{canonicalize, AtomicFormula, CanonicalForm, Statement};
use crate::surfaces::Datapoint;

/// Which non-degeneracy checks run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NondegeneracyChecks {
    pub universal: bool,
    pub tautology: bool,
    pub duplicate: bool,
}

impl Default for NondegeneracyChecks {
    fn default() -> Self {
        NondegeneracyChecks { universal: true, tautology: true, duplicate: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// Some atom holds on every datapoint.
    Universal,
    Tautology,
    /// Same canonical statement as a premise or an earlier terminal statement.
    Duplicate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub pass: bool,
    pub reason: Option<Degeneracy>,
    /// Universally true atoms to add to the premises.
    pub harvest: Vec<AtomicFormula>,
}

/// Statement text with every atom replaced by its canonical form, so equal
/// keys mean the same formula up to rearranging each equality.
pub fn canonical_key(s: &Statement) -> String {
    fn go(s: &Statement, out: &mut String) {
        match s {
            Statement::Eq(a, b) => {
                let _ = write!(out, "[{}]", canonicalize(&AtomicFormula::new(a.clone(), b.clone())));
            }
            Statement::Not(a) => {
                out.push_str("(not ");
                go(a, out);
                out.push(')');
            }
            Statement::And(a, b) | Statement::Implies(a, b) => {
                out.push_str(if matches!(s, Statement::And(..)) { "(and " } else { "(=> " });
                go(a, out);
                out.push(' ');
                go(b, out);
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    go(s, &mut out);
    out
}

/// Default checks with no terminal history; returns `(pass, harvest)`.
pub fn nondegeneracy(s: &Statement, data: &[Datapoint], p: &PremiseSet) -> (bool, Vec<AtomicFormula>) {
    let v = nondegeneracy_with(s, data, p, &[], NondegeneracyChecks::default());
    (v.pass, v.harvest)
}

/// `terminal` holds the canonical keys of earlier terminal statements.
pub fn nondegeneracy_with(
    s: &Statement,
    data: &[Datapoint],
    p: &PremiseSet,
    terminal: &[String],
    checks: NondegeneracyChecks,
) -> Verdict {
    let fail = |reason, harvest| Verdict { pass: false, reason: Some(reason), harvest };
    if checks.universal && !data.is_empty() {
        let mut harvest: Vec<AtomicFormula> = Vec::new();
        for atom in s.atomic_formulae() {
            let nontrivial = !matches!(atom.canonical, CanonicalForm::Tautology | CanonicalForm::Contradiction);
            if nontrivial
                && !harvest.iter().any(|h| h.canonical == atom.canonical)
                && data.iter().all(|d| atom.statement().evaluate(&d.features))
            {
                harvest.push(atom);
            }
        }
        if !harvest.is_empty() {
            return fail(Degeneracy::Universal, harvest);
        }
    }
    if checks.tautology && Skeleton::new(s).is_tautology().unwrap_or(false) {
        return fail(Degeneracy::Tautology, Vec::new());
    }
    if checks.duplicate {
        let as_premise = AtomicFormula::from_statement(s).is_some_and(|a| p.contains(&a.canonical));
        let key = canonical_key(s);
        if as_premise || terminal.contains(&key) {
            return fail(Degeneracy::Duplicate, Vec::new());
        }
    }
    Verdict { pass: true, reason: None, harvest: Vec::new() }
}

/// `rho` plus seeded Gaussian noise of standard deviation `sigma`.
pub fn noisy_rho(outcome: &ProofOutcome, sigma: f64, seed: u64) -> f64 {
    if sigma <= 0.0 {
        return outcome.rho;
    }
    let z: f64 = StandardNormal.sample(&mut rng::stream(seed, "noisy-rho"));
    outcome.rho + sigma * z
}
