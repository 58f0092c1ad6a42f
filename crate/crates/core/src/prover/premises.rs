use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Coord, FeatureVector};
use crate::linalg::{q, solve_combination, Q};
use crate::statements::{parse, AtomicFormula, CanonicalForm, Statement};
use crate::surfaces::Datapoint;

/// Named groups of base premises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PremiseGroup {
    /// Rank-nullity for both boundary maps.
    P0,
    /// `b0 = 1`.
    P1,
    /// `b2 = 1`.
    P2,
}

impl PremiseGroup {
    pub fn texts(self) -> &'static [&'static str] {
        match self {
            PremiseGroup::P0 => &["(= (+ r1 n1) w1)", "(= (+ r2 n2) w2)"],
            PremiseGroup::P1 => &["(= (- h1 r1) 1)"],
            PremiseGroup::P2 => &["(= n2 1)"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PremiseGroup::P0 => "P0",
            PremiseGroup::P1 => "P1",
            PremiseGroup::P2 => "P2",
        }
    }

    pub fn from_name(s: &str) -> Option<PremiseGroup> {
        [PremiseGroup::P0, PremiseGroup::P1, PremiseGroup::P2]
            .into_iter()
            .find(|g| g.name().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Premise {
    pub atom: AtomicFormula,
    /// Added at run time by the non-degeneracy check.
    pub harvested: bool,
}

/// Equalities assumed by the prover and by concept detection. Duplicate-free
/// up to canonical form.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PremiseSet {
    premises: Vec<Premise>,
}

impl PremiseSet {
    pub fn empty() -> PremiseSet {
        PremiseSet::default()
    }

    pub fn from_groups(groups: &[PremiseGroup]) -> PremiseSet {
        let mut set = PremiseSet::empty();
        for g in groups {
            for text in g.texts() {
                let s = parse(text).expect("built-in premise parses");
                set.insert(AtomicFormula::from_statement(&s).expect("premise is an atom"), false);
            }
        }
        set
    }

    pub fn p0() -> PremiseSet {
        PremiseSet::from_groups(&[PremiseGroup::P0])
    }

    /// Adds an equality; false when it is trivial or already present.
    pub fn insert(&mut self, atom: AtomicFormula, harvested: bool) -> bool {
        if atom.canonical == CanonicalForm::Tautology || self.contains(&atom.canonical) {
            return false;
        }
        self.premises.push(Premise { atom, harvested });
        true
    }

    /// Adds run-time truths, skipping linear ones already implied by the
    /// linear premises.
    pub fn harvest(&mut self, atoms: impl IntoIterator<Item = AtomicFormula>) -> usize {
        atoms
            .into_iter()
            .filter(|a| !self.implies_linear(&a.canonical) && self.insert(a.clone(), true))
            .count()
    }

    /// `form` is linear and a rational combination of the linear premises.
    pub fn implies_linear(&self, form: &CanonicalForm) -> bool {
        if !form.is_linear() {
            return false;
        }
        let augment = |f: [i128; Coord::COUNT], c: i128| -> Vec<Q> {
            f.iter().chain(core::iter::once(&c)).map(|&v| q(v)).collect()
        };
        let cols: Vec<Vec<Q>> = self.linear_equalities().into_iter().map(|(f, c)| augment(f, c)).collect();
        !cols.is_empty() && solve_combination(&cols, &augment(form.linear(), form.constant())).is_some()
    }

    pub fn contains(&self, form: &CanonicalForm) -> bool {
        self.premises.iter().any(|p| &p.atom.canonical == form)
    }

    pub fn premises(&self) -> &[Premise] {
        &self.premises
    }

    pub fn len(&self) -> usize {
        self.premises.len()
    }

    pub fn is_empty(&self) -> bool {
        self.premises.is_empty()
    }

    /// Only the premises present before any harvesting.
    pub fn base(&self) -> PremiseSet {
        PremiseSet { premises: self.premises.iter().filter(|p| !p.harvested).cloned().collect() }
    }

    pub fn harvested(&self) -> impl Iterator<Item = &AtomicFormula> {
        self.premises.iter().filter(|p| p.harvested).map(|p| &p.atom)
    }

    pub fn statements(&self) -> Vec<Statement> {
        self.premises.iter().map(|p| p.atom.statement()).collect()
    }

    /// Linear parts of the linear premises.
    pub fn linear_functionals(&self) -> Vec<[i128; Coord::COUNT]> {
        self.linear_equalities().into_iter().map(|(f, _)| f).collect()
    }

    /// Linear premises as `(f, c)` meaning `f · x + c = 0`.
    pub fn linear_equalities(&self) -> Vec<([i128; Coord::COUNT], i128)> {
        self.premises
            .iter()
            .filter(|p| p.atom.canonical.is_linear())
            .map(|p| (p.atom.canonical.linear(), p.atom.canonical.constant()))
            .collect()
    }

    pub fn holds_on(&self, x: &FeatureVector) -> bool {
        self.premises.iter().all(|p| p.atom.statement().evaluate(x))
    }

    /// The linear premises admit a rational solution and no premise is a
    /// contradiction.
    pub fn is_linearly_consistent(&self) -> bool {
        if self.premises.iter().any(|p| p.atom.canonical == CanonicalForm::Contradiction) {
            return false;
        }
        let eqs = self.linear_equalities();
        // f · x = -c solvable iff (-c) lies in the row space image; test via the
        // augmented column [f | -c] not raising the rank.
        let cols: Vec<Vec<Q>> = (0..Coord::COUNT)
            .map(|j| eqs.iter().map(|(f, _)| q(f[j])).collect())
            .collect();
        let target: Vec<Q> = eqs.iter().map(|(_, c)| q(-c)).collect();
        eqs.is_empty() || solve_combination(&cols, &target).is_some()
    }

    /// Consistent and satisfied by at least one datapoint when data is given.
    pub fn check_consistent(&self, data: &[Datapoint]) -> Result<()> {
        if !self.is_linearly_consistent() {
            return Err(Error::config("premise set is inconsistent"));
        }
        if !data.is_empty() && !data.iter().any(|d| self.holds_on(&d.features)) {
            return Err(Error::config(format!(
                "no datapoint satisfies the {} premises",
                self.premises.len()
            )));
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self.premises.iter().map(|p| format!("{}", p.atom.canonical)).collect();
        parts.join("; ")
    }
}
