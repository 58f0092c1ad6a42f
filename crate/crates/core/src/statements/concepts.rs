use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use super::Statement;
use crate::features::Coord;
use crate::linalg::{abs_is_one, q, solve_combination, Q};
use crate::prover::PremiseSet;

/// Reference concepts whose appearance is tracked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Concept {
    Chi,
    B0,
    B1,
    B2,
}

impl Concept {
    pub const ALL: [Concept; 4] = [Concept::Chi, Concept::B0, Concept::B1, Concept::B2];

    /// Functional over `(r1, r2, n1, n2, V, E, F)`.
    pub fn functional(self) -> [i128; Coord::COUNT] {
        match self {
            Concept::Chi => [0, 0, 0, 0, 1, -1, 1],
            Concept::B0 => [-1, 0, 0, 0, 1, 0, 0],
            Concept::B1 => [0, -1, 1, 0, 0, 0, 0],
            Concept::B2 => [0, 0, 0, 1, 0, 0, 0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Concept::Chi => "chi",
            Concept::B0 => "b0",
            Concept::B1 => "b1",
            Concept::B2 => "b2",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConceptFlags {
    pub has_chi: bool,
    pub has_b0: bool,
    pub has_b1: bool,
    pub has_b2: bool,
}

impl ConceptFlags {
    pub fn get(&self, c: Concept) -> bool {
        match c {
            Concept::Chi => self.has_chi,
            Concept::B0 => self.has_b0,
            Concept::B1 => self.has_b1,
            Concept::B2 => self.has_b2,
        }
    }

    fn set(&mut self, c: Concept) {
        match c {
            Concept::Chi => self.has_chi = true,
            Concept::B0 => self.has_b0 = true,
            Concept::B1 => self.has_b1 = true,
            Concept::B2 => self.has_b2 = true,
        }
    }

    pub fn any(&self) -> bool {
        self.has_chi || self.has_b0 || self.has_b1 || self.has_b2
    }

    pub fn union(self, o: ConceptFlags) -> ConceptFlags {
        ConceptFlags {
            has_chi: self.has_chi || o.has_chi,
            has_b0: self.has_b0 || o.has_b0,
            has_b1: self.has_b1 || o.has_b1,
            has_b2: self.has_b2 || o.has_b2,
        }
    }
}

/// How the coefficient of a concept in a decomposition is constrained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConceptMode {
    /// Any nonzero multiple.
    #[default]
    AnyMultiple,
    /// Coefficient exactly ±1.
    Unit,
}

/// Flags under the default mode.
pub fn detect_concepts(s: &Statement, premises: &PremiseSet) -> ConceptFlags {
    detect_concepts_with(s, premises, ConceptMode::AnyMultiple)
}

/// An atom with linear part `f` mentions a set `T` of concepts when
/// `f ∈ span(premises ∪ T)` and `T` is a smallest such set; atoms already in
/// the premise span mention nothing. Flags are the union of every smallest `T`
/// over every atom.
pub fn detect_concepts_with(s: &Statement, premises: &PremiseSet, mode: ConceptMode) -> ConceptFlags {
    let span: Vec<Vec<Q>> = premises
        .linear_functionals()
        .into_iter()
        .map(|f| f.iter().map(|&x| q(x)).collect())
        .collect();
    let mut flags = ConceptFlags::default();
    for atom in s.atomic_formulae() {
        let f = atom.raw_linear();
        if f.iter().all(|&x| x == 0) {
            continue;
        }
        flags = flags.union(functional_flags(&f, &span, mode));
    }
    flags
}

pub(crate) fn functional_flags(f: &[i128; Coord::COUNT], span: &[Vec<Q>], mode: ConceptMode) -> ConceptFlags {
    let target: Vec<Q> = f.iter().map(|&x| q(x)).collect();
    let mut flags = ConceptFlags::default();
    if solve_combination(span, &target).is_some() {
        return flags;
    }
    for k in 1..=Concept::ALL.len() {
        let mut found = false;
        for mask in 1u32..(1 << Concept::ALL.len()) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let chosen: Vec<Concept> = Concept::ALL
                .into_iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, c)| c)
                .collect();
            let mut cols = span.to_vec();
            cols.extend(chosen.iter().map(|c| c.functional().iter().map(|&x| q(x)).collect()));
            let Some(x) = solve_combination(&cols, &target) else {
                continue;
            };
            if mode == ConceptMode::Unit && !x[span.len()..].iter().all(abs_is_one) {
                continue;
            }
            found = true;
            for c in chosen {
                flags.set(c);
            }
        }
        if found {
            break;
        }
    }
    flags
}
