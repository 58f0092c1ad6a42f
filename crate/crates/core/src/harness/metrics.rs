use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marl::EpisodeLog;
use crate::prover::PremiseSet;
use crate::statements::{detect_concepts, parse, ConceptFlags};

/// Statement counts of one evaluation episode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeCounts {
    pub statements: u64,
    pub chi: u64,
    pub b0: u64,
    pub b1: u64,
    pub b2: u64,
    pub proven: u64,
    /// Proven statements that mention χ or b1.
    pub proven_with_concept: u64,
    /// Proven, non-degenerate statements mentioning χ and a Betti number.
    pub witnesses: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Metric {
    Chi,
    B0,
    B1,
    B2,
    ProvenWithConcept,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Chi, Metric::B0, Metric::B1, Metric::B2, Metric::ProvenWithConcept];
    /// The columns compared pairwise.
    pub const HEADLINE: [Metric; 3] = [Metric::Chi, Metric::B1, Metric::ProvenWithConcept];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Chi => "chi_pct",
            Metric::B0 => "b0_pct",
            Metric::B1 => "b1_pct",
            Metric::B2 => "b2_pct",
            Metric::ProvenWithConcept => "proven_with_concept_pct",
        }
    }

    fn parts(self, c: &EpisodeCounts) -> (u64, u64) {
        match self {
            Metric::Chi => (c.chi, c.statements),
            Metric::B0 => (c.b0, c.statements),
            Metric::B1 => (c.b1, c.statements),
            Metric::B2 => (c.b2, c.statements),
            Metric::ProvenWithConcept => (c.proven_with_concept, c.proven),
        }
    }

    /// Pooled percentage over episodes (ratio of sums); 0 on an empty denominator.
    pub fn percent(self, episodes: &[&EpisodeCounts]) -> f64 {
        let (num, den) = episodes.iter().fold((0, 0), |(n, d), c| {
            let (a, b) = self.parts(c);
            (n + a, d + b)
        });
        if den == 0 {
            0.0
        } else {
            100.0 * num as f64 / den as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub unique_atomics: usize,
    pub total_statements: u64,
    pub chi_pct: f64,
    pub b0_pct: f64,
    pub b1_pct: f64,
    pub b2_pct: f64,
    pub proven_with_concept_pct: f64,
    pub episodes: Vec<EpisodeCounts>,
}

impl MetricsRow {
    pub fn get(&self, m: Metric) -> f64 {
        match m {
            Metric::Chi => self.chi_pct,
            Metric::B0 => self.b0_pct,
            Metric::B1 => self.b1_pct,
            Metric::B2 => self.b2_pct,
            Metric::ProvenWithConcept => self.proven_with_concept_pct,
        }
    }

    pub fn witnesses(&self) -> u64 {
        self.episodes.iter().map(|e| e.witnesses).sum()
    }
}

/// One evaluated statement with its interpretation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GalleryEntry {
    pub episode: usize,
    pub t: usize,
    pub statement: String,
    pub flags: ConceptFlags,
    pub rho: f64,
    pub proved: bool,
    pub checks_passed: bool,
}

impl GalleryEntry {
    /// Proven, non-degenerate, and relating χ to a Betti number.
    pub fn is_witness(&self) -> bool {
        self.proved && self.checks_passed && self.flags.has_chi && (self.flags.has_b0 || self.flags.has_b1 || self.flags.has_b2)
    }
}

/// Every logged statement with its concept flags, in log order.
pub fn annotate(logs: &[EpisodeLog], premises: &PremiseSet) -> Result<Vec<GalleryEntry>> {
    let mut out = Vec::new();
    for log in logs {
        for s in &log.steps {
            let statement = parse(&s.statement)?;
            out.push(GalleryEntry {
                episode: log.episode,
                t: s.t,
                flags: detect_concepts(&statement, premises),
                statement: s.statement.clone(),
                rho: s.rho,
                proved: s.proved,
                checks_passed: s.checks_passed,
            });
        }
    }
    Ok(out)
}

/// Table-row metrics of evaluation logs; concepts are detected relative to
/// `premises`.
pub fn compute_metrics(logs: &[EpisodeLog], premises: &PremiseSet) -> Result<MetricsRow> {
    if logs.is_empty() {
        return Err(Error::param("metrics need at least one episode"));
    }
    let mut atoms: BTreeSet<&str> = BTreeSet::new();
    let mut episodes = Vec::with_capacity(logs.len());
    for log in logs {
        for s in &log.steps {
            atoms.extend(s.atoms.iter().map(String::as_str));
        }
        let mut c = EpisodeCounts::default();
        for e in annotate(core::slice::from_ref(log), premises)? {
            let f = e.flags;
            c.statements += 1;
            c.chi += f.has_chi as u64;
            c.b0 += f.has_b0 as u64;
            c.b1 += f.has_b1 as u64;
            c.b2 += f.has_b2 as u64;
            if e.proved {
                c.proven += 1;
                c.proven_with_concept += (f.has_chi || f.has_b1) as u64;
            }
            c.witnesses += e.is_witness() as u64;
        }
        episodes.push(c);
    }
    let all: Vec<&EpisodeCounts> = episodes.iter().collect();
    Ok(MetricsRow {
        unique_atomics: atoms.len(),
        total_statements: episodes.iter().map(|e| e.statements).sum(),
        chi_pct: Metric::Chi.percent(&all),
        b0_pct: Metric::B0.percent(&all),
        b1_pct: Metric::B1.percent(&all),
        b2_pct: Metric::B2.percent(&all),
        proven_with_concept_pct: Metric::ProvenWithConcept.percent(&all),
        episodes,
    })
}
