use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use rand::Rng as _;

use super::tree::{perturb_constant, point_mutate, replace, subtree, Shape};
use super::{loss_value, Compressed, Fitness, Patch, RegressionResult, RegressorConfig};
use crate::error::Result;
use crate::rng::{self, Rng};
use crate::statements::{AtomicFormula, CanonicalForm, Statement, Term};
use crate::surfaces::Datapoint;

type Genome = (Term, Term);

fn genome_size(g: &Genome) -> usize {
    g.0.size() + g.1.size()
}

fn node(g: &Genome, i: usize) -> &Term {
    let left = g.0.size();
    if i < left {
        subtree(&g.0, i)
    } else {
        subtree(&g.1, i - left)
    }
}

fn with_node(g: &Genome, i: usize, f: impl FnOnce(&Term, usize) -> Term) -> Genome {
    let left = g.0.size();
    if i < left {
        (f(&g.0, i), g.1.clone())
    } else {
        (g.0.clone(), f(&g.1, i - left))
    }
}

pub(crate) struct Search<'a> {
    data: &'a Compressed,
    cfg: &'a RegressorConfig,
    excluded: &'a BTreeSet<CanonicalForm>,
    shape: Shape,
    cache: BTreeMap<String, Fitness>,
    pub evaluations: u64,
}

impl<'a> Search<'a> {
    fn new(data: &'a Compressed, cfg: &'a RegressorConfig, excluded: &'a BTreeSet<CanonicalForm>) -> Self {
        Search {
            data,
            cfg,
            excluded,
            shape: Shape { const_range: cfg.const_range },
            cache: BTreeMap::new(),
            evaluations: 0,
        }
    }

    fn fits_caps(&self, g: &Genome) -> bool {
        1 + genome_size(g) <= self.cfg.atom_max_size
            && 1 + g.0.depth().max(g.1.depth()) <= self.cfg.max_depth
    }

    fn evaluate(&mut self, g: &Genome) -> Fitness {
        let s = Statement::eq(g.0.clone(), g.1.clone());
        let text = s.to_prefix();
        if let Some(f) = self.cache.get(&text) {
            return f.clone();
        }
        self.evaluations += 1;
        let accuracy = self.data.accuracy(&s);
        let canonical = AtomicFormula::new(g.0.clone(), g.1.clone()).canonical;
        let loss = if canonical.is_trivial() || self.excluded.contains(&canonical) {
            f64::INFINITY
        } else {
            loss_value(accuracy, self.cfg.priors.score(&s), self.cfg.alpha)
        };
        let fit = Fitness { loss, size: s.tree_size(), text: text.clone(), accuracy };
        self.cache.insert(text, fit.clone());
        fit
    }

    fn random_genome(&self, rng: &mut Rng) -> Genome {
        let depth = self.cfg.max_depth.saturating_sub(1).clamp(1, 4);
        loop {
            let g = (self.shape.grow(rng, depth), self.shape.grow(rng, depth));
            if self.fits_caps(&g) {
                return g;
            }
        }
    }

    fn tournament<'p>(&self, pop: &'p [Genome], fits: &[Fitness], rng: &mut Rng) -> &'p Genome {
        let mut best = rng.random_range(0..pop.len());
        for _ in 1..self.cfg.tournament_size {
            let c = rng.random_range(0..pop.len());
            if fits[c].better_than(&fits[best]) {
                best = c;
            }
        }
        &pop[best]
    }

    fn vary(&self, pop: &[Genome], fits: &[Fitness], rng: &mut Rng) -> Genome {
        let r: f64 = rng.random();
        let parent = self.tournament(pop, fits, rng);
        let child = if r < self.cfg.p_crossover {
            let donor = self.tournament(pop, fits, rng);
            let i = rng.random_range(0..genome_size(parent));
            let j = rng.random_range(0..genome_size(donor));
            let graft = node(donor, j).clone();
            with_node(parent, i, |t, k| replace(t, k, graft))
        } else if r < self.cfg.p_crossover + self.cfg.p_mutation {
            let i = rng.random_range(0..genome_size(parent));
            if rng.random_bool(0.5) {
                with_node(parent, i, |t, k| point_mutate(t, k, &self.shape, rng))
            } else {
                let fresh = self.shape.grow(rng, 3);
                with_node(parent, i, |t, k| replace(t, k, fresh))
            }
        } else {
            match (perturb_constant(&parent.0, &self.shape, rng), rng.random_bool(0.5)) {
                (Some(l), true) => (l, parent.1.clone()),
                _ => match perturb_constant(&parent.1, &self.shape, rng) {
                    Some(r) => (parent.0.clone(), r),
                    None => {
                        let i = rng.random_range(0..genome_size(parent));
                        with_node(parent, i, |t, k| point_mutate(t, k, &self.shape, rng))
                    }
                },
            }
        };
        if self.fits_caps(&child) {
            child
        } else {
            parent.clone()
        }
    }

    fn run(&mut self, rng: &mut Rng) -> (Genome, Fitness) {
        let n = self.cfg.population_size;
        let mut pop: Vec<Genome> = (0..n).map(|_| self.random_genome(rng)).collect();
        let mut fits: Vec<Fitness> = pop.iter().map(|g| self.evaluate(g)).collect();
        for _ in 0..self.cfg.generations {
            let elite = argbest(&fits);
            let mut next = Vec::with_capacity(n);
            next.push(pop[elite].clone());
            while next.len() < n {
                next.push(self.vary(&pop, &fits, rng));
            }
            pop = next;
            fits = pop.iter().map(|g| self.evaluate(g)).collect();
        }
        let b = argbest(&fits);
        (pop[b].clone(), fits[b].clone())
    }
}

pub(crate) fn argbest(fits: &[Fitness]) -> usize {
    let mut b = 0;
    for i in 1..fits.len() {
        if fits[i].better_than(&fits[b]) {
            b = i;
        }
    }
    b
}

/// Best atom for one patch.
pub(crate) fn spot_one(
    data: &Compressed,
    cfg: &RegressorConfig,
    excluded: &BTreeSet<CanonicalForm>,
    rng: &mut Rng,
) -> (AtomicFormula, RegressionResult) {
    let mut search = Search::new(data, cfg, excluded);
    let ((l, r), fit) = search.run(rng);
    let atom = AtomicFormula::new(l, r);
    let result = RegressionResult {
        best: atom.statement(),
        loss: fit.loss,
        weighted_accuracy: fit.accuracy,
        evaluations: search.evaluations,
    };
    (atom, result)
}

/// One atomic formula per patch, each minimizing the loss on its patch.
pub fn spot_features(data: &[Datapoint], patches: &[Patch], cfg: &RegressorConfig) -> Result<Vec<AtomicFormula>> {
    Ok(spot_features_with(data, patches, cfg, &BTreeSet::new())?
        .into_iter()
        .map(|(a, _)| a)
        .collect())
}

/// As [`spot_features`], never returning an atom whose canonical form is in
/// `excluded`; canonically trivial atoms are always excluded.
pub fn spot_features_with(
    data: &[Datapoint],
    patches: &[Patch],
    cfg: &RegressorConfig,
    excluded: &BTreeSet<CanonicalForm>,
) -> Result<Vec<(AtomicFormula, RegressionResult)>> {
    cfg.validate()?;
    let compressed: Vec<Compressed> = patches
        .iter()
        .map(|p| Compressed::new(data, p))
        .collect::<Result<_>>()?;
    Ok(compressed
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut rng = rng::stream_indexed(cfg.seed, "spotter", i as u64);
            spot_one(c, cfg, excluded, &mut rng)
        })
        .collect())
}
