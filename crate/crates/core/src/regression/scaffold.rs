use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use rand::Rng as _;

use super::spotter::argbest;
use super::{loss_value, Compressed, Fitness, Patch, RegressionResult, RegressorConfig};
use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::statements::{AtomicFormula, Statement};
use crate::surfaces::Datapoint;

/// Boolean combination of spotted atoms, referenced by index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scaffold {
    Atom(usize),
    Not(Box<Scaffold>),
    And(Box<Scaffold>, Box<Scaffold>),
    Implies(Box<Scaffold>, Box<Scaffold>),
}

impl Scaffold {
    pub fn eval(&self, vals: &[bool]) -> bool {
        match self {
            Scaffold::Atom(i) => vals[*i],
            Scaffold::Not(a) => !a.eval(vals),
            Scaffold::And(a, b) => a.eval(vals) && b.eval(vals),
            Scaffold::Implies(a, b) => !a.eval(vals) || b.eval(vals),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Scaffold::Atom(_) => 1,
            Scaffold::Not(a) => 1 + a.node_count(),
            Scaffold::And(a, b) | Scaffold::Implies(a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    pub fn connectives(&self) -> usize {
        match self {
            Scaffold::Atom(_) => 0,
            Scaffold::Not(a) => 1 + a.connectives(),
            Scaffold::And(a, b) | Scaffold::Implies(a, b) => 1 + a.connectives() + b.connectives(),
        }
    }

    /// Substitutes the atoms back in.
    pub fn to_statement(&self, atoms: &[AtomicFormula]) -> Statement {
        match self {
            Scaffold::Atom(i) => atoms[*i].statement(),
            Scaffold::Not(a) => Statement::not(a.to_statement(atoms)),
            Scaffold::And(a, b) => Statement::and(a.to_statement(atoms), b.to_statement(atoms)),
            Scaffold::Implies(a, b) => {
                Statement::implies(a.to_statement(atoms), b.to_statement(atoms))
            }
        }
    }

    fn subtree(&self, i: usize) -> &Scaffold {
        if i == 0 {
            return self;
        }
        match self {
            Scaffold::Atom(_) => unreachable!("index within tree"),
            Scaffold::Not(a) => a.subtree(i - 1),
            Scaffold::And(a, b) | Scaffold::Implies(a, b) => {
                let left = a.node_count();
                if i <= left {
                    a.subtree(i - 1)
                } else {
                    b.subtree(i - 1 - left)
                }
            }
        }
    }

    fn replace(&self, i: usize, new: Scaffold) -> Scaffold {
        if i == 0 {
            return new;
        }
        match self {
            Scaffold::Atom(_) => unreachable!("index within tree"),
            Scaffold::Not(a) => Scaffold::Not(Box::new(a.replace(i - 1, new))),
            Scaffold::And(a, b) | Scaffold::Implies(a, b) => {
                let left = a.node_count();
                let (a, b) = if i <= left {
                    (a.replace(i - 1, new), (**b).clone())
                } else {
                    ((**a).clone(), b.replace(i - 1 - left, new))
                };
                match self {
                    Scaffold::And(..) => Scaffold::And(Box::new(a), Box::new(b)),
                    _ => Scaffold::Implies(Box::new(a), Box::new(b)),
                }
            }
        }
    }
}

struct ScaffoldSearch<'a> {
    atoms: &'a [AtomicFormula],
    /// Atom truth values per distinct datapoint.
    table: Vec<Vec<bool>>,
    weights: &'a [f64],
    total: f64,
    /// Atoms with equal canonical forms share a propositional variable.
    var_of: Vec<usize>,
    n_vars: usize,
    cfg: &'a RegressorConfig,
    cache: BTreeMap<Scaffold, Fitness>,
    evaluations: u64,
}

impl ScaffoldSearch<'_> {
    fn is_constant(&self, s: &Scaffold) -> bool {
        let mut seen = [false; 2];
        let mut vals = alloc::vec![false; self.atoms.len()];
        for mask in 0u32..(1 << self.n_vars) {
            for (i, v) in vals.iter_mut().enumerate() {
                *v = mask & (1 << self.var_of[i]) != 0;
            }
            seen[s.eval(&vals) as usize] = true;
            if seen[0] && seen[1] {
                return false;
            }
        }
        true
    }

    fn evaluate(&mut self, s: &Scaffold) -> Fitness {
        if let Some(f) = self.cache.get(s) {
            return f.clone();
        }
        self.evaluations += 1;
        let st = s.to_statement(self.atoms);
        let hit: f64 = self
            .table
            .iter()
            .zip(self.weights)
            .filter(|(row, _)| s.eval(row))
            .map(|(_, w)| w)
            .sum();
        let accuracy = hit / self.total;
        let oversized = st.tree_size() > self.cfg.max_size || st.depth() > self.cfg.max_depth;
        let loss = if oversized || self.is_constant(s) {
            f64::INFINITY
        } else {
            loss_value(accuracy, self.cfg.priors.score(&st), self.cfg.alpha)
        };
        let fit = Fitness { loss, size: st.tree_size(), text: st.to_prefix(), accuracy };
        self.cache.insert(s.clone(), fit.clone());
        fit
    }

    fn grow(&self, rng: &mut Rng, depth: usize) -> Scaffold {
        if depth <= 1 || rng.random_bool(0.5) {
            return Scaffold::Atom(rng.random_range(0..self.atoms.len()));
        }
        match rng.random_range(0..3) {
            0 => Scaffold::Not(Box::new(self.grow(rng, depth - 1))),
            1 => Scaffold::And(Box::new(self.grow(rng, depth - 1)), Box::new(self.grow(rng, depth - 1))),
            _ => Scaffold::Implies(
                Box::new(self.grow(rng, depth - 1)),
                Box::new(self.grow(rng, depth - 1)),
            ),
        }
    }

    fn tournament<'p>(&self, pop: &'p [Scaffold], fits: &[Fitness], rng: &mut Rng) -> &'p Scaffold {
        let mut best = rng.random_range(0..pop.len());
        for _ in 1..self.cfg.tournament_size {
            let c = rng.random_range(0..pop.len());
            if fits[c].better_than(&fits[best]) {
                best = c;
            }
        }
        &pop[best]
    }

    fn vary(&self, pop: &[Scaffold], fits: &[Fitness], rng: &mut Rng) -> Scaffold {
        let r: f64 = rng.random();
        let parent = self.tournament(pop, fits, rng);
        let i = rng.random_range(0..parent.node_count());
        if r < self.cfg.p_crossover {
            let donor = self.tournament(pop, fits, rng);
            let j = rng.random_range(0..donor.node_count());
            parent.replace(i, donor.subtree(j).clone())
        } else if r < self.cfg.p_crossover + self.cfg.p_mutation {
            parent.replace(i, self.grow(rng, 3))
        } else {
            // point mutation: relabel one node
            let node = match parent.subtree(i) {
                Scaffold::Atom(_) => Scaffold::Atom(rng.random_range(0..self.atoms.len())),
                Scaffold::Not(a) => (**a).clone(),
                Scaffold::And(a, b) => Scaffold::Implies(a.clone(), b.clone()),
                Scaffold::Implies(a, b) => Scaffold::And(a.clone(), b.clone()),
            };
            parent.replace(i, node)
        }
    }

    fn run(&mut self, rng: &mut Rng) -> (Scaffold, Fitness) {
        let n = self.cfg.scaffold_population;
        // seed every atom and its negation so tiny budgets still see them
        let mut pop: Vec<Scaffold> = (0..self.atoms.len())
            .flat_map(|i| [Scaffold::Atom(i), Scaffold::Not(Box::new(Scaffold::Atom(i)))])
            .take(n)
            .collect();
        while pop.len() < n {
            pop.push(self.grow(rng, 4));
        }
        let mut fits: Vec<Fitness> = pop.iter().map(|s| self.evaluate(s)).collect();
        for _ in 0..self.cfg.scaffold_generations {
            let elite = argbest(&fits);
            let mut next = Vec::with_capacity(n);
            next.push(pop[elite].clone());
            while next.len() < n {
                next.push(self.vary(&pop, &fits, rng));
            }
            pop = next;
            fits = pop.iter().map(|s| self.evaluate(s)).collect();
        }
        let b = argbest(&fits);
        (pop[b].clone(), fits[b].clone())
    }
}

/// Boolean combination of `atoms` minimizing the loss on `union`.
pub fn scaffold(
    atoms: &[AtomicFormula],
    data: &[Datapoint],
    union: &Patch,
    cfg: &RegressorConfig,
) -> Result<Statement> {
    scaffold_with(atoms, data, union, cfg).map(|(s, _)| s)
}

/// As [`scaffold`], also returning the search summary. Scaffolds that are
/// constant as propositional formulas over the atoms are never returned
/// unless nothing else exists.
pub fn scaffold_with(
    atoms: &[AtomicFormula],
    data: &[Datapoint],
    union: &Patch,
    cfg: &RegressorConfig,
) -> Result<(Statement, RegressionResult)> {
    if atoms.is_empty() {
        return Err(Error::param("scaffold needs at least one atom"));
    }
    if atoms.len() > 16 {
        return Err(Error::param("scaffold supports at most 16 atoms"));
    }
    cfg.validate()?;
    let compressed = Compressed::new(data, union)?;
    let table: Vec<Vec<bool>> = compressed
        .points
        .iter()
        .map(|x| atoms.iter().map(|a| a.statement().evaluate(x)).collect())
        .collect();
    let mut var_of = Vec::with_capacity(atoms.len());
    let mut distinct: Vec<&crate::statements::CanonicalForm> = Vec::new();
    for a in atoms {
        match distinct.iter().position(|c| **c == a.canonical) {
            Some(v) => var_of.push(v),
            None => {
                var_of.push(distinct.len());
                distinct.push(&a.canonical);
            }
        }
    }
    let mut search = ScaffoldSearch {
        atoms,
        table,
        weights: &compressed.weights,
        total: compressed.total,
        var_of,
        n_vars: distinct.len(),
        cfg,
        cache: BTreeMap::new(),
        evaluations: 0,
    };
    let mut rng = rng::stream(cfg.seed, "scaffold");
    let (best, fit) = search.run(&mut rng);
    let statement = best.to_statement(atoms);
    let result = RegressionResult {
        best: statement.clone(),
        loss: fit.loss,
        weighted_accuracy: fit.accuracy,
        evaluations: search.evaluations,
    };
    Ok((statement, result))
}
