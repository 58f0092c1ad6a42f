use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};
use rand::Rng as _;

use super::lp::{feasibility, Farkas, LinearSystem, LpOutcome};
use super::premises::PremiseSet;
use crate::error::{Error, Result};
use crate::features::{Coord, FeatureVector};
use crate::linalg::{q, solve_combination, Q};
use crate::rng;
use crate::statements::{canonicalize, AtomicFormula, CanonicalForm, Monomial, Statement};

pub const DEFAULT_BUDGET: u64 = 10_000;
/// Largest height or width tried by the counterexample search.
pub const SEARCH_BOUND: i64 = 24;
const RANDOM_CANDIDATES: u64 = 4096;

/// Why one falsifying truth assignment of the atoms is impossible.
#[derive(Debug, Clone, PartialEq)]
pub enum Refutation {
    /// No assignment falsifies the statement.
    Trivial,
    /// A combination of the assumed equalities reads `0 = 1`.
    Span { coefficients: Vec<Q> },
    /// The equalities imply an atom the assignment makes false.
    Forced { atom: usize, coefficients: Vec<Q> },
    /// No nonnegative rational point meets the equalities and bounds.
    Farkas(Farkas),
    /// Integer split of a false atom `f = 0` into `f ≤ -1` and `f ≥ 1`.
    Split { atom: usize, below: Box<Refutation>, above: Box<Refutation> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchCertificate {
    /// Truth value per entry of [`Certificate::atoms`].
    pub assignment: Vec<bool>,
    pub refutation: Refutation,
}

/// Every assignment of the statement's atoms that makes it false is refuted.
/// Equality rows are ordered: structural, premises, then assumed atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub atoms: Vec<CanonicalForm>,
    pub branches: Vec<BranchCertificate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProofOutcome {
    pub rho: f64,
    pub certificate: Option<Certificate>,
    pub counterexample: Option<FeatureVector>,
    pub steps: u64,
}

impl ProofOutcome {
    pub fn proved(&self) -> bool {
        self.certificate.is_some()
    }
}

impl Refutation {
    fn describe(&self, out: &mut String) {
        match self {
            Refutation::Trivial => out.push_str("trivial"),
            Refutation::Span { .. } => out.push_str("span"),
            Refutation::Forced { atom, .. } => out.push_str(&format!("forced(a{atom})")),
            Refutation::Farkas(_) => out.push_str("farkas"),
            Refutation::Split { atom, below, above } => {
                out.push_str(&format!("split(a{atom}: "));
                below.describe(out);
                out.push_str(" | ");
                above.describe(out);
                out.push(')');
            }
        }
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            writeln!(f, "a{i}: {a}")?;
        }
        for b in &self.branches {
            let bits: String = b.assignment.iter().map(|&v| if v { 'T' } else { 'F' }).collect();
            let mut r = String::new();
            b.refutation.describe(&mut r);
            writeln!(f, "[{bits}] {r}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Prop {
    Const(bool),
    Atom(usize),
    Not(Box<Prop>),
    And(Box<Prop>, Box<Prop>),
    Implies(Box<Prop>, Box<Prop>),
}

impl Prop {
    fn eval(&self, v: &[bool]) -> bool {
        match self {
            Prop::Const(b) => *b,
            Prop::Atom(i) => v[*i],
            Prop::Not(a) => !a.eval(v),
            Prop::And(a, b) => a.eval(v) && b.eval(v),
            Prop::Implies(a, b) => !a.eval(v) || b.eval(v),
        }
    }
}

/// Propositional skeleton of a statement over its distinct nontrivial atoms.
pub(crate) struct Skeleton {
    prop: Prop,
    pub(crate) atoms: Vec<CanonicalForm>,
}

impl Skeleton {
    pub(crate) fn new(s: &Statement) -> Skeleton {
        let mut atoms = Vec::new();
        let prop = Skeleton::build(s, &mut atoms);
        Skeleton { prop, atoms }
    }

    fn build(s: &Statement, atoms: &mut Vec<CanonicalForm>) -> Prop {
        match s {
            Statement::Eq(a, b) => match canonicalize(&AtomicFormula::new(a.clone(), b.clone())) {
                CanonicalForm::Tautology => Prop::Const(true),
                CanonicalForm::Contradiction => Prop::Const(false),
                form => {
                    let i = atoms.iter().position(|x| *x == form).unwrap_or_else(|| {
                        atoms.push(form);
                        atoms.len() - 1
                    });
                    Prop::Atom(i)
                }
            },
            Statement::Not(a) => Prop::Not(Box::new(Skeleton::build(a, atoms))),
            Statement::And(a, b) => {
                Prop::And(Box::new(Skeleton::build(a, atoms)), Box::new(Skeleton::build(b, atoms)))
            }
            Statement::Implies(a, b) => Prop::Implies(
                Box::new(Skeleton::build(a, atoms)),
                Box::new(Skeleton::build(b, atoms)),
            ),
        }
    }

    pub(crate) fn eval(&self, v: &[bool]) -> bool {
        self.prop.eval(v)
    }

    /// True under every assignment; `None` when there are too many atoms to enumerate.
    pub(crate) fn is_tautology(&self) -> Option<bool> {
        let k = self.atoms.len();
        if k > 20 {
            return None;
        }
        Some(assignments(k).all(|v| self.eval(&v)))
    }
}

fn assignments(k: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1 << k).map(move |m| (0..k).map(|i| m >> i & 1 == 1).collect())
}

/// Linear rows over the seven coordinates plus one variable per nonlinear
/// monomial.
struct Space {
    monomials: BTreeMap<Monomial, usize>,
}

impl Space {
    fn dim(&self) -> usize {
        Coord::COUNT + self.monomials.len()
    }

    fn collect(&mut self, form: &CanonicalForm) {
        for (m, _) in form.nonlinear() {
            let next = Coord::COUNT + self.monomials.len();
            self.monomials.entry(m).or_insert(next);
        }
    }

    /// `a · x = b` for `p = 0`.
    fn row(&self, form: &CanonicalForm) -> Option<(Vec<Q>, Q)> {
        let p = form.polynomial()?;
        let mut a = vec![Q::zero(); self.dim()];
        let mut b = Q::zero();
        for (m, &c) in &p.0 {
            match m.degree() {
                0 => b = q(-c),
                1 => {
                    let k = m.0.iter().position(|&e| e == 1).expect("degree one");
                    a[k] = q(c);
                }
                _ => a[self.monomials[m]] = q(c),
            }
        }
        Some((a, b))
    }

    fn unit(&self, pairs: &[(Coord, i128)]) -> Vec<Q> {
        let mut a = vec![Q::zero(); self.dim()];
        for &(c, v) in pairs {
            a[c.index()] = q(v);
        }
        a
    }

    fn structural_equalities(&self) -> Vec<(Vec<Q>, Q)> {
        use Coord::*;
        vec![
            (self.unit(&[(R1, 1), (N1, 1), (E, -1)]), Q::zero()),
            (self.unit(&[(R2, 1), (N2, 1), (F, -1)]), Q::zero()),
        ]
    }

    fn structural_inequalities(&self) -> Vec<(Vec<Q>, Q)> {
        use Coord::*;
        [(R1, V), (R1, E), (R2, E), (R2, F)]
            .iter()
            .map(|&(r, d)| (self.unit(&[(r, 1), (d, -1)]), Q::zero()))
            .collect()
    }
}

struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    fn tick(&mut self) -> bool {
        if self.used >= self.limit {
            return false;
        }
        self.used += 1;
        true
    }
}

enum Attempt {
    Refuted(Refutation),
    Open,
    Exhausted,
}

fn augmented(rows: &[(Vec<Q>, Q)]) -> Vec<Vec<Q>> {
    rows.iter()
        .map(|(a, b)| {
            let mut c = a.clone();
            c.push(b.clone());
            c
        })
        .collect()
}

fn refute_branch(
    space: &Space,
    eqs: &[(Vec<Q>, Q)],
    diseqs: &[(usize, Vec<Q>, Q)],
    budget: &mut Budget,
) -> Attempt {
    if !budget.tick() {
        return Attempt::Exhausted;
    }
    let cols = augmented(eqs);
    let mut zero_one = vec![Q::zero(); space.dim()];
    zero_one.push(Q::one());
    if let Some(coefficients) = solve_combination(&cols, &zero_one) {
        return Attempt::Refuted(Refutation::Span { coefficients });
    }
    for (atom, a, b) in diseqs {
        let mut target = a.clone();
        target.push(b.clone());
        if let Some(coefficients) = solve_combination(&cols, &target) {
            return Attempt::Refuted(Refutation::Forced { atom: *atom, coefficients });
        }
    }
    let sys = LinearSystem {
        n_vars: space.dim(),
        equalities: eqs.to_vec(),
        inequalities: space.structural_inequalities(),
    };
    split_refute(sys, diseqs, budget)
}

fn split_refute(sys: LinearSystem, diseqs: &[(usize, Vec<Q>, Q)], budget: &mut Budget) -> Attempt {
    let mut pivots = budget.used;
    let outcome = feasibility(&sys, budget.limit, &mut pivots);
    budget.used = pivots;
    let point = match outcome {
        LpOutcome::Infeasible(f) => return Attempt::Refuted(Refutation::Farkas(f)),
        LpOutcome::Exhausted => return Attempt::Exhausted,
        LpOutcome::Feasible(x) => x,
    };
    // any point strictly between the two integer sides is excluded by a split
    let violated = diseqs.iter().find(|(_, a, b)| {
        let v: Q = a.iter().zip(&point).map(|(c, x)| c * x).sum();
        (v - b).abs() < Q::one()
    });
    let Some((atom, a, b)) = violated else {
        return Attempt::Open;
    };
    if !budget.tick() {
        return Attempt::Exhausted;
    }
    let mut below = sys.clone();
    below.inequalities.push((a.clone(), b - Q::one()));
    let below = match split_refute(below, diseqs, budget) {
        Attempt::Refuted(r) => r,
        other => return other,
    };
    let mut above = sys;
    above.inequalities.push((a.iter().map(|c| -c).collect(), -(b + Q::one())));
    let above = match split_refute(above, diseqs, budget) {
        Attempt::Refuted(r) => r,
        other => return other,
    };
    Attempt::Refuted(Refutation::Split { atom: *atom, below: Box::new(below), above: Box::new(above) })
}

/// Falsifying candidates shaped like small surfaces and their unions.
fn gallery() -> Vec<FeatureVector> {
    let mut out = Vec::new();
    // sphere: (V, 3V-6, 2V-4), b = (1, 0, 1)
    for v in 4..=10 {
        out.push(FeatureVector::from_dims(v, 3 * v - 6, 2 * v - 4, v - 1, 2 * v - 5));
    }
    // torus: (V, 3V, 2V), b = (1, 2, 1)
    for v in 7..=8 {
        out.push(FeatureVector::from_dims(v, 3 * v, 2 * v, v - 1, 2 * v - 1));
    }
    // Klein bottle: b = (1, 1, 0)
    out.push(FeatureVector::from_dims(8, 24, 16, 7, 16));
    // two spheres
    for (a, b) in [(4, 4), (4, 5), (5, 5), (4, 6)] {
        let (v, e, f) = (a + b, 3 * (a + b) - 12, 2 * (a + b) - 8);
        out.push(FeatureVector::from_dims(v, e, f, v - 2, f - 2));
    }
    out
}

fn within_bounds(x: &FeatureVector) -> bool {
    use crate::features::Feature;
    x.is_structurally_feasible()
        && [Feature::H1, Feature::W1, Feature::W2].iter().all(|&f| x.get(f) <= SEARCH_BOUND)
}

fn random_candidate(r: &mut rng::Rng) -> Option<FeatureVector> {
    let v = r.random_range(0..=SEARCH_BOUND);
    let f = r.random_range(0..=SEARCH_BOUND);
    let b0 = if r.random_bool(0.5) { 1 } else { r.random_range(0..=v) };
    let b2 = match r.random_range(0..5) {
        0 | 1 => 1,
        2 => 0,
        _ => r.random_range(0..=f),
    };
    let b1 = match r.random_range(0..10) {
        0..=2 => 0,
        3 | 4 => 1,
        5 => 2,
        _ => r.random_range(-6..=12),
    };
    let (r1, r2) = (v - b0, f - b2);
    let e = r1 + r2 + b1;
    let x = FeatureVector::from_dims(v, e, f, r1, r2);
    (r1 >= 0 && r2 >= 0 && within_bounds(&x)).then_some(x)
}

fn is_counterexample(s: &Statement, p: &PremiseSet, x: &FeatureVector) -> bool {
    within_bounds(x) && p.holds_on(x) && !s.evaluate(x)
}

fn search_counterexample(s: &Statement, p: &PremiseSet, budget: &mut Budget, random: bool) -> Option<FeatureVector> {
    if !random {
        for x in gallery() {
            if !budget.tick() {
                return None;
            }
            if is_counterexample(s, p, &x) {
                return Some(x);
            }
        }
        return None;
    }
    let mut r = rng::stream(rng::tag(&s.to_prefix()), "counterexample");
    for _ in 0..RANDOM_CANDIDATES {
        if !budget.tick() {
            return None;
        }
        if let Some(x) = random_candidate(&mut r) {
            if is_counterexample(s, p, &x) {
                return Some(x);
            }
        }
    }
    None
}

/// Provability score of `s` under `p`: 1 with a certificate when every
/// falsifying assignment of its atoms is refuted within `budget` steps, else 0
/// (with a counterexample when the bounded search finds one).
pub fn prove(s: &Statement, p: &PremiseSet, budget: u64) -> Result<ProofOutcome> {
    if budget == 0 {
        return Err(Error::param("prover budget must be positive"));
    }
    if !p.is_linearly_consistent() {
        return Err(Error::config("premise set is inconsistent"));
    }
    let mut budget = Budget { limit: budget, used: 0 };
    let fail = |x: Option<FeatureVector>, used| ProofOutcome {
        rho: 0.0,
        certificate: None,
        counterexample: x,
        steps: used,
    };
    if let Some(x) = search_counterexample(s, p, &mut budget, false) {
        return Ok(fail(Some(x), budget.used));
    }
    let skeleton = Skeleton::new(s);
    let mut space = Space { monomials: BTreeMap::new() };
    for f in &skeleton.atoms {
        space.collect(f);
    }
    // premises mentioning a monomial the statement lacks are left out
    let premise_forms: Vec<&CanonicalForm> = p
        .premises()
        .iter()
        .map(|x| &x.atom.canonical)
        .filter(|f| f.nonlinear().iter().all(|(m, _)| space.monomials.contains_key(m)))
        .collect();
    let mut base = space.structural_equalities();
    base.extend(premise_forms.iter().filter_map(|f| space.row(f)));
    let rows: Vec<Option<(Vec<Q>, Q)>> = skeleton.atoms.iter().map(|f| space.row(f)).collect();

    let mut branches = Vec::new();
    let mut open = false;
    for v in assignments(skeleton.atoms.len()) {
        if !budget.tick() {
            return Ok(fail(None, budget.used));
        }
        if skeleton.eval(&v) {
            continue;
        }
        let mut eqs = base.clone();
        let mut diseqs = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if let Some((a, b)) = row {
                if v[i] {
                    eqs.push((a.clone(), b.clone()));
                } else {
                    diseqs.push((i, a.clone(), b.clone()));
                }
            }
        }
        match refute_branch(&space, &eqs, &diseqs, &mut budget) {
            Attempt::Refuted(refutation) => branches.push(BranchCertificate { assignment: v, refutation }),
            Attempt::Open => {
                open = true;
                break;
            }
            Attempt::Exhausted => return Ok(fail(None, budget.used)),
        }
    }
    if !open {
        if branches.is_empty() {
            // no falsifying assignment at all
            branches.push(BranchCertificate { assignment: Vec::new(), refutation: Refutation::Trivial });
        }
        return Ok(ProofOutcome {
            rho: 1.0,
            certificate: Some(Certificate { atoms: skeleton.atoms, branches }),
            counterexample: None,
            steps: budget.used,
        });
    }
    let x = search_counterexample(s, p, &mut budget, true);
    Ok(fail(x, budget.used))
}
