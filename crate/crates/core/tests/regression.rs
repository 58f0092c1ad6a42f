use forge_core::regression::*;
use forge_core::statements::{parse, AtomicFormula, ArithOp, Statement, Term};
use forge_core::surfaces::{generate_surface, make_datapoint, Datapoint, SurfaceKind};
use forge_core::{Error, Feature};
use proptest::prelude::*;
use rand::Rng;

const CHI_ONLY: &str = "(= (+ (- h1 w1) w2) 2)";

fn dataset(spheres: usize, tori: usize) -> Vec<Datapoint> {
    let mut out = Vec::new();
    for i in 0..spheres {
        let s = generate_surface(SurfaceKind::Sphere, 6 + (i * 7) % 30, i as u64).unwrap();
        out.push(make_datapoint(&s).unwrap());
    }
    for i in 0..tori {
        let s = generate_surface(SurfaceKind::Torus, 3 + i % 6, i as u64).unwrap();
        out.push(make_datapoint(&s).unwrap());
    }
    out
}

fn kind_patch(data: &[Datapoint], kind: SurfaceKind) -> Patch {
    Patch(data.iter().map(|d| if d.labels.kind == kind { 1.0 } else { 0.0 }).collect())
}

#[test]
fn weighted_accuracy_examples() {
    let data = dataset(50, 50);
    let s = parse(CHI_ONLY).unwrap();
    assert_eq!(weighted_accuracy(&s, &data, &Patch::uniform(100)).unwrap(), 0.5);
    assert_eq!(weighted_accuracy(&s, &data, &kind_patch(&data, SurfaceKind::Sphere)).unwrap(), 1.0);
    let taut = parse("(= n2 n2)").unwrap();
    let mut rng = forge_core::rng::stream(3, "w");
    let random = Patch((0..100).map(|_| rng.random::<f64>()).collect());
    assert_eq!(weighted_accuracy(&taut, &data, &random).unwrap(), 1.0);
    assert_eq!(weighted_accuracy(&s, &data, &Patch(vec![0.0; 100])), Err(Error::ZeroWeight));
}

#[test]
fn loss_examples() {
    assert!((loss_value(1.0, 0.0, 4.0) - std::f64::consts::E).abs() < 1e-12);
    assert!((loss_value(1.0, 0.0, 0.5) - std::f64::consts::E).abs() < 1e-12);
    assert!(loss_value(1.0, 0.0, 4.0) < loss_value(0.5, 0.0, 4.0));
    let data = dataset(5, 5);
    let s = parse(CHI_ONLY).unwrap();
    let mut cfg = RegressorConfig::default();
    let before = loss(&s, &data, &Patch::uniform(10), &cfg).unwrap();
    cfg.priors.set(PriorKey::Op(OpClass::Sub), 0.5);
    let after = loss(&s, &data, &Patch::uniform(10), &cfg).unwrap();
    assert!(after < before);
    // unused operator: no effect
    cfg.priors.set(PriorKey::Op(OpClass::Mul), 1.0);
    assert_eq!(loss(&s, &data, &Patch::uniform(10), &cfg).unwrap(), after);
}

#[test]
fn prior_score_counts_classes_length_and_nested_not() {
    let mut p = Priors::default();
    p.set(PriorKey::Feature(Feature::H1), 1.0);
    p.set(PriorKey::Length, 1.0);
    p.set(PriorKey::NestedNot, -1.0);
    let s = parse("(not (not (= (+ h1 h1) 2)))").unwrap();
    let expected = 1.0 + s.tree_size() as f64 / 10.0 - 1.0;
    assert!((p.score(&s) - expected).abs() < 1e-12);
    p.set(PriorKey::Length, 9.0);
    assert_eq!(p.get(PriorKey::Length), PRIOR_MAX);
}

proptest! {
    #[test]
    fn loss_is_monotone(w1 in 0.0f64..1.0, dw in 1e-3f64..1.0, p in -10.0f64..10.0, dp in 1e-3f64..2.0, alpha in 0.5f64..6.0) {
        let w2 = (w1 + dw).min(1.0);
        prop_assume!(w2 > w1);
        prop_assert!(loss_value(w2, p, alpha) < loss_value(w1, p, alpha));
        prop_assert!(loss_value(w1, p + dp, alpha) < loss_value(w1, p, alpha));
    }
}

// ---- exhaustive atom oracle ------------------------------------------------

struct Enum {
    values: Vec<Vec<i128>>,
    mask: Vec<u32>,
    size: Vec<usize>,
    terms: Vec<Term>,
}

/// All terms up to `max` nodes with leaves = features and constants in [-4, 4].
fn all_terms(points: &[forge_core::FeatureVector], max: usize) -> Enum {
    let mut e = Enum { values: vec![], mask: vec![], size: vec![], terms: vec![] };
    let mut by_size: Vec<Vec<usize>> = vec![vec![]; max + 1];
    for f in Feature::ALL {
        e.values.push(points.iter().map(|x| x.get(f) as i128).collect());
        e.mask.push(1 << (7 + f.index()));
        e.size.push(1);
        e.terms.push(Term::Var(f));
        by_size[1].push(e.terms.len() - 1);
    }
    for c in -4i64..=4 {
        e.values.push(vec![c as i128; points.len()]);
        e.mask.push(0);
        e.size.push(1);
        e.terms.push(Term::Const(c));
        by_size[1].push(e.terms.len() - 1);
    }
    for s in (3..=max).step_by(2) {
        for ls in (1..s - 1).step_by(2) {
            let rs = s - 1 - ls;
            for &a in &by_size[ls].clone() {
                for &b in &by_size[rs].clone() {
                    for (k, op) in ArithOp::ALL.into_iter().enumerate() {
                        let v = e.values[a].iter().zip(&e.values[b]).map(|(x, y)| match op {
                            ArithOp::Add => x + y,
                            ArithOp::Sub => x - y,
                            ArithOp::Mul => x * y,
                        }).collect();
                        e.values.push(v);
                        e.mask.push(e.mask[a] | e.mask[b] | (1 << k));
                        e.size.push(s);
                        e.terms.push(Term::bin(op, e.terms[a].clone(), e.terms[b].clone()));
                        by_size[s].push(e.terms.len() - 1);
                    }
                }
            }
        }
    }
    e
}

/// Patch-independent summary of every non-trivial atom of size ≤ `max_atom`:
/// (positions where it holds, operator/feature class mask, size), deduplicated.
fn atom_signatures(data: &[Datapoint], max_atom: usize) -> Vec<(u32, u32, usize)> {
    let points: Vec<_> = data.iter().map(|d| d.features).collect();
    let e = all_terms(&points, max_atom - 2);
    let full = (1u32 << points.len()) - 1;
    let mut order: Vec<usize> = (0..e.terms.len()).collect();
    order.sort_by_key(|&i| e.size[i]);
    let mut sigs = std::collections::BTreeSet::new();
    for a in 0..e.terms.len() {
        for &b in &order {
            let size = 1 + e.size[a] + e.size[b];
            if size > max_atom {
                break;
            }
            let hits = (0..points.len()).filter(|&i| e.values[a][i] == e.values[b][i]).fold(0u32, |m, i| m | (1 << i));
            let key = (hits, e.mask[a] | e.mask[b] | (1 << 3), size);
            if sigs.contains(&key) {
                continue;
            }
            // only atoms true everywhere or nowhere can be canonically trivial
            if (hits == full || hits == 0)
                && AtomicFormula::new(e.terms[a].clone(), e.terms[b].clone()).canonical.is_trivial()
            {
                continue;
            }
            sigs.insert(key);
        }
    }
    sigs.into_iter().collect()
}

fn exhaustive_best(sigs: &[(u32, u32, usize)], patch: &Patch, cfg: &RegressorConfig) -> f64 {
    let total: f64 = patch.0.iter().sum();
    let p = &cfg.priors.0;
    sigs.iter()
        .map(|&(hits, mask, size)| {
            let mut score = p[15] * size as f64 / 10.0;
            for k in 0..15 {
                if mask & (1 << k) != 0 {
                    score += p[k];
                }
            }
            let hit: f64 = (0..patch.0.len()).filter(|&i| hits & (1 << i) != 0).map(|i| patch.0[i]).sum();
            loss_value(hit / total, score, cfg.alpha)
        })
        .fold(f64::INFINITY, f64::min)
}

fn twenty() -> Vec<Datapoint> {
    dataset(10, 10)
}

#[test]
fn spotter_finds_perfect_atoms_on_kind_patches() {
    let data = twenty();
    let cfg = RegressorConfig { atom_max_size: 9, ..RegressorConfig::default() };
    let sigs = atom_signatures(&data, 7);
    for kind in [SurfaceKind::Sphere, SurfaceKind::Torus] {
        let patch = kind_patch(&data, kind);
        let opt = exhaustive_best(&sigs, &patch, &cfg);
        assert!((opt - std::f64::consts::E).abs() < 1e-9, "an accuracy-1 atom of size ≤ 7 exists");
        let atoms = spot_features(&data, &[patch.clone()], &cfg).unwrap();
        let w = weighted_accuracy(&atoms[0].statement(), &data, &patch).unwrap();
        assert_eq!(w, 1.0, "{kind}: {}", atoms[0]);
        // random baseline with the same evaluation budget never beats it
        let mut rng = forge_core::rng::stream(5, "baseline");
        let mut best_random: f64 = 0.0;
        for _ in 0..cfg.population_size * (cfg.generations + 1) {
            let l = random_term(&mut rng, 3);
            let r = random_term(&mut rng, 3);
            let s = Statement::eq(l, r);
            if s.tree_size() <= cfg.atom_max_size && !s.atomic_formulae()[0].canonical.is_trivial() {
                best_random = best_random.max(weighted_accuracy(&s, &data, &patch).unwrap());
            }
        }
        assert!(w >= best_random);
    }
}

fn random_term(rng: &mut forge_core::rng::Rng, depth: usize) -> Term {
    if depth <= 1 || rng.random_bool(0.5) {
        if rng.random_bool(0.7) {
            Term::Var(Feature::ALL[rng.random_range(0..8)])
        } else {
            Term::Const(rng.random_range(-4..=4))
        }
    } else {
        Term::bin(ArithOp::ALL[rng.random_range(0..3)], random_term(rng, depth - 1), random_term(rng, depth - 1))
    }
}

#[test]
fn single_datapoint_is_fit_exactly() {
    let data = dataset(1, 0);
    let atoms = spot_features(&data, &[Patch::uniform(1)], &RegressorConfig::default()).unwrap();
    assert_eq!(weighted_accuracy(&atoms[0].statement(), &data, &Patch::uniform(1)).unwrap(), 1.0);
}

#[test]
fn spotter_is_close_to_exhaustive_optimum() {
    // calibration: 50 seeded runs, each with its own random patch, default priors
    let data = twenty();
    let sigs = atom_signatures(&data, 7);
    let mut good = 0;
    let runs = 50;
    for seed in 0..runs {
        let mut rng = forge_core::rng::stream_indexed(11, "calibration", seed);
        let patch = Patch((0..20).map(|_| rng.random_range(0.0..1.0)).collect());
        let cfg = RegressorConfig { seed, atom_max_size: 7, ..RegressorConfig::default() };
        let opt = exhaustive_best(&sigs, &patch, &cfg);
        let atom = &spot_features(&data, &[patch.clone()], &cfg).unwrap()[0];
        let l = loss(&atom.statement(), &data, &patch, &cfg).unwrap();
        assert!(l >= opt * (1.0 - 1e-12), "search beat the exhaustive optimum");
        if l <= CALIBRATION_RATIO * opt {
            good += 1;
        }
    }
    println!("spotter within 5% of optimum in {good}/{runs} runs");
    assert!(good as f64 >= CALIBRATION_SHARE * runs as f64, "{good}/{runs}");
}

const CALIBRATION_RATIO: f64 = 1.05;
const CALIBRATION_SHARE: f64 = 0.9;

// ---- scaffolder -------------------------------------------------------------

fn atom(text: &str) -> AtomicFormula {
    AtomicFormula::from_statement(&parse(text).unwrap()).unwrap()
}

/// Every scaffold with at most `k` connectives over `n` atoms.
fn all_scaffolds(n: usize, k: usize) -> Vec<Scaffold> {
    let mut by_k: Vec<Vec<Scaffold>> = vec![(0..n).map(Scaffold::Atom).collect()];
    for c in 1..=k {
        let mut level = Vec::new();
        for a in &by_k[c - 1] {
            level.push(Scaffold::Not(Box::new(a.clone())));
        }
        for left in 0..c {
            let right = c - 1 - left;
            for a in &by_k[left] {
                for b in &by_k[right] {
                    level.push(Scaffold::And(Box::new(a.clone()), Box::new(b.clone())));
                    level.push(Scaffold::Implies(Box::new(a.clone()), Box::new(b.clone())));
                }
            }
        }
        by_k.push(level);
    }
    by_k.concat()
}

#[test]
fn scaffold_examples() {
    let data = dataset(10, 10);
    let cfg = RegressorConfig::default();
    let union = Patch::uniform(20);
    let spheres = kind_patch(&data, SurfaceKind::Sphere);

    // a perfect atom is returned as is
    let a = atom(CHI_ONLY);
    assert_eq!(scaffold(&[a.clone()], &data, &spheres, &cfg).unwrap(), a.statement());
    // exhaustive check over ≤ 3 connectives agrees on the optimum loss
    let atoms = [a.clone(), atom("(= n1 r2)")];
    let (best, res) = scaffold_with(&atoms, &data, &union, &cfg).unwrap();
    let mut opt = f64::INFINITY;
    for s in all_scaffolds(2, 3) {
        let st = s.to_statement(&atoms);
        let vals: Vec<bool> = (0..4).map(|m| s.eval(&[m & 1 != 0, m & 2 != 0])).collect();
        if vals.iter().all(|&v| v) || vals.iter().all(|&v| !v) {
            continue;
        }
        opt = opt.min(loss(&st, &data, &union, &cfg).unwrap());
    }
    assert!(res.loss <= opt + 1e-12, "{best}");
    // two sphere-only atoms: implication is perfect on the union
    assert_eq!(res.weighted_accuracy, 1.0);
    assert_eq!(weighted_accuracy(&best, &data, &union).unwrap(), 1.0);

    // an always-false atom is negated
    let never = atom("(= h1 1000)");
    let s = scaffold(&[never.clone()], &data, &union, &cfg).unwrap();
    assert_eq!(s, Statement::not(never.statement()));

    assert!(matches!(scaffold(&[], &data, &union, &cfg), Err(Error::Parameter(_))));
}

// ---- conjecturer -------------------------------------------------------------

#[test]
fn conjecturer_examples() {
    let data = dataset(20, 20);
    let cfg = RegressorConfig::default();
    let spheres = kind_patch(&data, SurfaceKind::Sphere);
    let (s, res) = run_conjecturer(&data, &[spheres.clone()], &cfg).unwrap();
    assert!(data.iter().filter(|d| d.labels.kind == SurfaceKind::Sphere).all(|d| s.evaluate(&d.features)), "{s}");
    assert_eq!(res.weighted_accuracy, 1.0);

    let (s2, _) = run_conjecturer(&data, &[spheres.clone(), spheres.clone()], &cfg).unwrap();
    assert!(s2.tree_size() <= cfg.max_size);
    assert_eq!(parse(&s2.to_prefix()).unwrap(), s2);

    let lazy = RegressorConfig { generations: 0, scaffold_generations: 0, ..cfg.clone() };
    let (s3, _) = run_conjecturer(&data, &[Patch::uniform(40)], &lazy).unwrap();
    assert!(s3.tree_size() <= cfg.max_size && s3.depth() <= cfg.max_depth);
}

#[test]
fn search_is_deterministic() {
    let data = dataset(10, 10);
    let cfg = RegressorConfig { seed: 77, ..RegressorConfig::default() };
    let patches = [Patch::uniform(20), kind_patch(&data, SurfaceKind::Torus)];
    let a = run_conjecturer(&data, &patches, &cfg).unwrap();
    let b = run_conjecturer(&data, &patches, &cfg).unwrap();
    assert_eq!(a, b);
    let handle = std::thread::spawn(move || run_conjecturer(&data, &patches, &cfg).unwrap());
    assert_eq!(handle.join().unwrap(), a);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn outputs_respect_caps(seed in any::<u64>(), max_size in 7usize..32, atom_max in 3usize..12, depth in 3usize..9) {
        let data = dataset(6, 6);
        let mut rng = forge_core::rng::stream(seed, "caps");
        let patches: Vec<Patch> = (0..2).map(|_| Patch((0..12).map(|_| rng.random_range(0.05..1.0)).collect())).collect();
        let cfg = RegressorConfig { seed, max_size, atom_max_size: atom_max.min(max_size), max_depth: depth,
            population_size: 32, generations: 4, scaffold_population: 16, scaffold_generations: 3, ..RegressorConfig::default() };
        let c = run_conjecturer_with(&data, &patches, &cfg, &Default::default()).unwrap();
        for a in &c.atoms {
            prop_assert!(a.statement().tree_size() <= cfg.atom_max_size);
            prop_assert!(a.statement().depth() <= cfg.max_depth);
        }
        if c.result.loss.is_finite() {
            prop_assert!(c.statement.tree_size() <= cfg.max_size);
            prop_assert!(c.statement.depth() <= cfg.max_depth);
        }
    }
}
