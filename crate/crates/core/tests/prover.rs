use forge_core::prover::*;
use forge_core::statements::*;
use forge_core::surfaces::{generate_surface, make_datapoint, Datapoint, SurfaceKind};
use forge_core::{Error, FeatureVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const T1: &str = "(=> (not (= r2 (+ (- n1 h1) r1))) (not (= (+ n2 h2) (+ h1 w2))))";
const T2: &str = "(=> (= (+ n1 1) w2) (not (= (+ (- h1 w1) w2) 0)))";
const T3: &str = "(=> (= r1 (- w1 r2)) (not (= (- w1 n2) (+ r2 h1))))";
const T4: &str = "(=> (and (= n1 r2) (= (* n2 w2) n2)) (not (= w1 (+ (+ h1 n2) r2))))";
const T5: &str = "(=> (and (= n1 r2) (= n2 1)) (= n2 (- h1 r1)))";
const T6: &str = "(=> (and (= n1 r2) (= n2 1)) (= (- h1 r1) 1))";
const T7: &str = "(=> (and (= w2 (- n1 n2)) (= r2 n1)) (and (= (- (+ w1 1) h1) r2) (= n1 (+ w2 1))))";
const T8: &str = "(= n1 (+ (- r1 h1) w2))";
const T9: &str = "(= (- h1 r1) n2)";
const CHI_ONLY: &str = "(= (+ (- h1 w1) w2) 2)";

use PremiseGroup::*;
const D0: &[PremiseGroup] = &[P0, P1, P2];
const D1: &[PremiseGroup] = &[P0, P1];
const D2: &[PremiseGroup] = &[P0];

fn p(s: &str) -> Statement {
    parse(s).unwrap()
}

fn run(s: &str, groups: &[PremiseGroup]) -> ProofOutcome {
    prove(&p(s), &PremiseSet::from_groups(groups), DEFAULT_BUDGET).unwrap()
}

/// Every structurally feasible vector with heights and widths at most `bound`.
fn feasible(bound: i64) -> Vec<FeatureVector> {
    let mut out = Vec::new();
    for v in 0..=bound {
        for e in 0..=bound {
            for f in 0..=bound {
                for r1 in 0..=v.min(e) {
                    for r2 in 0..=e.min(f) {
                        out.push(FeatureVector::from_dims(v, e, f, r1, r2));
                    }
                }
            }
        }
    }
    out
}

fn check_counterexample(s: &Statement, prem: &PremiseSet, x: &FeatureVector) {
    assert!(x.is_structurally_feasible(), "{x:?}");
    assert!(prem.holds_on(x), "{x:?} violates premises");
    assert!(!s.evaluate(x), "{x:?} satisfies {s}");
}

#[test]
fn golden_statements() {
    for (s, g) in [(T1, D2), (T2, D0), (T3, D0), (T4, D1), (T7, D0)] {
        let out = run(s, g);
        assert_eq!(out.rho, 1.0, "{s}");
        assert!(out.certificate.is_some() && out.counterexample.is_none());
    }
    let out = run(T8, D0);
    assert_eq!(out.rho, 0.0);
    let x = out.counterexample.expect("counterexample");
    check_counterexample(&p(T8), &PremiseSet::from_groups(D0), &x);
    assert_eq!((x.b0(), x.b1(), x.b2()), (1, 2, 1), "torus-shaped");
    let out = run(T9, D2);
    assert_eq!(out.rho, 0.0);
    check_counterexample(&p(T9), &PremiseSet::p0(), &out.counterexample.unwrap());
}

#[test]
fn unprovable_golden_statements_have_counterexamples() {
    // Under rank-nullity alone these do not follow; a brute-force search
    // confirms it independently of the prover.
    let prem = PremiseSet::p0();
    let points = feasible(6);
    for s in [T5, T6] {
        let st = p(s);
        let witness = points.iter().find(|x| prem.holds_on(x) && !st.evaluate(x));
        assert!(witness.is_some(), "{s}");
        let out = run(s, D2);
        assert_eq!(out.rho, 0.0);
        if let Some(x) = out.counterexample {
            check_counterexample(&st, &prem, &x);
        }
    }
    // adding b0 = 1 makes both theorems
    assert_eq!(run(T5, D1).rho, 1.0);
    assert_eq!(run(T6, D1).rho, 1.0);
}

#[test]
fn premise_restatement_and_errors() {
    let out = run("(= (+ r1 n1) w1)", D2);
    assert_eq!(out.rho, 1.0);
    let cert = out.certificate.unwrap();
    assert_eq!(cert.branches.len(), 1);
    assert!(matches!(cert.branches[0].refutation, Refutation::Forced { .. }));
    assert_eq!(run("(= h1 h1)", D2).rho, 1.0);
    assert_eq!(run("(=> (= h1 2) (= h1 2))", &[]).rho, 1.0);

    let s = p(CHI_ONLY);
    assert!(matches!(prove(&s, &PremiseSet::p0(), 0), Err(Error::Parameter(_))));
    let mut bad = PremiseSet::p0();
    bad.insert(AtomicFormula::from_statement(&p("(= h1 1)")).unwrap(), false);
    bad.insert(AtomicFormula::from_statement(&p("(= h1 2)")).unwrap(), false);
    assert!(matches!(prove(&s, &bad, 100), Err(Error::Config(_))));
    // a tiny budget yields rho = 0 without a certificate
    let out = prove(&p(T4), &PremiseSet::from_groups(D1), 3).unwrap();
    assert_eq!(out.rho, 0.0);
    assert!(out.certificate.is_none());
}

#[test]
fn farkas_certificates_verify() {
    let out = run(T4, D1);
    fn walk(r: &Refutation, n: &mut usize) {
        match r {
            Refutation::Farkas(_) => *n += 1,
            Refutation::Split { below, above, .. } => {
                walk(below, n);
                walk(above, n);
            }
            _ => {}
        }
    }
    let mut n = 0;
    for b in &out.certificate.unwrap().branches {
        walk(&b.refutation, &mut n);
    }
    assert!(n > 0, "nonnegativity is needed for this statement");

    use num_bigint::BigInt;
    use num_rational::BigRational;
    let z = |v: i64| BigRational::from_integer(BigInt::from(v));
    // x0 + x1 = -1 has no nonnegative solution
    let sys = LinearSystem { n_vars: 2, equalities: vec![(vec![z(1), z(1)], z(-1))], inequalities: vec![] };
    let mut pivots = 0;
    match feasibility(&sys, 100, &mut pivots) {
        LpOutcome::Infeasible(f) => assert!(f.verify(&sys)),
        _ => panic!("expected infeasible"),
    }
    // x0 - x1 = 3, x0 <= 5 is feasible
    let sys = LinearSystem {
        n_vars: 2,
        equalities: vec![(vec![z(1), z(-1)], z(3))],
        inequalities: vec![(vec![z(1), z(0)], z(5))],
    };
    match feasibility(&sys, 100, &mut pivots) {
        LpOutcome::Feasible(x) => {
            assert_eq!(&x[0] - &x[1], z(3));
            assert!(x[0] <= z(5));
        }
        _ => panic!("expected feasible"),
    }
}

fn random_term(r: &mut ChaCha8Rng, budget: usize) -> Term {
    if budget < 3 || r.random_bool(0.45) {
        return if r.random_bool(0.8) {
            Term::Var(forge_core::Feature::ALL[r.random_range(0..8)])
        } else {
            Term::Const(r.random_range(-2..=3))
        };
    }
    let op = match r.random_range(0..10) {
        0..=4 => ArithOp::Add,
        5..=8 => ArithOp::Sub,
        _ => ArithOp::Mul,
    };
    let left = r.random_range(1..budget - 1);
    Term::bin(op, random_term(r, left), random_term(r, budget - 1 - left))
}

fn random_statement(r: &mut ChaCha8Rng, budget: usize) -> Statement {
    if budget < 7 || r.random_bool(0.3) {
        let b = budget.clamp(3, 9);
        let left = r.random_range(1..b - 1);
        return Statement::eq(random_term(r, left), random_term(r, b - 1 - left));
    }
    match r.random_range(0..5) {
        0 => Statement::not(random_statement(r, budget - 1)),
        1 | 2 => {
            let left = r.random_range(3..budget - 3);
            Statement::implies(random_statement(r, left), random_statement(r, budget - 1 - left))
        }
        _ => {
            let left = r.random_range(3..budget - 3);
            Statement::and(random_statement(r, left), random_statement(r, budget - 1 - left))
        }
    }
}

#[test]
fn soundness_fuzz_against_brute_force() {
    let points = feasible(12);
    let mut r = ChaCha8Rng::seed_from_u64(11);
    let sets = [PremiseSet::p0(), PremiseSet::from_groups(D0)];
    let domains: Vec<Vec<FeatureVector>> =
        sets.iter().map(|s| points.iter().copied().filter(|x| s.holds_on(x)).collect()).collect();
    let (mut proved, mut refuted) = (0, 0);
    for i in 0..1000 {
        let s = random_statement(&mut r, 15);
        assert!(s.tree_size() <= 15);
        let k = i % 2;
        let out = prove(&s, &sets[k], DEFAULT_BUDGET).unwrap();
        if out.rho == 1.0 {
            proved += 1;
            if let Some(x) = domains[k].iter().find(|x| !s.evaluate(x)) {
                panic!("{s} proved under {} but fails at {x:?}", sets[k].describe());
            }
        }
        if let Some(x) = out.counterexample {
            refuted += 1;
            assert_eq!(out.rho, 0.0);
            check_counterexample(&s, &sets[k], &x);
        }
    }
    assert!(proved > 50, "{proved} proved");
    assert!(refuted > 300, "{refuted} refuted");
}

#[test]
fn proofs_survive_extra_premises() {
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let weak = PremiseSet::p0();
    let mut checked = 0;
    for _ in 0..400 {
        let s = random_statement(&mut r, 13);
        if prove(&s, &weak, DEFAULT_BUDGET).unwrap().rho == 1.0 {
            checked += 1;
            for g in [D1, D0] {
                let strong = PremiseSet::from_groups(g);
                assert_eq!(prove(&s, &strong, DEFAULT_BUDGET).unwrap().rho, 1.0, "{s}");
            }
        }
    }
    assert!(checked > 20);
}

fn dataset(kinds: &[SurfaceKind], per_class: usize) -> Vec<Datapoint> {
    let mut out = Vec::new();
    for &k in kinds {
        for i in 0..per_class {
            let size = k.min_size() + i % 4 + 1;
            out.push(make_datapoint(&generate_surface(k, size, i as u64).unwrap()).unwrap());
        }
    }
    out
}

#[test]
fn nondegeneracy_examples() {
    let data = dataset(&[SurfaceKind::Sphere, SurfaceKind::Torus], 8);
    let prem = PremiseSet::from_groups(D0);
    let (pass, harvest) = nondegeneracy(&p("(= (+ r1 n1) w1)"), &data, &prem);
    assert!(!pass);
    assert_eq!(harvest.len(), 1);
    let (pass, harvest) = nondegeneracy(&p("(=> (= h1 2) (= h1 2))"), &data, &prem);
    assert!(!pass && harvest.is_empty());
    assert!(nondegeneracy(&p(CHI_ONLY), &data, &prem).0);
    assert!(nondegeneracy(&p(T2), &data, &prem).0);

    let none = NondegeneracyChecks { universal: false, tautology: false, duplicate: false };
    let v = nondegeneracy_with(&p("(=> (= h1 2) (= h1 2))"), &data, &prem, &[], none);
    assert!(v.pass);
    // a premise restated, with the universal check off, is a duplicate
    let dup = NondegeneracyChecks { universal: false, ..Default::default() };
    let v = nondegeneracy_with(&p("(= w1 (+ n1 r1))"), &data, &prem, &[], dup);
    assert_eq!(v.reason, Some(Degeneracy::Duplicate));
    let earlier = [canonical_key(&p(T2))];
    let v = nondegeneracy_with(&p("(=> (= w2 (+ 1 n1)) (not (= (+ w2 (- h1 w1)) 0)))"), &data, &prem, &earlier, dup);
    assert_eq!(v.reason, Some(Degeneracy::Duplicate));
}

#[test]
fn harvested_truths_become_provable() {
    let data = dataset(&[SurfaceKind::Sphere, SurfaceKind::Torus], 6);
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let base = PremiseSet::p0();
    let mut seen = 0;
    for _ in 0..3000 {
        let s = random_statement(&mut r, 11);
        let universal = data.iter().all(|d| s.evaluate(&d.features));
        let atoms_universal = s
            .atomic_formulae()
            .iter()
            .all(|a| data.iter().all(|d| a.statement().evaluate(&d.features)));
        if !universal || !atoms_universal {
            continue;
        }
        let (pass, harvest) = nondegeneracy(&s, &data, &base);
        if pass {
            // every atom is trivial
            continue;
        }
        seen += 1;
        let mut prem = base.clone();
        prem.harvest(harvest);
        assert_eq!(prove(&s, &prem, DEFAULT_BUDGET).unwrap().rho, 1.0, "{s}");
    }
    // also the premises of the richer dataset, noticed on data
    for text in ["(= (- h1 r1) 1)", "(= n2 1)"] {
        let s = p(text);
        let (pass, harvest) = nondegeneracy(&s, &data, &base);
        assert!(!pass);
        let mut prem = base.clone();
        prem.harvest(harvest);
        assert_eq!(prove(&s, &prem, DEFAULT_BUDGET).unwrap().rho, 1.0);
    }
    assert!(seen > 0);
}

#[test]
fn noisy_rho_statistics() {
    let zero = run(T8, D0);
    let one = run(T1, D2);
    assert_eq!(noisy_rho(&one, 0.0, 3), 1.0);
    let n = 10_000;
    let mean = (0..n).map(|s| noisy_rho(&zero, NOISY_SIGMA, s)).sum::<f64>() / n as f64;
    assert!(mean.abs() < 0.01, "mean {mean}");
    let above = (0..n).filter(|&s| noisy_rho(&one, NOISY_SIGMA, s) > NOISY_THRESHOLD).count();
    assert!(above as f64 >= 0.97 * n as f64, "{above}");
    assert_eq!(noisy_rho(&one, 0.25, 9), noisy_rho(&one, 0.25, 9));
}

#[test]
fn lean_export() {
    let s = p(T1);
    let prem = PremiseSet::p0();
    let text = export_lean(&s, &prem);
    assert_eq!(text, export_lean(&s, &prem));
    assert!(text.starts_with("import Mathlib\n"));
    for needle in ["[DivisionRing R]", "{V0 : Type*}", "{V2 : Type*}", "(D1 : V1 →ₗ[R] V0)", "(D2 : V2 →ₗ[R] V1)"] {
        assert!(text.contains(needle), "{needle}");
    }
    let hyps: Vec<&str> = text.lines().filter(|l| l.trim_start().starts_with("(p")).collect();
    assert_eq!(hyps.len(), 2);
    assert!(hyps[0].contains("(p1 : ((finrank R (LinearMap.range D1) : ℤ) + (finrank R (LinearMap.ker D1) : ℤ)) = (finrank R V1 : ℤ))"));
    assert!(hyps[1].trim_start().starts_with("(p2 :"));
    assert!(text.contains("grind"));
    let name = lean_file_name(&s, &prem);
    assert!(name.starts_with("lean/stmt_") && name.ends_with(".lean"));
    assert!(text.contains(&format!("theorem stmt_{}", lean_hash(&s, &prem))));
    assert_ne!(lean_hash(&s, &prem), lean_hash(&s, &PremiseSet::from_groups(D0)));

    let mul = export_lean(&p("(= (* n2 w2) n2)"), &prem);
    assert!(mul.contains("((finrank R (LinearMap.ker D2) : ℤ) * (finrank R V2 : ℤ)) = (finrank R (LinearMap.ker D2) : ℤ)"));
    let neg = export_lean(&p("(= h1 -3)"), &prem);
    assert!(neg.contains("(-3 : ℤ)"));
}
