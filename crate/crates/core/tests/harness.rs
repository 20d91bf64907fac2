use idea_core::harness::{
    experiment, is_success, performance_curve, run_batch, tally, Algorithm, Reference, ALGORITHM_NAMES,
};
use idea_core::problems::by_name;
use idea_core::report::Evaluator;
use idea_core::rng;
use rand::Rng;

#[test]
fn every_algorithm_always_solves_the_paraboloid() {
    let p = by_name("paraboloid", Some(3)).unwrap();
    for name in ALGORITHM_NAMES {
        let a = Algorithm::by_name(name, &p).unwrap();
        let stats = performance_curve(&a, &p, &[20_000], 8, 3, Reference::BestKnown).unwrap();
        assert_eq!(stats[0].successes, 8, "{name}");
        assert_eq!(stats[0].p_s, 1.0);
    }
}

#[test]
fn uniform_sampling_never_hits_cassini() {
    // Null baseline: 1000 uniform samples per run.
    let p = by_name("cassini1", None).unwrap();
    let f_best = p.f_best.unwrap();
    let mut hits = 0;
    for run in 0..20 {
        let mut r = rng::child(99, run);
        let mut ev = Evaluator::new(&p, 1000);
        while !ev.exhausted() {
            let u: Vec<f64> = (0..p.dim()).map(|_| r.random::<f64>()).collect();
            ev.eval(&u);
        }
        hits += usize::from(is_success(ev.best_f(), f_best, p.tol_f));
    }
    assert_eq!(hits, 0);
}

#[test]
fn tally_matches_a_hand_count() {
    let p = by_name("rastrigin", Some(2)).unwrap();
    let a = Algorithm::by_name("mbh", &p).unwrap();
    let runs = run_batch(&a, &p, 12, 3000, 5).unwrap();
    let f_ref = 0.0;
    let by_hand = runs
        .iter()
        .filter(|r| (r.report.best_f - f_ref).abs() < p.tol_f)
        .count();
    let s = tally(&runs, &p, f_ref, 5, 3000);
    assert_eq!(s.successes, by_hand);
    assert_eq!(s.runs, 12);
    assert!((s.p_s - by_hand as f64 / 12.0).abs() < 1e-15);
    assert!(s.ci_low <= s.p_s && s.p_s <= s.ci_high);
}

#[test]
fn success_rate_grows_with_the_budget() {
    let p = by_name("rastrigin", Some(4)).unwrap();
    let a = Algorithm::by_name("idea", &p).unwrap();
    let stats = performance_curve(&a, &p, &[2_000, 8_000, 30_000], 16, 21, Reference::BestKnown).unwrap();
    assert!(stats.windows(2).all(|w| w[0].p_s <= w[1].p_s), "{stats:?}");
    assert!(stats.last().unwrap().p_s > 0.0);
}

#[test]
fn experiments_are_reproducible() {
    let p = by_name("schwefel", Some(2)).unwrap();
    let algos: Vec<Algorithm> = ["idea", "mbh-gr"]
        .iter()
        .map(|n| Algorithm::by_name(n, &p).unwrap())
        .collect();
    let run = || experiment(&algos, &p, &[2_000, 4_000], 6, 17, Reference::BestFound).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.best_f, b.best_f);
    assert_eq!(a.f_ref, b.f_ref);
    let p_s = |e: &idea_core::harness::Experiment| e.stats.iter().map(|s| s.successes).collect::<Vec<_>>();
    assert_eq!(p_s(&a), p_s(&b));
    // Algorithm-major, budgets ascending.
    assert_eq!(
        a.stats.iter().map(|s| s.budget).collect::<Vec<_>>(),
        [2_000, 4_000, 2_000, 4_000]
    );
}
