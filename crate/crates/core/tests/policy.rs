use std::collections::BTreeSet;

use activeset::dcopf::{build_dcopf, bundled, DcOpfProgram};
use activeset::discovery::{discover_mass, DiscoveryConfig};
use activeset::lp::{check_feasibility, solve_lp, FEAS_TOL};
use activeset::parametric::{
    reduced_instance, solve_for_sample, ActiveSetKey, ParametricProgram, ReductionMode,
};
use activeset::policy::{
    ensemble_predict, evaluate_policy, objectives_match, PolicyStatus,
};
use activeset::random::random_dcopf_network;
use activeset::sampling::{make_distribution, Distribution, DistributionSpec, SampleStream};
use activeset::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(name: &str, seed: u64) -> (DcOpfProgram, Distribution) {
    let net = bundled::load(name).unwrap();
    let prog = build_dcopf(&net).unwrap();
    let dist = make_distribution(&DistributionSpec::normal(seed), &net).unwrap();
    (prog, dist)
}

fn harvest(prog: &dyn ParametricProgram, dist: &dyn SampleStream, n: u64) -> BTreeSet<ActiveSetKey> {
    (1..=n)
        .filter_map(|i| solve_for_sample(prog, &dist.draw(i)).ok())
        .map(|s| s.key)
        .collect()
}

/// Reduced solves for the true key reproduce the optimum, and every other
/// key that is optimal somewhere yields the optimum or an infeasible point.
fn check_sample(prog: &dyn ParametricProgram, keys: &BTreeSet<ActiveSetKey>, dist: &dyn SampleStream, i: u64) {
    let sample = dist.draw(i);
    let Ok(truth) = solve_for_sample(prog, &sample) else { return };
    let opt = truth.solution.objective;
    for mode in [ReductionMode::AsEqualities, ReductionMode::AsInequalities] {
        let red = reduced_instance(prog, &sample, &truth.key, mode).unwrap();
        let sol = solve_lp(&red).unwrap();
        assert!(sol.is_optimal(), "{mode:?}: {}", sol.status);
        assert!(objectives_match(sol.objective, opt), "{mode:?}: {} vs {opt}", sol.objective);
    }
    for key in keys.iter().filter(|k| **k != truth.key) {
        let red = reduced_instance(prog, &sample, key, ReductionMode::AsEqualities).unwrap();
        let sol = solve_lp(&red).unwrap();
        if !sol.is_optimal() {
            continue;
        }
        let feasible = check_feasibility(&truth.instance, &sol.point, FEAS_TOL).unwrap().feasible;
        if feasible {
            let obj = truth.instance.objective_at(&sol.point);
            assert!(objectives_match(obj, opt), "feasible suboptimal: {obj} vs {opt} for {key}");
        }
    }
}

#[test]
fn relaxation_and_dichotomy_on_bundled_cases() {
    for name in ["case3", "case5", "case6_congested"] {
        let (prog, dist) = setup(name, 21);
        let wide = DistributionSpec { sigma_fraction: 0.06, ..DistributionSpec::normal(22) };
        let wide = make_distribution(&wide, &bundled::load(name).unwrap()).unwrap();
        let keys = harvest(&prog, &wide, 400);
        for i in 1..=100 {
            check_sample(&prog, &keys, &dist, i);
        }
    }
}

#[test]
fn relaxation_and_dichotomy_on_random_networks() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let size = rng.random_range(3..=8);
        let net = random_dcopf_network(&mut rng, size);
        let Ok(prog) = build_dcopf(&net) else { continue };
        let spec = DistributionSpec { sigma_fraction: 0.1, ..DistributionSpec::normal(rng.random()) };
        let dist = make_distribution(&spec, &net).unwrap();
        let keys = harvest(&prog, &dist, 200);
        for i in 1000..1020 {
            check_sample(&prog, &keys, &dist, i);
        }
    }
}

#[test]
fn key_is_stable_under_resolve() {
    let (prog, dist) = setup("case6_congested", 5);
    for i in 1..50 {
        let s = solve_for_sample(&prog, &dist.draw(i)).unwrap();
        let again = solve_lp(&s.instance).unwrap();
        let key = activeset::parametric::extract_active_set(&s.instance, &again, FEAS_TOL).unwrap();
        assert_eq!(key, s.key);
    }
}

#[test]
fn foreign_key_predicts_infeasible() {
    let (prog, dist) = setup("case6_congested", 8);
    let keys = harvest(&prog, &dist, 300);
    assert!(keys.len() >= 3);
    let mut seen = false;
    for i in 1000..1200 {
        let s = dist.draw(i);
        let truth = solve_for_sample(&prog, &s).unwrap();
        for key in keys.iter().filter(|k| **k != truth.key) {
            let out = ensemble_predict([key], &prog, &s, ReductionMode::AsEqualities).unwrap();
            if out.status == PolicyStatus::InfeasiblePrediction {
                seen = true;
            } else {
                assert!(objectives_match(out.objective.unwrap(), truth.solution.objective));
            }
        }
        let all = ensemble_predict(&keys, &prog, &s, ReductionMode::AsEqualities).unwrap();
        if keys.contains(&truth.key) {
            assert_eq!(all.status, PolicyStatus::Optimal);
            assert!(objectives_match(all.objective.unwrap(), truth.solution.objective));
        }
    }
    assert!(seen);
}

#[test]
fn evaluation_of_discovered_collection() {
    let (prog, dist) = setup("case6_congested", 1);
    let res = discover_mass(DiscoveryConfig::default(), &prog, &dist, &mut |_| {}).unwrap();
    let keys = res.keys();
    let report = evaluate_policy(&keys, &prog, &dist, 2000, 7, ReductionMode::AsEqualities).unwrap();
    assert_eq!(report.n_test, 2000);
    assert_eq!(report.false_optima, 0);
    assert_eq!(report.failures_with_known_key, 0);
    assert!(report.success_probability >= 0.95);
    assert!((report.success_probability - (1.0 - report.failure_count as f64 / 2000.0)).abs() < 1e-15);
    let hits: usize = report.key_hits.iter().map(|h| h.hits).sum();
    assert_eq!(hits + report.failure_count, 2000);
}

#[test]
fn adding_keys_never_hurts() {
    let (prog, dist) = setup("case6_congested", 2);
    let keys: Vec<ActiveSetKey> = harvest(&prog, &dist, 500).into_iter().collect();
    let mut prev = 0.0;
    for k in 1..=keys.len() {
        let r = evaluate_policy(&keys[..k], &prog, &dist, 400, 3, ReductionMode::AsEqualities).unwrap();
        assert!(r.success_probability >= prev);
        assert_eq!(r.failures_with_known_key, 0);
        prev = r.success_probability;
    }
}

#[test]
fn single_key_case_is_always_right() {
    let (prog, dist) = setup("case3", 4);
    let keys: Vec<_> = harvest(&prog, &dist, 10).into_iter().collect();
    assert_eq!(keys.len(), 1);
    let r = evaluate_policy(&keys, &prog, &dist, 100, 1, ReductionMode::AsEqualities).unwrap();
    assert_eq!(r.success_probability, 1.0);
}

#[test]
fn rejected_inputs() {
    let (prog, dist) = setup("case3", 4);
    let keys: Vec<_> = harvest(&prog, &dist, 10).into_iter().collect();
    assert!(matches!(
        evaluate_policy(&keys, &prog, &dist, 0, 1, ReductionMode::AsEqualities),
        Err(Error::InvalidArgument(_))
    ));
    assert_eq!(
        evaluate_policy(&[], &prog, &dist, 10, 1, ReductionMode::AsEqualities),
        Err(Error::EmptyCollection)
    );
}
