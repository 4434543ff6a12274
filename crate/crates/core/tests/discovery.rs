use activeset::dcopf::{build_dcopf, bundled};
use activeset::discovery::{
    derived_constants, discover_mass, resume, run_discovery, window_size, Discovery,
    DiscoveryConfig, KeySource, LpKeySource, RunMetadata, TerminatedBy,
};
use activeset::sampling::{make_distribution, DistributionSpec};
use activeset::synthetic::{categorical_system, low_complexity_profile, true_unobserved_mass};
use activeset::Error;
use proptest::prelude::*;

fn light() -> DiscoveryConfig {
    DiscoveryConfig {
        alpha: 0.1,
        epsilon: 0.05,
        delta: 0.05,
        gamma: 2.0,
        max_m: 2000,
    }
}

#[test]
fn light_constants() {
    let k = derived_constants(&light()).unwrap();
    assert!((k.c - 1600.0).abs() < 1e-9);
    assert_eq!(k.m_lower, 41);
    assert_eq!(window_size(&k, 1), 5942);
}

#[test]
fn single_atom_system() {
    let sys = categorical_system(&[1.0], 3).unwrap();
    let res = run_discovery(DiscoveryConfig::default(), &sys, &mut |_| {}).unwrap();
    assert_eq!((res.k_observed(), res.m, res.window), (1, 1, 13_259));
    assert_eq!(res.rate, 0.0);
    assert_eq!(res.terminated_by, TerminatedBy::StoppingRule);
}

#[test]
fn two_equal_atoms() {
    for seed in 0..100 {
        let sys = categorical_system(&[0.5, 0.5], seed).unwrap();
        let res = run_discovery(DiscoveryConfig::default(), &sys, &mut |_| {}).unwrap();
        assert_eq!(res.k_observed(), 2, "seed {seed}");
        assert!(res.m <= 40, "seed {seed}: M = {}", res.m);
        assert_eq!(true_unobserved_mass(&sys, &res.keys()).unwrap(), 0.0);
    }
}

#[test]
fn categorical_frequencies() {
    let sys = categorical_system(&[0.6, 0.3, 0.1], 17).unwrap();
    let n = 100_000u64;
    let mut counts = [0usize; 3];
    for i in 1..=n {
        counts[sys.draw(i) as usize - 1] += 1;
    }
    for (c, p) in counts.iter().zip([0.6, 0.3, 0.1]) {
        let f = *c as f64 / n as f64;
        assert!((f - p).abs() <= 4.0 * (p * (1.0 - p) / n as f64).sqrt(), "{f} vs {p}");
    }
}

#[test]
fn observed_set_grows_monotonically() {
    let masses = low_complexity_profile(10, 0.01, 1000).unwrap();
    let sys = categorical_system(&masses, 5).unwrap();
    let mut run = Discovery::new(light(), &sys).unwrap();
    let mut prev: Vec<u32> = Vec::new();
    while run.step().unwrap().is_none() {
        let now = run.state().observed().to_vec();
        assert!(now.starts_with(&prev));
        for k in &prev {
            assert_eq!(run.state().first_occurrence(k), Some(
                (1..).find(|&p| run.state().key_at_position(p) == Some(k)).unwrap()
            ));
        }
        prev = now;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn incremental_rate_matches_key_log(seed in any::<u64>(), k in 2usize..40, skew in 0.5f64..3.0) {
        let raw: Vec<f64> = (1..=k).map(|i| (i as f64).powf(-skew)).collect();
        let total: f64 = raw.iter().sum();
        let mut masses: Vec<f64> = raw.iter().map(|m| m / total).collect();
        let sum: f64 = masses.iter().sum();
        masses[0] += 1.0 - sum;
        let sys = categorical_system(&masses, seed).unwrap();
        let cfg = DiscoveryConfig { epsilon: 0.09, max_m: 300, ..light() };
        let mut run = Discovery::new(cfg, &sys).unwrap();
        loop {
            let m = run.m();
            let done = run.step().unwrap();
            let p = run.progress();
            let direct = run.state().rate_of_discovery(m, p.window).unwrap();
            prop_assert_eq!(p.rate, direct);
            if done.is_some() {
                break;
            }
        }
    }
}

#[test]
fn resume_matches_straight_run() {
    let masses = low_complexity_profile(10, 0.01, 1000).unwrap();
    let sys = categorical_system(&masses, 77).unwrap();
    let mut straight = run_discovery(light(), &sys, &mut |_| {}).unwrap();
    let mut run = Discovery::new(light(), &sys).unwrap();
    for _ in 0..10 {
        run.step().unwrap();
    }
    let json = serde_json::to_string(&run.snapshot()).unwrap();
    let mut resumed = resume(serde_json::from_str(&json).unwrap(), light(), &sys, &mut |_| {}).unwrap();
    straight.metadata = RunMetadata::default();
    resumed.metadata = RunMetadata::default();
    assert_eq!(
        serde_json::to_string(&straight).unwrap(),
        serde_json::to_string(&resumed).unwrap()
    );
}

#[test]
fn resume_after_termination_returns_immediately() {
    let sys = categorical_system(&[1.0], 1).unwrap();
    let mut run = Discovery::new(light(), &sys).unwrap();
    let first = run.run(&mut |_| {}).unwrap();
    let mut calls = 0;
    let again = resume(run.snapshot(), light(), &sys, &mut |_| calls += 1).unwrap();
    assert_eq!(calls, 0);
    assert_eq!(again.m, first.m);
    assert_eq!(again.observed, first.observed);
}

#[test]
fn snapshot_rejects_other_seed() {
    let sys = categorical_system(&[0.5, 0.5], 1).unwrap();
    let mut run = Discovery::new(light(), &sys).unwrap();
    run.step().unwrap();
    let other = sys.with_seed(2);
    assert!(matches!(
        Discovery::from_snapshot(run.snapshot(), light(), &other),
        Err(Error::SnapshotMismatch(_))
    ));
}

#[test]
fn dcopf_single_set_case() {
    let net = bundled::load("case3").unwrap();
    let prog = build_dcopf(&net).unwrap();
    let dist = make_distribution(&DistributionSpec::normal(1), &net).unwrap();
    let res = discover_mass(DiscoveryConfig::default(), &prog, &dist, &mut |_| {}).unwrap();
    assert_eq!((res.k_observed(), res.m, res.window), (1, 1, 13_259));
    assert_eq!(res.rate, 0.0);
    assert_eq!(res.samples, 13_260);
    assert_eq!(res.infeasible, 0);
    assert_eq!(res.observed[0].frequency, 1.0);
}

#[test]
fn dcopf_snapshot_tracks_distribution_seed() {
    let net = bundled::load("case6_congested").unwrap();
    let prog = build_dcopf(&net).unwrap();
    let a = make_distribution(&DistributionSpec::normal(1), &net).unwrap();
    let b = a.with_seed(2);
    let sa = LpKeySource::new(&prog, &a).unwrap();
    let sb = LpKeySource::new(&prog, &b).unwrap();
    assert_ne!(sa.fingerprint(), sb.fingerprint());
    let mut run = Discovery::new(light(), &sa).unwrap();
    run.step().unwrap();
    assert!(matches!(
        Discovery::from_snapshot(run.snapshot(), light(), &sb),
        Err(Error::SnapshotMismatch(_))
    ));
}

#[test]
fn parallel_and_sequential_runs_agree() {
    let net = bundled::load("case6_congested").unwrap();
    let prog = build_dcopf(&net).unwrap();
    let dist = make_distribution(&DistributionSpec::uniform(4), &net).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let mut one = pool
        .install(|| discover_mass(light(), &prog, &dist, &mut |_| {}))
        .unwrap();
    let mut many = discover_mass(light(), &prog, &dist, &mut |_| {}).unwrap();
    one.metadata = RunMetadata::default();
    many.metadata = RunMetadata::default();
    assert_eq!(one, many);
}
