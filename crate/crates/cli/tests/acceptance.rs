//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::BTreeSet;
use std::time::Instant;

use activeset::dcopf::{build_dcopf, build_ptdf, bundled, dc_power_flow, Branch, Bus, Network};
use activeset::discovery::{derived_constants, window_size, DiscoveryConfig, TerminatedBy};
use activeset::lp::{check_feasibility, enumerate_vertices, solve_lp, LpStatus, FEAS_TOL};
use activeset::parametric::{
    reduced_instance, solve_for_sample, ActiveSetKey, ParametricProgram, ReductionMode,
};
use activeset::policy::objectives_match;
use activeset::random::{random_balanced_injections, random_dcopf_network, random_lp, random_network};
use activeset::sampling::{make_distribution, Distribution, DistributionSpec, SampleStream};
use activeset_cli::theorems::{validate_theorems, TheoremConfig};
use activeset_cli::{cmd_discover, cmd_evaluate, Cli, Command};
use anyhow::{ensure, Result};
use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn parse(args: &[&str]) -> Command {
    Cli::try_parse_from([&["activeset"][..], args].concat()).unwrap().command
}

fn discover(args: &[&str]) -> Result<activeset_cli::files::ResultFile> {
    match parse(&[&["discover"][..], args].concat()) {
        Command::Discover(a) => cmd_discover(&a),
        _ => unreachable!(),
    }
}

fn evaluate(args: &[&str]) -> Result<activeset_cli::files::EvalFile> {
    match parse(&[&["evaluate"][..], args].concat()) {
        Command::Evaluate(a) => cmd_evaluate(&a),
        _ => unreachable!(),
    }
}

fn constants() -> Result<String> {
    let cfg = DiscoveryConfig::default();
    let c = derived_constants(&cfg)?;
    let w = window_size(&c, 1);
    let thr = cfg.stopping_threshold();
    ensure!(c.m_lower == 201, "M_lower = {}", c.m_lower);
    ensure!(w == 13259, "W = {w}");
    ensure!((thr - 0.01).abs() < 1e-15, "threshold = {thr}");
    Ok(format!("M_lower={} W={w} threshold={thr:.2}", c.m_lower))
}

fn one_set_cases(dir: &std::path::Path) -> Result<String> {
    let mut notes = Vec::new();
    for case in ["case3", "case5"] {
        for dist in ["normal", "uniform"] {
            let out = dir.join(format!("{case}-{dist}"));
            let out = out.to_str().unwrap();
            let r = discover(&["--case", case, "--dist", dist, "--out", out])?;
            let res = &r.result;
            ensure!(res.terminated_by == TerminatedBy::StoppingRule, "{case}/{dist}: hit max M");
            ensure!(
                res.k_observed() == 1 && res.m == 1 && res.window == 13259 && res.rate == 0.0,
                "{case}/{dist}: K={} M={} W={} R={}",
                res.k_observed(),
                res.m,
                res.window,
                res.rate
            );
            let e = evaluate(&["--case", case, "--result", out, "--n-test", "20000"])?;
            ensure!(
                e.report.success_probability == 1.0,
                "{case}/{dist}: P={}",
                e.report.success_probability
            );
            notes.push(format!("{case}/{dist} P=1.0"));
        }
    }
    Ok(format!("K=1 M=1 W=13259 R=0 for {}", notes.join(", ")))
}

fn multi_set(dir: &std::path::Path) -> Result<String> {
    let out = dir.join("case6");
    let out = out.to_str().unwrap();
    let r = discover(&["--case", "case6_congested", "--out", out])?;
    let res = &r.result;
    ensure!(res.terminated_by == TerminatedBy::StoppingRule, "hit max M");
    ensure!(res.k_observed() >= 3, "K={}", res.k_observed());
    let e = evaluate(&["--case", "case6_congested", "--result", out, "--n-test", "20000"])?;
    let failure = 1.0 - e.report.success_probability;
    ensure!(failure < 0.05, "failure rate {failure}");
    Ok(format!(
        "K={} M={} W={} R={:.4}, failure {}/{} = {failure:.5}",
        res.k_observed(),
        res.m,
        res.window,
        res.rate,
        e.report.failure_count,
        e.report.n_test
    ))
}

fn theorem(index: usize, report: &activeset_cli::theorems::TheoremReport) -> Result<String> {
    let s = &report.suites[index];
    ensure!(s.passed, "{}", s.line());
    Ok(s.line())
}

fn lp_oracle() -> Result<String> {
    let mut optimal = 0;
    for seed in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xAC_0000 + seed);
        let lp = random_lp(&mut rng, 6, 12);
        let sol = solve_lp(&lp)?;
        let vertices = enumerate_vertices(&lp)?;
        match (sol.status, vertices.first()) {
            (LpStatus::Infeasible, None) => {}
            (LpStatus::Optimal, Some((_, best))) => {
                let diff = (sol.objective - best).abs();
                ensure!(diff <= 1e-8 * best.abs().max(1.0), "seed {seed}: {} vs {best}", sol.objective);
                optimal += 1;
            }
            (status, v) => anyhow::bail!("seed {seed}: status {status}, {} vertices", v.map_or(0, |_| 1)),
        }
    }
    Ok(format!("500/500 agree ({optimal} optimal, {} infeasible)", 500 - optimal))
}

fn triangle() -> Network {
    let line = |from, to| Branch { from, to, reactance_pu: 1.0, rate_mw: 0.0 };
    Network {
        base_mva: 100.0,
        slack_bus: 3,
        buses: (1..=3).map(|id| Bus { id, load_mw: 0.0 }).collect(),
        generators: vec![],
        branches: vec![line(1, 2), line(2, 3), line(1, 3)],
        warnings: vec![],
    }
}

fn ptdf() -> Result<String> {
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7D_0000 + seed);
        let n = rng.random_range(2..=20);
        let net = random_network(&mut rng, n);
        let p = build_ptdf(&net)?;
        let inj = random_balanced_injections(&mut rng, n);
        for (a, b) in p.flows(&inj).iter().zip(dc_power_flow(&net, &inj)?) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure!(worst <= 1e-9, "max deviation {worst:e}");
    let flows = build_ptdf(&triangle())?.flows(&[1.0, 0.0, -1.0]);
    let expect = [1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0];
    for (f, e) in flows.iter().zip(expect) {
        ensure!((f - e).abs() <= 1e-12, "triangle flows {flows:?}");
    }
    Ok(format!("max deviation {worst:.1e}, triangle split {flows:.4?}"))
}

struct Pool {
    program: Box<dyn ParametricProgram>,
    dist: Distribution,
    keys: BTreeSet<ActiveSetKey>,
}

fn pool() -> Result<Vec<Pool>> {
    let mut nets: Vec<(Network, f64)> = ["case3", "case5", "case6_congested"]
        .iter()
        .map(|n| (bundled::load(n).unwrap(), 0.05))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0xD1C0);
    while nets.len() < 23 {
        let size = rng.random_range(3..=8);
        nets.push((random_dcopf_network(&mut rng, size), 0.1));
    }
    let mut out = Vec::new();
    for (net, sigma) in nets {
        let Ok(program) = build_dcopf(&net) else { continue };
        let spec = DistributionSpec { sigma_fraction: sigma, ..DistributionSpec::normal(rng.random()) };
        let dist = make_distribution(&spec, &net)?;
        // Keys come from a wider distribution so the pairs see many candidates.
        let wide = DistributionSpec { sigma_fraction: 2.0 * sigma, ..spec };
        let wide = make_distribution(&wide, &net)?;
        let keys = (1..=1000)
            .filter_map(|i| solve_for_sample(&program, &wide.draw(i)).ok())
            .map(|s| s.key)
            .collect();
        out.push(Pool { program: Box::new(program), dist, keys });
    }
    Ok(out)
}

fn relaxation() -> Result<String> {
    let pools = pool()?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    let (mut pairs, mut optimal, mut infeasible) = (0, 0usize, 0usize);
    while pairs < 1000 {
        let p = &pools[rng.random_range(0..pools.len())];
        let sample = p.dist.draw(rng.random_range(10_000..1_000_000));
        let Ok(truth) = solve_for_sample(p.program.as_ref(), &sample) else { continue };
        pairs += 1;
        let opt = truth.solution.objective;
        for mode in [ReductionMode::AsEqualities, ReductionMode::AsInequalities] {
            let sol = solve_lp(&reduced_instance(p.program.as_ref(), &sample, &truth.key, mode)?)?;
            ensure!(sol.is_optimal() && objectives_match(sol.objective, opt), "true key {mode:?}: {} vs {opt}", sol.objective);
        }
        for key in p.keys.iter().filter(|k| **k != truth.key) {
            let red = reduced_instance(p.program.as_ref(), &sample, key, ReductionMode::AsEqualities)?;
            let sol = solve_lp(&red)?;
            if !sol.is_optimal() || !check_feasibility(&truth.instance, &sol.point, FEAS_TOL)?.feasible {
                infeasible += 1;
                continue;
            }
            let obj = truth.instance.objective_at(&sol.point);
            ensure!(objectives_match(obj, opt), "feasible suboptimal {obj} vs {opt} for {key}");
            optimal += 1;
        }
    }
    Ok(format!(
        "1000 pairs over {} cases ({} keys); wrong keys: {optimal} optimal, {infeasible} infeasible, 0 suboptimal",
        pools.len(),
        pools.iter().map(|p| p.keys.len()).sum::<usize>()
    ))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut failed = 0;
    let mut report = |name: &str, outcome: Result<String>, started: Instant| {
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS {name}: {msg} [{secs:.1}s]"),
            Err(e) => {
                failed += 1;
                println!("FAIL {name}: {e:#} [{secs:.1}s]");
            }
        }
    };

    let t = Instant::now();
    report("1 constants", constants(), t);
    let t = Instant::now();
    report("2 one-set cases", one_set_cases(dir.path()), t);
    let t = Instant::now();
    report("3 multi-set discovery", multi_set(dir.path()), t);

    let t = Instant::now();
    let cfg = TheoremConfig::default();
    match validate_theorems(&cfg) {
        Ok(r) => {
            report("4 unobserved mass bound", theorem(1, &r), t);
            report("5 iteration bound", theorem(2, &r), t);
        }
        Err(e) => {
            report("4 unobserved mass bound", Err(anyhow::anyhow!("{e:#}")), t);
            report("5 iteration bound", Err(e), t);
        }
    }

    let t = Instant::now();
    report("6 LP oracle", lp_oracle(), t);
    let t = Instant::now();
    report("7 PTDF", ptdf(), t);
    let t = Instant::now();
    report("8 relaxation and dichotomy", relaxation(), t);

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
