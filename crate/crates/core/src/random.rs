//! Random instance generators for property tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dcopf::{Branch, Bus, Generator, Network};
use crate::lp::LpInstance;

fn nonzero_row(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    loop {
        let row: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.2) {
                    rng.random_range(-4.0..4.0)
                } else {
                    rng.random_range(-4i32..=4) as f64
                }
            })
            .collect();
        if row.iter().any(|v| *v != 0.0) {
            return row;
        }
    }
}

/// A random LP with at most `max_vars` variables and `max_rows`
/// inequalities whose feasible region is bounded (it may be empty).
///
/// Small instances are boxed, larger ones sit in a scaled simplex, and both
/// get extra random cuts and sometimes an equality. Integer data is common,
/// so degenerate vertices and ties show up often.
pub fn random_lp(rng: &mut impl Rng, max_vars: usize, max_rows: usize) -> LpInstance {
    assert!(max_vars >= 1 && max_rows > max_vars, "need room for bounding rows");
    let n = rng.random_range(1..=max_vars);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let unit = |i: usize, s: f64| {
        let mut r = vec![0.0; n];
        r[i] = s;
        r
    };
    if 2 * n <= max_rows && rng.random_bool(0.5) {
        for i in 0..n {
            let b = rng.random_range(1i32..=5) as f64;
            rows.push(unit(i, 1.0));
            rhs.push(b);
            rows.push(unit(i, -1.0));
            rhs.push(rng.random_range(0i32..=5) as f64);
        }
    } else {
        for i in 0..n {
            rows.push(unit(i, -1.0));
            rhs.push(0.0);
        }
        rows.push(vec![1.0; n]);
        rhs.push(rng.random_range(1i32..=8) as f64);
    }
    let extra = rng.random_range(0..=max_rows - rows.len());
    for _ in 0..extra {
        rows.push(nonzero_row(rng, n));
        rhs.push(if rng.random_bool(0.5) {
            rng.random_range(-3i32..=6) as f64
        } else {
            rng.random_range(-3.0..6.0)
        });
    }
    let (eq, eq_rhs) = if rng.random_bool(0.3) {
        (vec![nonzero_row(rng, n)], vec![rng.random_range(-2i32..=4) as f64])
    } else {
        (vec![], vec![])
    };
    let cost: Vec<f64> = (0..n).map(|_| rng.random_range(-5i32..=5) as f64).collect();
    LpInstance::new(cost, eq, eq_rhs, rows, rhs).expect("generated rows are well formed")
}

fn random_line(rng: &mut impl Rng, a: usize, b: usize) -> Branch {
    let (from, to) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
    Branch {
        from,
        to,
        reactance_pu: rng.random_range(0.02..0.5),
        rate_mw: 0.0,
    }
}

/// A random connected network with `n_buses` buses and no generators:
/// a random spanning tree plus a few extra branches.
pub fn random_network(rng: &mut impl Rng, n_buses: usize) -> Network {
    assert!(n_buses >= 1);
    let mut ids: Vec<usize> = (1..=n_buses).collect();
    ids.shuffle(rng);
    let mut branches = Vec::new();
    for i in 1..n_buses {
        let j = rng.random_range(0..i);
        branches.push(random_line(rng, ids[i], ids[j]));
    }
    if n_buses > 2 {
        for _ in 0..rng.random_range(0..=n_buses) {
            let a = rng.random_range(0..n_buses);
            let b = rng.random_range(0..n_buses);
            if a != b {
                branches.push(random_line(rng, ids[a], ids[b]));
            }
        }
    }
    Network {
        base_mva: 100.0,
        slack_bus: ids[rng.random_range(0..n_buses)],
        buses: (1..=n_buses)
            .map(|id| Bus {
                id,
                load_mw: if rng.random_bool(0.6) {
                    rng.random_range(10.0..150.0)
                } else {
                    0.0
                },
            })
            .collect(),
        generators: vec![],
        branches,
        warnings: vec![],
    }
}

/// A random network with generators and finite ratings, sized so that
/// most load perturbations of a few percent remain feasible.
pub fn random_dcopf_network(rng: &mut impl Rng, n_buses: usize) -> Network {
    let mut net = random_network(rng, n_buses.max(2));
    if net.total_load_mw() == 0.0 {
        net.buses[0].load_mw = 100.0;
    }
    let load = net.total_load_mw();
    let n_gen = rng.random_range(2..=4);
    let mut costs: Vec<f64> = (0..n_gen).map(|k| 10.0 + 7.0 * k as f64).collect();
    costs.shuffle(rng);
    net.generators = costs
        .into_iter()
        .map(|cost| Generator {
            bus: rng.random_range(1..=net.buses.len()),
            pmin_mw: 0.0,
            pmax_mw: load * rng.random_range(0.4..0.9),
            cost_per_mwh: cost,
        })
        .collect();
    let cap: f64 = net.generators.iter().map(|g| g.pmax_mw).sum();
    if cap < 1.3 * load {
        let scale = 1.3 * load / cap;
        for g in &mut net.generators {
            g.pmax_mw *= scale;
        }
    }
    for br in &mut net.branches {
        br.rate_mw = if rng.random_bool(0.7) {
            load * rng.random_range(0.3..1.0)
        } else {
            0.0
        };
    }
    net
}

/// Random per-bus injections summing to zero (to rounding).
pub fn random_balanced_injections(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mean = p.iter().sum::<f64>() / n as f64;
    for v in &mut p {
        *v -= mean;
    }
    let residual: f64 = p.iter().sum();
    p[0] -= residual;
    p
}
