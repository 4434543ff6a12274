//! Monte-Carlo checks of the discovery guarantees on categorical systems.

use activeset::discovery::{run_discovery, DiscoveryConfig, TerminatedBy};
use activeset::synthetic::{
    categorical_system, iteration_bound, low_complexity_profile, true_unobserved_mass,
};
use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

pub const MIN_TRIALS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremConfig {
    pub trials: usize,
    pub discovery: DiscoveryConfig,
    pub k0: usize,
    pub alpha0: f64,
    pub tail: usize,
    pub delta0: f64,
    pub seed: u64,
    /// Confidence level of the binomial upper bounds.
    pub confidence: f64,
}

impl Default for TheoremConfig {
    fn default() -> Self {
        Self {
            trials: 200,
            discovery: DiscoveryConfig {
                alpha: 0.1,
                epsilon: 0.05,
                delta: 0.05,
                gamma: 2.0,
                max_m: 22_000,
            },
            k0: 10,
            alpha0: 0.01,
            tail: 1000,
            delta0: 0.05,
            seed: 1,
            confidence: 0.99,
        }
    }
}

/// One suite: how often an event occurred, against the allowed rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub trials: usize,
    pub failures: usize,
    pub fraction: f64,
    pub upper_bound: f64,
    pub allowed: f64,
    pub passed: bool,
}

impl SuiteOutcome {
    fn new(name: &str, trials: usize, failures: usize, allowed: f64, confidence: f64) -> Self {
        let upper = clopper_pearson_upper(failures, trials, confidence);
        Self {
            name: name.to_string(),
            trials,
            failures,
            fraction: failures as f64 / trials as f64,
            upper_bound: upper,
            allowed,
            passed: upper <= allowed,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{}: {}/{} failures ({:.4}), upper bound {:.4} vs allowed {:.4} -> {}",
            self.name,
            self.failures,
            self.trials,
            self.fraction,
            self.upper_bound,
            self.allowed,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

/// One-sided Clopper-Pearson upper bound on a binomial proportion.
pub fn clopper_pearson_upper(failures: usize, trials: usize, confidence: f64) -> f64 {
    if failures >= trials {
        return 1.0;
    }
    let beta = Beta::new(failures as f64 + 1.0, (trials - failures) as f64).expect("positive shape");
    beta.inverse_cdf(confidence)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub config: TheoremConfig,
    pub iteration_bound: f64,
    pub suites: Vec<SuiteOutcome>,
    /// Largest terminating M seen on the profile.
    pub max_m_seen: usize,
}

impl TheoremReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }
}

struct Trial {
    missed_mass: f64,
    m: usize,
    stopped: bool,
}

fn trials(masses: &[f64], cfg: &TheoremConfig) -> Result<Vec<Trial>> {
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let sys = categorical_system(masses, cfg.seed.wrapping_add(t))?;
            let res = run_discovery(cfg.discovery, &sys, &mut |_| {})?;
            Ok(Trial {
                missed_mass: true_unobserved_mass(&sys, &res.observed_first_m())?,
                m: res.m,
                stopped: res.terminated_by == TerminatedBy::StoppingRule,
            })
        })
        .collect::<activeset::Result<_>>()
        .map_err(Into::into)
}

pub fn validate_theorems(cfg: &TheoremConfig) -> Result<TheoremReport> {
    if cfg.trials < MIN_TRIALS {
        bail!("need at least {MIN_TRIALS} trials, got {}", cfg.trials);
    }
    let d = &cfg.discovery;
    let bound = iteration_bound(d.alpha, cfg.alpha0, cfg.k0, cfg.delta0)?;
    let mut suites = Vec::new();

    let single = trials(&[1.0], cfg)?;
    let fails = single.iter().filter(|t| t.missed_mass > 0.0 || !t.stopped).count();
    suites.push(SuiteOutcome::new("single atom, unobserved mass > 0", cfg.trials, fails, d.delta, cfg.confidence));

    let masses = low_complexity_profile(cfg.k0, cfg.alpha0, cfg.tail)?;
    let profile = trials(&masses, cfg)?;
    let fails = profile.iter().filter(|t| t.missed_mass > d.alpha || !t.stopped).count();
    suites.push(SuiteOutcome::new(
        &format!("profile (K0={}, alpha0={}), unobserved mass > alpha", cfg.k0, cfg.alpha0),
        cfg.trials,
        fails,
        d.delta,
        cfg.confidence,
    ));
    let fails = profile.iter().filter(|t| t.m as f64 > bound || !t.stopped).count();
    suites.push(SuiteOutcome::new(
        &format!("profile, M > {bound:.1}"),
        cfg.trials,
        fails,
        d.delta + cfg.delta0,
        cfg.confidence,
    ));

    Ok(TheoremReport {
        config: *cfg,
        iteration_bound: bound,
        suites,
        max_m_seen: profile.iter().map(|t| t.m).max().unwrap_or(0),
    })
}
