//! Ensemble prediction over a collection of active sets, and its
//! out-of-sample evaluation.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{check_feasibility, solve_lp, FEAS_TOL};
use crate::parametric::{
    reduce_instance, solve_for_sample, ActiveSetKey, ParametricProgram, ReductionMode, Sample,
};
use crate::sampling::SampleStream;

/// Relative tolerance for comparing a prediction with the full optimum.
pub const OBJECTIVE_TOL: f64 = 1e-8;

/// Evaluation samples live in the top half of the index space, so they
/// never coincide with training draws.
const EVAL_INDEX_BASE: u64 = 1 << 63;
const EVAL_SEED_MASK: u64 = 0x7fff_ffff;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolicyStatus {
    Optimal,
    InfeasiblePrediction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyOutcome {
    pub status: PolicyStatus,
    pub chosen_key: Option<ActiveSetKey>,
    pub point: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub candidates_tried: usize,
}

impl PolicyOutcome {
    fn infeasible(tried: usize) -> Self {
        Self {
            status: PolicyStatus::InfeasiblePrediction,
            chosen_key: None,
            point: None,
            objective: None,
            candidates_tried: tried,
        }
    }
}

pub fn objectives_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= OBJECTIVE_TOL * b.abs().max(1.0)
}

/// Solves the reduced problem for every key and returns the cheapest
/// candidate that is feasible for the full instance. Keys are visited in
/// canonical order; near-ties keep the earlier key.
pub fn ensemble_predict<'k>(
    collection: impl IntoIterator<Item = &'k ActiveSetKey>,
    program: &dyn ParametricProgram,
    sample: &Sample,
    mode: ReductionMode,
) -> Result<PolicyOutcome> {
    let keys: BTreeSet<&ActiveSetKey> = collection.into_iter().collect();
    if keys.is_empty() {
        return Err(Error::EmptyCollection);
    }
    if let Some(k) = keys.iter().find(|k| k.rows() != program.n_ineq()) {
        return Err(Error::DimensionMismatch(format!(
            "key over {} rows, program has {} inequalities",
            k.rows(),
            program.n_ineq()
        )));
    }
    if !program.admits(sample)? {
        return Ok(PolicyOutcome::infeasible(0));
    }
    let full = program.instantiate(sample)?;
    let keys: Vec<&ActiveSetKey> = keys.into_iter().collect();
    let candidates: Vec<Option<(Vec<f64>, f64)>> = keys
        .par_iter()
        .map(|key| -> Result<Option<(Vec<f64>, f64)>> {
            let reduced = reduce_instance(&full, key, mode)?;
            let sol = match solve_lp(&reduced) {
                Ok(sol) if sol.is_optimal() => sol,
                Ok(_) => return Ok(None),
                Err(Error::NumericalBreakdown(msg)) => {
                    log::debug!("reduced solve for {key} broke down: {msg}");
                    return Ok(None);
                }
                Err(e) => return Err(e),
            };
            let report = check_feasibility(&full, &sol.point, FEAS_TOL)?;
            if !report.feasible {
                return Ok(None);
            }
            let obj = full.objective_at(&sol.point);
            Ok(Some((sol.point, obj)))
        })
        .collect::<Result<_>>()?;

    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        if let Some((_, obj)) = c {
            let better = match best {
                None => true,
                Some((_, b)) => *obj < b && !objectives_match(*obj, b),
            };
            if better {
                best = Some((i, *obj));
            }
        }
    }
    let tried = keys.len();
    Ok(match best {
        None => PolicyOutcome::infeasible(tried),
        Some((i, obj)) => PolicyOutcome {
            status: PolicyStatus::Optimal,
            chosen_key: Some(keys[i].clone()),
            point: candidates[i].as_ref().map(|(p, _)| p.clone()),
            objective: Some(obj),
            candidates_tried: tried,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyHits {
    pub key: ActiveSetKey,
    pub hits: usize,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n_test: usize,
    pub eval_seed: u64,
    pub success_probability: f64,
    pub failure_count: usize,
    /// Predictions that were feasible but disagreed with the full optimum.
    pub false_optima: usize,
    /// Failures whose true key belongs to the collection.
    pub failures_with_known_key: usize,
    /// Test draws skipped because the sampled instance was infeasible.
    pub excluded_infeasible: u64,
    pub max_relative_gap: f64,
    pub mean_relative_gap: f64,
    /// How often each key was the chosen candidate, canonical order.
    pub key_hits: Vec<KeyHits>,
}

enum Trial {
    Excluded,
    Done {
        success: bool,
        false_optimum: bool,
        known_key: bool,
        gap: f64,
        chosen: Option<ActiveSetKey>,
    },
}

fn eval_index(eval_seed: u64, i: u64) -> u64 {
    EVAL_INDEX_BASE | ((eval_seed & EVAL_SEED_MASK) << 32) | i
}

fn run_trial(
    keys: &BTreeSet<ActiveSetKey>,
    program: &dyn ParametricProgram,
    sample: &Sample,
    mode: ReductionMode,
) -> Result<Trial> {
    let truth = match solve_for_sample(program, sample) {
        Ok(t) => t,
        Err(Error::SampleInfeasible { .. }) => return Ok(Trial::Excluded),
        Err(e) => return Err(e),
    };
    let outcome = ensemble_predict(keys, program, sample, mode)?;
    let known_key = keys.contains(&truth.key);
    let full_obj = truth.solution.objective;
    Ok(match outcome.objective {
        Some(obj) if outcome.status == PolicyStatus::Optimal => {
            let matched = objectives_match(obj, full_obj);
            Trial::Done {
                success: matched,
                false_optimum: !matched,
                known_key,
                gap: (obj - full_obj).abs() / full_obj.abs().max(1.0),
                chosen: outcome.chosen_key,
            }
        }
        _ => Trial::Done {
            success: false,
            false_optimum: false,
            known_key,
            gap: 0.0,
            chosen: None,
        },
    })
}

/// Runs the ensemble policy on `n_test` fresh feasible samples and checks
/// each prediction against a full solve.
///
/// Samples come from `stream` at indices reserved for evaluation and keyed
/// by `eval_seed`; infeasible draws are replaced by later ones.
pub fn evaluate_policy(
    collection: &[ActiveSetKey],
    program: &dyn ParametricProgram,
    stream: &dyn SampleStream,
    n_test: usize,
    eval_seed: u64,
    mode: ReductionMode,
) -> Result<EvalReport> {
    if n_test == 0 {
        return Err(Error::InvalidArgument("n_test must be at least 1".into()));
    }
    if collection.is_empty() {
        return Err(Error::EmptyCollection);
    }
    if stream.sample_len() != program.sample_len() {
        return Err(Error::DimensionMismatch(format!(
            "program expects samples of length {}, stream produces {}",
            program.sample_len(),
            stream.sample_len()
        )));
    }
    let keys: BTreeSet<ActiveSetKey> = collection.iter().cloned().collect();
    let mut next = 1u64;
    let mut done = 0usize;
    let mut excluded = 0u64;
    let mut failures = 0usize;
    let mut false_optima = 0usize;
    let mut failures_known = 0usize;
    let mut gap_max = 0.0f64;
    let mut gap_sum = 0.0f64;
    let mut hits: BTreeMap<ActiveSetKey, usize> = BTreeMap::new();

    while done < n_test {
        let batch = (n_test - done) as u64;
        if next + batch >= 1 << 32 {
            return Err(Error::InsufficientSamples {
                needed: n_test,
                available: done,
            });
        }
        let trials: Vec<Trial> = (next..next + batch)
            .into_par_iter()
            .map(|i| run_trial(&keys, program, &stream.draw(eval_index(eval_seed, i)), mode))
            .collect::<Result<_>>()?;
        next += batch;
        for t in trials {
            match t {
                Trial::Excluded => excluded += 1,
                Trial::Done {
                    success,
                    false_optimum,
                    known_key,
                    gap,
                    chosen,
                } => {
                    done += 1;
                    if success {
                        gap_max = gap_max.max(gap);
                        gap_sum += gap;
                        if let Some(k) = chosen {
                            *hits.entry(k).or_default() += 1;
                        }
                    } else {
                        failures += 1;
                        false_optima += false_optimum as usize;
                        failures_known += known_key as usize;
                    }
                }
            }
        }
    }
    if excluded > 0 {
        log::info!("{excluded} infeasible test samples excluded");
    }
    let successes = n_test - failures;
    Ok(EvalReport {
        n_test,
        eval_seed,
        success_probability: 1.0 - failures as f64 / n_test as f64,
        failure_count: failures,
        false_optima,
        failures_with_known_key: failures_known,
        excluded_infeasible: excluded,
        max_relative_gap: gap_max,
        mean_relative_gap: if successes > 0 { gap_sum / successes as f64 } else { 0.0 },
        key_hits: hits
            .into_iter()
            .map(|(key, hits)| KeyHits {
                key,
                hits,
                frequency: hits as f64 / n_test as f64,
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::LpBuilder;
    use crate::parametric::AffineProgram;

    /// min -x - y  s.t.  x <= 1 + w, y <= 1, x + y <= 1.5, x, y >= 0.
    fn program() -> AffineProgram {
        let nominal = LpBuilder::new(vec![-1.0, -1.2])
            .le(vec![1.0, 0.0], 1.0)
            .le(vec![0.0, 1.0], 1.0)
            .le(vec![1.0, 1.0], 1.5)
            .ge(vec![1.0, 0.0], 0.0)
            .ge(vec![0.0, 1.0], 0.0)
            .build()
            .unwrap();
        let sens = vec![vec![1.0], vec![0.0], vec![0.0], vec![0.0], vec![0.0]];
        let labels = (0..5).map(|i| format!("r{i}")).collect();
        AffineProgram::new(nominal, vec![], sens, labels, vec![], 1).unwrap()
    }

    #[test]
    fn true_key_reproduces_optimum() {
        let p = program();
        let s = Sample::new(vec![0.0], 1);
        let truth = solve_for_sample(&p, &s).unwrap();
        let out = ensemble_predict([&truth.key], &p, &s, ReductionMode::AsEqualities).unwrap();
        assert_eq!(out.status, PolicyStatus::Optimal);
        assert!(objectives_match(out.objective.unwrap(), truth.solution.objective));
        assert_eq!(out.chosen_key.as_ref(), Some(&truth.key));
    }

    #[test]
    fn empty_collection() {
        let p = program();
        let none: [&ActiveSetKey; 0] = [];
        assert_eq!(
            ensemble_predict(none, &p, &Sample::zeros(1), ReductionMode::AsEqualities),
            Err(Error::EmptyCollection)
        );
    }

    #[test]
    fn foreign_key_is_rejected_or_optimal() {
        let p = program();
        // Key optimal at w = -0.8, where x <= 0.2 binds.
        let other = solve_for_sample(&p, &Sample::new(vec![-0.8], 1)).unwrap().key;
        let s = Sample::new(vec![0.0], 2);
        let truth = solve_for_sample(&p, &s).unwrap();
        assert_ne!(other, truth.key);
        let out = ensemble_predict([&other], &p, &s, ReductionMode::AsEqualities).unwrap();
        assert_eq!(out.status, PolicyStatus::InfeasiblePrediction);
        let both = ensemble_predict([&other, &truth.key], &p, &s, ReductionMode::AsEqualities)
            .unwrap();
        assert_eq!(both.status, PolicyStatus::Optimal);
        assert_eq!(both.candidates_tried, 2);
    }

    #[test]
    fn eval_indices_are_disjoint_from_training() {
        assert!(eval_index(0, 1) > 1 << 62);
        assert_ne!(eval_index(1, 1), eval_index(2, 1));
    }
}
