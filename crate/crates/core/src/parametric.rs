//! Parametric programs `ω ↦ LP`, canonical active-set keys, and the reduced
//! problems obtained by keeping only the constraints in a key.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LpInstance, LpSolution, LpStatus, FEAS_TOL};

/// One parameter realization drawn from a stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub values: Vec<f64>,
    /// Position in the generating stream (1-based).
    pub index: u64,
}

impl Sample {
    pub fn new(values: Vec<f64>, index: u64) -> Self {
        Self { values, index }
    }

    pub fn zeros(len: usize) -> Self {
        Self::new(vec![0.0; len], 0)
    }
}

/// A family of linear programs indexed by a parameter vector.
///
/// Every instance produced by [`instantiate`](ParametricProgram::instantiate)
/// has the same shape and row ordering; only coefficients and right-hand
/// sides may depend on the sample.
pub trait ParametricProgram: Send + Sync {
    fn n_vars(&self) -> usize;

    /// Number of inequality rows, i.e. the length of every active-set key.
    fn n_ineq(&self) -> usize;

    /// Expected length of `Sample::values`.
    fn sample_len(&self) -> usize;

    /// Human-readable name of each inequality row.
    fn labels(&self) -> &[String];

    fn instantiate(&self, sample: &Sample) -> Result<LpInstance>;

    /// Constraints that involve only the parameter (no decision variable)
    /// are checked here rather than carried as LP rows. Returns `false`
    /// when the sample makes the problem infeasible on those grounds.
    fn admits(&self, _sample: &Sample) -> Result<bool> {
        Ok(true)
    }

    /// Stable hash of everything that determines the instances.
    fn fingerprint(&self) -> u64;
}

/// A row that contains no decision variable: `0 <= rhs + sensitivityᵀω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterGuard {
    pub label: String,
    pub rhs: f64,
    pub sensitivity: Vec<f64>,
}

/// Program whose right-hand sides are affine in the parameter:
/// `f(ω) = f₀ + Fω`, `b(ω) = b₀ + Bω`, with fixed cost and matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineProgram {
    nominal: LpInstance,
    eq_sensitivity: Vec<Vec<f64>>,
    ineq_sensitivity: Vec<Vec<f64>>,
    labels: Vec<String>,
    guards: Vec<ParameterGuard>,
    sample_len: usize,
}

impl AffineProgram {
    pub fn new(
        nominal: LpInstance,
        eq_sensitivity: Vec<Vec<f64>>,
        ineq_sensitivity: Vec<Vec<f64>>,
        labels: Vec<String>,
        guards: Vec<ParameterGuard>,
        sample_len: usize,
    ) -> Result<Self> {
        if eq_sensitivity.len() != nominal.n_eq() || ineq_sensitivity.len() != nominal.n_ineq() {
            return Err(Error::DimensionMismatch(
                "sensitivity rows do not match instance rows".into(),
            ));
        }
        if labels.len() != nominal.n_ineq() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} inequality rows",
                labels.len(),
                nominal.n_ineq()
            )));
        }
        let widths_ok = eq_sensitivity
            .iter()
            .chain(&ineq_sensitivity)
            .map(Vec::len)
            .chain(guards.iter().map(|g| g.sensitivity.len()))
            .all(|w| w == sample_len);
        if !widths_ok {
            return Err(Error::DimensionMismatch(format!(
                "sensitivity width differs from sample length {sample_len}"
            )));
        }
        Ok(Self {
            nominal,
            eq_sensitivity,
            ineq_sensitivity,
            labels,
            guards,
            sample_len,
        })
    }

    pub fn nominal(&self) -> &LpInstance {
        &self.nominal
    }

    pub fn guards(&self) -> &[ParameterGuard] {
        &self.guards
    }

    fn check_len(&self, sample: &Sample) -> Result<()> {
        if sample.values.len() != self.sample_len {
            return Err(Error::DimensionMismatch(format!(
                "sample has {} values, program expects {}",
                sample.values.len(),
                self.sample_len
            )));
        }
        Ok(())
    }
}

fn shifted(base: &[f64], sens: &[Vec<f64>], omega: &[f64]) -> Vec<f64> {
    base.iter()
        .zip(sens)
        .map(|(b, row)| b + row.iter().zip(omega).map(|(s, w)| s * w).sum::<f64>())
        .collect()
}

impl ParametricProgram for AffineProgram {
    fn n_vars(&self) -> usize {
        self.nominal.n_vars()
    }

    fn n_ineq(&self) -> usize {
        self.nominal.n_ineq()
    }

    fn sample_len(&self) -> usize {
        self.sample_len
    }

    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn instantiate(&self, sample: &Sample) -> Result<LpInstance> {
        self.check_len(sample)?;
        let w = &sample.values;
        LpInstance::new(
            self.nominal.cost().to_vec(),
            self.nominal.eq_matrix().to_vec(),
            shifted(self.nominal.eq_rhs(), &self.eq_sensitivity, w),
            self.nominal.ineq_matrix().to_vec(),
            shifted(self.nominal.ineq_rhs(), &self.ineq_sensitivity, w),
        )
    }

    fn admits(&self, sample: &Sample) -> Result<bool> {
        self.check_len(sample)?;
        Ok(self.guards.iter().all(|g| {
            let v = g.rhs
                + g.sensitivity
                    .iter()
                    .zip(&sample.values)
                    .map(|(s, w)| s * w)
                    .sum::<f64>();
            v >= -FEAS_TOL * g.rhs.abs().max(1.0)
        }))
    }

    fn fingerprint(&self) -> u64 {
        let mut h = Fnv64::new();
        let n = &self.nominal;
        h.write_f64s(n.cost());
        for row in n.eq_matrix().iter().chain(n.ineq_matrix()) {
            h.write_f64s(row);
        }
        h.write_f64s(n.eq_rhs());
        h.write_f64s(n.ineq_rhs());
        for row in self.eq_sensitivity.iter().chain(&self.ineq_sensitivity) {
            h.write_f64s(row);
        }
        for g in &self.guards {
            h.write_f64s(&[g.rhs]);
            h.write_f64s(&g.sensitivity);
        }
        for l in &self.labels {
            h.write(l.as_bytes());
        }
        h.write(&(self.sample_len as u64).to_le_bytes());
        h.finish()
    }
}

/// FNV-1a, used for fingerprints that must stay stable across builds.
#[derive(Debug, Clone)]
pub struct Fnv64(u64);

impl Fnv64 {
    pub fn new() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }

    pub fn write_f64s(&mut self, values: &[f64]) {
        for v in values {
            self.write(&v.to_bits().to_le_bytes());
        }
    }
}

impl Default for Fnv64 {
    fn default() -> Self {
        Self::new()
    }
}

impl Hasher for Fnv64 {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
}

/// Set of binding inequality rows, stored as a bitset over the program's
/// `m` inequality rows. Equalities are always binding and never included.
///
/// Keys order lexicographically by their sorted row indices; this is the
/// canonical order used to break ties.
#[derive(Clone, Serialize, Deserialize)]
#[serde(into = "KeyRepr", try_from = "KeyRepr")]
pub struct ActiveSetKey {
    rows: usize,
    words: Vec<u64>,
    hash: u64,
}

#[derive(Serialize, Deserialize)]
struct KeyRepr {
    rows: usize,
    active: Vec<usize>,
}

impl From<ActiveSetKey> for KeyRepr {
    fn from(k: ActiveSetKey) -> Self {
        KeyRepr {
            rows: k.rows,
            active: k.indices().collect(),
        }
    }
}

impl TryFrom<KeyRepr> for ActiveSetKey {
    type Error = Error;

    fn try_from(r: KeyRepr) -> Result<Self> {
        ActiveSetKey::from_indices(r.rows, r.active)
    }
}

impl ActiveSetKey {
    pub fn from_indices(rows: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut words = vec![0u64; rows.div_ceil(64)];
        for i in indices {
            if i >= rows {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} out of range for key over {rows} rows"
                )));
            }
            words[i / 64] |= 1 << (i % 64);
        }
        Ok(Self::from_words(rows, words))
    }

    fn from_words(rows: usize, words: Vec<u64>) -> Self {
        let mut h = Fnv64::new();
        h.write(&(rows as u64).to_le_bytes());
        for w in &words {
            h.write(&w.to_le_bytes());
        }
        let hash = h.finish();
        Self { rows, words, hash }
    }

    pub fn empty(rows: usize) -> Self {
        Self::from_words(rows, vec![0; rows.div_ceil(64)])
    }

    pub fn full(rows: usize) -> Self {
        Self::from_indices(rows, 0..rows).expect("indices in range")
    }

    /// Total number of rows the key ranges over.
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn contains(&self, row: usize) -> bool {
        row < self.rows && self.words[row / 64] & (1 << (row % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.rows).filter(move |&i| self.contains(i))
    }
}

impl PartialEq for ActiveSetKey {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.words == other.words
    }
}

impl Eq for ActiveSetKey {}

impl Hash for ActiveSetKey {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.hash);
    }
}

impl Ord for ActiveSetKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.indices()
            .cmp(other.indices())
            .then(self.rows.cmp(&other.rows))
    }
}

impl PartialOrd for ActiveSetKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ActiveSetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ActiveSetKey({self})")
    }
}

impl fmt::Display for ActiveSetKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.indices().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

/// Binding inequality rows of an optimal solution: rows whose slack,
/// scaled by `max(1, |b_j|)`, is at most `tol` in magnitude.
pub fn extract_active_set(
    instance: &LpInstance,
    solution: &LpSolution,
    tol: f64,
) -> Result<ActiveSetKey> {
    if solution.status != LpStatus::Optimal {
        return Err(Error::NotOptimal(solution.status.to_string()));
    }
    if solution.point.len() != instance.n_vars() {
        return Err(Error::DimensionMismatch(
            "solution point does not match instance".into(),
        ));
    }
    let slacks = instance.slacks_at(&solution.point);
    let binding = slacks
        .iter()
        .zip(instance.ineq_rhs())
        .enumerate()
        .filter(|(_, (s, b))| s.abs() / b.abs().max(1.0) <= tol)
        .map(|(j, _)| j);
    ActiveSetKey::from_indices(instance.n_ineq(), binding)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ReductionMode {
    /// Keyed rows become equalities and every other inequality is dropped.
    #[default]
    AsEqualities,
    /// Keyed rows are kept as inequalities; the rest are dropped. This is
    /// a relaxation of the full problem.
    AsInequalities,
}

/// Reduces an already instantiated problem to the rows in `key`.
pub fn reduce_instance(
    instance: &LpInstance,
    key: &ActiveSetKey,
    mode: ReductionMode,
) -> Result<LpInstance> {
    if key.rows() != instance.n_ineq() {
        return Err(Error::DimensionMismatch(format!(
            "key over {} rows, instance has {} inequalities",
            key.rows(),
            instance.n_ineq()
        )));
    }
    let kept_rows: Vec<Vec<f64>> = key
        .indices()
        .map(|j| instance.ineq_matrix()[j].clone())
        .collect();
    let kept_rhs: Vec<f64> = key.indices().map(|j| instance.ineq_rhs()[j]).collect();
    let mut eq_matrix = instance.eq_matrix().to_vec();
    let mut eq_rhs = instance.eq_rhs().to_vec();
    match mode {
        ReductionMode::AsInequalities => LpInstance::new(
            instance.cost().to_vec(),
            eq_matrix,
            eq_rhs,
            kept_rows,
            kept_rhs,
        ),
        ReductionMode::AsEqualities => {
            eq_matrix.extend(kept_rows);
            eq_rhs.extend(kept_rhs);
            LpInstance::new(instance.cost().to_vec(), eq_matrix, eq_rhs, vec![], vec![])
        }
    }
}

pub fn reduced_instance(
    program: &dyn ParametricProgram,
    sample: &Sample,
    key: &ActiveSetKey,
    mode: ReductionMode,
) -> Result<LpInstance> {
    let instance = program.instantiate(sample)?;
    reduce_instance(&instance, key, mode)
}

/// Full solve of one sample together with its optimal active set.
#[derive(Debug, Clone)]
pub struct SampleSolve {
    pub instance: LpInstance,
    pub solution: LpSolution,
    pub key: ActiveSetKey,
}

/// Instantiates, solves, and keys one sample.
///
/// Samples outside the feasible parameter set yield
/// [`Error::SampleInfeasible`].
pub fn solve_for_sample(program: &dyn ParametricProgram, sample: &Sample) -> Result<SampleSolve> {
    if !program.admits(sample)? {
        return Err(Error::SampleInfeasible {
            index: sample.index,
        });
    }
    let instance = program.instantiate(sample)?;
    let solution = solve_lp(&instance)?;
    match solution.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(Error::SampleInfeasible {
                index: sample.index,
            })
        }
        LpStatus::Unbounded => return Err(Error::NotOptimal(solution.status.to_string())),
    }
    let key = extract_active_set(&instance, &solution, FEAS_TOL)?;
    Ok(SampleSolve {
        instance,
        solution,
        key,
    })
}
