//! Dense linear programs and a deterministic primal simplex solver.
//!
//! Instances are stored as
//!
//! ```text
//! minimize    cᵀx
//! subject to  E x  = f
//!             A x <= b
//! ```
//!
//! with `x` free. Variable bounds are folded into `A x <= b` by
//! [`LpBuilder`], so every bound is an inequality row and shows up in
//! active-set keys like any other constraint.
//!
//! The solver is a two-phase tableau simplex using Bland's smallest-index
//! rule for both the entering and the leaving variable. Free variables are
//! pivoted into the basis before phase 1 and never leave it, so an optimal
//! basis always describes a vertex whenever the feasible polyhedron has
//! one. The returned point is re-solved from the original (unscaled) data
//! on the basis' active rows, which makes it reproducible bit-for-bit and
//! removes most of the rounding accumulated in the tableau.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, solve_in_place};

/// Scaled feasibility tolerance used throughout the crate.
pub const FEAS_TOL: f64 = 1e-6;
/// Entries at or below this magnitude are treated as zero in ratio tests.
pub const PIVOT_TOL: f64 = 1e-9;
const BREAKDOWN_TOL: f64 = 1e-12;
const REDUCED_COST_TOL: f64 = 1e-9;
const PHASE1_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpInstance {
    cost: Vec<f64>,
    eq_matrix: Vec<Vec<f64>>,
    eq_rhs: Vec<f64>,
    ineq_matrix: Vec<Vec<f64>>,
    ineq_rhs: Vec<f64>,
}

impl LpInstance {
    pub fn new(
        cost: Vec<f64>,
        eq_matrix: Vec<Vec<f64>>,
        eq_rhs: Vec<f64>,
        ineq_matrix: Vec<Vec<f64>>,
        ineq_rhs: Vec<f64>,
    ) -> Result<Self> {
        let n = cost.len();
        if n == 0 {
            return Err(Error::DimensionMismatch("instance has no variables".into()));
        }
        if eq_matrix.len() != eq_rhs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} equality rows but {} right-hand sides",
                eq_matrix.len(),
                eq_rhs.len()
            )));
        }
        if ineq_matrix.len() != ineq_rhs.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} inequality rows but {} right-hand sides",
                ineq_matrix.len(),
                ineq_rhs.len()
            )));
        }
        for (i, row) in eq_matrix.iter().chain(ineq_matrix.iter()).enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} coefficients, expected {n}",
                    row.len()
                )));
            }
        }
        for (j, row) in ineq_matrix.iter().enumerate() {
            if row.iter().all(|v| *v == 0.0) {
                return Err(Error::DimensionMismatch(format!(
                    "inequality row {j} has no nonzero coefficient"
                )));
            }
        }
        let finite = cost
            .iter()
            .chain(eq_rhs.iter())
            .chain(ineq_rhs.iter())
            .chain(eq_matrix.iter().flatten())
            .chain(ineq_matrix.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::DimensionMismatch("non-finite coefficient".into()));
        }
        Ok(Self {
            cost,
            eq_matrix,
            eq_rhs,
            ineq_matrix,
            ineq_rhs,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn n_eq(&self) -> usize {
        self.eq_rhs.len()
    }

    pub fn n_ineq(&self) -> usize {
        self.ineq_rhs.len()
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn eq_matrix(&self) -> &[Vec<f64>] {
        &self.eq_matrix
    }

    pub fn eq_rhs(&self) -> &[f64] {
        &self.eq_rhs
    }

    pub fn ineq_matrix(&self) -> &[Vec<f64>] {
        &self.ineq_matrix
    }

    pub fn ineq_rhs(&self) -> &[f64] {
        &self.ineq_rhs
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        dot(&self.cost, x)
    }

    /// Slacks `b_j - a_jᵀx` for every inequality row.
    pub fn slacks_at(&self, x: &[f64]) -> Vec<f64> {
        self.ineq_matrix
            .iter()
            .zip(&self.ineq_rhs)
            .map(|(row, b)| b - dot(row, x))
            .collect()
    }
}

/// Incremental construction of an [`LpInstance`] with bounds folded in as
/// inequality rows, in the order they are added.
#[derive(Debug, Clone)]
pub struct LpBuilder {
    cost: Vec<f64>,
    eq_matrix: Vec<Vec<f64>>,
    eq_rhs: Vec<f64>,
    ineq_matrix: Vec<Vec<f64>>,
    ineq_rhs: Vec<f64>,
}

impl LpBuilder {
    pub fn new(cost: Vec<f64>) -> Self {
        Self {
            cost,
            eq_matrix: Vec::new(),
            eq_rhs: Vec::new(),
            ineq_matrix: Vec::new(),
            ineq_rhs: Vec::new(),
        }
    }

    pub fn eq(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.eq_matrix.push(row);
        self.eq_rhs.push(rhs);
        self
    }

    /// `rowᵀx <= rhs`
    pub fn le(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.ineq_matrix.push(row);
        self.ineq_rhs.push(rhs);
        self
    }

    /// `rowᵀx >= rhs`, stored as `-rowᵀx <= -rhs`.
    pub fn ge(self, row: Vec<f64>, rhs: f64) -> Self {
        let neg = row.into_iter().map(|v| -v).collect();
        self.le(neg, -rhs)
    }

    pub fn lower_bound(self, var: usize, value: f64) -> Self {
        let mut row = vec![0.0; self.cost.len()];
        row[var] = 1.0;
        self.ge(row, value)
    }

    pub fn upper_bound(self, var: usize, value: f64) -> Self {
        let mut row = vec![0.0; self.cost.len()];
        row[var] = 1.0;
        self.le(row, value)
    }

    pub fn build(self) -> Result<LpInstance> {
        LpInstance::new(
            self.cost,
            self.eq_matrix,
            self.eq_rhs,
            self.ineq_matrix,
            self.ineq_rhs,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl std::fmt::Display for LpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
        };
        f.write_str(s)
    }
}

/// Solver output. `point` and `ineq_slacks` are empty unless the status is
/// [`LpStatus::Optimal`]; `objective` is `+inf` for infeasible and `-inf`
/// for unbounded programs.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub point: Vec<f64>,
    pub objective: f64,
    pub ineq_slacks: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    fn infeasible(iterations: usize) -> Self {
        Self {
            status: LpStatus::Infeasible,
            point: Vec::new(),
            objective: f64::INFINITY,
            ineq_slacks: Vec::new(),
            iterations,
        }
    }

    fn unbounded(iterations: usize) -> Self {
        Self {
            status: LpStatus::Unbounded,
            point: Vec::new(),
            objective: f64::NEG_INFINITY,
            ineq_slacks: Vec::new(),
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Row reference into an [`LpInstance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConstraintRef {
    Equality(usize),
    Inequality(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub worst_violation: f64,
    pub violating_indices: Vec<ConstraintRef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Free,
    Slack,
    Artificial,
}

/// Dense simplex tableau. Rows are constraints, the last column is the rhs.
struct Tableau {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    rhs: Vec<f64>,
    kinds: Vec<ColKind>,
    basis: Vec<Option<usize>>,
    // Row is still part of the problem (redundant equalities get dropped).
    live: Vec<bool>,
    iterations: usize,
    max_iterations: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    fn is_free_row(&self, r: usize) -> bool {
        matches!(self.basis[r], Some(c) if self.kinds[c] == ColKind::Free)
    }

    fn pivot(&mut self, r: usize, c: usize, cost_rows: &mut [&mut Vec<f64>]) -> Result<()> {
        let p = self.at(r, c);
        if p.abs() < BREAKDOWN_TOL {
            return Err(Error::NumericalBreakdown(format!(
                "pivot magnitude {p:e} at row {r}, column {c}"
            )));
        }
        self.iterations += 1;
        if self.iterations > self.max_iterations {
            return Err(Error::NumericalBreakdown(format!(
                "iteration limit {} exceeded",
                self.max_iterations
            )));
        }
        let cols = self.cols;
        let inv = 1.0 / p;
        for k in 0..cols {
            self.data[r * cols + k] *= inv;
        }
        self.data[r * cols + c] = 1.0;
        self.rhs[r] *= inv;
        let (pivot_row, pivot_rhs) = (self.data[r * cols..(r + 1) * cols].to_vec(), self.rhs[r]);
        for i in 0..self.rows {
            if i == r || !self.live[i] {
                continue;
            }
            let f = self.data[i * cols + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.data[i * cols..(i + 1) * cols];
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            row[c] = 0.0;
            self.rhs[i] -= f * pivot_rhs;
        }
        for cost in cost_rows.iter_mut() {
            let f = cost[c];
            if f == 0.0 {
                continue;
            }
            for (v, pv) in cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            cost[c] = 0.0;
            let last = cost.len() - 1;
            cost[last] -= f * pivot_rhs;
        }
        self.basis[r] = Some(c);
        Ok(())
    }

    /// Runs Bland's-rule simplex on the cost row stored as `[d_0, ..., d_{cols-1}, -z]`.
    /// Returns `false` if the objective is unbounded below.
    fn optimize(
        &mut self,
        cost: &mut Vec<f64>,
        other: &mut Vec<f64>,
        allow_artificial: bool,
    ) -> Result<bool> {
        loop {
            let mut basic = vec![false; self.cols];
            for b in self.basis.iter().zip(&self.live).filter(|(_, l)| **l) {
                if let Some(c) = b.0 {
                    basic[*c] = true;
                }
            }
            let entering = (0..self.cols).find(|&j| {
                !basic[j]
                    && self.kinds[j] != ColKind::Free
                    && (allow_artificial || self.kinds[j] != ColKind::Artificial)
                    && cost[j] < -REDUCED_COST_TOL
            });
            let Some(e) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64, usize)> = None;
            for r in 0..self.rows {
                if !self.live[r] || self.is_free_row(r) {
                    continue;
                }
                let a = self.at(r, e);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs[r].max(0.0) / a;
                let bvar = self.basis[r].expect("non-free live rows always have a basic variable");
                match leave {
                    None => leave = Some((r, ratio, bvar)),
                    Some((_, best, best_var)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        if (!tie && ratio < best) || (tie && bvar < best_var) {
                            leave = Some((r, ratio, bvar));
                        }
                    }
                }
            }
            let Some((r, _, _)) = leave else {
                return Ok(false);
            };
            self.pivot(r, e, &mut [cost, other])?;
        }
    }
}

fn row_scale(row: &[f64]) -> f64 {
    row.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Solves `instance` to optimality, or classifies it as infeasible or
/// unbounded.
pub fn solve_lp(instance: &LpInstance) -> Result<LpSolution> {
    let n = instance.n_vars();
    let p = instance.n_eq();
    let m = instance.n_ineq();
    let rows = p + m;

    // Equality rows first, then inequality rows, each scaled to unit max-norm.
    let mut row_data: Vec<Vec<f64>> = Vec::with_capacity(rows);
    let mut rhs: Vec<f64> = Vec::with_capacity(rows);
    let mut live = vec![true; rows];
    for (k, (row, b)) in instance.eq_matrix.iter().zip(&instance.eq_rhs).enumerate() {
        let s = row_scale(row);
        if s == 0.0 {
            if b.abs() > PHASE1_TOL {
                return Ok(LpSolution::infeasible(0));
            }
            live[k] = false;
            row_data.push(row.clone());
            rhs.push(0.0);
        } else {
            row_data.push(row.iter().map(|v| v / s).collect());
            rhs.push(b / s);
        }
    }
    for (row, b) in instance.ineq_matrix.iter().zip(&instance.ineq_rhs) {
        let s = row_scale(row);
        row_data.push(row.iter().map(|v| v / s).collect());
        rhs.push(b / s);
    }

    let n_art = rows;
    let cols = n + m + n_art;
    let mut data = vec![0.0; rows * cols];
    let mut kinds = vec![ColKind::Free; n];
    kinds.extend(std::iter::repeat_n(ColKind::Slack, m));
    kinds.extend(std::iter::repeat_n(ColKind::Artificial, n_art));
    let mut basis = vec![None; rows];
    for r in 0..rows {
        data[r * cols..r * cols + n].copy_from_slice(&row_data[r]);
        if r >= p {
            let slack = n + (r - p);
            data[r * cols + slack] = 1.0;
            basis[r] = Some(slack);
        }
    }
    let mut t = Tableau {
        rows,
        cols,
        data,
        rhs,
        kinds,
        basis,
        live,
        iterations: 0,
        max_iterations: 50 * (rows + cols) + 1000,
    };

    let cost_scale = row_scale(&instance.cost).max(f64::MIN_POSITIVE);
    let mut phase2 = vec![0.0; cols + 1];
    for (j, c) in instance.cost.iter().enumerate() {
        phase2[j] = c / cost_scale;
    }
    let mut phase1 = vec![0.0; cols + 1];

    // Pivot free variables into the basis, preferring equality rows.
    let mut free_nonbasic = Vec::new();
    for var in 0..n {
        let pick = |range: std::ops::Range<usize>, t: &Tableau| -> Option<usize> {
            let mut best: Option<(usize, f64)> = None;
            for r in range {
                if !t.live[r] || t.is_free_row(r) {
                    continue;
                }
                let a = t.at(r, var).abs();
                if a > PIVOT_TOL && best.is_none_or(|(_, b)| a > b) {
                    best = Some((r, a));
                }
            }
            best.map(|(r, _)| r)
        };
        match pick(0..p, &t).or_else(|| pick(p..rows, &t)) {
            Some(r) => t.pivot(r, var, &mut [&mut phase2, &mut phase1])?,
            None => free_nonbasic.push(var),
        }
    }

    // Phase 1: artificial on every row still lacking a feasible basic variable.
    let mut need_phase1 = false;
    for r in 0..rows {
        if !t.live[r] || t.is_free_row(r) {
            continue;
        }
        if t.basis[r].is_some() && t.rhs[r] >= 0.0 {
            continue;
        }
        if t.basis[r].is_none() && t.rhs[r].abs() <= PHASE1_TOL {
            let nonzero = (n..n + m).any(|j| t.at(r, j).abs() > PIVOT_TOL);
            if !nonzero {
                t.live[r] = false;
                continue;
            }
        }
        if t.rhs[r] < 0.0 {
            for k in 0..cols {
                t.data[r * cols + k] = -t.data[r * cols + k];
            }
            t.rhs[r] = -t.rhs[r];
        }
        let art = n + m + r;
        t.data[r * cols + art] = 1.0;
        t.basis[r] = Some(art);
        need_phase1 = true;
    }

    if need_phase1 {
        for r in 0..rows {
            if !t.live[r] {
                continue;
            }
            if let Some(c) = t.basis[r] {
                if t.kinds[c] == ColKind::Artificial {
                    for j in 0..cols {
                        if t.kinds[j] != ColKind::Artificial {
                            phase1[j] -= t.at(r, j);
                        }
                    }
                    phase1[cols] -= t.rhs[r];
                }
            }
        }
        t.optimize(&mut phase1, &mut phase2, true)?;
        let infeasibility: f64 = (0..rows)
            .filter(|&r| t.live[r])
            .filter(|&r| matches!(t.basis[r], Some(c) if t.kinds[c] == ColKind::Artificial))
            .map(|r| t.rhs[r])
            .sum();
        if infeasibility > PHASE1_TOL {
            return Ok(LpSolution::infeasible(t.iterations));
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        for r in 0..rows {
            if !t.live[r] {
                continue;
            }
            let Some(c) = t.basis[r] else { continue };
            if t.kinds[c] != ColKind::Artificial {
                continue;
            }
            let replacement = (0..n + m).find(|&j| {
                t.kinds[j] != ColKind::Free
                    && t.basis.iter().all(|b| *b != Some(j))
                    && t.at(r, j).abs() > PIVOT_TOL
            });
            match replacement {
                Some(j) => t.pivot(r, j, &mut [&mut phase2, &mut phase1])?,
                None => t.live[r] = false,
            }
        }
    }

    if free_nonbasic
        .iter()
        .any(|&j| phase2[j].abs() > REDUCED_COST_TOL)
    {
        return Ok(LpSolution::unbounded(t.iterations));
    }
    let mut unused = vec![0.0; cols + 1];
    if !t.optimize(&mut phase2, &mut unused, false)? {
        return Ok(LpSolution::unbounded(t.iterations));
    }

    let mut point = vec![0.0; n];
    let mut slack_basic = vec![false; m];
    for r in 0..rows {
        if !t.live[r] {
            continue;
        }
        match t.basis[r] {
            Some(c) if c < n => point[c] = t.rhs[r],
            Some(c) if c < n + m => slack_basic[c - n] = true,
            _ => {}
        }
    }
    if free_nonbasic.is_empty() {
        let active_eq: Vec<usize> = (0..p).filter(|&k| t.live[k]).collect();
        let active_ineq: Vec<usize> = (0..m).filter(|&j| !slack_basic[j]).collect();
        if let Some(refined) = solve_active_rows(instance, &active_eq, &active_ineq) {
            point = refined;
        }
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective: instance.objective_at(&point),
        ineq_slacks: instance.slacks_at(&point),
        point,
        iterations: t.iterations,
    })
}

/// Solves the square system formed by the given equality and inequality
/// rows of `instance` taken as equalities.
fn solve_active_rows(instance: &LpInstance, eq: &[usize], ineq: &[usize]) -> Option<Vec<f64>> {
    let n = instance.n_vars();
    if eq.len() + ineq.len() != n {
        return None;
    }
    let mut a = Vec::with_capacity(n * n);
    let mut b = Vec::with_capacity(n);
    for &k in eq {
        a.extend_from_slice(&instance.eq_matrix[k]);
        b.push(instance.eq_rhs[k]);
    }
    for &j in ineq {
        a.extend_from_slice(&instance.ineq_matrix[j]);
        b.push(instance.ineq_rhs[j]);
    }
    (solve_in_place(&mut a, &mut b, n) && b.iter().all(|v| v.is_finite())).then_some(b)
}

/// Scaled violation of every row at `point`, as `(row, violation)` pairs.
fn scaled_violations<'a>(
    instance: &'a LpInstance,
    point: &'a [f64],
) -> impl Iterator<Item = (ConstraintRef, f64)> + 'a {
    let eq = instance
        .eq_matrix
        .iter()
        .zip(&instance.eq_rhs)
        .enumerate()
        .map(move |(k, (row, b))| {
            let v = (dot(row, point) - b).abs() / b.abs().max(1.0);
            (ConstraintRef::Equality(k), v)
        });
    let ineq = instance
        .ineq_matrix
        .iter()
        .zip(&instance.ineq_rhs)
        .enumerate()
        .map(move |(j, (row, b))| {
            let v = (dot(row, point) - b).max(0.0) / b.abs().max(1.0);
            (ConstraintRef::Inequality(j), v)
        });
    eq.chain(ineq)
}

pub fn check_feasibility(
    instance: &LpInstance,
    point: &[f64],
    tol: f64,
) -> Result<FeasibilityReport> {
    if point.len() != instance.n_vars() {
        return Err(Error::DimensionMismatch(format!(
            "point has length {}, instance has {} variables",
            point.len(),
            instance.n_vars()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut worst = 0.0_f64;
    let mut violating = Vec::new();
    for (idx, v) in scaled_violations(instance, point) {
        worst = worst.max(v);
        if v > tol {
            violating.push(idx);
        }
    }
    Ok(FeasibilityReport {
        feasible: worst <= tol,
        worst_violation: worst,
        violating_indices: violating,
    })
}

const ENUM_MAX_VARS: usize = 12;
const ENUM_MAX_ROWS: usize = 24;
const ENUM_TOL: f64 = 1e-9;

/// Every basic feasible solution of `instance`, deduplicated and sorted by
/// objective, then lexicographically by point.
///
/// Brute force over all `n`-subsets of constraint rows; intended as a test
/// oracle for tiny instances.
pub fn enumerate_vertices(instance: &LpInstance) -> Result<Vec<(Vec<f64>, f64)>> {
    let n = instance.n_vars();
    let p = instance.n_eq();
    let m = instance.n_ineq();
    if n > ENUM_MAX_VARS || p + m > ENUM_MAX_ROWS {
        return Err(Error::TooLarge(format!(
            "n = {n}, rows = {} (limits {ENUM_MAX_VARS}, {ENUM_MAX_ROWS})",
            p + m
        )));
    }
    let rows: Vec<(&[f64], f64)> = instance
        .eq_matrix
        .iter()
        .zip(&instance.eq_rhs)
        .chain(instance.ineq_matrix.iter().zip(&instance.ineq_rhs))
        .map(|(r, b)| (r.as_slice(), *b))
        .collect();

    let mut vertices: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut subset: Vec<usize> = (0..n).collect();
    if rows.len() < n {
        return Ok(vertices);
    }
    loop {
        let mut a = Vec::with_capacity(n * n);
        let mut b = Vec::with_capacity(n);
        for &i in &subset {
            a.extend_from_slice(rows[i].0);
            b.push(rows[i].1);
        }
        if solve_in_place(&mut a, &mut b, n) {
            let feasible = scaled_violations(instance, &b).all(|(_, v)| v <= ENUM_TOL);
            let duplicate = vertices.iter().any(|(x, _)| {
                x.iter()
                    .zip(&b)
                    .all(|(u, v)| (u - v).abs() <= ENUM_TOL * u.abs().max(1.0))
            });
            if feasible && !duplicate {
                let obj = instance.objective_at(&b);
                vertices.push((b, obj));
            }
        }
        if !next_combination(&mut subset, rows.len()) {
            break;
        }
    }
    vertices.sort_by(|(xa, oa), (xb, ob)| {
        oa.total_cmp(ob).then_with(|| {
            xa.iter()
                .zip(xb)
                .map(|(u, v)| u.total_cmp(v))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    Ok(vertices)
}

fn next_combination(subset: &mut [usize], total: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < total - k + i {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
