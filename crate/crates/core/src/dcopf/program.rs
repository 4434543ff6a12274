use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lp::{LpBuilder, LpInstance};
use crate::parametric::{AffineProgram, ParameterGuard, ParametricProgram, Sample};

use super::network::Network;
use super::ptdf::{build_ptdf, PtdfMatrix};

/// Branch rows whose generator sensitivities all fall below this are
/// treated as parameter-only constraints.
const ZERO_SENSITIVITY: f64 = 1e-12;

/// DC optimal power flow as a parametric LP in the generator set-points.
///
/// Decision variables are generator outputs in per unit on `base_mva`;
/// the cost is scaled so objectives come out in $/h. Sample values are MW
/// perturbations `ω` of the loaded buses (see [`Network::loaded_buses`]),
/// entering the balance as `eᵀ(p − d + ω) = 0` and the flows as
/// `M(Hp − d + ω)`.
///
/// Inequality rows, in order:
/// 1. generator lower limits `p_i >= pmin_i` (one per generator),
/// 2. generator upper limits `p_i <= pmax_i`,
/// 3. branch lower limits `f_l >= -rate_l` (limited branches only),
/// 4. branch upper limits `f_l <= rate_l`.
///
/// Unlimited branches (rating 0) contribute no rows. Limited branches whose
/// flow does not depend on any generator become parameter guards instead.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DcOpfProgram {
    program: AffineProgram,
    ptdf: PtdfMatrix,
    base_mva: f64,
    perturbed_buses: Vec<usize>,
    n_generators: usize,
    limited_branches: Vec<usize>,
}

impl DcOpfProgram {
    pub fn ptdf(&self) -> &PtdfMatrix {
        &self.ptdf
    }

    pub fn base_mva(&self) -> f64 {
        self.base_mva
    }

    /// Bus ids perturbed by sample components, in sample order.
    pub fn perturbed_bus_ids(&self) -> Vec<usize> {
        self.perturbed_buses
            .iter()
            .map(|&i| self.ptdf.bus_ids[i])
            .collect()
    }

    pub fn n_generators(&self) -> usize {
        self.n_generators
    }

    /// Indices (into `Network::branches`) of branches that carry flow rows.
    pub fn limited_branches(&self) -> &[usize] {
        &self.limited_branches
    }

    /// Converts an LP point (per unit) to generator outputs in MW.
    pub fn dispatch_mw(&self, point: &[f64]) -> Vec<f64> {
        point.iter().map(|p| p * self.base_mva).collect()
    }

    pub fn inner(&self) -> &AffineProgram {
        &self.program
    }
}

impl ParametricProgram for DcOpfProgram {
    fn n_vars(&self) -> usize {
        self.program.n_vars()
    }

    fn n_ineq(&self) -> usize {
        self.program.n_ineq()
    }

    fn sample_len(&self) -> usize {
        self.program.sample_len()
    }

    fn labels(&self) -> &[String] {
        self.program.labels()
    }

    fn instantiate(&self, sample: &Sample) -> Result<LpInstance> {
        self.program.instantiate(sample)
    }

    fn admits(&self, sample: &Sample) -> Result<bool> {
        self.program.admits(sample)
    }

    fn fingerprint(&self) -> u64 {
        self.program.fingerprint()
    }
}

pub fn build_dcopf(net: &Network) -> Result<DcOpfProgram> {
    net.validate()?;
    let ptdf = build_ptdf(net)?;
    let base = net.base_mva;
    let index = net.bus_index();
    let n = net.generators.len();
    let gen_bus: Vec<usize> = net.generators.iter().map(|g| index[&g.bus]).collect();
    let perturbed = net.loaded_buses();
    let v = perturbed.len();
    let loads: Vec<f64> = net.buses.iter().map(|b| b.load_mw / base).collect();

    let cost: Vec<f64> = net.generators.iter().map(|g| g.cost_per_mwh * base).collect();
    let total_load: f64 = loads.iter().sum();
    let mut builder = LpBuilder::new(cost).eq(vec![1.0; n], total_load);
    let eq_sens = vec![vec![-1.0 / base; v]];
    let mut ineq_sens: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<String> = Vec::new();

    for (k, g) in net.generators.iter().enumerate() {
        builder = builder.lower_bound(k, g.pmin_mw / base);
        ineq_sens.push(vec![0.0; v]);
        labels.push(format!("gen {} (bus {}) >= pmin", k + 1, g.bus));
    }
    for (k, g) in net.generators.iter().enumerate() {
        builder = builder.upper_bound(k, g.pmax_mw / base);
        ineq_sens.push(vec![0.0; v]);
        labels.push(format!("gen {} (bus {}) <= pmax", k + 1, g.bus));
    }

    // Flow on branch l: Σ_i M[l, bus(i)] p_i − (M d)_l + Σ_k M[l, bus(k)] ω_k
    let mut guards = Vec::new();
    let mut lower_rows = Vec::new();
    let mut upper_rows = Vec::new();
    let mut limited = Vec::new();
    for (l, br) in net.branches.iter().enumerate() {
        if !br.is_limited() {
            continue;
        }
        let row = &ptdf.entries[l];
        let gen_coeffs: Vec<f64> = gen_bus.iter().map(|&b| row[b]).collect();
        let load_flow: f64 = row.iter().zip(&loads).map(|(m, d)| m * d).sum();
        let omega_coeffs: Vec<f64> = perturbed.iter().map(|&b| row[b] / base).collect();
        let rate = br.rate_mw / base;
        let name = format!("branch {} ({}-{})", l + 1, br.from, br.to);
        // -f <= rate  and  f <= rate
        let lower_rhs = rate - load_flow;
        let upper_rhs = rate + load_flow;
        let neg_omega: Vec<f64> = omega_coeffs.iter().map(|c| -c).collect();
        if gen_coeffs.iter().all(|c| c.abs() <= ZERO_SENSITIVITY) {
            guards.push(ParameterGuard {
                label: format!("{name} >= -rate"),
                rhs: lower_rhs,
                sensitivity: omega_coeffs,
            });
            guards.push(ParameterGuard {
                label: format!("{name} <= rate"),
                rhs: upper_rhs,
                sensitivity: neg_omega,
            });
            continue;
        }
        limited.push(l);
        let neg_gen: Vec<f64> = gen_coeffs.iter().map(|c| -c).collect();
        lower_rows.push((neg_gen, lower_rhs, omega_coeffs, format!("{name} >= -rate")));
        upper_rows.push((gen_coeffs, upper_rhs, neg_omega, format!("{name} <= rate")));
    }
    for (row, rhs, sens, label) in lower_rows.into_iter().chain(upper_rows) {
        builder = builder.le(row, rhs);
        ineq_sens.push(sens);
        labels.push(label);
    }

    let nominal = builder.build()?;
    let program = AffineProgram::new(nominal, eq_sens, ineq_sens, labels, guards, v)?;
    Ok(DcOpfProgram {
        program,
        ptdf,
        base_mva: base,
        perturbed_buses: perturbed,
        n_generators: n,
        limited_branches: limited,
    })
}
