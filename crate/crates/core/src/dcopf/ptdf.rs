use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_in_place;

use super::network::Network;

/// Power transfer distribution factors, one row per branch and one column
/// per bus (in `Network::buses` order).
///
/// `entries[l][b]` is the flow on branch `l` (positive from `from` to
/// `to`) caused by injecting one unit at bus `b` and withdrawing it at the
/// slack bus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtdfMatrix {
    pub entries: Vec<Vec<f64>>,
    pub bus_ids: Vec<usize>,
    pub slack_bus: usize,
}

impl PtdfMatrix {
    pub fn n_branches(&self) -> usize {
        self.entries.len()
    }

    pub fn n_buses(&self) -> usize {
        self.bus_ids.len()
    }

    /// Branch flows for a vector of bus injections.
    pub fn flows(&self, injections: &[f64]) -> Vec<f64> {
        self.entries
            .iter()
            .map(|row| row.iter().zip(injections).map(|(a, p)| a * p).sum())
            .collect()
    }
}

fn susceptances(net: &Network) -> Result<Vec<f64>> {
    net.branches
        .iter()
        .map(|br| {
            if br.reactance_pu == 0.0 || !br.reactance_pu.is_finite() {
                Err(Error::SingularSusceptance)
            } else {
                Ok(1.0 / br.reactance_pu)
            }
        })
        .collect()
}

/// Reduced bus susceptance matrix (slack row and column removed) as a
/// row-major vector, plus the map from bus position to reduced position.
fn reduced_susceptance(net: &Network, b: &[f64]) -> (Vec<f64>, Vec<Option<usize>>, usize) {
    let index = net.bus_index();
    let slack = index[&net.slack_bus];
    let reduced: Vec<Option<usize>> = (0..net.buses.len())
        .map(|i| match i.cmp(&slack) {
            std::cmp::Ordering::Less => Some(i),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(i - 1),
        })
        .collect();
    let r = net.buses.len() - 1;
    let mut mat = vec![0.0; r * r];
    for (br, bl) in net.branches.iter().zip(b) {
        let (f, t) = (reduced[index[&br.from]], reduced[index[&br.to]]);
        if let Some(f) = f {
            mat[f * r + f] += bl;
        }
        if let Some(t) = t {
            mat[t * r + t] += bl;
        }
        if let (Some(f), Some(t)) = (f, t) {
            mat[f * r + t] -= bl;
            mat[t * r + f] -= bl;
        }
    }
    (mat, reduced, r)
}

/// Builds the PTDF matrix by inverting the reduced susceptance matrix.
pub fn build_ptdf(net: &Network) -> Result<PtdfMatrix> {
    let b = susceptances(net)?;
    let (mat, reduced, r) = reduced_susceptance(net, &b);
    let index = net.bus_index();
    let inv = if r == 0 {
        DMatrix::zeros(0, 0)
    } else {
        DMatrix::from_row_slice(r, r, &mat)
            .lu()
            .try_inverse()
            .ok_or(Error::SingularSusceptance)?
    };
    if inv.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSusceptance);
    }
    let entries = net
        .branches
        .iter()
        .zip(&b)
        .map(|(br, bl)| {
            let (f, t) = (reduced[index[&br.from]], reduced[index[&br.to]]);
            (0..net.buses.len())
                .map(|bus| match reduced[bus] {
                    None => 0.0,
                    Some(k) => {
                        let tf = f.map_or(0.0, |f| inv[(f, k)]);
                        let tt = t.map_or(0.0, |t| inv[(t, k)]);
                        bl * (tf - tt)
                    }
                })
                .collect()
        })
        .collect();
    Ok(PtdfMatrix {
        entries,
        bus_ids: net.buses.iter().map(|b| b.id).collect(),
        slack_bus: net.slack_bus,
    })
}

/// Angle-based DC power flow: solves `B θ = p` with the slack angle fixed
/// at zero and returns branch flows `(θ_from − θ_to) / x`.
///
/// `injections` are per bus in `Network::buses` order and must sum to zero.
pub fn dc_power_flow(net: &Network, injections: &[f64]) -> Result<Vec<f64>> {
    if injections.len() != net.buses.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} injections for {} buses",
            injections.len(),
            net.buses.len()
        )));
    }
    let total: f64 = injections.iter().sum();
    if total.abs() > 1e-9 {
        return Err(Error::UnbalancedInjection(total));
    }
    let b = susceptances(net)?;
    let (mut mat, reduced, r) = reduced_susceptance(net, &b);
    let mut rhs = vec![0.0; r];
    for (bus, p) in injections.iter().enumerate() {
        if let Some(k) = reduced[bus] {
            rhs[k] = *p;
        }
    }
    if r > 0 && !solve_in_place(&mut mat, &mut rhs, r) {
        return Err(Error::SingularSusceptance);
    }
    let index = net.bus_index();
    let angle = |bus: usize| reduced[bus].map_or(0.0, |k| rhs[k]);
    Ok(net
        .branches
        .iter()
        .zip(&b)
        .map(|(br, bl)| bl * (angle(index[&br.from]) - angle(index[&br.to])))
        .collect())
}
