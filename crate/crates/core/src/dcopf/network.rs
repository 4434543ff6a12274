use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: usize,
    pub load_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub bus: usize,
    pub pmin_mw: f64,
    pub pmax_mw: f64,
    pub cost_per_mwh: f64,
}

/// Transmission branch. A `rate_mw` of zero means the branch is unlimited;
/// otherwise the flow must stay within `[-rate_mw, rate_mw]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub reactance_pu: f64,
    pub rate_mw: f64,
}

impl Branch {
    pub fn is_limited(&self) -> bool {
        self.rate_mw > 0.0
    }
}

/// DC network model. Serializes to the native JSON case schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub base_mva: f64,
    pub slack_bus: usize,
    pub buses: Vec<Bus>,
    pub generators: Vec<Generator>,
    pub branches: Vec<Branch>,
    /// Non-fatal notes collected while parsing.
    #[serde(skip)]
    pub warnings: Vec<String>,
}

impl Network {
    /// Checks referential integrity, limit ordering, and connectivity.
    pub fn validate(&self) -> Result<()> {
        if !(self.base_mva > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "base_mva must be positive, got {}",
                self.base_mva
            )));
        }
        let index = self.bus_index();
        if index.len() != self.buses.len() {
            return Err(Error::InvalidArgument("duplicate bus id".into()));
        }
        if !index.contains_key(&self.slack_bus) {
            return Err(Error::InvalidArgument(format!(
                "slack bus {} does not exist",
                self.slack_bus
            )));
        }
        for (k, g) in self.generators.iter().enumerate() {
            if !index.contains_key(&g.bus) {
                return Err(Error::InvalidArgument(format!(
                    "generator {k} references missing bus {}",
                    g.bus
                )));
            }
            if g.pmin_mw > g.pmax_mw {
                return Err(Error::InvalidArgument(format!(
                    "generator {k} has pmin {} > pmax {}",
                    g.pmin_mw, g.pmax_mw
                )));
            }
        }
        for (k, br) in self.branches.iter().enumerate() {
            for b in [br.from, br.to] {
                if !index.contains_key(&b) {
                    return Err(Error::InvalidArgument(format!(
                        "branch {k} references missing bus {b}"
                    )));
                }
            }
            if br.rate_mw < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "branch {k} has negative rating"
                )));
            }
        }
        self.check_connected()
    }

    /// Bus id to position in `buses`.
    pub fn bus_index(&self) -> HashMap<usize, usize> {
        self.buses
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id, i))
            .collect()
    }

    pub fn total_load_mw(&self) -> f64 {
        self.buses.iter().map(|b| b.load_mw).sum()
    }

    pub fn total_capacity_mw(&self) -> f64 {
        self.generators.iter().map(|g| g.pmax_mw).sum()
    }

    /// Positions (in `buses`) of buses with nonzero load. These are the
    /// buses perturbed by a sample, in this order.
    pub fn loaded_buses(&self) -> Vec<usize> {
        self.buses
            .iter()
            .enumerate()
            .filter(|(_, b)| b.load_mw != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    fn check_connected(&self) -> Result<()> {
        let index = self.bus_index();
        let mut adj = vec![Vec::new(); self.buses.len()];
        for br in &self.branches {
            let (a, b) = (index[&br.from], index[&br.to]);
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; self.buses.len()];
        let start = index[&self.slack_bus];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        let missing: Vec<usize> = self
            .buses
            .iter()
            .zip(&seen)
            .filter(|(_, s)| !**s)
            .map(|(b, _)| b.id)
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::DisconnectedNetwork(format!(
                "buses {missing:?} are not reachable from the slack bus"
            )))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_bus() -> Network {
        Network {
            base_mva: 100.0,
            slack_bus: 1,
            buses: vec![
                Bus { id: 1, load_mw: 0.0 },
                Bus { id: 2, load_mw: 50.0 },
            ],
            generators: vec![Generator {
                bus: 1,
                pmin_mw: 0.0,
                pmax_mw: 100.0,
                cost_per_mwh: 10.0,
            }],
            branches: vec![Branch {
                from: 1,
                to: 2,
                reactance_pu: 0.1,
                rate_mw: 0.0,
            }],
            warnings: vec![],
        }
    }

    #[test]
    fn valid_network_passes() {
        two_bus().validate().unwrap();
        assert_eq!(two_bus().loaded_buses(), vec![1]);
    }

    #[test]
    fn disconnected_is_rejected() {
        let mut net = two_bus();
        net.buses.push(Bus { id: 3, load_mw: 1.0 });
        assert!(matches!(
            net.validate(),
            Err(Error::DisconnectedNetwork(_))
        ));
    }

    #[test]
    fn bad_limits_are_rejected() {
        let mut net = two_bus();
        net.generators[0].pmin_mw = 200.0;
        assert!(net.validate().is_err());
        let mut net = two_bus();
        net.branches[0].to = 9;
        assert!(net.validate().is_err());
    }
}
