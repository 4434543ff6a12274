//! Categorical "systems" with exactly known key masses.
//!
//! Useful for checking the discovery guarantees by Monte-Carlo, since the
//! unobserved mass at termination can be computed exactly.

use std::hash::Hasher;

use rand::RngCore;

use crate::discovery::KeySource;
use crate::error::{Error, Result};
use crate::parametric::Fnv64;
use crate::sampling::substream;

/// Keys `1..=K` drawn with fixed probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalSystem {
    masses: Vec<f64>,
    cumulative: Vec<f64>,
    seed: u64,
}

impl CategoricalSystem {
    pub fn new(masses: Vec<f64>, seed: u64) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidMasses("no atoms".into()));
        }
        if let Some(m) = masses.iter().find(|m| !(**m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidMasses(format!("negative or non-finite mass {m}")));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidMasses(format!("masses sum to {total}")));
        }
        let mut acc = 0.0;
        let cumulative = masses
            .iter()
            .map(|m| {
                acc += m;
                acc
            })
            .collect();
        Ok(Self {
            masses,
            cumulative,
            seed,
        })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn n_keys(&self) -> usize {
        self.masses.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    /// Key drawn at stream position `index`.
    pub fn draw(&self, index: u64) -> u32 {
        let bits = substream(self.seed, index).next_u64();
        let u = ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
        let total = *self.cumulative.last().expect("nonempty");
        let pos = self.cumulative.partition_point(|&c| c <= u * total);
        let pos = pos.min(self.masses.len() - 1);
        // Skip zero-mass atoms that share a boundary.
        let pos = (pos..self.masses.len())
            .find(|&k| self.masses[k] > 0.0)
            .unwrap_or(pos);
        pos as u32 + 1
    }

    /// Exact mass of the labels not in `observed`.
    pub fn unobserved_mass(&self, observed: &[u32]) -> Result<f64> {
        let mut seen = vec![false; self.masses.len()];
        for &k in observed {
            if k == 0 || k as usize > self.masses.len() {
                return Err(Error::UnknownKey(k as usize));
            }
            seen[k as usize - 1] = true;
        }
        Ok(self
            .masses
            .iter()
            .zip(&seen)
            .filter(|(_, &s)| !s)
            .map(|(m, _)| m)
            .sum())
    }
}

impl KeySource for CategoricalSystem {
    type Key = u32;

    fn key_at(&self, index: u64) -> Result<Option<u32>> {
        Ok(Some(self.draw(index)))
    }

    fn fingerprint(&self) -> u64 {
        let mut h = Fnv64::new();
        h.write(b"categorical");
        h.write_f64s(&self.masses);
        h.write_u64(self.seed);
        h.finish()
    }
}

pub fn categorical_system(masses: &[f64], seed: u64) -> Result<CategoricalSystem> {
    CategoricalSystem::new(masses.to_vec(), seed)
}

pub fn true_unobserved_mass(system: &CategoricalSystem, observed: &[u32]) -> Result<f64> {
    system.unobserved_mass(observed)
}

/// `k0` equal atoms sharing `1 − alpha0`, then `tail` equal atoms sharing
/// `alpha0`. With `tail = 0` the head carries all the mass.
pub fn low_complexity_profile(k0: usize, alpha0: f64, tail: usize) -> Result<Vec<f64>> {
    if k0 == 0 {
        return Err(Error::InvalidMasses("k0 must be at least 1".into()));
    }
    if !(alpha0 >= 0.0 && alpha0 < 1.0) {
        return Err(Error::InvalidMasses(format!("alpha0 must lie in [0, 1), got {alpha0}")));
    }
    if alpha0 > 0.0 && tail == 0 {
        return Err(Error::InvalidMasses("positive alpha0 needs a tail".into()));
    }
    let head = if tail == 0 { 1.0 } else { 1.0 - alpha0 };
    let mut masses = vec![head / k0 as f64; k0];
    if tail > 0 {
        masses.extend(std::iter::repeat_n(alpha0 / tail as f64, tail));
    }
    // Absorb rounding into the first atom so the total is 1.
    let total: f64 = masses.iter().sum();
    masses[0] += 1.0 - total;
    Ok(masses)
}

/// Iteration count within which a system with at most `k0` keys covering
/// `1 − alpha0` terminates with probability at least `1 − delta − delta0`:
/// `(k0 ln 2 + ln(1/delta0)) / (alpha − alpha0)`.
pub fn iteration_bound(alpha: f64, alpha0: f64, k0: usize, delta0: f64) -> Result<f64> {
    if !(alpha > alpha0) || !(delta0 > 0.0 && delta0 < 1.0) {
        return Err(Error::InvalidArgument(
            "need alpha > alpha0 and delta0 in (0, 1)".into(),
        ));
    }
    Ok((k0 as f64 * std::f64::consts::LN_2 + (1.0 / delta0).ln()) / (alpha - alpha0))
}
