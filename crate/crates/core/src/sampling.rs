//! Reproducible i.i.d. load-perturbation streams.
//!
//! Each sample index owns an independent ChaCha stream keyed by
//! `(seed, index)`, so any subset of indices can be generated in any order,
//! or in parallel, with identical results.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dcopf::Network;
use crate::error::{Error, Result};
use crate::parametric::{Fnv64, Sample};
use std::hash::Hasher;

/// Anything that can produce the `index`-th sample of a stream.
pub trait SampleStream: Send + Sync {
    fn sample_len(&self) -> usize;

    /// Must depend only on the stream's configuration and `index`.
    fn draw(&self, index: u64) -> Sample;

    fn fingerprint(&self) -> u64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    /// Independent zero-mean normals with std `sigma_fraction * |d_i|`.
    Normal,
    /// Independent uniforms on `±support_sigmas * sigma_fraction * |d_i|`.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub kind: DistributionKind,
    pub sigma_fraction: f64,
    pub support_sigmas: f64,
    pub seed: u64,
}

impl DistributionSpec {
    pub fn normal(seed: u64) -> Self {
        Self {
            kind: DistributionKind::Normal,
            sigma_fraction: 0.03,
            support_sigmas: 3.0,
            seed,
        }
    }

    pub fn uniform(seed: u64) -> Self {
        Self {
            kind: DistributionKind::Uniform,
            ..Self::normal(seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_fraction >= 0.0) || !self.sigma_fraction.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "sigma_fraction must be >= 0, got {}",
                self.sigma_fraction
            )));
        }
        if !(self.support_sigmas > 0.0) || !self.support_sigmas.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "support_sigmas must be > 0, got {}",
                self.support_sigmas
            )));
        }
        Ok(())
    }
}

/// Product distribution over the loaded buses of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub kind: DistributionKind,
    /// Per-component standard deviation, in MW.
    pub stds: Vec<f64>,
    pub support_sigmas: f64,
    pub seed: u64,
}

pub fn make_distribution(spec: &DistributionSpec, network: &Network) -> Result<Distribution> {
    spec.validate()?;
    let stds = network
        .buses
        .iter()
        .filter(|b| b.load_mw != 0.0)
        .map(|b| spec.sigma_fraction * b.load_mw.abs())
        .collect();
    Ok(Distribution {
        kind: spec.kind,
        stds,
        support_sigmas: spec.support_sigmas,
        seed: spec.seed,
    })
}

impl Distribution {
    /// Same distribution with a different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    /// Support `[lo, hi]` of each component; infinite for normals with
    /// nonzero spread.
    pub fn support(&self) -> Vec<(f64, f64)> {
        self.stds
            .iter()
            .map(|&s| match self.kind {
                _ if s == 0.0 => (0.0, 0.0),
                DistributionKind::Normal => (f64::NEG_INFINITY, f64::INFINITY),
                DistributionKind::Uniform => (-self.support_sigmas * s, self.support_sigmas * s),
            })
            .collect()
    }
}

/// Uniform in the open interval (0, 1) from 53 random bits.
fn open_unit(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Generator for the `index`-th substream of `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

impl SampleStream for Distribution {
    fn sample_len(&self) -> usize {
        self.stds.len()
    }

    fn draw(&self, index: u64) -> Sample {
        let mut rng = substream(self.seed, index);
        let std_normal = Normal::standard();
        let values = self
            .stds
            .iter()
            .map(|&s| {
                let u = open_unit(rng.next_u64());
                match self.kind {
                    DistributionKind::Normal => s * std_normal.inverse_cdf(u),
                    DistributionKind::Uniform => s * self.support_sigmas * (2.0 * u - 1.0),
                }
            })
            .collect();
        Sample::new(values, index)
    }

    fn fingerprint(&self) -> u64 {
        let mut h = Fnv64::new();
        h.write(match self.kind {
            DistributionKind::Normal => b"normal",
            DistributionKind::Uniform => b"uniform",
        });
        h.write_f64s(&self.stds);
        h.write_f64s(&[self.support_sigmas]);
        h.write_u64(self.seed);
        h.finish()
    }
}
