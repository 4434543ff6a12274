//! Learning the practically relevant optimal active sets of parametric
//! linear programs.
//!
//! The crate is organised bottom-up:
//!
//! - [`lp`]: dense LP instances, a deterministic Bland's-rule simplex, and a
//!   brute-force vertex enumerator used as a test oracle.
//! - [`parametric`]: parameter-to-instance maps, canonical active-set keys,
//!   and reduced problems built from a key.
//! - [`dcopf`]: networks, PTDF matrices, and the DC optimal power flow
//!   program with load perturbations as parameters.
//! - [`sampling`]: counter-based reproducible load-perturbation streams.
//! - [`discovery`]: the streaming discovery loop with its window-size rule
//!   and rate-of-discovery stopping test.
//! - [`policy`]: the ensemble policy over a discovered collection and its
//!   out-of-sample evaluation.
//! - [`synthetic`]: categorical systems with exactly known masses.

pub mod dcopf;
pub mod discovery;
pub mod error;
pub mod linalg;
pub mod lp;
pub mod parametric;
pub mod policy;
pub mod random;
pub mod sampling;
pub mod synthetic;

pub use error::{Error, Result};
