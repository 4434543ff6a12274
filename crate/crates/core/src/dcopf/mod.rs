//! DC optimal power flow: network data, PTDF matrices, and the parametric
//! program with load perturbations as parameters.

mod network;
mod parse;
mod program;
mod ptdf;

pub use network::{Branch, Bus, Generator, Network};
pub use parse::{parse_network, CaseFormat};
pub use program::{build_dcopf, DcOpfProgram};
pub use ptdf::{build_ptdf, dc_power_flow, PtdfMatrix};

/// Small cases shipped with the crate, as MATPOWER text.
pub mod bundled {
    use super::{parse_network, CaseFormat, Network};

    pub const CASE3: &str = include_str!("../../cases/case3.m");
    pub const CASE5: &str = include_str!("../../cases/case5.m");
    pub const CASE6_CONGESTED: &str = include_str!("../../cases/case6_congested.m");

    /// `(name, text)` for every bundled case.
    pub fn all() -> [(&'static str, &'static str); 3] {
        [
            ("case3", CASE3),
            ("case5", CASE5),
            ("case6_congested", CASE6_CONGESTED),
        ]
    }

    pub fn load(name: &str) -> Option<Network> {
        all()
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, text)| parse_network(text, CaseFormat::MatpowerSubset).expect("bundled case parses"))
    }
}
