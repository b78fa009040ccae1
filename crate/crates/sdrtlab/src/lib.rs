//! Spectral element solvers built around the spectral difference Raviart-Thomas
//! (SDRT) discretization and its flux reconstruction relatives (FR-DG, FR-SDRT),
//! on quadrilateral, triangular, hexahedral, tetrahedral and prismatic elements.
//!
//! The crate provides three layers:
//!
//! * discretization building blocks: reference elements ([`refelem`]), modal and
//!   Raviart-Thomas bases ([`basis`]), uniform periodic meshes ([`mesh`]) and the
//!   assembled per-element operator sets ([`operators`]);
//! * a method-of-lines driver ([`solver`]) with explicit Runge-Kutta integrators
//!   and the flux/Riemann functions of the supported equation sets ([`physics`]);
//! * analysis and benchmark tooling: Von Neumann dissipation/dispersion and
//!   temporal stability sweeps ([`vonneumann`]) and the benchmark case runners
//!   ([`cases`]).
//!
//! See the `examples/` directory for one runnable entry point per capability and
//! the `sdrtlab` binary for config-driven batch runs.

pub mod basis;
pub mod cases;
pub mod cli;
pub mod config;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod operators;
pub mod physics;
pub mod refelem;
pub mod report;
pub mod solver;
pub mod vonneumann;

pub use error::Error;

/// Discretization scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Spectral difference with a Raviart-Thomas flux basis.
    Sdrt,
    /// Flux reconstruction recovering the nodal DG scheme.
    FrDg,
    /// Flux reconstruction using the SDRT basis divergence as correction.
    FrSdrt,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Sdrt => "sdrt",
            Scheme::FrDg => "frdg",
            Scheme::FrSdrt => "frsdrt",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "sdrt" => Ok(Scheme::Sdrt),
            "frdg" | "fr-dg" => Ok(Scheme::FrDg),
            "frsdrt" | "fr-sdrt" => Ok(Scheme::FrSdrt),
            other => Err(Error::Config(format!(
                "unknown scheme `{other}` (expected sdrt, frdg or frsdrt)"
            ))),
        }
    }
}
