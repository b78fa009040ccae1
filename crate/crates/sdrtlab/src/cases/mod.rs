//! Benchmark case runners: linear advection-diffusion order tables, the
//! FR-SDRT/SDRT equivalence check, isentropic vortex transport and the
//! periodic vortex-decay dissipation budget.

pub mod linadv;
pub mod tgv;
pub mod vortex;

pub use linadv::{
    observed_order, run_equivalence, run_linadvdiff, EquivalenceConfig, LinAdvDiffConfig,
    LinAdvDiffResult,
};
pub use tgv::{run_tgv, TgvConfig, TgvResult, TgvSample};
pub use vortex::{free_stream_error, run_euler_vortex, VortexConfig, VortexResult};
