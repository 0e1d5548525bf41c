//! Multimaterial remap for `N` perfect gases in pressure and temperature
//! equilibrium.
//!
//! Partial masses share one mass flux per half-face, `Φ = ρ_A v`, split
//! between species by the edge mass fractions, and the edge density is the one compatible with the donor
//! cell pressure and temperature. Mass fractions use the compressive MLP
//! reconstruction with a per-cell compatibility projection of the limiting
//! factors so that edge fractions always sum to one.

pub mod compat;
pub mod eos;
pub mod remap;

pub use compat::{compat_project, compat_residual};
pub use eos::{alpha_from_z, recover_primitives, z_from_alpha, PerfectGasEos, Primitives};
pub use remap::{
    compatible_fraction_reconstructions, remap_cfl_check, remap_cfl_ratio, remap_rate, CellPrimitives, MultiMatState,
    Remap, RemapConfig,
};
