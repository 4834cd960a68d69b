//! Monotone-based finite-volume schemes for two-dimensional, weakly coupled
//! systems of nonlocal conservation laws
//!
//! ```text
//! d_t rho^k + div f^k(t, x, rho^k, eta * rho) = 0,   k = 1..K
//! ```
//!
//! The convolution `eta * rho` is sampled at cell interfaces once per time
//! step, which freezes the flux into K decoupled local fluxes that are then
//! fed to a classical two-point monotone numerical flux.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod flux;
pub mod grid;
pub mod harness;
pub mod models;
pub mod nonlocal;
pub mod scheme;

pub use error::{Error, Result};
pub use flux::{FluxModel, FluxVariant, MultiplicativeFlux, NumericalFluxChoice};
pub use grid::{AdmissibleInterval, Boundary, Field, Grid2D, ProjectionRule};
pub use nonlocal::{InterfaceConvolutions, KernelSet, SampledKernelTables};
pub use scheme::{Direction, SchemeConfig, StepRecord};
