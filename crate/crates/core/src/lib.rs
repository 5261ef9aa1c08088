//! Sparse recovery with ℓp quasinorm decoders (0 < p ≤ 1).
//!
//! The crate is organised bottom-up:
//!
//! - [`ensembles`]: seeded random measurement matrices and test signals.
//! - [`metrics`]: quasinorms, best S-term errors, SNR.
//! - [`rip`]: restricted isometry constants, exhaustive and Monte-Carlo.
//! - [`certify`]: closed-form recovery constants and sufficient conditions.
//! - [`decode`]: the Δ₀ enumeration oracle and the smoothed Δp / Δp^ε decoders.
//! - [`pconvex`]: gauge functionals, sign balancing and empirical LQp checks.
//! - [`experiments`]: phase diagrams, robustness sweeps and SNR grids.
//!
//! All randomness is derived from explicit `u64` seeds through [`rng`], so
//! every result is reproducible bit for bit and independent of thread count.

pub mod certify;
pub mod decode;
pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod io;
pub mod metrics;
pub mod pconvex;
pub mod rip;
pub mod rng;

pub use ensembles::{Ensemble, MeasurementMatrix, SignalKind, SignalSpec};
pub use error::{Error, Result};
