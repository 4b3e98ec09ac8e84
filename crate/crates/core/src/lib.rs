//! Standard-quantum-limit analysis for resolving mechanical energy quanta
//! through dispersive (quadratic) optomechanical coupling.
//!
//! The crate is organised around the pipeline
//!
//! ```text
//! SystemConfig --derive--> DerivedQuantities --+--> resolution (closed form)
//!                                              +--> spectra
//!                                              +--> langevin (Monte Carlo)
//! ParametricSystem --reduce/to_tripartite-------+
//! ```
//!
//! All angular frequencies are in rad/s and all rates in 1/s unless a
//! field name says otherwise.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod constants;
pub mod error;
pub mod grid;
pub mod langevin;
pub mod optimize;
pub mod params;
pub mod reducer;
pub mod resolution;
pub mod spectra;
pub mod stats;
pub mod sweep;
pub mod table;

pub use config::{ConfigError, RateConfig};
pub use constants::PhysicalConstants;
pub use error::ModelError;
pub use grid::{Grid, Scale};
pub use params::{
    derive, derive_unchecked, validate_regime, CavityGeometry, DerivedQuantities, DrivenMode,
    ModeRates, RegimeCheck, RegimeMargins, RegimeReport, SystemConfig,
};
pub use reducer::{ParametricSystem, ReduceError, TripartiteEquivalent};
pub use sweep::{Axis, SweepError, SweepSpec};
pub use resolution::{FeasibilityReport, ResolutionBreakdown, ResolutionOptions};
pub use table::{Table, Value};
