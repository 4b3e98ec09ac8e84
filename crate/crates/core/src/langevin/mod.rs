//! Classical-equivalent stochastic simulation of the linearized Langevin
//! system, used to check the closed-form resolution by Monte Carlo.
//!
//! Vacuum inputs are white c-number noises of density 1/2 per quadrature.
//! Mechanical quadratures `q, p` are normalized to the bare frequency; the
//! "effective" coordinates `q / Lambda, Lambda p` define the energy `N`.

mod estimator;
mod integrator;
mod monte_carlo;
pub mod noise;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::ModelError;
use crate::params::DerivedQuantities;

pub use estimator::{estimate_n, second_order_signal, signal_gain, EstimatorSample, SecondOrderSignal};
pub use integrator::{integrate, spring_frequency, Trajectory};
pub use monte_carlo::{
    dump_trajectories, fit_calibration, monte_carlo_resolution, monte_carlo_resolution_with, CalibrationFit, McPoint, McResult,
};
pub use noise::{generate_noise, Coarsened, Increments, NoiseGenerator, NoiseSource, NoiseStreams, Silent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    /// Idle mode co-integrated in its rotating frame.
    Full,
    /// Idle mode eliminated; spring absorbed into `omega_eff`.
    #[default]
    Adiabatic,
}

impl FromStr for SimMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(SimMode::Full),
            "adiabatic" => Ok(SimMode::Adiabatic),
            other => Err(format!("unknown simulation mode '{other}' (expected full or adiabatic)")),
        }
    }
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SimMode::Full => "full",
            SimMode::Adiabatic => "adiabatic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    /// Integration length; at least the largest entry of `tau_grid`.
    pub duration: f64,
    pub n_trials: usize,
    pub seed: u64,
    pub mode: SimMode,
    pub tau_grid: Vec<f64>,
    /// Initial energy; trials start on the circle of radius `sqrt(2 n_true)`
    /// with a random phase.
    pub n_true: f64,
}

/// Largest admissible step for `mode`.
pub fn step_limit(d: &DerivedQuantities, mode: SimMode) -> f64 {
    match mode {
        SimMode::Adiabatic => 1.0 / (20.0 * d.omega_eff.max(d.gamma_c)),
        SimMode::Full => 1.0 / (40.0 * d.omega_s),
    }
}

impl SimConfig {
    /// Step at the mode's limit and duration equal to the largest `tau`.
    pub fn new(d: &DerivedQuantities, mode: SimMode, tau_grid: Vec<f64>, n_trials: usize, seed: u64) -> Self {
        let duration = tau_grid.iter().cloned().fold(0.0, f64::max);
        SimConfig { dt: step_limit(d, mode), duration, n_trials, seed, mode, tau_grid, n_true: 1.0 }
    }

    pub fn validate(&self, d: &DerivedQuantities) -> Result<(), ModelError> {
        d.require_stable()?;
        if d.drive != crate::params::DrivenMode::Common {
            return Err(ModelError::Unsupported("the simulator supports the common-mode drive only".into()));
        }
        let limit = step_limit(d, self.mode);
        if !(self.dt > 0.0) || self.dt > limit * (1.0 + 1e-12) {
            return Err(ModelError::StepTooLarge {
                dt: self.dt,
                limit,
                mode: match self.mode {
                    SimMode::Full => "full",
                    SimMode::Adiabatic => "adiabatic",
                },
            });
        }
        if self.n_trials < 2 {
            return Err(ModelError::InvalidParameter("n_trials must be at least 2".into()));
        }
        if self.tau_grid.is_empty() || self.tau_grid.iter().any(|t| !(*t > 0.0)) {
            return Err(ModelError::InvalidParameter("tau grid must be non-empty and positive".into()));
        }
        if self.tau_grid.iter().any(|t| *t > self.duration * (1.0 + 1e-12)) {
            return Err(ModelError::InvalidParameter("tau grid exceeds the simulated duration".into()));
        }
        if !(self.n_true >= 0.0) {
            return Err(ModelError::InvalidParameter("n_true must be non-negative".into()));
        }
        Ok(())
    }

    /// Step counts of the `tau` checkpoints (at least one step each).
    pub fn checkpoints(&self) -> Vec<usize> {
        self.tau_grid.iter().map(|t| ((t / self.dt).round() as usize).max(1)).collect()
    }

    pub fn n_steps(&self) -> usize {
        ((self.duration / self.dt).round() as usize).max(self.checkpoints().into_iter().max().unwrap_or(1))
    }
}

/// Thermal force diffusion `2 gamma_m n_th`.
pub fn thermal_diffusion(d: &DerivedQuantities) -> f64 {
    2.0 * d.gamma_m * d.n_th
}
