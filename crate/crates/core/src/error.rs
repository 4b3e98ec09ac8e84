use thiserror::Error;

/// Failures that come from the physics rather than from malformed input.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// The optical spring overwhelms the mechanical restoring force.
    #[error(
        "optical spring is unstable (omega_eff^2 = {omega_eff_sq:.6e}); \
         threshold photon number {threshold_photons:.6e}, threshold power {threshold_power:.6e} W"
    )]
    UnstableSpring {
        omega_eff_sq: f64,
        threshold_photons: f64,
        /// NaN when the configuration has no optical geometry to convert photons to watts.
        threshold_power: f64,
    },
    #[error("no dispersive signal: coupling or drive amplitude is zero")]
    ZeroSignal,
    #[error("resolution has no finite minimum: only the shot-noise term is present")]
    NoMinimum,
    #[error("time step {dt:.6e} s exceeds the limit {limit:.6e} s for {mode} integration")]
    StepTooLarge { dt: f64, limit: f64, mode: &'static str },
    #[error("{0}")]
    Unsupported(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl ModelError {
    /// Stable identifier used in machine-readable output.
    pub fn kind(&self) -> &'static str {
        match self {
            ModelError::UnstableSpring { .. } => "UnstableSpring",
            ModelError::ZeroSignal => "ZeroSignal",
            ModelError::NoMinimum => "NoMinimum",
            ModelError::StepTooLarge { .. } => "StepTooLarge",
            ModelError::Unsupported(_) => "Unsupported",
            ModelError::InvalidParameter(_) => "InvalidParameter",
        }
    }
}
