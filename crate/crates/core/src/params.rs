//! Experiment parameters and every rate and coupling derived from them.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::constants::{PhysicalConstants, CODATA};
use crate::error::ModelError;
use crate::table::Value;

/// Which optical normal mode carries the classical drive.
///
/// Driving the lower (common) mode gives a negative optical rigidity and
/// `omega_eff < omega_m`; driving the upper (differential) mode stiffens the
/// membrane instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DrivenMode {
    #[default]
    Common,
    Differential,
}

impl DrivenMode {
    /// +1 when the spring softens the mechanics, -1 when it stiffens it.
    pub fn softening_sign(self) -> f64 {
        match self {
            DrivenMode::Common => 1.0,
            DrivenMode::Differential => -1.0,
        }
    }
}

impl FromStr for DrivenMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "common" => Ok(DrivenMode::Common),
            "differential" => Ok(DrivenMode::Differential),
            other => Err(format!("unknown driven mode '{other}' (expected common or differential)")),
        }
    }
}

impl fmt::Display for DrivenMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DrivenMode::Common => "common",
            DrivenMode::Differential => "differential",
        })
    }
}

/// Raw experimental parameters, all in SI units (angular frequencies in rad/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Membrane effective mass, kg.
    pub mass: f64,
    /// Bare mechanical angular frequency, rad/s.
    pub omega_m: f64,
    pub q_m: f64,
    /// Optical wavelength, m.
    pub wavelength: f64,
    /// Full cavity length, m.
    pub cavity_length: f64,
    /// Membrane amplitude reflectivity; transmissivity is `sqrt(1 - r_m^2)`.
    pub r_m: f64,
    /// `pi / t0^2` with equal end-mirror amplitude transmissivities `t0`.
    pub finesse: f64,
    /// Bath temperature, K.
    pub temperature: f64,
    /// Input optical power, W.
    pub input_power: f64,
    pub driven_mode: DrivenMode,
}

/// Names accepted by [`SystemConfig::set_param`] and in config files.
pub const PARAM_NAMES: &[&str] =
    &["m", "omega_m", "Q_m", "lambda", "L", "r_m", "t_m", "finesse", "T", "I_0"];

impl SystemConfig {
    /// Parameter set of the membrane-in-the-middle design study shipped as
    /// `data/default.conf`.
    pub fn reference_default() -> Self {
        crate::config::parse_system_config(crate::config::DEFAULT_CONFIG, &[])
            .expect("shipped default config parses")
    }

    pub fn membrane_transmissivity(&self) -> f64 {
        (1.0 - self.r_m * self.r_m).sqrt()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("m", self.mass),
            ("omega_m", self.omega_m),
            ("Q_m", self.q_m),
            ("lambda", self.wavelength),
            ("L", self.cavity_length),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.r_m > 0.0 && self.r_m < 1.0) {
            return Err(ModelError::InvalidParameter(format!(
                "r_m must lie strictly between 0 and 1, got {}",
                self.r_m
            )));
        }
        if !(self.finesse.is_finite() && self.finesse > 1.0) {
            return Err(ModelError::InvalidParameter(format!(
                "finesse must exceed 1, got {}",
                self.finesse
            )));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "T must be non-negative, got {}",
                self.temperature
            )));
        }
        if !(self.input_power.is_finite() && self.input_power >= 0.0) {
            return Err(ModelError::InvalidParameter(format!(
                "I_0 must be non-negative, got {}",
                self.input_power
            )));
        }
        Ok(())
    }

    /// Set a numeric parameter by its config-file name; `value` is in SI units.
    pub fn set_param(&mut self, name: &str, value: f64) -> Result<(), String> {
        match name {
            "m" => self.mass = value,
            "omega_m" => self.omega_m = value,
            "Q_m" => self.q_m = value,
            "lambda" => self.wavelength = value,
            "L" => self.cavity_length = value,
            "r_m" => self.r_m = value,
            "t_m" => self.r_m = (1.0 - value * value).sqrt(),
            "finesse" => self.finesse = value,
            "T" => self.temperature = value,
            "I_0" => self.input_power = value,
            other => return Err(format!("unknown parameter '{other}'")),
        }
        Ok(())
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        Some(match name {
            "m" => self.mass,
            "omega_m" => self.omega_m,
            "Q_m" => self.q_m,
            "lambda" => self.wavelength,
            "L" => self.cavity_length,
            "r_m" => self.r_m,
            "t_m" => self.membrane_transmissivity(),
            "finesse" => self.finesse,
            "T" => self.temperature,
            "I_0" => self.input_power,
            _ => return None,
        })
    }
}

/// Optical-geometry quantities that only exist for a physical cavity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityGeometry {
    /// Zero-point motion `sqrt(hbar / (2 m omega_m))`, m.
    pub x_q: f64,
    /// Optical carrier angular frequency, rad/s.
    pub omega_0: f64,
    pub wavelength: f64,
    pub finesse: f64,
    pub cavity_length: f64,
    pub t_m: f64,
    /// End-mirror power transmissivity `t0^2 = pi / finesse`.
    pub t0_sq: f64,
    pub hbar: f64,
}

impl CavityGeometry {
    /// Input power that produces `photons` intracavity photons in the driven mode.
    pub fn power_for_photons(&self, photons: f64, gamma_drive: f64) -> f64 {
        photons * gamma_drive * self.hbar * self.omega_0 / 2.0
    }
}

/// The dynamical rates of the tripartite model (one mechanical mode, a driven
/// optical mode, and the nearest idle mode).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeRates {
    pub omega_m: f64,
    pub gamma_m: f64,
    /// Thermal occupation `k_B T / (hbar omega_m)`.
    pub n_th: f64,
    /// Half the splitting of the two optical normal modes.
    pub omega_s: f64,
    /// Linear optomechanical coupling between the two normal modes.
    pub g0: f64,
    /// Decay rate of the driven (probe) mode.
    pub gamma_c: f64,
    /// Decay rate of the idle mode.
    pub gamma_d: f64,
    /// Intracavity amplitude of the driven mode, sqrt(photon number).
    pub c_bar: f64,
    pub drive: DrivenMode,
}

/// Every quantity derived from a [`SystemConfig`] (or a reduced parametric
/// system) that the analysis and simulation modules consume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    pub omega_m: f64,
    pub gamma_m: f64,
    pub n_th: f64,
    pub omega_s: f64,
    pub g0: f64,
    pub gamma_c: f64,
    pub gamma_d: f64,
    pub c_bar: f64,
    pub drive: DrivenMode,
    /// Magnitude of the optical rigidity `g0^2 c_bar^2 / omega_s`.
    pub k_spring: f64,
    /// Signed `omega_m (omega_m -/+ k_spring)`; not positive when unstable.
    pub omega_eff_sq: f64,
    /// NaN when the spring is unstable.
    pub omega_eff: f64,
    /// `sqrt(omega_m / omega_eff)`.
    pub lambda: f64,
    /// `lambda * g0`.
    pub g_eff: f64,
    pub geometry: Option<CavityGeometry>,
}

impl DerivedQuantities {
    pub fn from_rates(rates: ModeRates, geometry: Option<CavityGeometry>) -> Self {
        let k_spring = if rates.omega_s > 0.0 {
            rates.g0 * rates.g0 * rates.c_bar * rates.c_bar / rates.omega_s
        } else {
            0.0
        };
        let omega_eff_sq = rates.omega_m * (rates.omega_m - rates.drive.softening_sign() * k_spring);
        let (omega_eff, lambda) = if omega_eff_sq > 0.0 {
            let w = omega_eff_sq.sqrt();
            (w, (rates.omega_m / w).sqrt())
        } else {
            (f64::NAN, f64::NAN)
        };
        DerivedQuantities {
            omega_m: rates.omega_m,
            gamma_m: rates.gamma_m,
            n_th: rates.n_th,
            omega_s: rates.omega_s,
            g0: rates.g0,
            gamma_c: rates.gamma_c,
            gamma_d: rates.gamma_d,
            c_bar: rates.c_bar,
            drive: rates.drive,
            k_spring,
            omega_eff_sq,
            omega_eff,
            lambda,
            g_eff: lambda * rates.g0,
            geometry,
        }
    }

    pub fn rates(&self) -> ModeRates {
        ModeRates {
            omega_m: self.omega_m,
            gamma_m: self.gamma_m,
            n_th: self.n_th,
            omega_s: self.omega_s,
            g0: self.g0,
            gamma_c: self.gamma_c,
            gamma_d: self.gamma_d,
            c_bar: self.c_bar,
            drive: self.drive,
        }
    }

    /// Same rates with the drive amplitude replaced; spring quantities are recomputed.
    pub fn with_c_bar(&self, c_bar: f64) -> Self {
        let mut r = self.rates();
        r.c_bar = c_bar;
        DerivedQuantities::from_rates(r, self.geometry)
    }

    pub fn is_stable(&self) -> bool {
        self.omega_eff_sq > 0.0
    }

    pub fn q_m(&self) -> f64 {
        self.omega_m / self.gamma_m
    }

    /// Intracavity photon number at which `omega_eff` reaches zero.
    pub fn threshold_photons(&self) -> f64 {
        self.omega_m * self.omega_s / (self.g0 * self.g0)
    }

    pub fn threshold_power(&self) -> f64 {
        match self.geometry {
            Some(g) => g.power_for_photons(self.threshold_photons(), self.gamma_c),
            None => f64::NAN,
        }
    }

    pub fn require_stable(&self) -> Result<(), ModelError> {
        if self.is_stable() {
            Ok(())
        } else {
            Err(ModelError::UnstableSpring {
                omega_eff_sq: self.omega_eff_sq,
                threshold_photons: self.threshold_photons(),
                threshold_power: self.threshold_power(),
            })
        }
    }

    /// `lambda / (finesse * x_q)`, only defined for a physical cavity.
    pub fn finesse_form(&self) -> Option<f64> {
        self.geometry.map(|g| g.wavelength / (g.finesse * g.x_q))
    }

    /// Thermal energy in units of the effective mechanical quantum,
    /// `k_B T / (hbar omega_eff) = n_th omega_m / omega_eff`.
    pub fn thermal_quanta_eff(&self) -> f64 {
        self.n_th * self.omega_m / self.omega_eff
    }

    /// Flat named record of every derived field.
    pub fn fields(&self) -> Vec<(&'static str, Value)> {
        let mut out = Vec::new();
        if let Some(g) = self.geometry {
            out.push(("x_q", Value::Num(g.x_q)));
            out.push(("omega_0", Value::Num(g.omega_0)));
            out.push(("t_m", Value::Num(g.t_m)));
            out.push(("t0_sq", Value::Num(g.t0_sq)));
        }
        out.extend([
            ("omega_m", Value::Num(self.omega_m)),
            ("omega_s", Value::Num(self.omega_s)),
            ("g0", Value::Num(self.g0)),
            ("gamma_c", Value::Num(self.gamma_c)),
            ("gamma_d", Value::Num(self.gamma_d)),
            ("gamma_m", Value::Num(self.gamma_m)),
            ("n_th", Value::Num(self.n_th)),
            ("c_bar", Value::Num(self.c_bar)),
            ("k_spring", Value::Num(self.k_spring)),
            ("omega_eff_sq", Value::Num(self.omega_eff_sq)),
            ("omega_eff", Value::Num(self.omega_eff)),
            ("lambda", Value::Num(self.lambda)),
            ("g_eff", Value::Num(self.g_eff)),
            ("threshold_photons", Value::Num(self.threshold_photons())),
        ]);
        if self.geometry.is_some() {
            out.push(("threshold_power", Value::Num(self.threshold_power())));
        }
        out.push(("drive", Value::Text(self.drive.to_string())));
        out
    }
}

fn derive_with(config: &SystemConfig, k: &PhysicalConstants) -> DerivedQuantities {
    let x_q = (k.hbar / (2.0 * config.mass * config.omega_m)).sqrt();
    let omega_0 = 2.0 * PI * k.c_light / config.wavelength;
    let t_m = config.membrane_transmissivity();
    let t0_sq = PI / config.finesse;
    let omega_s = t_m * k.c_light / config.cavity_length;
    let g0 = 2.0 * SQRT_2 * omega_0 * x_q / config.cavity_length;
    let gamma = k.c_light * t0_sq / (2.0 * config.cavity_length);
    let c_bar = (2.0 * config.input_power / (gamma * k.hbar * omega_0)).sqrt();
    let rates = ModeRates {
        omega_m: config.omega_m,
        gamma_m: config.omega_m / config.q_m,
        n_th: k.k_b * config.temperature / (k.hbar * config.omega_m),
        omega_s,
        g0,
        gamma_c: gamma,
        gamma_d: gamma,
        c_bar,
        drive: config.driven_mode,
    };
    let geometry = CavityGeometry {
        x_q,
        omega_0,
        wavelength: config.wavelength,
        finesse: config.finesse,
        cavity_length: config.cavity_length,
        t_m,
        t0_sq,
        hbar: k.hbar,
    };
    DerivedQuantities::from_rates(rates, Some(geometry))
}

/// Derive all rates from `config`, rejecting an unstable optical spring.
pub fn derive(config: &SystemConfig) -> Result<DerivedQuantities, ModelError> {
    let d = derive_unchecked(config)?;
    d.require_stable()?;
    Ok(d)
}

/// Like [`derive`] but keeps configurations whose spring is unstable, with
/// `omega_eff`, `lambda` and `g_eff` set to NaN.
pub fn derive_unchecked(config: &SystemConfig) -> Result<DerivedQuantities, ModelError> {
    config.validate()?;
    Ok(derive_with(config, &CODATA))
}

/// Upper bounds on the perturbative small parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeMargins {
    /// Bound for "much less than" conditions.
    pub strong: f64,
    /// Bound for plain "less than" conditions.
    pub weak: f64,
}

impl Default for RegimeMargins {
    fn default() -> Self {
        RegimeMargins { strong: 0.1, weak: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeCheck {
    pub name: String,
    pub ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl RegimeCheck {
    pub fn new(name: impl Into<String>, ratio: f64, threshold: f64) -> Self {
        // NaN ratios fail.
        let pass = ratio < threshold;
        RegimeCheck { name: name.into(), ratio, threshold, pass }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct RegimeReport {
    pub checks: Vec<RegimeCheck>,
}

impl RegimeReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, name: &str) -> Option<&RegimeCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

pub fn validate_regime(derived: &DerivedQuantities, margins: &RegimeMargins) -> RegimeReport {
    let d = derived;
    let gamma = d.gamma_c.max(d.gamma_d);
    RegimeReport {
        checks: vec![
            RegimeCheck::new("omega_m/omega_s", d.omega_m / d.omega_s, margins.strong),
            RegimeCheck::new("g0/(2omega_s)", d.g0 / (2.0 * d.omega_s), margins.strong),
            RegimeCheck::new("gamma_cd/omega_m", gamma / d.omega_m, margins.weak),
            RegimeCheck::new("gamma_cd/(2omega_s)", gamma / (2.0 * d.omega_s), margins.strong),
        ],
    }
}
