//! Radiation-pressure response of the adiabatically eliminated idle mode:
//! linear transfer functions, the optical spring they imply, and the
//! back-action force spectrum.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::grid::Grid;
use crate::params::{DerivedQuantities, DrivenMode};
use crate::resolution::lorentzian_spectrum;
use crate::stats::linear_fit;
use crate::table::{Table, Value};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Frequency-domain radiation-pressure force,
/// `F(omega) = q_coeff q(omega) + v1_coeff v1(omega) + v2_coeff v2(omega)`,
/// with the `exp(-i omega t)` convention and `dp/dt = ... - F`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RpForceResponse {
    pub omega: f64,
    pub v1_coeff: Complex64,
    pub v2_coeff: Complex64,
    pub q_coeff: Complex64,
}

fn require_common(d: &DerivedQuantities) -> Result<(), ModelError> {
    match d.drive {
        DrivenMode::Common => Ok(()),
        DrivenMode::Differential => Err(ModelError::Unsupported(
            "spectra are implemented for the common-mode drive only".into(),
        )),
    }
}

pub fn rp_transfer(omega: f64, d: &DerivedQuantities) -> Result<RpForceResponse, ModelError> {
    require_common(d)?;
    Ok(rp_transfer_unchecked(omega, d))
}

pub(crate) fn rp_transfer_unchecked(omega: f64, d: &DerivedQuantities) -> RpForceResponse {
    let ig = I * d.gamma_d;
    let den = (omega + 2.0 * d.omega_s + ig) * (omega - 2.0 * d.omega_s + ig);
    let amp = d.gamma_d.sqrt() * d.g0 * d.c_bar;
    RpForceResponse {
        omega,
        v1_coeff: 2.0 * amp * (d.gamma_d - I * omega) / den,
        v2_coeff: Complex64::from(-4.0 * amp * d.omega_s) / den,
        q_coeff: Complex64::from(4.0 * d.g0 * d.g0 * d.c_bar * d.c_bar * d.omega_s) / den,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    /// `(S(omega) + S(-omega)) / 2`, what a classical noise model reproduces.
    #[default]
    Symmetrized,
    /// Ordered quantum spectrum, peaked at `+2 omega_s`.
    Quantum,
}

/// Back-action force spectral density for unit vacuum input.
pub fn backaction_spectrum(omega: f64, d: &DerivedQuantities, kind: SpectrumKind) -> Result<f64, ModelError> {
    require_common(d)?;
    let scale = d.g0 * d.g0 * d.c_bar * d.c_bar;
    Ok(match kind {
        SpectrumKind::Symmetrized => {
            let r = rp_transfer_unchecked(omega, d);
            0.5 * (r.v1_coeff.norm_sqr() + r.v2_coeff.norm_sqr())
        }
        SpectrumKind::Quantum => scale * lorentzian_spectrum(omega, d),
    })
}

/// Low-frequency expansion of the dynamical spring,
/// `q_coeff(omega) ~ k0 + k2 omega^2 + i damping omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpringFit {
    pub k0: f64,
    pub k2: f64,
    pub damping: f64,
    /// Largest relative misfit of the quadratic model over the fitted band.
    pub max_residual: f64,
}

/// Least-squares fit of `Re q_coeff` against `omega^2` and `Im q_coeff`
/// against `omega` on `n` points of `[-omega_max, omega_max]`.
pub fn spring_fit(d: &DerivedQuantities, omega_max: f64, n: usize) -> Result<SpringFit, ModelError> {
    require_common(d)?;
    if n < 3 || !(omega_max > 0.0) {
        return Err(ModelError::InvalidParameter("spring fit needs n >= 3 and omega_max > 0".into()));
    }
    let grid = Grid::linear(-omega_max, omega_max, n);
    let pts: Vec<RpForceResponse> = grid.points().into_iter().map(|w| rp_transfer_unchecked(w, d)).collect();
    let w2: Vec<f64> = pts.iter().map(|p| p.omega * p.omega).collect();
    let re: Vec<f64> = pts.iter().map(|p| p.q_coeff.re).collect();
    let (k2, k0) = linear_fit(&w2, &re);
    let w: Vec<f64> = pts.iter().map(|p| p.omega).collect();
    let im: Vec<f64> = pts.iter().map(|p| p.q_coeff.im).collect();
    let (damping, _) = linear_fit(&w, &im);
    let max_residual = pts
        .iter()
        .map(|p| {
            let model = Complex64::new(k0 + k2 * p.omega * p.omega, damping * p.omega);
            (p.q_coeff - model).norm() / p.q_coeff.norm()
        })
        .fold(0.0, f64::max);
    Ok(SpringFit { k0, k2, damping, max_residual })
}

/// Transfer coefficients and spectra sampled on a frequency grid.
pub fn spectrum_table(d: &DerivedQuantities, grid: &Grid) -> Result<Table, ModelError> {
    require_common(d)?;
    let mut t = Table::new([
        "omega", "q_coeff_re", "q_coeff_im", "q_coeff_abs2", "v1_coeff_re", "v1_coeff_im", "v2_coeff_re", "v2_coeff_im",
        "s_ba_symmetrized", "s_ba_quantum",
    ]);
    for w in grid.points() {
        let r = rp_transfer_unchecked(w, d);
        let row: Vec<Value> = vec![
            w.into(),
            r.q_coeff.re.into(),
            r.q_coeff.im.into(),
            r.q_coeff.norm_sqr().into(),
            r.v1_coeff.re.into(),
            r.v1_coeff.im.into(),
            r.v2_coeff.re.into(),
            r.v2_coeff.im.into(),
            backaction_spectrum(w, d, SpectrumKind::Symmetrized)?.into(),
            backaction_spectrum(w, d, SpectrumKind::Quantum)?.into(),
        ];
        t.push(row);
    }
    Ok(t)
}

/// Frequency of the largest periodogram peak of a uniformly sampled real
/// signal, refined by parabolic interpolation of the log power. Returns
/// angular frequency.
pub fn dominant_frequency(signal: &[f64], dt: f64) -> Option<f64> {
    let n = signal.len();
    if n < 8 {
        return None;
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex64> = signal
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64).cos();
            Complex64::new((x - mean) * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let power: Vec<f64> = buf[..n / 2].iter().map(|c| c.norm_sqr()).collect();
    let (k, _) = power
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    let offset = if k + 1 < power.len() {
        let (a, b, c) = (power[k - 1].ln(), power[k].ln(), power[k + 1].ln());
        let denom = a - 2.0 * b + c;
        if denom.abs() > 0.0 { 0.5 * (a - c) / denom } else { 0.0 }
    } else {
        0.0
    };
    Some(2.0 * std::f64::consts::PI * (k as f64 + offset) / (n as f64 * dt))
}
