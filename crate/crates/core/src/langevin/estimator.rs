use num_complex::Complex64;

use super::integrator::Trajectory;
use super::noise::NoiseStreams;
use super::SimMode;
use crate::error::ModelError;
use crate::params::DerivedQuantities;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Magnitude of the record slope per quantum, `g_eff^2 c_bar / (sqrt(gamma_c) omega_s)`.
pub fn signal_gain(d: &DerivedQuantities) -> f64 {
    d.g_eff * d.g_eff * d.c_bar / (d.gamma_c.sqrt() * d.omega_s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorSample {
    pub tau: f64,
    pub y: f64,
    pub n_est: f64,
    pub n_true: f64,
}

/// Gain inversion `N_est = -Y / (gain tau)`.
pub(crate) fn invert(y: f64, tau: f64, gain: f64) -> f64 {
    -y / (gain * tau)
}

/// Build the homodyne record up to `tau` from the measured-quadrature noise
/// and the trajectory's signal field, then invert the gain.
pub fn estimate_n(
    traj: &Trajectory,
    noise: &NoiseStreams,
    d: &DerivedQuantities,
    tau: f64,
) -> Result<EstimatorSample, ModelError> {
    let k = (tau / traj.dt).round() as usize;
    if k == 0 || k + 1 > traj.c2.len() || k > noise.len() {
        return Err(ModelError::InvalidParameter(format!("tau = {tau} outside the simulated record")));
    }
    let readout = 2.0 * d.gamma_c.sqrt();
    let mut y = 0.0;
    for j in 0..k {
        y += noise.u2[j] - readout * 0.5 * (traj.c2[j].im + traj.c2[j + 1].im) * traj.dt;
    }
    let tau = k as f64 * traj.dt;
    Ok(EstimatorSample { tau, y, n_est: invert(y, tau, signal_gain(d)), n_true: traj.n_true() })
}

/// The dispersive signal field two ways: the causal convolution of `q d1`
/// with the driven-mode response, and its adiabatic limit
/// `i g_eff^2 c_bar N / (2 gamma_c omega_s)`. The phase of the convolution
/// follows from the idle-mode equation `d' = -(gamma_d + 2i omega_s) d - i g0 c_bar q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderSignal {
    pub exact: Vec<Complex64>,
    pub adiabatic: Vec<Complex64>,
}

pub fn second_order_signal(traj: &Trajectory, d: &DerivedQuantities) -> SecondOrderSignal {
    let dt = traj.dt;
    let gc_dt = d.gamma_c * dt;
    let e_c = (-gc_dt).exp();
    let phi_c = if gc_dt > 0.0 { -(-gc_dt).exp_m1() / gc_dt } else { 1.0 };
    let n = traj.q.len();
    let mut exact = Vec::with_capacity(n);
    let mut c2 = Complex64::new(0.0, 0.0);
    exact.push(c2);
    let qd = |k: usize| traj.q[k] * Complex64::new(traj.d1_re[k], traj.d1_im[k]);
    for k in 0..n - 1 {
        let source = match traj.mode {
            SimMode::Adiabatic => qd(k),
            SimMode::Full => 0.5 * (qd(k) + qd(k + 1)),
        };
        c2 = c2 * e_c + (-I * d.g0 * source * dt) * phi_c;
        exact.push(c2);
    }
    let scale = d.g_eff * d.g_eff * d.c_bar / (2.0 * d.gamma_c * d.omega_s);
    let adiabatic = traj.energy.iter().map(|e| I * scale * e).collect();
    SecondOrderSignal { exact, adiabatic }
}
