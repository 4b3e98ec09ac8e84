use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use super::noise::{Increments, NoiseSource, Silent};
use super::{SimConfig, SimMode};
use crate::error::ModelError;
use crate::params::DerivedQuantities;
use crate::spectra::dominant_frequency;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct State {
    pub q: f64,
    pub p: f64,
    /// Idle-mode amplitude used over the last step.
    pub d: Complex64,
    pub c2: Complex64,
    /// Integrated homodyne record.
    pub y: f64,
    /// Integral of the effective energy.
    pub energy_integral: f64,
    /// Effective energy at the current sample.
    pub energy: f64,
}

/// One-step map shared by every entry point, so stored trajectories and the
/// streaming Monte Carlo produce identical numbers.
#[derive(Debug, Clone)]
pub(crate) struct Stepper {
    mode: SimMode,
    pub dt: f64,
    cos: f64,
    sin: f64,
    /// Squared scale between bare and effective coordinates (1 in full mode
    /// rotation, `Lambda^2` in adiabatic mode).
    rot_scale: f64,
    damp: f64,
    lambda_sq: f64,
    z: Complex64,
    inv_z: Complex64,
    /// `-i g0 c_bar dt / z`.
    drive_dt_over_z: Complex64,
    inv_dt: f64,
    /// Full mode: exact propagator of the linear `(q, p, Re d, Im d)` system
    /// over one step and over half a step (noise enters at the midpoint).
    full_step: Matrix4<f64>,
    full_half: Matrix4<f64>,
    drive: Complex64,
    sqrt_gd: f64,
    e_c: f64,
    phi_c: f64,
    g0: f64,
    force_gain: f64,
    readout_gain: f64,
}

impl Stepper {
    pub fn new(d: &DerivedQuantities, mode: SimMode, dt: f64) -> Self {
        let (w, rot_scale) = match mode {
            SimMode::Adiabatic => (d.omega_eff, d.lambda * d.lambda),
            SimMode::Full => (d.omega_m, 1.0),
        };
        let z = Complex64::new(d.gamma_d, 2.0 * d.omega_s);
        let gc = d.g0 * d.c_bar;
        #[rustfmt::skip]
        let a = Matrix4::new(
            0.0,        d.omega_m,   0.0,                 0.0,
            -d.omega_m, -d.gamma_m,  -2.0 * gc,           0.0,
            0.0,        0.0,         -d.gamma_d,          2.0 * d.omega_s,
            -gc,        0.0,         -2.0 * d.omega_s,    -d.gamma_d,
        );
        let gc_dt = d.gamma_c * dt;
        Stepper {
            mode,
            dt,
            cos: (w * dt).cos(),
            sin: (w * dt).sin(),
            rot_scale,
            damp: (-d.gamma_m * dt).exp(),
            lambda_sq: d.lambda * d.lambda,
            z,
            inv_z: 1.0 / z,
            drive_dt_over_z: -I * d.g0 * d.c_bar * dt / z,
            inv_dt: 1.0 / dt,
            full_step: (a * dt).exp(),
            full_half: (a * (0.5 * dt)).exp(),
            drive: -I * d.g0 * d.c_bar,
            sqrt_gd: d.gamma_d.sqrt(),
            e_c: (-gc_dt).exp(),
            phi_c: if gc_dt > 0.0 { -(-gc_dt).exp_m1() / gc_dt } else { 1.0 },
            g0: d.g0,
            force_gain: 2.0 * d.g0 * d.c_bar,
            readout_gain: 2.0 * d.gamma_c.sqrt(),
        }
    }

    /// Energy in effective coordinates.
    #[inline]
    pub fn energy(&self, q: f64, p: f64) -> f64 {
        0.5 * (q * q / self.lambda_sq + self.lambda_sq * p * p)
    }

    /// Physical state for effective initial conditions `(q0, p0)`, with the
    /// idle mode at its adiabatic value.
    pub fn initial_state(&self, q0: f64, p0: f64) -> State {
        let lambda = self.lambda_sq.sqrt();
        let q = lambda * q0;
        let p = p0 / lambda;
        State { q, p, d: self.drive * q / self.z, energy: self.energy(q, p), ..State::default() }
    }

    #[inline]
    pub fn step(&self, s: &mut State, inc: &Increments) {
        let dt = self.dt;
        let q0 = s.q;
        let e_before = s.energy;
        let vac = Complex64::new(-inc.v1, inc.v2) * self.sqrt_gd;

        match self.mode {
            SimMode::Adiabatic => {
                let noise_inc = vac * self.inv_z;
                let d_inc = self.drive_dt_over_z * q0 + noise_inc;
                s.d = d_inc * self.inv_dt;
                self.advance_signal(s, -I * self.g0 * q0 * d_inc, inc.u2);
                let q = s.q * self.cos + self.rot_scale * s.p * self.sin;
                let p = -s.q * self.sin / self.rot_scale + s.p * self.cos;
                s.q = q;
                // The static spring is part of the rotation; only the noise kicks.
                s.p = p * self.damp - self.force_gain * noise_inc.re + inc.xi;
            }
            SimMode::Full => {
                let d0 = s.d;
                let x = Vector4::new(s.q, s.p, s.d.re, s.d.im);
                let kick = Vector4::new(0.0, inc.xi, vac.re, vac.im);
                let x = self.full_step * x + self.full_half * kick;
                s.q = x[0];
                s.p = x[1];
                s.d = Complex64::new(x[2], x[3]);
                let qd = 0.5 * (q0 * d0 + s.q * s.d);
                self.advance_signal(s, -I * self.g0 * qd * dt, inc.u2);
            }
        }
        s.energy = self.energy(s.q, s.p);
        s.energy_integral += 0.5 * (e_before + s.energy) * dt;
    }

    /// Driven-mode second-order field and the homodyne record, given the
    /// source `-i g0 q d` integrated over the step.
    #[inline]
    fn advance_signal(&self, s: &mut State, source: Complex64, u2: f64) {
        let c2_new = s.c2 * self.e_c + source * self.phi_c;
        s.y += u2 - self.readout_gain * 0.5 * (s.c2.im + c2_new.im) * self.dt;
        s.c2 = c2_new;
    }
}

/// Recorded solution; arrays hold `n_steps + 1` samples. In full mode `d1`
/// is the idle amplitude at each sample time. In adiabatic mode the idle
/// mode has no state of its own, and `d1[k]` is the step-averaged amplitude
/// over step `k` (the last entry repeats).
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub mode: SimMode,
    pub t: Vec<f64>,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub d1_re: Vec<f64>,
    pub d1_im: Vec<f64>,
    pub c2: Vec<Complex64>,
    /// Homodyne record `Y(t)`.
    pub y: Vec<f64>,
    /// Effective energy `N(t)`.
    pub energy: Vec<f64>,
    pub q0: f64,
    pub p0: f64,
}

impl Trajectory {
    pub fn n_true(&self) -> f64 {
        0.5 * (self.q0 * self.q0 + self.p0 * self.p0)
    }
}

/// Integrate `sim.duration` from effective initial conditions `(q0, p0)`,
/// recording every step.
pub fn integrate(
    sim: &SimConfig,
    d: &DerivedQuantities,
    noise: &mut impl NoiseSource,
    q0: f64,
    p0: f64,
) -> Result<Trajectory, ModelError> {
    sim.validate(d)?;
    if (noise.dt() - sim.dt).abs() > 1e-12 * sim.dt {
        return Err(ModelError::InvalidParameter("noise step differs from the simulation step".into()));
    }
    let n = ((sim.duration / sim.dt).round() as usize).max(1);
    let stepper = Stepper::new(d, sim.mode, sim.dt);
    let mut s = stepper.initial_state(q0, p0);
    let mut tr = Trajectory {
        dt: sim.dt,
        mode: sim.mode,
        t: Vec::with_capacity(n + 1),
        q: Vec::with_capacity(n + 1),
        p: Vec::with_capacity(n + 1),
        d1_re: Vec::with_capacity(n + 1),
        d1_im: Vec::with_capacity(n + 1),
        c2: Vec::with_capacity(n + 1),
        y: Vec::with_capacity(n + 1),
        energy: Vec::with_capacity(n + 1),
        q0,
        p0,
    };
    let push = |tr: &mut Trajectory, k: usize, s: &State| {
        tr.t.push(k as f64 * sim.dt);
        tr.q.push(s.q);
        tr.p.push(s.p);
        tr.c2.push(s.c2);
        tr.y.push(s.y);
        tr.energy.push(stepper.energy(s.q, s.p));
    };
    push(&mut tr, 0, &s);
    if sim.mode == SimMode::Full {
        tr.d1_re.push(s.d.re);
        tr.d1_im.push(s.d.im);
    }
    for k in 0..n {
        stepper.step(&mut s, &noise.next_increments());
        tr.d1_re.push(s.d.re);
        tr.d1_im.push(s.d.im);
        push(&mut tr, k + 1, &s);
    }
    if sim.mode == SimMode::Adiabatic {
        tr.d1_re.push(s.d.re);
        tr.d1_im.push(s.d.im);
    }
    Ok(tr)
}

/// Oscillation frequency of a noiseless ring-down started at unit effective
/// amplitude, from the periodogram peak of `q(t)` over `periods` cycles of
/// the expected `omega_eff`.
pub fn spring_frequency(d: &DerivedQuantities, mode: SimMode, periods: f64) -> Result<f64, ModelError> {
    d.require_stable()?;
    let dt = super::step_limit(d, mode);
    let sim = SimConfig { dt, duration: dt, n_trials: 2, seed: 0, mode, tau_grid: vec![dt], n_true: 0.0 };
    sim.validate(d)?;
    let duration = periods * std::f64::consts::TAU / d.omega_eff;
    let n = (duration / dt).round() as usize;
    // Keep roughly 64 samples per period for the transform.
    let stride = ((std::f64::consts::TAU / d.omega_eff / dt / 64.0).floor() as usize).max(1);
    let stepper = Stepper::new(d, mode, dt);
    let mut s = stepper.initial_state(1.0, 0.0);
    let mut noise = Silent { dt };
    let mut samples = Vec::with_capacity(n / stride + 1);
    for k in 0..n {
        if k % stride == 0 {
            samples.push(s.q);
        }
        stepper.step(&mut s, &noise.next_increments());
    }
    dominant_frequency(&samples, dt * stride as f64)
        .ok_or_else(|| ModelError::InvalidParameter("ring-down too short for a spectrum".into()))
}
