use rayon::prelude::*;

use super::estimator::{invert, signal_gain};
use super::integrator::Stepper;
use super::noise::{initial_phase, NoiseGenerator, NoiseSource};
use super::{thermal_diffusion, SimConfig, SimMode};
use crate::error::ModelError;
use crate::optimize::log_grid_then_golden;
use crate::params::DerivedQuantities;
use crate::resolution::{coefficients, ResolutionCoefficients, ResolutionOptions};
use crate::stats::{jackknife_se_mean, mean, variance};
use crate::table::{Table, Value};

/// Empirical and closed-form resolution at one integration time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McPoint {
    pub tau: f64,
    /// Mean of `(N_est - N_true)^2`.
    pub mse: f64,
    pub mse_se: f64,
    pub mean_error: f64,
    pub variance: f64,
    /// Trial average of the time-averaged energy.
    pub energy_mean: f64,
    pub shot_term: f64,
    pub backaction_term: f64,
    pub thermal_term: f64,
    pub closed_form: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McResult {
    pub points: Vec<McPoint>,
    pub n_trials: usize,
    pub mode: SimMode,
    pub dt: f64,
    pub seed: u64,
    pub n_true: f64,
    pub coefficients: ResolutionCoefficients,
    /// Energy diffusion from back-action at unit vacuum normalization,
    /// `gamma_d g_eff^2 c_bar^2 / (2 omega_s^2)`.
    pub backaction_diffusion: f64,
    /// Energy diffusion from the thermal force.
    pub thermal_diffusion: f64,
}

impl McResult {
    /// Closed form with the vacuum normalization scaled by `kappa`: shot
    /// noise enters once, back-action heating twice. A nonzero initial
    /// energy adds the cross term `2/3 N_true D tau` between the initial
    /// amplitude and the heating.
    pub fn predicted(&self, p: &McPoint, kappa: f64) -> f64 {
        let c = &self.coefficients;
        let tau = p.tau;
        kappa * c.shot / tau
            + (kappa * kappa * c.backaction + c.thermal) * tau * tau
            + 2.0 / 3.0 * self.n_true * (kappa * self.backaction_diffusion + self.thermal_diffusion) * tau
    }

    pub fn table(&self, kappa: f64) -> Table {
        let mut t = Table::new([
            "tau", "mse", "mse_se", "mean_error", "variance", "energy_mean", "shot_term", "backaction_term",
            "thermal_term", "closed_form", "kappa", "predicted", "pull",
        ]);
        for p in &self.points {
            let pred = self.predicted(p, kappa);
            let row: Vec<Value> = vec![
                p.tau.into(),
                p.mse.into(),
                p.mse_se.into(),
                p.mean_error.into(),
                p.variance.into(),
                p.energy_mean.into(),
                p.shot_term.into(),
                p.backaction_term.into(),
                p.thermal_term.into(),
                p.closed_form.into(),
                kappa.into(),
                pred.into(),
                ((p.mse - pred) / p.mse_se).into(),
            ];
            t.push(row);
        }
        t
    }
}

/// Per-trial estimates at each checkpoint, in checkpoint order.
struct TrialOutput {
    n_est: Vec<f64>,
    energy_mean: Vec<f64>,
}

fn run_trial(
    stepper: &Stepper,
    gain: f64,
    checkpoints: &[usize],
    order: &[usize],
    q0: f64,
    p0: f64,
    noise: &mut impl NoiseSource,
) -> TrialOutput {
    let mut s = stepper.initial_state(q0, p0);
    let mut n_est = vec![0.0; checkpoints.len()];
    let mut energy_mean = vec![0.0; checkpoints.len()];
    let mut k = 0usize;
    for &j in order {
        let target = checkpoints[j];
        while k < target {
            stepper.step(&mut s, &noise.next_increments());
            k += 1;
        }
        let tau = target as f64 * stepper.dt;
        n_est[j] = invert(s.y, tau, gain);
        energy_mean[j] = s.energy_integral / tau;
    }
    TrialOutput { n_est, energy_mean }
}

fn initial_conditions(cfg: &SimConfig, trial: u64) -> (f64, f64) {
    if cfg.n_true == 0.0 {
        return (0.0, 0.0);
    }
    let r = (2.0 * cfg.n_true).sqrt();
    let phi = initial_phase(cfg.seed, trial);
    (r * phi.cos(), r * phi.sin())
}

/// Monte Carlo resolution with the default per-trial noise streams.
pub fn monte_carlo_resolution(cfg: &SimConfig, d: &DerivedQuantities) -> Result<McResult, ModelError> {
    let diffusion = thermal_diffusion(d);
    monte_carlo_resolution_with(cfg, d, |trial| NoiseGenerator::new(cfg.seed, trial, cfg.dt, diffusion))
}

/// Monte Carlo resolution with a caller-supplied noise source per trial
/// (used to replay one Brownian path at two step sizes).
pub fn monte_carlo_resolution_with<S, F>(cfg: &SimConfig, d: &DerivedQuantities, make_noise: F) -> Result<McResult, ModelError>
where
    S: NoiseSource,
    F: Fn(u64) -> S + Sync,
{
    cfg.validate(d)?;
    let stepper = Stepper::new(d, cfg.mode, cfg.dt);
    let gain = signal_gain(d);
    if !(gain > 0.0) {
        return Err(ModelError::ZeroSignal);
    }
    let checkpoints = cfg.checkpoints();
    let mut order: Vec<usize> = (0..checkpoints.len()).collect();
    order.sort_by_key(|&j| checkpoints[j]);

    let outputs: Vec<TrialOutput> = (0..cfg.n_trials as u64)
        .into_par_iter()
        .map(|trial| {
            let (q0, p0) = initial_conditions(cfg, trial);
            let mut noise = make_noise(trial);
            run_trial(&stepper, gain, &checkpoints, &order, q0, p0, &mut noise)
        })
        .collect();

    let coeffs = coefficients(d, &ResolutionOptions::default());
    let points = checkpoints
        .iter()
        .enumerate()
        .map(|(j, &steps)| {
            let tau = steps as f64 * cfg.dt;
            let err: Vec<f64> = outputs.iter().map(|o| o.n_est[j] - cfg.n_true).collect();
            let sq: Vec<f64> = err.iter().map(|e| e * e).collect();
            let energy: Vec<f64> = outputs.iter().map(|o| o.energy_mean[j]).collect();
            let b = coeffs.breakdown(tau);
            McPoint {
                tau,
                mse: mean(&sq),
                mse_se: jackknife_se_mean(&sq),
                mean_error: mean(&err),
                variance: variance(&err),
                energy_mean: mean(&energy),
                shot_term: b.shot_term,
                backaction_term: b.backaction_term,
                thermal_term: b.thermal_term,
                closed_form: b.total,
            }
        })
        .collect();
    Ok(McResult {
        points,
        n_trials: cfg.n_trials,
        mode: cfg.mode,
        dt: cfg.dt,
        seed: cfg.seed,
        n_true: cfg.n_true,
        coefficients: coeffs,
        backaction_diffusion: d.gamma_d * d.g_eff * d.g_eff * d.c_bar * d.c_bar / (2.0 * d.omega_s * d.omega_s),
        thermal_diffusion: d.gamma_m * crate::resolution::thermal_quanta(d, &ResolutionOptions::default()),
    })
}

/// Global vacuum-normalization constant fitted to the Monte Carlo points.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationFit {
    pub kappa: f64,
    /// Fits restricted to the shorter and longer halves of the grid.
    pub kappa_lower: f64,
    pub kappa_upper: f64,
    /// `|kappa_lower - kappa_upper| / kappa`.
    pub spread: f64,
    pub chi2: f64,
    /// `(mse - predicted) / mse_se` at the global fit.
    pub pulls: Vec<f64>,
}

impl CalibrationFit {
    pub fn max_abs_pull(&self) -> f64 {
        self.pulls.iter().map(|p| p.abs()).fold(0.0, f64::max)
    }
}

fn chi2(r: &McResult, pts: &[McPoint], kappa: f64) -> f64 {
    pts.iter().map(|p| ((p.mse - r.predicted(p, kappa)) / p.mse_se).powi(2)).sum()
}

fn fit_points(r: &McResult, pts: &[McPoint]) -> f64 {
    log_grid_then_golden(|k| chi2(r, pts, k), 1e-3, 1e2, 200, 1e-10).x
}

pub fn fit_calibration(r: &McResult) -> CalibrationFit {
    let mut pts = r.points.clone();
    pts.sort_by(|a, b| a.tau.total_cmp(&b.tau));
    let kappa = fit_points(r, &pts);
    let half = pts.len() / 2;
    let (kappa_lower, kappa_upper) = if half >= 1 {
        (fit_points(r, &pts[..half]), fit_points(r, &pts[half..]))
    } else {
        (kappa, kappa)
    };
    CalibrationFit {
        kappa,
        kappa_lower,
        kappa_upper,
        spread: (kappa_lower - kappa_upper).abs() / kappa,
        chi2: chi2(r, &pts, kappa),
        pulls: r.points.iter().map(|p| (p.mse - r.predicted(p, kappa)) / p.mse_se).collect(),
    }
}

/// Sampled trajectories of the first `trials` trials, every `stride` steps.
pub fn dump_trajectories(
    cfg: &SimConfig,
    d: &DerivedQuantities,
    trials: usize,
    stride: usize,
) -> Result<Table, ModelError> {
    cfg.validate(d)?;
    let stepper = Stepper::new(d, cfg.mode, cfg.dt);
    let stride = stride.max(1);
    let n = cfg.n_steps();
    let mut t = Table::new(["trial", "t", "q", "p", "energy", "record", "c2_re", "c2_im"]);
    let diffusion = thermal_diffusion(d);
    for trial in 0..trials.min(cfg.n_trials) as u64 {
        let (q0, p0) = initial_conditions(cfg, trial);
        let mut noise = NoiseGenerator::new(cfg.seed, trial, cfg.dt, diffusion);
        let mut s = stepper.initial_state(q0, p0);
        for k in 0..=n {
            if k % stride == 0 || k == n {
                t.push(vec![
                    Value::Int(trial as i64),
                    (k as f64 * cfg.dt).into(),
                    s.q.into(),
                    s.p.into(),
                    stepper.energy(s.q, s.p).into(),
                    s.y.into(),
                    s.c2.re.into(),
                    s.c2.im.into(),
                ]);
            }
            if k < n {
                stepper.step(&mut s, &noise.next_increments());
            }
        }
    }
    Ok(t)
}
