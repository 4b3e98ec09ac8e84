//! Gaussian increments for the stochastic integrator.
//!
//! Every noise input of every trial owns a separate ChaCha8 stream, so a
//! trial is reproducible on its own and inputs that a mode does not use are
//! never drawn.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const STREAMS_PER_TRIAL: u64 = 8;
const STREAM_V1: u64 = 0;
const STREAM_V2: u64 = 1;
const STREAM_U1: u64 = 2;
const STREAM_U2: u64 = 3;
const STREAM_XI: u64 = 4;
const STREAM_PHASE: u64 = 5;

/// Wiener increments over one step. `v1`, `v2` are the idle-mode input
/// quadratures, `u2` the measured output quadrature, `xi` the thermal force.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Increments {
    pub v1: f64,
    pub v2: f64,
    pub u2: f64,
    pub xi: f64,
}

impl std::ops::AddAssign for Increments {
    fn add_assign(&mut self, o: Self) {
        self.v1 += o.v1;
        self.v2 += o.v2;
        self.u2 += o.u2;
        self.xi += o.xi;
    }
}

pub trait NoiseSource {
    fn dt(&self) -> f64;
    fn next_increments(&mut self) -> Increments;
}

fn stream(seed: u64, trial: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial * STREAMS_PER_TRIAL + k);
    rng
}

/// Streaming draws for one trial. Vacuum inputs carry variance `dt / 2` per quadrature; the thermal force
/// carries `thermal_diffusion * dt`.
pub struct NoiseGenerator {
    v1: ChaCha8Rng,
    v2: ChaCha8Rng,
    u2: ChaCha8Rng,
    xi: Option<ChaCha8Rng>,
    vacuum_sd: f64,
    thermal_sd: f64,
    dt: f64,
}

impl NoiseGenerator {
    pub fn new(seed: u64, trial: u64, dt: f64, thermal_diffusion: f64) -> Self {
        NoiseGenerator {
            v1: stream(seed, trial, STREAM_V1),
            v2: stream(seed, trial, STREAM_V2),
            u2: stream(seed, trial, STREAM_U2),
            xi: (thermal_diffusion > 0.0).then(|| stream(seed, trial, STREAM_XI)),
            vacuum_sd: (0.5 * dt).sqrt(),
            thermal_sd: (thermal_diffusion * dt).sqrt(),
            dt,
        }
    }
}

impl NoiseSource for NoiseGenerator {
    fn dt(&self) -> f64 {
        self.dt
    }

    fn next_increments(&mut self) -> Increments {
        let n = |r: &mut ChaCha8Rng| -> f64 { r.sample(StandardNormal) };
        Increments {
            v1: self.vacuum_sd * n(&mut self.v1),
            v2: self.vacuum_sd * n(&mut self.v2),
            u2: self.vacuum_sd * n(&mut self.u2),
            xi: self.xi.as_mut().map_or(0.0, |r| self.thermal_sd * n(r)),
        }
    }
}

/// Stored increments of every input for one trial, including the unmeasured
/// quadrature `u1`. Values coincide with what [`NoiseGenerator`] streams for
/// the same `(seed, trial)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseStreams {
    pub dt: f64,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub xi_th: Vec<f64>,
}

impl NoiseStreams {
    pub fn len(&self) -> usize {
        self.u2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u2.is_empty()
    }

    /// Replays the stored increments.
    pub fn replay(&self) -> Replay<'_> {
        Replay { streams: self, k: 0 }
    }
}

pub fn generate_noise(seed: u64, trial: u64, n_steps: usize, dt: f64, thermal_diffusion: f64) -> NoiseStreams {
    let draw = |k: u64, sd: f64| -> Vec<f64> {
        let mut r = stream(seed, trial, k);
        (0..n_steps).map(|_| sd * r.sample::<f64, _>(StandardNormal)).collect()
    };
    let vac = (0.5 * dt).sqrt();
    NoiseStreams {
        dt,
        u1: draw(STREAM_U1, vac),
        u2: draw(STREAM_U2, vac),
        v1: draw(STREAM_V1, vac),
        v2: draw(STREAM_V2, vac),
        xi_th: if thermal_diffusion > 0.0 {
            draw(STREAM_XI, (thermal_diffusion * dt).sqrt())
        } else {
            vec![0.0; n_steps]
        },
    }
}

pub struct Replay<'a> {
    streams: &'a NoiseStreams,
    k: usize,
}

impl NoiseSource for Replay<'_> {
    fn dt(&self) -> f64 {
        self.streams.dt
    }

    /// Panics past the stored length.
    fn next_increments(&mut self) -> Increments {
        let s = self.streams;
        let k = self.k;
        self.k += 1;
        Increments { v1: s.v1[k], v2: s.v2[k], u2: s.u2[k], xi: s.xi_th[k] }
    }
}

/// Sums `factor` consecutive increments of a finer source, giving the same
/// Brownian path sampled on a coarser step.
pub struct Coarsened<S> {
    inner: S,
    factor: usize,
}

impl<S: NoiseSource> Coarsened<S> {
    pub fn new(inner: S, factor: usize) -> Self {
        assert!(factor >= 1);
        Coarsened { inner, factor }
    }
}

impl<S: NoiseSource> NoiseSource for Coarsened<S> {
    fn dt(&self) -> f64 {
        self.inner.dt() * self.factor as f64
    }

    fn next_increments(&mut self) -> Increments {
        let mut acc = Increments::default();
        for _ in 0..self.factor {
            acc += self.inner.next_increments();
        }
        acc
    }
}

/// Deterministic dynamics.
pub struct Silent {
    pub dt: f64,
}

impl NoiseSource for Silent {
    fn dt(&self) -> f64 {
        self.dt
    }

    fn next_increments(&mut self) -> Increments {
        Increments::default()
    }
}

/// Uniform oscillation phase for a trial's initial state.
pub fn initial_phase(seed: u64, trial: u64) -> f64 {
    stream(seed, trial, STREAM_PHASE).random_range(0.0..std::f64::consts::TAU)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_independent() {
        let mut a = NoiseGenerator::new(7, 3, 0.01, 0.0);
        let mut b = NoiseGenerator::new(7, 3, 0.01, 0.0);
        let mut c = NoiseGenerator::new(7, 4, 0.01, 0.0);
        let x = a.next_increments();
        assert_eq!(x, b.next_increments());
        assert_ne!(x, c.next_increments());
        assert_ne!(x.v1, x.v2);
        assert_eq!(x.xi, 0.0);
    }

    #[test]
    fn vacuum_variance_is_half_dt() {
        let dt = 0.2;
        let mut s = NoiseGenerator::new(1, 0, dt, 3.0);
        let n = 200_000;
        let (mut sv, mut sx) = (0.0, 0.0);
        for _ in 0..n {
            let i = s.next_increments();
            sv += i.v2 * i.v2;
            sx += i.xi * i.xi;
        }
        assert!((sv / n as f64 / (0.5 * dt) - 1.0).abs() < 0.02);
        assert!((sx / n as f64 / (3.0 * dt) - 1.0).abs() < 0.02);
    }

    #[test]
    fn stored_and_streamed_draws_coincide() {
        let rec = generate_noise(9, 2, 50, 0.3, 0.7);
        let mut streamed = NoiseGenerator::new(9, 2, 0.3, 0.7);
        let mut rep = rec.replay();
        for _ in 0..50 {
            assert_eq!(streamed.next_increments(), rep.next_increments());
        }
        assert_eq!(rec, generate_noise(9, 2, 50, 0.3, 0.7));
    }

    #[test]
    fn measured_quadrature_statistics() {
        let dt = 0.01;
        let n = 1_000_000;
        let rec = generate_noise(11, 0, n, dt, 0.0);
        let var = rec.u2.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((var / (0.5 * dt) - 1.0).abs() < 0.01);
        let cross = rec.u2.iter().zip(&rec.v1).map(|(a, b)| a * b).sum::<f64>() / n as f64;
        // Standard deviation of the cross average is (dt / 2) / sqrt(n).
        assert!(cross.abs() < 3.0 * 0.5 * dt / (n as f64).sqrt());
    }

    #[test]
    fn coarsening_sums_fine_path() {
        let mut fine = NoiseGenerator::new(5, 1, 0.1, 1.0);
        let mut coarse = Coarsened::new(NoiseGenerator::new(5, 1, 0.1, 1.0), 2);
        assert!((coarse.dt() - 0.2).abs() < 1e-15);
        let mut sum = fine.next_increments();
        sum += fine.next_increments();
        assert_eq!(coarse.next_increments(), sum);
    }
}
