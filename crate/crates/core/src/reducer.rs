//! Reduction of a general parametrically coupled system (several mechanical
//! modes, several external modes with couplings `chi[i][j][nu] q_nu`) to
//! dispersive frequency shifts and to the three-mode model used by the
//! resolution analysis.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::{DerivedQuantities, DrivenMode, ModeRates, RegimeCheck, RegimeReport};
use crate::table::Value;

/// Relative frequency separation below which two external modes count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReduceError {
    #[error("external modes {0} and {1} are degenerate")]
    DegenerateModes(usize, usize),
    #[error("dispersive readout conditions violated: {0}")]
    QndViolated(String),
    #[error("invalid system: {0}")]
    Invalid(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl ReduceError {
    pub fn kind(&self) -> &'static str {
        match self {
            ReduceError::DegenerateModes(..) => "DegenerateModes",
            ReduceError::QndViolated(_) => "QndViolated",
            ReduceError::Invalid(_) => "InvalidSystem",
            ReduceError::Parse { .. } => "ParseError",
        }
    }
}

/// Indices are 0-based in memory and 1-based in the text format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParametricSystem {
    /// Mechanical frequencies `Omega_nu`.
    pub mech_freqs: Vec<f64>,
    /// External-mode frequencies `omega_i`.
    pub ext_freqs: Vec<f64>,
    /// Dense coupling tensor `chi[i][j][nu]`, symmetric in `(i, j)`.
    pub chi: Vec<Vec<Vec<f64>>>,
    /// Driven mode and its classical amplitude.
    pub drive: (usize, f64),
    /// Amplitude decay rate of each external mode.
    pub decay: Vec<f64>,
    pub mech_damping: f64,
    pub n_th: f64,
}

impl ParametricSystem {
    pub fn new(mech_freqs: Vec<f64>, ext_freqs: Vec<f64>, drive: (usize, f64)) -> Self {
        let (n, m) = (ext_freqs.len(), mech_freqs.len());
        ParametricSystem {
            chi: vec![vec![vec![0.0; m]; n]; n],
            decay: vec![0.0; n],
            mech_freqs,
            ext_freqs,
            drive,
            mech_damping: 0.0,
            n_th: 0.0,
        }
    }

    pub fn n_ext(&self) -> usize {
        self.ext_freqs.len()
    }

    pub fn n_mech(&self) -> usize {
        self.mech_freqs.len()
    }

    /// Sets `chi[i][j][nu]` and its mirror.
    pub fn set_chi(&mut self, i: usize, j: usize, nu: usize, value: f64) {
        self.chi[i][j][nu] = value;
        self.chi[j][i][nu] = value;
    }

    /// Same system with every coupling multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut s = self.clone();
        s.chi.iter_mut().flatten().flatten().for_each(|c| *c *= factor);
        s
    }

    pub fn validate(&self) -> Result<(), ReduceError> {
        let (n, m) = (self.n_ext(), self.n_mech());
        if n < 2 || m < 1 {
            return Err(ReduceError::Invalid("need at least two external modes and one mechanical mode".into()));
        }
        if self.chi.len() != n || self.chi.iter().any(|r| r.len() != n || r.iter().any(|c| c.len() != m)) {
            return Err(ReduceError::Invalid("coupling tensor shape does not match mode counts".into()));
        }
        if self.decay.len() != n {
            return Err(ReduceError::Invalid("one decay rate per external mode is required".into()));
        }
        if self.ext_freqs.iter().chain(&self.mech_freqs).any(|w| !(*w > 0.0)) {
            return Err(ReduceError::Invalid("frequencies must be positive".into()));
        }
        if self.drive.0 >= n {
            return Err(ReduceError::Invalid(format!("drive index {} out of range", self.drive.0 + 1)));
        }
        for i in 0..n {
            for j in 0..n {
                for nu in 0..m {
                    if self.chi[i][j][nu] != self.chi[j][i][nu] {
                        return Err(ReduceError::Invalid(format!(
                            "chi is not symmetric at ({}, {}, {})",
                            i + 1,
                            j + 1,
                            nu + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_degeneracy(&self) -> Result<(), ReduceError> {
        let wmax = self.ext_freqs.iter().cloned().fold(0.0, f64::max);
        for i in 0..self.n_ext() {
            for j in i + 1..self.n_ext() {
                if (self.ext_freqs[i] - self.ext_freqs[j]).abs() < DEGENERACY_TOL * wmax {
                    return Err(ReduceError::DegenerateModes(i, j));
                }
            }
        }
        Ok(())
    }

    /// Frequency matrix at clamped mechanical coordinates.
    pub fn frequency_matrix(&self, q: &[f64]) -> DMatrix<f64> {
        let n = self.n_ext();
        DMatrix::from_fn(n, n, |i, j| {
            let shift: f64 = self.chi[i][j].iter().zip(q).map(|(c, x)| c * x).sum();
            if i == j {
                self.ext_freqs[i] + shift
            } else {
                shift
            }
        })
    }
}

/// Dispersive and adiabatic ratios for every external pair, passing when
/// all are below `threshold`.
pub fn validate_dispersive(system: &ParametricSystem, threshold: f64) -> RegimeReport {
    let mut checks = Vec::new();
    let wmax_mech = system.mech_freqs.iter().cloned().fold(0.0, f64::max);
    for i in 0..system.n_ext() {
        for j in i + 1..system.n_ext() {
            let gap = (system.ext_freqs[i] - system.ext_freqs[j]).abs();
            let chi = system.chi[i][j].iter().map(|c| c.abs()).fold(0.0, f64::max);
            let guard = |x: f64| if gap == 0.0 { f64::INFINITY } else { x / gap };
            checks.push(RegimeCheck::new(format!("chi/gap[{},{}]", i + 1, j + 1), guard(chi), threshold));
            checks.push(RegimeCheck::new(format!("Omega/gap[{},{}]", i + 1, j + 1), guard(wmax_mech), threshold));
        }
    }
    RegimeReport { checks }
}

/// Second-order expansion of every external frequency in the mechanical
/// coordinates: `omega_i + sum linear[nu] q_nu + sum quadratic[nu][nu'] q_nu q_nu'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersiveReduction {
    pub constant: Vec<f64>,
    pub linear: Vec<Vec<f64>>,
    /// Full quadratic form including `nu != nu'` cross terms.
    pub quadratic: Vec<Vec<Vec<f64>>>,
    /// Residual linear coupling of the driven amplitude into each other
    /// mode, `chi[p][i][0] a / (omega_i - omega_p)`; zero at the driven index.
    pub residual_linear: Vec<f64>,
    pub qnd_conditions_ok: bool,
    pub qnd_violations: Vec<String>,
}

impl DispersiveReduction {
    pub fn omega_prime(&self, i: usize, q: &[f64]) -> f64 {
        let lin: f64 = self.linear[i].iter().zip(q).map(|(c, x)| c * x).sum();
        let quad: f64 = self.quadratic[i]
            .iter()
            .zip(q)
            .map(|(row, x)| x * row.iter().zip(q).map(|(c, y)| c * y).sum::<f64>())
            .sum();
        self.constant[i] + lin + quad
    }
}

fn qnd_violations(system: &ParametricSystem) -> Vec<String> {
    let p = system.drive.0;
    let mut v = Vec::new();
    for nu in 0..system.n_mech() {
        if system.chi[p][p][nu] != 0.0 {
            v.push(format!("chi[{0}][{0}][{1}] = {2} (linear self-coupling)", p + 1, nu + 1, system.chi[p][p][nu]));
        }
    }
    for i in (0..system.n_ext()).filter(|&i| i != p) {
        for nu in 1..system.n_mech() {
            if system.chi[p][i][nu] != 0.0 {
                v.push(format!("chi[{}][{}][{}] = {} (coupling to another mechanical mode)", p + 1, i + 1, nu + 1, system.chi[p][i][nu]));
            }
        }
    }
    v
}

pub fn reduce(system: &ParametricSystem) -> Result<DispersiveReduction, ReduceError> {
    system.validate()?;
    system.check_degeneracy()?;
    let (n, m) = (system.n_ext(), system.n_mech());
    let w = &system.ext_freqs;
    let linear = (0..n).map(|i| system.chi[i][i].clone()).collect();
    let quadratic = (0..n)
        .map(|i| {
            let mut qf = vec![vec![0.0; m]; m];
            for j in (0..n).filter(|&j| j != i) {
                let inv = 1.0 / (w[i] - w[j]);
                for a in 0..m {
                    for b in 0..m {
                        qf[a][b] += system.chi[i][j][a] * system.chi[i][j][b] * inv;
                    }
                }
            }
            qf
        })
        .collect();
    let (p, amp) = system.drive;
    let residual_linear = (0..n)
        .map(|i| if i == p { 0.0 } else { system.chi[p][i][0] * amp / (w[i] - w[p]) })
        .collect();
    let qnd_violations = qnd_violations(system);
    Ok(DispersiveReduction {
        constant: w.clone(),
        linear,
        quadratic,
        residual_linear,
        qnd_conditions_ok: qnd_violations.is_empty(),
        qnd_violations,
    })
}

/// Exact external-mode frequencies at clamped `q`, listed in mode order by
/// matching each eigenvector to the mode it overlaps most.
pub fn brute_force_eigen(system: &ParametricSystem, q: &[f64]) -> Vec<f64> {
    let eig = SymmetricEigen::new(system.frequency_matrix(q));
    let n = system.n_ext();
    let mut out = vec![f64::NAN; n];
    let mut taken = vec![false; n];
    // Greedy assignment by decreasing overlap.
    let mut pairs: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|k| (0..n).map(move |i| (k, i)))
        .map(|(k, i)| (eig.eigenvectors[(i, k)].abs(), i, k))
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut used = vec![false; n];
    for (_, i, k) in pairs {
        if !taken[i] && !used[k] {
            out[i] = eig.eigenvalues[k];
            taken[i] = true;
            used[k] = true;
        }
    }
    out
}

/// Three-mode model: the driven (probe) mode, its nearest neighbour in
/// frequency as idle mode, and the first mechanical mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripartiteEquivalent {
    pub probe: usize,
    pub idle: usize,
    /// Half the probe-idle splitting.
    pub omega_s: f64,
    pub g0: f64,
    pub drive: DrivenMode,
    /// Quadratic coefficient of the probe from every other mode.
    pub quadratic_total: f64,
    /// The same coefficient from the idle mode alone.
    pub quadratic_tripartite: f64,
    pub warning: Option<String>,
    pub rates: ModeRates,
}

impl TripartiteEquivalent {
    pub fn derived(&self) -> DerivedQuantities {
        DerivedQuantities::from_rates(self.rates, None)
    }

    pub fn fields(&self) -> Vec<(&'static str, Value)> {
        vec![
            ("probe", (self.probe + 1).into()),
            ("idle", (self.idle + 1).into()),
            ("omega_s", self.omega_s.into()),
            ("g0", self.g0.into()),
            ("driven_mode", self.drive.to_string().into()),
            ("quadratic_total", self.quadratic_total.into()),
            ("quadratic_tripartite", self.quadratic_tripartite.into()),
            ("omega_m", self.rates.omega_m.into()),
            ("gamma_m", self.rates.gamma_m.into()),
            ("n_th", self.rates.n_th.into()),
            ("gamma_c", self.rates.gamma_c.into()),
            ("gamma_d", self.rates.gamma_d.into()),
            ("c_bar", self.rates.c_bar.into()),
            ("warning", self.warning.clone().map_or(Value::Missing, Value::Text)),
        ]
    }
}

pub fn to_tripartite(system: &ParametricSystem) -> Result<TripartiteEquivalent, ReduceError> {
    let red = reduce(system)?;
    if !red.qnd_conditions_ok {
        return Err(ReduceError::QndViolated(red.qnd_violations.join("; ")));
    }
    let (p, amp) = system.drive;
    let w = &system.ext_freqs;
    let gap = |i: usize| (w[i] - w[p]).abs();
    let mut idle = usize::MAX;
    for i in (0..system.n_ext()).filter(|&i| i != p) {
        if idle == usize::MAX || gap(i) < gap(idle) {
            idle = i;
        }
    }
    let ties: Vec<usize> = (0..system.n_ext()).filter(|&i| i != p && i != idle && gap(i) == gap(idle)).collect();
    let warning = (!ties.is_empty()).then(|| {
        let others: Vec<String> = ties.iter().map(|i| (i + 1).to_string()).collect();
        format!("idle modes equidistant from the probe; chose {} over {}", idle + 1, others.join(", "))
    });
    let g0 = system.chi[p][idle][0];
    let drive = if w[idle] > w[p] { DrivenMode::Common } else { DrivenMode::Differential };
    Ok(TripartiteEquivalent {
        probe: p,
        idle,
        omega_s: gap(idle) / 2.0,
        g0,
        drive,
        quadratic_total: red.quadratic[p][0][0],
        quadratic_tripartite: g0 * g0 / (w[p] - w[idle]),
        warning,
        rates: ModeRates {
            omega_m: system.mech_freqs[0],
            gamma_m: system.mech_damping,
            n_th: system.n_th,
            omega_s: gap(idle) / 2.0,
            g0,
            gamma_c: system.decay[p],
            gamma_d: system.decay[idle],
            c_bar: amp,
            drive,
        },
    })
}

fn parse_floats(line: usize, text: &str) -> Result<Vec<f64>, ReduceError> {
    text.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| ReduceError::Parse { line, message: format!("bad number '{t}'") }))
        .collect()
}

fn parse_index(line: usize, text: &str, what: &str) -> Result<usize, ReduceError> {
    match text.parse::<usize>() {
        Ok(k) if k >= 1 => Ok(k - 1),
        _ => Err(ReduceError::Parse { line, message: format!("bad {what} index '{text}' (1-based)") }),
    }
}

/// Parse the text system description:
///
/// ```text
/// mech_freqs   = 1.0
/// ext_freqs    = 50 150
/// decay        = 0.1 0.1
/// drive        = 1 20.0
/// mech_damping = 1e-8
/// n_th         = 0
/// chi 1 2 1    = 0.05
/// ```
pub fn parse_system(text: &str) -> Result<ParametricSystem, ReduceError> {
    let mut scalars: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut chi_entries: Vec<(usize, usize, usize, usize, f64)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (lhs, rhs) = body
            .split_once('=')
            .ok_or_else(|| ReduceError::Parse { line, message: "expected 'key = value'".into() })?;
        let words: Vec<&str> = lhs.split_whitespace().collect();
        match words.as_slice() {
            ["chi", i, j, nu] => {
                let v = parse_floats(line, rhs)?;
                if v.len() != 1 {
                    return Err(ReduceError::Parse { line, message: "chi entry takes one value".into() });
                }
                chi_entries.push((
                    line,
                    parse_index(line, i, "mode")?,
                    parse_index(line, j, "mode")?,
                    parse_index(line, nu, "mechanical")?,
                    v[0],
                ));
            }
            [key] => {
                let key = key.to_string();
                if !["mech_freqs", "ext_freqs", "decay", "drive", "mech_damping", "n_th"].contains(&key.as_str()) {
                    return Err(ReduceError::Parse { line, message: format!("unknown key '{key}'") });
                }
                if scalars.insert(key.clone(), (line, rhs.trim().to_string())).is_some() {
                    return Err(ReduceError::Parse { line, message: format!("duplicate key '{key}'") });
                }
            }
            _ => return Err(ReduceError::Parse { line, message: format!("cannot read '{lhs}'") }),
        }
    }
    let take = |key: &str| -> Result<(usize, Vec<f64>), ReduceError> {
        let (line, text) = scalars
            .get(key)
            .ok_or_else(|| ReduceError::Parse { line: 0, message: format!("missing key '{key}'") })?;
        Ok((*line, parse_floats(*line, text)?))
    };
    let (_, mech) = take("mech_freqs")?;
    let (_, ext) = take("ext_freqs")?;
    let (dline, drive) = take("drive")?;
    if drive.len() != 2 || drive[0].fract() != 0.0 || drive[0] < 1.0 {
        return Err(ReduceError::Parse { line: dline, message: "drive = <mode index> <amplitude>".into() });
    }
    let mut sys = ParametricSystem::new(mech, ext, (drive[0] as usize - 1, drive[1]));
    if scalars.contains_key("decay") {
        sys.decay = take("decay")?.1;
    }
    let scalar = |key: &str| -> Result<Option<f64>, ReduceError> {
        if !scalars.contains_key(key) {
            return Ok(None);
        }
        let (line, v) = take(key)?;
        match v.as_slice() {
            [x] => Ok(Some(*x)),
            _ => Err(ReduceError::Parse { line, message: format!("'{key}' takes one value") }),
        }
    };
    sys.mech_damping = scalar("mech_damping")?.unwrap_or(0.0);
    sys.n_th = scalar("n_th")?.unwrap_or(0.0);
    let mut seen: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
    for (line, i, j, nu, v) in chi_entries {
        if i >= sys.n_ext() || j >= sys.n_ext() || nu >= sys.n_mech() {
            return Err(ReduceError::Parse { line, message: "chi index out of range".into() });
        }
        let key = (i.min(j), i.max(j), nu);
        if let Some(prev) = seen.insert(key, v) {
            if prev != v {
                return Err(ReduceError::Parse { line, message: "conflicting chi entries".into() });
            }
        }
        sys.set_chi(i, j, nu, v);
    }
    sys.validate()?;
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_mode(omega_s: f64, g0: f64) -> ParametricSystem {
        let mut s = ParametricSystem::new(vec![1.0], vec![omega_s, 3.0 * omega_s], (0, 20.0));
        s.set_chi(0, 1, 0, g0);
        s.decay = vec![0.1, 0.1];
        s
    }

    #[test]
    fn zero_coupling_is_trivial() {
        let s = two_mode(50.0, 0.0);
        assert!(validate_dispersive(&s, 0.1).pass());
        assert_eq!(brute_force_eigen(&s, &[0.7]), vec![50.0, 150.0]);
    }

    #[test]
    fn degenerate_modes() {
        let mut s = ParametricSystem::new(vec![1.0], vec![5.0, 5.0], (0, 1.0));
        s.set_chi(0, 1, 0, 0.1);
        s.decay = vec![0.1, 0.1];
        let r = validate_dispersive(&s, 0.1);
        assert!(!r.pass());
        assert!(r.checks[0].ratio.is_infinite());
        assert_eq!(reduce(&s).unwrap_err(), ReduceError::DegenerateModes(0, 1));
    }

    #[test]
    fn two_by_two_closed_form() {
        let s = two_mode(50.0, 0.3);
        let q = 1.7;
        let e = brute_force_eigen(&s, &[q]);
        let (a, b) = (50.0, 150.0);
        let r = ((a - b) * (a - b) / 4.0 + (0.3 * q) * (0.3 * q)).sqrt();
        assert!((e[0] - ((a + b) / 2.0 - r)).abs() < 1e-12);
        assert!((e[1] - ((a + b) / 2.0 + r)).abs() < 1e-12);
    }

    #[test]
    fn coupled_cavity_shifts_are_opposite() {
        let (ws, g) = (50.0, 0.3);
        let red = reduce(&two_mode(ws, g)).unwrap();
        assert!((red.quadratic[0][0][0] + g * g / (2.0 * ws)).abs() < 1e-16);
        assert!((red.quadratic[1][0][0] - g * g / (2.0 * ws)).abs() < 1e-16);
        assert!(red.qnd_conditions_ok);
        assert!((red.residual_linear[1] - g * 20.0 / (2.0 * ws)).abs() < 1e-14);
    }

    #[test]
    fn diagonal_coupling_has_no_quadratic_part() {
        let mut s = ParametricSystem::new(vec![1.0, 2.0], vec![10.0, 20.0, 35.0], (0, 1.0));
        s.decay = vec![0.1; 3];
        s.set_chi(1, 1, 0, 0.2);
        s.set_chi(2, 2, 1, -0.4);
        let red = reduce(&s).unwrap();
        assert!(red.quadratic.iter().flatten().flatten().all(|c| *c == 0.0));
        assert_eq!(red.omega_prime(2, &[1.0, 0.5]), 35.0 - 0.2);
        assert_eq!(red.omega_prime(1, &[1.0, 0.5]), 20.2);
    }

    #[test]
    fn quadratic_fit_of_exact_frequencies() {
        let s = two_mode(50.0, 0.3);
        let red = reduce(&s).unwrap();
        let qs: Vec<f64> = (-10..=10).map(|k| k as f64 * 0.05).collect();
        let x: Vec<f64> = qs.iter().map(|q| q * q).collect();
        let y: Vec<f64> = qs.iter().map(|q| brute_force_eigen(&s, &[*q])[0] - 50.0).collect();
        let (slope, _) = crate::stats::linear_fit(&x, &y);
        assert!((slope / red.quadratic[0][0][0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn qnd_violation_is_reported() {
        let mut s = two_mode(50.0, 0.3);
        s.set_chi(0, 0, 0, 0.01);
        let red = reduce(&s).unwrap();
        assert!(!red.qnd_conditions_ok);
        assert!(matches!(to_tripartite(&s), Err(ReduceError::QndViolated(_))));
    }

    #[test]
    fn equidistant_idle_modes_pick_lower_index() {
        let mut s = ParametricSystem::new(vec![1.0], vec![100.0, 60.0, 140.0], (0, 5.0));
        s.decay = vec![0.1; 3];
        s.set_chi(0, 1, 0, 0.2);
        s.set_chi(0, 2, 0, 0.3);
        let t = to_tripartite(&s).unwrap();
        assert_eq!(t.idle, 1);
        assert!(t.warning.is_some());
        assert_eq!(t.drive, DrivenMode::Differential);
        assert!((t.omega_s - 20.0).abs() < 1e-14);
    }

    #[test]
    fn far_mode_kept_in_shift_but_not_in_noise_model() {
        let mut s = ParametricSystem::new(vec![1.0], vec![100.0, 140.0, 1000.0], (0, 5.0));
        s.decay = vec![0.1; 3];
        s.set_chi(0, 1, 0, 0.2);
        s.set_chi(0, 2, 0, 0.5);
        let t = to_tripartite(&s).unwrap();
        assert_eq!(t.idle, 1);
        let far = 0.25 / (100.0 - 1000.0);
        assert!((t.quadratic_total - t.quadratic_tripartite - far).abs() < 1e-15);
        assert_eq!(t.drive, DrivenMode::Common);
    }

    #[test]
    fn relabelling_permutes_outputs() {
        let mut s = ParametricSystem::new(vec![1.0, 1.5], vec![10.0, 13.0, 21.0], (0, 2.0));
        s.decay = vec![0.1, 0.2, 0.3];
        s.set_chi(0, 1, 0, 0.05);
        s.set_chi(1, 2, 1, 0.07);
        s.set_chi(0, 2, 0, -0.03);
        s.set_chi(2, 2, 1, 0.02);
        let perm = [2usize, 0, 1]; // new index of old mode k
        let mut t = ParametricSystem::new(s.mech_freqs.clone(), vec![0.0; 3], (perm[0], 2.0));
        for k in 0..3 {
            t.ext_freqs[perm[k]] = s.ext_freqs[k];
            t.decay[perm[k]] = s.decay[k];
            for l in 0..3 {
                t.chi[perm[k]][perm[l]] = s.chi[k][l].clone();
            }
        }
        let (a, b) = (reduce(&s).unwrap(), reduce(&t).unwrap());
        let q = [0.3, -0.8];
        for k in 0..3 {
            assert_eq!(a.omega_prime(k, &q), b.omega_prime(perm[k], &q));
            assert_eq!(a.residual_linear[k], b.residual_linear[perm[k]]);
        }
        let (ea, eb) = (brute_force_eigen(&s, &q), brute_force_eigen(&t, &q));
        for k in 0..3 {
            assert!((ea[k] - eb[perm[k]]).abs() < 1e-12);
        }
        let (ta, tb) = (to_tripartite(&s).unwrap(), to_tripartite(&t).unwrap());
        assert_eq!(perm[ta.idle], tb.idle);
        assert_eq!(ta.rates, tb.rates);
    }

    #[test]
    fn text_round_trip() {
        let text = "# two cavities\nmech_freqs = 1.0\next_freqs = 50 150\ndecay = 0.1 0.2\ndrive = 1 20\n\
                    mech_damping = 1e-8\nn_th = 3\nchi 2 1 1 = 0.05\n";
        let s = parse_system(text).unwrap();
        assert_eq!(s.chi[0][1][0], 0.05);
        assert_eq!(s.chi[1][0][0], 0.05);
        assert_eq!(s.drive, (0, 20.0));
        assert_eq!(s.decay, vec![0.1, 0.2]);
        assert_eq!(s.n_th, 3.0);
        let err = parse_system("mech_freqs = 1\next_freqs = 1 2\ndrive = 1 1\nchi 1 3 1 = 0.1\n").unwrap_err();
        assert!(matches!(err, ReduceError::Parse { line: 4, .. }));
        let err = parse_system("mech_freqs = 1\nfoo = 2\n").unwrap_err();
        assert!(matches!(err, ReduceError::Parse { line: 2, .. }));
    }
}
