//! One-dimensional minimization of unimodal functions.

/// Inverse golden ratio, `(sqrt(5) - 1) / 2`.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section search for the minimum of `f` on `[lo, hi]`.
///
/// Stops when the bracket is narrower than `rel_tol * |x|` (or `rel_tol`
/// absolutely near zero) or after `max_iter` reductions.
pub fn golden_section<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    rel_tol: f64,
    max_iter: usize,
) -> Minimum {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evals = 2;
    for _ in 0..max_iter {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= rel_tol * mid.abs().max(1e-300) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        evals += 1;
    }
    let (x, value) = if fc < fd { (c, fc) } else { (d, fd) };
    Minimum { x, value, evaluations: evals }
}

/// Minimize over `x > 0` on a logarithmic grid, then refine in `ln x` with
/// golden-section search inside the bracket around the best grid point.
pub fn log_grid_then_golden<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    grid_points: usize,
    rel_tol: f64,
) -> Minimum {
    assert!(lo > 0.0 && hi > lo && grid_points >= 3);
    let (llo, lhi) = (lo.ln(), hi.ln());
    let step = (lhi - llo) / (grid_points - 1) as f64;
    let values: Vec<f64> = (0..grid_points).map(|k| f((llo + step * k as f64).exp())).collect();
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let left = llo + step * best.saturating_sub(1) as f64;
    let right = llo + step * (best + 1).min(grid_points - 1) as f64;
    // A bracket width of `rel_tol` in ln x is a relative tolerance on x.
    let m = golden_section_abs(|u| f(u.exp()), left, right, rel_tol, 400);
    Minimum { x: m.x.exp(), value: m.value, evaluations: m.evaluations + grid_points }
}

/// Golden-section search stopping on an absolute bracket width.
pub fn golden_section_abs<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    abs_tol: f64,
    max_iter: usize,
) -> Minimum {
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut evals = 2;
    for _ in 0..max_iter {
        if b - a <= abs_tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        evals += 1;
    }
    let (x, value) = if fc < fd { (c, fc) } else { (d, fd) };
    Minimum { x, value, evaluations: evals }
}
