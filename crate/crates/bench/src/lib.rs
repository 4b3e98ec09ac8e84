//! Shared fixtures for the benchmarks.

use qlimit_core::reducer::ParametricSystem;
use qlimit_core::{DerivedQuantities, DrivenMode, ModeRates};

/// Dimensionless toy model used throughout the Monte Carlo tests.
pub fn toy() -> DerivedQuantities {
    DerivedQuantities::from_rates(
        ModeRates {
            omega_m: 1.0,
            gamma_m: 0.0,
            n_th: 0.0,
            omega_s: 50.0,
            g0: 0.05,
            gamma_c: 0.1,
            gamma_d: 0.1,
            c_bar: 20.0,
            drive: DrivenMode::Common,
        },
        None,
    )
}

/// Four external modes, one mechanical mode, every pair coupled.
pub fn four_mode() -> ParametricSystem {
    let mut s = ParametricSystem::new(vec![1.0], vec![100.0, 160.0, 230.0, 290.0], (1, 1.0));
    s.decay = vec![0.1; 4];
    for i in 0..4 {
        for j in i..4 {
            if i == j && i == s.drive.0 {
                continue;
            }
            s.set_chi(i, j, 0, 0.3 + 0.1 * (i + 2 * j) as f64);
        }
    }
    s
}
