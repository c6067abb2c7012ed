//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use spectra_core::{
    default_energy_cutoff, enumerate_basis, BasisTable, BilliardConfig, ScattererSet, SecularProblem, SolverSettings,
    Window,
};

/// Basis for windows reaching `top` with the default cutoff rule.
pub fn reference_basis(top: f64) -> Arc<BasisTable> {
    Arc::new(enumerate_basis(BilliardConfig::reference(), default_energy_cutoff(top)).expect("reference basis"))
}

/// Reference geometry with the first `n` standard positions at strength `v`.
pub fn reference_problem(basis: &Arc<BasisTable>, n: usize, v: f64, lo: f64, hi: f64) -> SecularProblem {
    let s = ScattererSet::reference(basis.config(), n, v).expect("reference scatterers");
    SecularProblem::new(basis.clone(), s, Window::Energy { lo, hi }, SolverSettings::default()).expect("problem")
}

/// Poisson-like test levels from a fixed linear congruential sequence.
pub fn pseudo_poisson(count: usize) -> Vec<f64> {
    let mut state: u64 = 0x853c_49e6_748f_ea9b;
    let mut x = 0.0;
    (0..count)
        .map(|_| {
            state = state
                .wrapping_mul(6_364_136_223_846_793_005)
                .wrapping_add(1_442_695_040_888_963_407);
            let u = ((state >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
            x -= u.ln();
            x
        })
        .collect()
}
