//! Regularized Green's-function matrix at the scatterer positions.
//!
//! Diagonal entries use the subtracted form
//! `Σ φ_n(x_k)² (1/(ω − E_n) + E_n/(E_n² + Λ²))`, off-diagonal entries the
//! bare kernel `Σ φ_n(x_k) φ_n(x_l) / (ω − E_n)`. Both are truncated at the
//! basis cutoff. Above the cutoff the diagonal summand is replaced by its
//! mean-field value `(ρ/S) (1/(ω − E) + E/(E² + Λ²))`, which integrates to
//! `(ρ/S) ln((E_cut − ω) / √(E_cut² + Λ²))`. Off-diagonal tails average to
//! zero and are booked in the truncation bound instead.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisTable, BilliardConfig, PhiCache, Point};
use crate::error::{Error, Result};

/// Scatterer positions from the reference experiment; the first `N` rows
/// are used for an `N`-scatterer run.
pub const REFERENCE_POSITIONS: [Point; 10] = [
    Point::new(0.6224826, 0.2758356),
    Point::new(0.8202505, 0.4561782),
    Point::new(0.1802603, 0.6365209),
    Point::new(0.3780281, 0.8168635),
    Point::new(0.5757960, 0.2332624),
    Point::new(0.7735638, 0.4136051),
    Point::new(0.1335736, 0.5939477),
    Point::new(0.3313415, 0.7742904),
    Point::new(0.5291093, 0.1906893),
    Point::new(0.7268772, 0.3710320),
];

/// Point scatterers with separated boundary conditions, `A = diag(v_k⁻¹)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScattererSet {
    positions: Vec<Point>,
    inverse_strengths: Vec<f64>,
}

impl ScattererSet {
    pub fn new(config: &BilliardConfig, positions: Vec<Point>, inverse_strengths: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidScatterers("at least one scatterer is required".into()));
        }
        if positions.len() != inverse_strengths.len() {
            return Err(Error::InvalidScatterers(format!(
                "{} positions but {} inverse strengths",
                positions.len(),
                inverse_strengths.len()
            )));
        }
        for (k, p) in positions.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) || !config.is_interior(*p) {
                return Err(Error::InvalidScatterers(format!(
                    "scatterer {k} at ({}, {}) is not strictly inside the billiard",
                    p.x, p.y
                )));
            }
            for (l, q) in positions[..k].iter().enumerate() {
                if p == q {
                    return Err(Error::InvalidScatterers(format!(
                        "scatterers {l} and {k} share position ({}, {})",
                        p.x, p.y
                    )));
                }
            }
        }
        if let Some(v) = inverse_strengths.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidScatterers(format!("inverse strength {v} is not finite")));
        }
        Ok(Self {
            positions,
            inverse_strengths,
        })
    }

    /// First `n` reference positions, all with the same inverse strength.
    pub fn reference(config: &BilliardConfig, n: usize, inverse_strength: f64) -> Result<Self> {
        if n > REFERENCE_POSITIONS.len() {
            return Err(Error::InvalidScatterers(format!(
                "only {} reference positions exist",
                REFERENCE_POSITIONS.len()
            )));
        }
        Self::new(config, REFERENCE_POSITIONS[..n].to_vec(), vec![inverse_strength; n])
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn inverse_strengths(&self) -> &[f64] {
        &self.inverse_strengths
    }

    /// Same positions with every inverse strength shifted by `delta`.
    pub fn shifted(&self, delta: f64) -> Self {
        Self {
            positions: self.positions.clone(),
            inverse_strengths: self.inverse_strengths.iter().map(|v| v + delta).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSettings {
    /// Largest admissible `ω / E_cut`.
    pub safety_fraction: f64,
    /// Minimum `|ω − E_n|`, in mean level spacings.
    pub pole_exclusion: f64,
    pub tail_correction: bool,
}

impl Default for KernelSettings {
    fn default() -> Self {
        Self {
            safety_fraction: 0.5,
            pole_exclusion: 1e-8,
            tail_correction: true,
        }
    }
}

/// `G(ω)` at one energy, with the worst-case truncation estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct GreenEvaluation {
    pub omega: f64,
    pub matrix: DMatrix<f64>,
    pub truncation_error_bound: f64,
}

/// A basis paired with a scatterer set; precomputes `φ_n(x_k)` and the
/// pair products once so that each evaluation is a single pass over levels.
#[derive(Debug, Clone)]
pub struct GreenKernel {
    basis: Arc<BasisTable>,
    scatterers: ScattererSet,
    settings: KernelSettings,
    phi: PhiCache,
    pairs: Vec<(usize, usize)>,
    pair_products: Vec<f64>,
    regularization: Vec<f64>,
    tail_coefficient: f64,
}

impl GreenKernel {
    pub fn new(basis: Arc<BasisTable>, scatterers: ScattererSet, settings: KernelSettings) -> Result<Self> {
        if !(settings.safety_fraction > 0.0 && settings.safety_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "safety fraction {} outside (0, 1]",
                settings.safety_fraction
            )));
        }
        if !(settings.pole_exclusion > 0.0) {
            return Err(Error::InvalidConfig("pole exclusion must be positive".into()));
        }
        let phi = basis.phi_cache(scatterers.positions())?;
        let n = scatterers.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|k| (k..n).map(move |l| (k, l))).collect();

        let lambda2 = basis.config().lambda.powi(2);
        let mut pair_products = Vec::with_capacity(basis.len() * pairs.len());
        let mut regularization = vec![0.0; n];
        for (i, &e) in basis.energies().iter().enumerate() {
            let row = phi.row(i);
            for &(k, l) in &pairs {
                pair_products.push(row[k] * row[l]);
            }
            let weight = e / (e * e + lambda2);
            for (r, &v) in regularization.iter_mut().zip(row) {
                *r += v * v * weight;
            }
        }
        let tail_coefficient = basis.mean_level_density() / basis.config().area();

        Ok(Self {
            basis,
            scatterers,
            settings,
            phi,
            pairs,
            pair_products,
            regularization,
            tail_coefficient,
        })
    }

    pub fn basis(&self) -> &Arc<BasisTable> {
        &self.basis
    }

    pub fn scatterers(&self) -> &ScattererSet {
        &self.scatterers
    }

    pub fn settings(&self) -> &KernelSettings {
        &self.settings
    }

    pub fn phi(&self) -> &PhiCache {
        &self.phi
    }

    pub fn len(&self) -> usize {
        self.scatterers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scatterers.is_empty()
    }

    /// Largest energy at which the truncated sums are trusted.
    pub fn truncation_limit(&self) -> f64 {
        self.settings.safety_fraction * self.basis.energy_cutoff()
    }

    /// Absolute pole-exclusion distance.
    pub fn exclusion(&self) -> f64 {
        self.settings.pole_exclusion * self.basis.mean_spacing()
    }

    pub fn check_omega(&self, omega: f64) -> Result<()> {
        let limit = self.truncation_limit();
        if !(omega <= limit) {
            return Err(Error::TruncationUnsafe { omega, limit });
        }
        let (level, dist) = self.basis.nearest_level(omega);
        if dist < self.exclusion() {
            return Err(Error::PoleProximity {
                omega,
                level,
                energy: self.basis.energies()[level],
            });
        }
        Ok(())
    }

    /// Mean-field contribution of the diagonal summand above the cutoff.
    pub fn diagonal_tail(&self, omega: f64) -> f64 {
        if !self.settings.tail_correction {
            return 0.0;
        }
        let cut = self.basis.energy_cutoff();
        let lambda = self.basis.config().lambda;
        self.tail_coefficient * ((cut - omega) / cut.hypot(lambda)).ln()
    }

    /// Heuristic size of the omitted off-diagonal tail.
    pub fn truncation_bound(&self, omega: f64) -> f64 {
        self.tail_coefficient * (1.0 - omega / self.basis.energy_cutoff()).ln().abs()
    }

    pub fn green_diag(&self, k: usize, omega: f64) -> Result<f64> {
        if k >= self.len() {
            return Err(Error::IndexContract(k));
        }
        self.check_omega(omega)?;
        let mut sum = 0.0;
        for (i, &e) in self.basis.energies().iter().enumerate() {
            let v = self.phi.get(i, k);
            sum += v * v / (omega - e);
        }
        Ok(sum + self.regularization[k] + self.diagonal_tail(omega))
    }

    pub fn green_offdiag(&self, k: usize, l: usize, omega: f64) -> Result<f64> {
        let n = self.len();
        if k == l || k >= n || l >= n {
            return Err(Error::IndexContract(k.max(l)));
        }
        self.check_omega(omega)?;
        let (a, b) = (k.min(l), k.max(l));
        let mut sum = 0.0;
        for (i, &e) in self.basis.energies().iter().enumerate() {
            sum += self.phi.get(i, a) * self.phi.get(i, b) / (omega - e);
        }
        Ok(sum)
    }

    pub fn green_matrix(&self, omega: f64) -> Result<GreenEvaluation> {
        self.check_omega(omega)?;
        let n = self.len();
        let mut values = vec![0.0; n * n];
        self.fill_green(omega, &mut values);
        Ok(GreenEvaluation {
            omega,
            matrix: DMatrix::from_row_slice(n, n, &values),
            truncation_error_bound: self.truncation_bound(omega),
        })
    }

    /// Writes `G(ω)` row-major into `out` without range checks. Each
    /// unordered pair is accumulated once and mirrored, so the result is
    /// exactly symmetric and the summation order is fixed.
    pub(crate) fn fill_green(&self, omega: f64, out: &mut [f64]) {
        let n = self.len();
        let np = self.pairs.len();
        let mut acc = [0.0f64; 64];
        let mut heap;
        let acc: &mut [f64] = if np <= acc.len() {
            &mut acc[..np]
        } else {
            heap = vec![0.0; np];
            &mut heap
        };
        for (row, &e) in self.pair_products.chunks_exact(np).zip(self.basis.energies()) {
            let w = 1.0 / (omega - e);
            for (a, &p) in acc.iter_mut().zip(row) {
                *a += p * w;
            }
        }
        let tail = self.diagonal_tail(omega);
        for (&(k, l), &a) in self.pairs.iter().zip(acc.iter()) {
            if k == l {
                out[k * n + k] = a + self.regularization[k] + tail;
            } else {
                out[k * n + l] = a;
                out[l * n + k] = a;
            }
        }
    }

    /// Writes the secular matrix `D(ω) = diag(v⁻¹) − G(ω)` row-major.
    pub(crate) fn fill_secular(&self, omega: f64, out: &mut [f64]) {
        self.fill_green(omega, out);
        let n = self.len();
        for x in out.iter_mut() {
            *x = -*x;
        }
        for (k, v) in self.scatterers.inverse_strengths().iter().enumerate() {
            out[k * n + k] += v;
        }
    }

    /// `G(±iΛ)`. Only the two points on the imaginary axis used by the
    /// normality diagnostic are supported.
    pub fn green_matrix_imaginary(&self, upper: bool) -> DMatrix<Complex64> {
        let lambda = self.basis.config().lambda;
        let omega = Complex64::new(0.0, if upper { lambda } else { -lambda });
        let n = self.len();
        let mut acc = vec![Complex64::new(0.0, 0.0); self.pairs.len()];
        for (row, &e) in self
            .pair_products
            .chunks_exact(self.pairs.len())
            .zip(self.basis.energies())
        {
            let w = (omega - e).inv();
            for (a, &p) in acc.iter_mut().zip(row) {
                *a += w * p;
            }
        }
        let tail = if self.settings.tail_correction {
            let cut = self.basis.energy_cutoff();
            ((Complex64::new(cut, 0.0) - omega) / cut.hypot(lambda)).ln() * self.tail_coefficient
        } else {
            Complex64::new(0.0, 0.0)
        };
        let mut g = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for (&(k, l), &a) in self.pairs.iter().zip(&acc) {
            if k == l {
                g[(k, k)] = a + self.regularization[k] + tail;
            } else {
                g[(k, l)] = a;
                g[(l, k)] = a;
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{enumerate_basis, BilliardConfig};

    fn kernel(n: usize, cutoff: f64) -> GreenKernel {
        let config = BilliardConfig::reference();
        let basis = Arc::new(enumerate_basis(config, cutoff).unwrap());
        let s = ScattererSet::reference(&config, n, 5.0).unwrap();
        GreenKernel::new(basis, s, KernelSettings::default()).unwrap()
    }

    #[test]
    fn scatterer_validation() {
        let c = BilliardConfig::reference();
        assert!(ScattererSet::new(&c, vec![], vec![]).is_err());
        assert!(ScattererSet::new(&c, vec![Point::new(0.0, 0.5)], vec![1.0]).is_err());
        let p = Point::new(0.3, 0.4);
        assert!(ScattererSet::new(&c, vec![p, p], vec![1.0, 1.0]).is_err());
        assert!(ScattererSet::new(&c, vec![p], vec![1.0, 2.0]).is_err());
        assert!(ScattererSet::new(&c, vec![p], vec![f64::NAN]).is_err());
        assert!(ScattererSet::new(&c, vec![p], vec![1.0]).is_ok());
    }

    #[test]
    fn matrix_is_exactly_symmetric_and_matches_elements() {
        let k = kernel(5, 2000.0);
        let ev = k.green_matrix(300.5).unwrap();
        assert_eq!(ev.matrix, ev.matrix.transpose());
        for a in 0..5 {
            let d = k.green_diag(a, 300.5).unwrap();
            assert!((ev.matrix[(a, a)] - d).abs() < 1e-10 * d.abs().max(1.0));
            for b in 0..5 {
                if a != b {
                    let o = k.green_offdiag(a, b, 300.5).unwrap();
                    assert!((ev.matrix[(a, b)] - o).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn single_scatterer_matrix_is_the_diagonal() {
        let k = kernel(1, 2000.0);
        let ev = k.green_matrix(123.4).unwrap();
        assert_eq!(ev.matrix.shape(), (1, 1));
        assert!((ev.matrix[(0, 0)] - k.green_diag(0, 123.4).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn contract_errors() {
        let k = kernel(2, 2000.0);
        assert!(matches!(k.green_offdiag(1, 1, 10.3), Err(Error::IndexContract(_))));
        assert!(matches!(k.green_diag(7, 10.3), Err(Error::IndexContract(_))));
        let e = k.basis().energies()[10];
        match k.green_diag(0, e + 1e-12) {
            Err(Error::PoleProximity { level, .. }) => assert_eq!(level, 10),
            r => panic!("unexpected {r:?}"),
        }
        assert!(matches!(k.green_diag(0, 1500.0), Err(Error::TruncationUnsafe { .. })));
    }

    #[test]
    fn diagonal_blows_up_above_a_pole() {
        let k = kernel(1, 2000.0);
        let e = k.basis().energies()[40];
        let residue = k.phi().get(40, 0).powi(2);
        let mut prev = f64::NEG_INFINITY;
        for eps in [1e-2, 1e-4, 1e-6] {
            let g = k.green_diag(0, e + eps).unwrap();
            assert!(g > prev);
            prev = g;
        }
        assert!(prev > 0.5 * residue / 1e-6);
    }

    #[test]
    fn nodal_levels_drop_out_of_the_offdiagonal() {
        // x = lx/2 is a nodal line of every even-nx mode, so only odd-nx
        // levels contribute to the pair kernel.
        let c = BilliardConfig::reference();
        let basis = Arc::new(enumerate_basis(c, 500.0).unwrap());
        let s = ScattererSet::new(
            &c,
            vec![Point::new(0.3, 0.4), Point::new(c.lx * 0.5, 0.4)],
            vec![1.0, 1.0],
        )
        .unwrap();
        let k = GreenKernel::new(basis.clone(), s, KernelSettings::default()).unwrap();
        let omega = 100.5;
        let full = k.green_offdiag(0, 1, omega).unwrap();
        let (mut odd, mut even) = (0.0, 0.0);
        for (i, lvl) in basis.levels().iter().enumerate() {
            let term = k.phi().get(i, 0) * k.phi().get(i, 1) / (omega - lvl.energy);
            if lvl.nx % 2 == 0 {
                even += term;
            } else {
                odd += term;
            }
        }
        assert!(even.abs() < 1e-12);
        assert!(even.abs() <= k.truncation_bound(omega));
        assert!((full - odd).abs() < 1e-12);
    }
}
