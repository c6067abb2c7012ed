//! Perturbed eigenvalues as roots of `det(diag(v⁻¹) − G(ω)) = 0`.
//!
//! Between two consecutive unperturbed levels every eigenvalue of the real
//! symmetric matrix `D(ω) = diag(v⁻¹) − G(ω)` is nondecreasing in `ω`
//! (`dD/dω` is a Gram matrix). The number of negative eigenvalues of `D`
//! therefore drops by one at every root, which turns root isolation into
//! bisection on an integer count. Across a coupled pole the count rises by
//! exactly one, so roots hiding in the pole-exclusion zone are still
//! accounted for and reported at the zone edge.
//!
//! Work is split into cells: the bound-state cell `(−∞, E_0)` and one cell
//! per interval `(E_i, E_{i+1})`. Cells are independent and solved in
//! parallel; results are assembled in cell order.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basis::{enumerate_basis, BasisTable, BilliardConfig};
use crate::error::{Error, Result};
use crate::green::{GreenKernel, KernelSettings, ScattererSet};

/// Relative amplitude below which a level counts as decoupled from every
/// scatterer.
const DECOUPLED_AMPLITUDE: f64 = 1e-10;

/// Lowest energy probed while looking for the bound-state floor.
const FLOOR_LIMIT: f64 = -1e30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Window {
    /// 1-based inclusive indices into the perturbed spectrum, counted from
    /// the lowest root (bound states included).
    Index { lo: usize, hi: usize },
    /// Closed energy interval.
    Energy { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub kernel: KernelSettings,
    /// Final bracket width, in mean level spacings.
    pub tol_omega: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            kernel: KernelSettings::default(),
            tol_omega: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootStatus {
    Regular,
    /// Root lies inside the pole-exclusion zone; reported at its edge.
    PoleAdjacent,
    /// Several branches cross zero within one tolerance width.
    Ambiguous,
    /// Unperturbed level with vanishing amplitude at every scatterer.
    Decoupled,
}

impl fmt::Display for RootStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RootStatus::Regular => "regular",
            RootStatus::PoleAdjacent => "pole_adjacent",
            RootStatus::Ambiguous => "ambiguous",
            RootStatus::Decoupled => "decoupled",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub omega: f64,
    /// Unperturbed level bounding the host interval from below; `None` for
    /// bound states below the ground level.
    pub host_level: Option<usize>,
    pub host_lo: f64,
    pub host_hi: f64,
    pub residual: f64,
    pub status: RootStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexConvention {
    /// Index counts every root from the bottom of the spectrum.
    Global,
    /// Index counts roots from the lower edge of an energy window.
    WindowLocal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedSpectrum {
    pub roots: Vec<Root>,
    /// Index of `roots[0]`, 1-based, under `convention`.
    pub first_index: usize,
    pub convention: IndexConvention,
    pub config_digest: String,
}

impl PerturbedSpectrum {
    pub fn omegas(&self) -> Vec<f64> {
        self.roots.iter().map(|r| r.omega).collect()
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Root count per host interval, keyed by the lower level index.
    pub fn interval_counts(&self) -> Vec<(Option<usize>, usize)> {
        let mut out: Vec<(Option<usize>, usize)> = Vec::new();
        for r in &self.roots {
            match out.last_mut() {
                Some((h, c)) if *h == r.host_level => *c += 1,
                _ => out.push((r.host_level, 1)),
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenfunctionExpansion {
    pub omega: f64,
    /// Null-vector weights `a_k` of `D(ω)`.
    pub weights: Vec<f64>,
    /// Normalized coefficients `c_n` over the basis levels.
    pub coefficients: Vec<f64>,
    /// Euclidean norm of the coefficients before scaling.
    pub norm: f64,
}

/// Smallest cutoff (a multiple of 100) at least eight times `top`.
pub fn default_energy_cutoff(top: f64) -> f64 {
    (8.0 * top / 100.0).ceil() * 100.0
}

/// Highest unperturbed energy a window needs: the level just above the
/// upper index for index windows, the upper edge for energy windows.
pub fn window_top(config: &BilliardConfig, window: &Window) -> Result<f64> {
    match *window {
        Window::Energy { hi, .. } => Ok(hi),
        Window::Index { hi, .. } => {
            // Grow a trial cutoff until the table holds the level above `hi`.
            let mut cutoff = (hi as f64 + 2.0) / crate::basis::mean_level_density(config);
            let ground = config.level_energy(1, 1);
            cutoff = cutoff.max(2.0 * ground);
            loop {
                let table = enumerate_basis(*config, cutoff)?;
                if table.len() > hi + 1 {
                    return Ok(table.energies()[hi + 1]);
                }
                cutoff *= 1.5;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Cell {
    Bottom,
    Between(usize),
}

/// One secular problem: basis, scatterers, window and solver settings.
#[derive(Debug, Clone)]
pub struct SecularProblem {
    kernel: GreenKernel,
    window: Window,
    settings: SolverSettings,
}

impl SecularProblem {
    pub fn new(
        basis: Arc<BasisTable>,
        scatterers: ScattererSet,
        window: Window,
        settings: SolverSettings,
    ) -> Result<Self> {
        if !(settings.tol_omega > 0.0) {
            return Err(Error::InvalidConfig("tol_omega must be positive".into()));
        }
        let kernel = GreenKernel::new(basis, scatterers, settings.kernel)?;
        let limit = kernel.truncation_limit();
        match window {
            Window::Energy { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::InvalidWindow(format!("energy window [{lo}, {hi}]")));
                }
                if hi > limit {
                    return Err(Error::InvalidWindow(format!(
                        "upper edge {hi} exceeds the truncation-safe limit {limit}"
                    )));
                }
            }
            Window::Index { lo, hi } => {
                if lo == 0 || lo > hi {
                    return Err(Error::InvalidWindow(format!("index window {lo}..={hi}")));
                }
                let energies = kernel.basis().energies();
                match energies.get(hi + 1) {
                    Some(&top) if top <= limit => {}
                    _ => {
                        return Err(Error::InvalidWindow(format!(
                            "index {hi} is not inside the truncation-safe limit {limit}"
                        )))
                    }
                }
            }
        }
        Ok(Self {
            kernel,
            window,
            settings,
        })
    }

    pub fn kernel(&self) -> &GreenKernel {
        &self.kernel
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    fn tolerance(&self) -> f64 {
        self.settings.tol_omega * self.kernel.basis().mean_spacing()
    }

    /// Hash of everything that affects the computed roots.
    pub fn config_digest(&self) -> String {
        let basis = self.kernel.basis();
        let c = basis.config();
        let s = self.kernel.scatterers();
        let mut h = Sha256::new();
        let mut put = |x: f64| h.update(x.to_le_bytes());
        for x in [c.lx, c.ly, c.mass, c.lambda, basis.energy_cutoff()] {
            put(x);
        }
        for (p, v) in s.positions().iter().zip(s.inverse_strengths()) {
            put(p.x);
            put(p.y);
            put(*v);
        }
        let k = self.settings.kernel;
        put(k.safety_fraction);
        put(k.pole_exclusion);
        put(if k.tail_correction { 1.0 } else { 0.0 });
        put(self.settings.tol_omega);
        match self.window {
            Window::Index { lo, hi } => {
                put(0.0);
                put(lo as f64);
                put(hi as f64);
            }
            Window::Energy { lo, hi } => {
                put(1.0);
                put(lo);
                put(hi);
            }
        }
        hex::encode(h.finalize())
    }

    /// `D(ω) = diag(v⁻¹) − G(ω)`.
    pub fn secular_matrix(&self, omega: f64) -> Result<DMatrix<f64>> {
        self.kernel.check_omega(omega)?;
        let n = self.kernel.len();
        let mut buf = vec![0.0; n * n];
        self.kernel.fill_secular(omega, &mut buf);
        Ok(DMatrix::from_row_slice(n, n, &buf))
    }

    /// Ascending eigenvalues of `D(ω)`, unchecked.
    fn secular_eigenvalues(&self, omega: f64) -> Vec<f64> {
        let n = self.kernel.len();
        let mut buf = vec![0.0; n * n];
        self.kernel.fill_secular(omega, &mut buf);
        if n == 1 {
            return buf;
        }
        let m = DMatrix::from_row_slice(n, n, &buf);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    fn inertia(&self, omega: f64) -> usize {
        self.secular_eigenvalues(omega).iter().filter(|&&x| x < 0.0).count()
    }

    /// Scalar secular function `G(ω) − v⁻¹` for a single scatterer.
    fn single_residual(&self, omega: f64) -> f64 {
        let mut buf = [0.0];
        self.kernel.fill_secular(omega, &mut buf);
        -buf[0]
    }

    fn cells(&self) -> Vec<Cell> {
        let energies = self.kernel.basis().energies();
        match self.window {
            Window::Index { hi, .. } => std::iter::once(Cell::Bottom)
                .chain((0..=hi).map(Cell::Between))
                .collect(),
            Window::Energy { lo, hi } => {
                let mut cells = Vec::new();
                if lo < energies[0] {
                    cells.push(Cell::Bottom);
                }
                for i in 0..energies.len() - 1 {
                    if energies[i + 1] > lo && energies[i] < hi {
                        cells.push(Cell::Between(i));
                    }
                }
                cells
            }
        }
    }

    fn is_coupled(&self, level: usize) -> bool {
        let scale = (4.0 / self.kernel.basis().config().area()).sqrt();
        self.kernel
            .phi()
            .row(level)
            .iter()
            .any(|v| v.abs() > DECOUPLED_AMPLITUDE * scale)
    }

    /// Lowest probe energy below which all `N` secular eigenvalues are
    /// negative.
    fn bound_state_floor<F: Fn(f64) -> usize>(&self, count: F) -> Result<f64> {
        let n = self.kernel.len();
        let e0 = self.kernel.basis().energies()[0];
        let mut step = self.kernel.basis().mean_spacing();
        loop {
            let x = e0 - step;
            if x < FLOOR_LIMIT {
                return Err(Error::BoundStateFloor(FLOOR_LIMIT));
            }
            if count(x) == n {
                return Ok(x);
            }
            step *= 2.0;
        }
    }

    fn cell_bounds(&self, cell: Cell) -> (Option<usize>, f64, f64) {
        let energies = self.kernel.basis().energies();
        match cell {
            Cell::Bottom => (None, f64::NEG_INFINITY, energies[0]),
            Cell::Between(i) => (Some(i), energies[i], energies[i + 1]),
        }
    }

    fn solve_cells<F>(&self, solve: F) -> Result<PerturbedSpectrum>
    where
        F: Fn(Cell) -> Result<Vec<Root>> + Sync,
    {
        let cells = self.cells();
        let per_cell: Vec<Vec<Root>> = cells.into_par_iter().map(&solve).collect::<Result<_>>()?;
        let mut roots: Vec<Root> = per_cell.into_iter().flatten().collect();
        roots.sort_by(|a, b| a.omega.total_cmp(&b.omega));

        let (roots, first_index, convention) = match self.window {
            Window::Index { lo, hi } => {
                if roots.len() < hi {
                    return Err(Error::Bracketing {
                        lo: roots.first().map_or(f64::NAN, |r| r.omega),
                        hi: roots.last().map_or(f64::NAN, |r| r.omega),
                        reason: format!("found {} roots, index window needs {hi}", roots.len()),
                    });
                }
                (roots[lo - 1..hi].to_vec(), lo, IndexConvention::Global)
            }
            Window::Energy { lo, hi } => {
                let kept = roots.into_iter().filter(|r| r.omega >= lo && r.omega <= hi).collect();
                (kept, 1, IndexConvention::WindowLocal)
            }
        };
        Ok(PerturbedSpectrum {
            roots,
            first_index,
            convention,
            config_digest: self.config_digest(),
        })
    }

    /// Roots for a single scatterer from the monotone scalar condition
    /// `G(ω) = v⁻¹`.
    pub fn solve_single(&self) -> Result<PerturbedSpectrum> {
        if self.kernel.len() != 1 {
            return Err(Error::InvalidScatterers(format!(
                "single-scatterer solver called with N = {}",
                self.kernel.len()
            )));
        }
        self.solve_cells(|cell| self.single_cell(cell))
    }

    fn single_cell(&self, cell: Cell) -> Result<Vec<Root>> {
        let excl = self.kernel.exclusion();
        let tol = self.tolerance();
        let (host_level, host_lo, host_hi) = self.cell_bounds(cell);
        // f = G − v⁻¹ falls from +∞ to −∞ across a cell.
        let positive = |x: f64| self.single_residual(x) > 0.0;
        let mut roots = Vec::new();

        let x0 = match cell {
            Cell::Bottom => self.bound_state_floor(|x| usize::from(positive(x)))?,
            Cell::Between(i) => {
                let zone = usize::from(self.is_coupled(i)) as isize
                    - (isize::from(positive(host_lo + excl)) - isize::from(positive(host_lo - excl)));
                self.push_zone_roots(&mut roots, cell, zone)?;
                host_lo + excl
            }
        };
        let x1 = host_hi - excl;
        let (p0, p1) = (positive(x0), positive(x1));
        match (p0, p1) {
            (true, false) => {
                let (mut a, mut b) = (x0, x1);
                while b - a > tol {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    if positive(mid) {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                let (fa, fb) = (self.single_residual(a), self.single_residual(b));
                let omega = secant(a, b, fa, fb);
                roots.push(Root {
                    omega,
                    host_level,
                    host_lo,
                    host_hi,
                    residual: self.single_residual(omega).abs(),
                    status: RootStatus::Regular,
                });
            }
            (false, true) => {
                return Err(Error::Bracketing {
                    lo: x0,
                    hi: x1,
                    reason: "secular function increases across the interval".into(),
                })
            }
            _ => {}
        }
        Ok(roots)
    }

    /// Roots for any number of scatterers by inertia bisection on `D(ω)`.
    pub fn solve_multi(&self) -> Result<PerturbedSpectrum> {
        self.solve_cells(|cell| self.multi_cell(cell))
    }

    fn multi_cell(&self, cell: Cell) -> Result<Vec<Root>> {
        let n = self.kernel.len();
        let excl = self.kernel.exclusion();
        let (_, host_lo, host_hi) = self.cell_bounds(cell);
        let mut roots = Vec::new();

        let x0 = match cell {
            Cell::Bottom => self.bound_state_floor(|x| self.inertia(x))?,
            Cell::Between(i) => {
                let jump = self.inertia(host_lo + excl) as isize - self.inertia(host_lo - excl) as isize;
                let zone = usize::from(self.is_coupled(i)) as isize - jump;
                self.push_zone_roots(&mut roots, cell, zone)?;
                host_lo + excl
            }
        };
        let x1 = host_hi - excl;

        let samples = 4 * n + 4;
        let mut grid = Vec::with_capacity(samples + 2);
        grid.push(x0);
        if x0.is_finite() && host_lo.is_finite() {
            let h = (x1 - x0) / (samples + 1) as f64;
            grid.extend((1..=samples).map(|j| x0 + h * j as f64));
        }
        grid.push(x1);
        let counts: Vec<usize> = grid.iter().map(|&x| self.inertia(x)).collect();
        for (w, c) in grid.windows(2).zip(counts.windows(2)) {
            if c[1] > c[0] {
                return Err(Error::Bracketing {
                    lo: w[0],
                    hi: w[1],
                    reason: format!("negative-eigenvalue count rose from {} to {}", c[0], c[1]),
                });
            }
            self.isolate(cell, w[0], w[1], c[0], c[1], &mut roots);
        }
        Ok(roots)
    }

    fn push_zone_roots(&self, roots: &mut Vec<Root>, cell: Cell, zone: isize) -> Result<()> {
        let Cell::Between(i) = cell else { return Ok(()) };
        let (host_level, host_lo, host_hi) = self.cell_bounds(cell);
        if zone < 0 {
            return Err(Error::Bracketing {
                lo: host_lo - self.kernel.exclusion(),
                hi: host_lo + self.kernel.exclusion(),
                reason: "inertia jump across the pole exceeds one".into(),
            });
        }
        let coupled = self.is_coupled(i);
        for _ in 0..zone {
            let (omega, status) = if coupled {
                (host_lo + self.kernel.exclusion(), RootStatus::PoleAdjacent)
            } else {
                (host_lo, RootStatus::Decoupled)
            };
            roots.push(Root {
                omega,
                host_level,
                host_lo,
                host_hi,
                residual: 0.0,
                status,
            });
        }
        Ok(())
    }

    fn isolate(&self, cell: Cell, a: f64, b: f64, na: usize, nb: usize, roots: &mut Vec<Root>) {
        let drops = na - nb;
        if drops == 0 {
            return;
        }
        let (host_level, host_lo, host_hi) = self.cell_bounds(cell);
        let tol = self.tolerance();
        let mid = 0.5 * (a + b);
        let unresolved = b - a <= tol || mid <= a || mid >= b;
        if drops > 1 {
            if unresolved {
                for _ in 0..drops {
                    roots.push(Root {
                        omega: mid,
                        host_level,
                        host_lo,
                        host_hi,
                        residual: self.min_abs_eigenvalue(mid),
                        status: RootStatus::Ambiguous,
                    });
                }
                return;
            }
            let nm = self.inertia(mid);
            self.isolate(cell, a, mid, na, nm, roots);
            self.isolate(cell, mid, b, nm, nb, roots);
            return;
        }

        let (mut a, mut b) = (a, b);
        loop {
            let mid = 0.5 * (a + b);
            if b - a <= tol || mid <= a || mid >= b {
                break;
            }
            if self.inertia(mid) == na {
                a = mid;
            } else {
                b = mid;
            }
        }
        // The crossing branch is eigenvalue `na − 1` in ascending order.
        let branch = na - 1;
        let fa = self.secular_eigenvalues(a)[branch];
        let fb = self.secular_eigenvalues(b)[branch];
        let omega = secant(a, b, fa, fb);
        roots.push(Root {
            omega,
            host_level,
            host_lo,
            host_hi,
            residual: self.min_abs_eigenvalue(omega),
            status: RootStatus::Regular,
        });
    }

    fn min_abs_eigenvalue(&self, omega: f64) -> f64 {
        self.secular_eigenvalues(omega)
            .iter()
            .fold(f64::INFINITY, |m, x| m.min(x.abs()))
    }

    /// Expansion coefficients of the perturbed eigenfunction at a root.
    pub fn eigenfunction_expansion(&self, omega: f64) -> Result<EigenfunctionExpansion> {
        self.kernel.check_omega(omega)?;
        let d = self.secular_matrix(omega)?;
        let n = d.nrows();
        let weights: Vec<f64> = if n == 1 {
            vec![1.0]
        } else {
            let eig = d.symmetric_eigen();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[i].abs().total_cmp(&eig.eigenvalues[j].abs()));
            let scale = eig.eigenvalues.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            if eig.eigenvalues[order[1]].abs() <= 1e-9 * scale {
                return Err(Error::DegenerateNullSpace(omega));
            }
            eig.eigenvectors.column(order[0]).iter().copied().collect()
        };

        let phi = self.kernel.phi();
        let mut coefficients: Vec<f64> = self
            .kernel
            .basis()
            .energies()
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let overlap: f64 = phi.row(i).iter().zip(&weights).map(|(p, a)| p * a).sum();
                overlap / (omega - e)
            })
            .collect();
        let norm = coefficients.iter().map(|c| c * c).sum::<f64>().sqrt();
        for c in &mut coefficients {
            *c /= norm;
        }
        Ok(EigenfunctionExpansion {
            omega,
            weights,
            coefficients,
            norm,
        })
    }

    /// Relative non-normality `‖T T† − T† T‖ / ‖T‖²` of the transition
    /// matrix `T(iΛ) = (A − G(iΛ))⁻¹`.
    pub fn normality_diagnostic(&self) -> Result<f64> {
        let g = self.kernel.green_matrix_imaginary(true);
        let t = transition_matrix(self.kernel.scatterers().inverse_strengths(), &g)?;
        Ok(relative_non_normality(&t))
    }
}

/// `(diag(a) − G)⁻¹`.
pub fn transition_matrix(a: &[f64], g: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let mut m = -g.clone();
    for (k, v) in a.iter().enumerate() {
        m[(k, k)] += Complex64::new(*v, 0.0);
    }
    m.try_inverse().ok_or(Error::SingularTransition)
}

/// Frobenius-norm commutator `‖T T† − T† T‖ / ‖T‖²`.
pub fn relative_non_normality(t: &DMatrix<Complex64>) -> f64 {
    let th = t.adjoint();
    let commutator = t * &th - &th * t;
    let norm = t.norm();
    commutator.norm() / (norm * norm)
}

fn secant(a: f64, b: f64, fa: f64, fb: f64) -> f64 {
    let x = a - fa * (b - a) / (fb - fa);
    if x.is_finite() && x >= a && x <= b {
        x
    } else {
        0.5 * (a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{enumerate_basis, BilliardConfig};

    fn problem(n: usize, v: f64, window: Window, cutoff: f64) -> SecularProblem {
        let config = BilliardConfig::reference();
        let basis = Arc::new(enumerate_basis(config, cutoff).unwrap());
        let s = ScattererSet::reference(&config, n, v).unwrap();
        SecularProblem::new(basis, s, window, SolverSettings::default()).unwrap()
    }

    #[test]
    fn default_cutoff_rule() {
        assert_eq!(default_energy_cutoff(1138.9682), 9200.0);
        assert_eq!(default_energy_cutoff(100.0), 800.0);
    }

    #[test]
    fn window_validation() {
        let config = BilliardConfig::reference();
        let basis = Arc::new(enumerate_basis(config, 400.0).unwrap());
        let s = ScattererSet::reference(&config, 1, 5.0).unwrap();
        let st = SolverSettings::default();
        for w in [
            Window::Energy { lo: 10.0, hi: 300.0 },
            Window::Energy { lo: 10.0, hi: 5.0 },
            Window::Index { lo: 0, hi: 5 },
            Window::Index { lo: 10, hi: 300 },
        ] {
            assert!(matches!(
                SecularProblem::new(basis.clone(), s.clone(), w, st),
                Err(Error::InvalidWindow(_))
            ));
        }
    }

    #[test]
    fn single_roots_interlace() {
        let p = problem(1, 5.0, Window::Energy { lo: 20.0, hi: 120.0 }, 1000.0);
        let spec = p.solve_single().unwrap();
        for r in &spec.roots {
            assert!(r.host_lo < r.omega && r.omega < r.host_hi);
            assert_eq!(r.status, RootStatus::Regular);
        }
        for (_, c) in spec.interval_counts() {
            assert_eq!(c, 1);
        }
    }

    #[test]
    fn vanishing_coupling_pins_roots_to_lower_levels() {
        let p = problem(1, 1e6, Window::Energy { lo: 50.0, hi: 150.0 }, 1200.0);
        let spacing = p.kernel().basis().mean_spacing();
        for r in p.solve_single().unwrap().roots {
            let d = r.omega - r.host_lo;
            assert!(d > 0.0 && d < 1e-3 * spacing, "offset {d}");
        }
    }

    #[test]
    fn multi_matches_single_for_one_scatterer() {
        let p = problem(1, 5.0, Window::Energy { lo: 30.0, hi: 90.0 }, 800.0);
        let a = p.solve_single().unwrap();
        let b = p.solve_multi().unwrap();
        assert_eq!(a.len(), b.len());
        let tol = p.settings().tol_omega * p.kernel().basis().mean_spacing();
        for (x, y) in a.roots.iter().zip(&b.roots) {
            assert!((x.omega - y.omega).abs() <= tol, "{} vs {}", x.omega, y.omega);
        }
    }

    #[test]
    fn index_window_counts_bound_states() {
        let p = problem(3, 5.0, Window::Index { lo: 1, hi: 20 }, 400.0);
        let spec = p.solve_multi().unwrap();
        assert_eq!(spec.len(), 20);
        assert_eq!(spec.convention, IndexConvention::Global);
        let bound = spec.roots.iter().filter(|r| r.host_level.is_none()).count();
        assert_eq!(bound, 3);
        assert!(spec.roots[0].omega < 0.0);
    }

    #[test]
    fn eigenfunction_normalization_and_single_formula() {
        let p = problem(1, 5.0, Window::Energy { lo: 60.0, hi: 70.0 }, 800.0);
        let root = p.solve_single().unwrap().roots[0].omega;
        let ef = p.eigenfunction_expansion(root).unwrap();
        let total: f64 = ef.coefficients.iter().map(|c| c * c).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for (i, &e) in p.kernel().basis().energies().iter().enumerate().step_by(37) {
            let direct = p.kernel().phi().get(i, 0) / (root - e) / ef.norm;
            assert!((ef.coefficients[i] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn near_pole_root_is_dominated_by_that_level() {
        let p = problem(1, 1e6, Window::Energy { lo: 80.0, hi: 82.0 }, 800.0);
        let root = p.solve_single().unwrap().roots[0];
        let m = root.host_level.unwrap();
        let ef = p.eigenfunction_expansion(root.omega).unwrap();
        assert!(ef.coefficients[m].powi(2) > 1.0 - 1e-6);
    }

    #[test]
    fn normality_is_exact_for_one_scatterer() {
        let p = problem(1, 5.0, Window::Energy { lo: 10.0, hi: 20.0 }, 400.0);
        assert_eq!(p.normality_diagnostic().unwrap(), 0.0);
    }

    #[test]
    fn asymmetric_green_matrix_is_far_from_normal() {
        let mut g = DMatrix::from_element(2, 2, Complex64::new(0.0, 0.0));
        g[(0, 0)] = Complex64::new(0.0, -1.0);
        g[(1, 1)] = Complex64::new(0.0, -1.0);
        g[(0, 1)] = Complex64::new(3.0, 0.0);
        let t = transition_matrix(&[0.5, -0.5], &g).unwrap();
        assert!(relative_non_normality(&t) > 0.1);
    }

    #[test]
    fn singular_transition_is_reported() {
        let g = DMatrix::from_element(1, 1, Complex64::new(2.0, 0.0));
        assert_eq!(transition_matrix(&[2.0], &g), Err(Error::SingularTransition));
    }
}
