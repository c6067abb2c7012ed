//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the library's kernel or solver; levels, mode
//! values and Green's-function sums are rebuilt from scratch.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;

#[derive(Clone, Copy, Debug)]
pub struct Geometry {
    pub lx: f64,
    pub ly: f64,
    pub mass: f64,
    pub lambda: f64,
}

impl Geometry {
    pub fn reference() -> Self {
        Self {
            lx: PI / 3.0,
            ly: 3.0 / PI,
            mass: 2.0 * PI,
            lambda: 1.0,
        }
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn energy(&self, nx: u32, ny: u32) -> f64 {
        let kx = nx as f64 * PI / self.lx;
        let ky = ny as f64 * PI / self.ly;
        (kx * kx + ky * ky) / (2.0 * self.mass)
    }

    pub fn density(&self) -> f64 {
        self.mass * self.area() / (2.0 * PI)
    }
}

/// Brute-force level list: every `(nx, ny)` with `E < cutoff`, ascending.
pub fn lattice_levels(g: &Geometry, cutoff: f64) -> Vec<(u32, u32, f64)> {
    let mut out = Vec::new();
    let mut nx = 1;
    while g.energy(nx, 1) < cutoff {
        let mut ny = 1;
        while g.energy(nx, ny) < cutoff {
            out.push((nx, ny, g.energy(nx, ny)));
            ny += 1;
        }
        nx += 1;
    }
    out.sort_by(|a, b| a.2.total_cmp(&b.2));
    out
}

pub fn mode(g: &Geometry, nx: u32, ny: u32, x: f64, y: f64) -> f64 {
    (4.0 / g.area()).sqrt() * (nx as f64 * PI * x / g.lx).sin() * (ny as f64 * PI * y / g.ly).sin()
}

/// Truncated Green's-function matrix built directly from the mode sum.
pub struct BruteGreen {
    pub geometry: Geometry,
    pub cutoff: f64,
    pub energies: Vec<f64>,
    /// `phi[n][k]` = mode `n` at scatterer `k`.
    pub phi: Vec<Vec<f64>>,
}

impl BruteGreen {
    pub fn new(geometry: Geometry, cutoff: f64, points: &[(f64, f64)]) -> Self {
        let levels = lattice_levels(&geometry, cutoff);
        let energies = levels.iter().map(|l| l.2).collect();
        let phi = levels
            .iter()
            .map(|&(nx, ny, _)| points.iter().map(|&(x, y)| mode(&geometry, nx, ny, x, y)).collect())
            .collect();
        Self {
            geometry,
            cutoff,
            energies,
            phi,
        }
    }

    pub fn points(&self) -> usize {
        self.phi.first().map_or(0, Vec::len)
    }

    pub fn tail(&self, omega: f64) -> f64 {
        let g = &self.geometry;
        let c = self.cutoff;
        g.density() / g.area() * ((c - omega) / (c * c + g.lambda * g.lambda).sqrt()).ln()
    }

    pub fn diag(&self, k: usize, omega: f64, with_tail: bool) -> f64 {
        let lam2 = self.geometry.lambda * self.geometry.lambda;
        let mut s = 0.0;
        for (e, p) in self.energies.iter().zip(&self.phi) {
            s += p[k] * p[k] * (1.0 / (omega - e) + e / (e * e + lam2));
        }
        if with_tail {
            s + self.tail(omega)
        } else {
            s
        }
    }

    pub fn offdiag(&self, k: usize, l: usize, omega: f64) -> f64 {
        self.energies
            .iter()
            .zip(&self.phi)
            .map(|(e, p)| p[k] * p[l] / (omega - e))
            .sum()
    }

    pub fn matrix(&self, omega: f64) -> DMatrix<f64> {
        let n = self.points();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag(i, omega, true)
            } else {
                self.offdiag(i, j, omega)
            }
        })
    }

    /// `det(diag(v⁻¹) − G(ω))`.
    pub fn secular_det(&self, inverse: &[f64], omega: f64) -> f64 {
        let mut d = -self.matrix(omega);
        for (k, v) in inverse.iter().enumerate() {
            d[(k, k)] += v;
        }
        d.determinant()
    }
}

/// Cosine-clustered grid strictly inside `(a, b)`, dense near both ends.
pub fn clustered_grid(a: f64, b: f64, points: usize) -> Vec<f64> {
    (1..=points)
        .map(|j| {
            let t = j as f64 / (points + 1) as f64;
            a + (b - a) * 0.5 * (1.0 - (PI * t).cos())
        })
        .collect()
}

/// Roots of `f` on the sorted `grid`: every sign change is bisected down to
/// `tol`. Exact zeros on the grid are reported as is.
pub fn scan_roots<F: Fn(f64) -> f64>(f: F, grid: &[f64], tol: f64) -> Vec<f64> {
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut out = Vec::new();
    for i in 0..grid.len() - 1 {
        let (fa, fb) = (values[i], values[i + 1]);
        if fa == 0.0 {
            out.push(grid[i]);
            continue;
        }
        if fa.signum() == fb.signum() || fb == 0.0 {
            continue;
        }
        let (mut a, mut b) = (grid[i], grid[i + 1]);
        let sa = fa.signum();
        while b - a > tol {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if f(m).signum() == sa {
                a = m;
            } else {
                b = m;
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

/// `∫` of a piecewise-smooth function with Gauss–Legendre panels (8 nodes)
/// between consecutive `breaks`.
pub fn gauss_legendre(breaks: &[f64], panels_per_piece: usize, f: impl Fn(f64) -> f64) -> f64 {
    const X: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const W: [f64; 4] = [
        0.362_683_783_378_362,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    let mut total = 0.0;
    for piece in breaks.windows(2) {
        let h = (piece[1] - piece[0]) / panels_per_piece as f64;
        for p in 0..panels_per_piece {
            let a = piece[0] + h * p as f64;
            let (c, r) = (a + 0.5 * h, 0.5 * h);
            for (x, w) in X.iter().zip(W) {
                total += w * r * (f(c - r * x) + f(c + r * x));
            }
        }
    }
    total
}

/// Least-squares staircase deviation on `[c − L/2, c + L/2]` by quadrature:
/// counts levels pointwise, fits `A + Bt` from the 2×2 normal equations and
/// integrates the squared residual directly.
pub fn delta3_quadrature(levels: &[f64], centre: f64, l: f64) -> f64 {
    let h = 0.5 * l;
    let inside: Vec<f64> = levels
        .iter()
        .map(|&x| x - centre)
        .filter(|&t| t > -h && t < h)
        .collect();
    let mut breaks = vec![-h];
    breaks.extend(inside.iter().copied());
    breaks.push(h);
    let count = |t: f64| inside.iter().filter(|&&e| e <= t).count() as f64;
    let panels = 4;
    let m0 = gauss_legendre(&breaks, panels, |_| 1.0);
    let m1 = gauss_legendre(&breaks, panels, |t| t);
    let m2 = gauss_legendre(&breaks, panels, |t| t * t);
    let n0 = gauss_legendre(&breaks, panels, count);
    let n1 = gauss_legendre(&breaks, panels, |t| t * count(t));
    let det = m0 * m2 - m1 * m1;
    let ca = (n0 * m2 - n1 * m1) / det;
    let cb = (m0 * n1 - m1 * n0) / det;
    gauss_legendre(&breaks, panels, |t| (count(t) - ca - cb * t).powi(2)) / l
}

/// Seeded Poisson spectrum with unit mean spacing.
pub fn poisson_levels(seed: u64, count: usize) -> Vec<f64> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Exp1};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0.0;
    (0..count)
        .map(|_| {
            let s: f64 = Exp1.sample(&mut rng);
            x += s;
            x
        })
        .collect()
}
