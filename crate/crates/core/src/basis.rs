//! Unperturbed eigenbasis of the rectangular Dirichlet billiard.
//!
//! Levels are `E(nx, ny) = ((nx π / lx)² + (ny π / ly)²) / 2M` with
//! eigenfunctions `√(4/S) sin(nx π x / lx) sin(ny π y / ly)`. The table is
//! cut by energy and kept in strictly ascending order; near-degenerate pairs
//! are rejected rather than silently ordered.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative gap below which two levels count as degenerate.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Geometry and mass scales of the unperturbed problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BilliardConfig {
    pub lx: f64,
    pub ly: f64,
    pub mass: f64,
    pub lambda: f64,
}

impl BilliardConfig {
    pub fn new(lx: f64, ly: f64, mass: f64, lambda: f64) -> Result<Self> {
        let config = Self { lx, ly, mass, lambda };
        config.validate()?;
        Ok(config)
    }

    /// Rectangle with sides (π/3, 3/π), M = 2π, Λ = 1: unit area and unit
    /// mean level density.
    pub fn reference() -> Self {
        Self {
            lx: PI / 3.0,
            ly: 3.0 / PI,
            mass: 2.0 * PI,
            lambda: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("lx", self.lx),
            ("ly", self.ly),
            ("mass", self.mass),
            ("lambda", self.lambda),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and positive, got {value}"
                )));
            }
        }
        if !self.area().is_finite() {
            return Err(Error::InvalidConfig("area overflows".into()));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn level_energy(&self, nx: u32, ny: u32) -> f64 {
        let kx = f64::from(nx) * PI / self.lx;
        let ky = f64::from(ny) * PI / self.ly;
        (kx * kx + ky * ky) / (2.0 * self.mass)
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..=self.lx).contains(&p.x) && (0.0..=self.ly).contains(&p.y)
    }

    pub fn is_interior(&self, p: Point) -> bool {
        p.x > 0.0 && p.x < self.lx && p.y > 0.0 && p.y < self.ly
    }
}

/// Mean level density `MS / 2π`, independent of energy.
pub fn mean_level_density(config: &BilliardConfig) -> f64 {
    config.mass * config.area() / (2.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisLevel {
    pub nx: u32,
    pub ny: u32,
    pub energy: f64,
}

/// Eigenfunction amplitude of `level` at `point`.
pub fn eigenfunction_value(config: &BilliardConfig, level: &BasisLevel, point: Point) -> Result<f64> {
    if !config.contains(point) {
        return Err(Error::OutsideDomain { x: point.x, y: point.y });
    }
    Ok(mode_amplitude(config, level.nx, level.ny, point))
}

#[inline]
fn mode_amplitude(config: &BilliardConfig, nx: u32, ny: u32, p: Point) -> f64 {
    let norm = (4.0 / config.area()).sqrt();
    norm * (f64::from(nx) * PI * p.x / config.lx).sin() * (f64::from(ny) * PI * p.y / config.ly).sin()
}

/// Energy-ordered unperturbed levels below a cutoff.
#[derive(Debug, Clone)]
pub struct BasisTable {
    config: BilliardConfig,
    levels: Vec<BasisLevel>,
    energies: Vec<f64>,
    energy_cutoff: f64,
}

/// Enumerate every level with `E ≤ energy_cutoff`, ascending.
pub fn enumerate_basis(config: BilliardConfig, energy_cutoff: f64) -> Result<BasisTable> {
    config.validate()?;
    let ground = config.level_energy(1, 1);
    if !(energy_cutoff > ground) {
        return Err(Error::CutoffTooLow {
            cutoff: energy_cutoff,
            ground,
        });
    }

    let kmax = (2.0 * config.mass * energy_cutoff).sqrt() / PI;
    let nx_max = (config.lx * kmax).ceil() as u32;
    let ny_max = (config.ly * kmax).ceil() as u32;

    let mut levels = Vec::new();
    for nx in 1..=nx_max {
        for ny in 1..=ny_max {
            let energy = config.level_energy(nx, ny);
            if energy <= energy_cutoff {
                levels.push(BasisLevel { nx, ny, energy });
            }
        }
    }
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy));

    for pair in levels.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b.energy - a.energy < TIE_TOLERANCE * a.energy.max(b.energy) {
            return Err(Error::DegenerateLevels {
                a: (a.nx, a.ny),
                b: (b.nx, b.ny),
                energy_a: a.energy,
                energy_b: b.energy,
            });
        }
    }

    let energies = levels.iter().map(|l| l.energy).collect();
    Ok(BasisTable {
        config,
        levels,
        energies,
        energy_cutoff,
    })
}

impl BasisTable {
    pub fn config(&self) -> &BilliardConfig {
        &self.config
    }

    pub fn levels(&self) -> &[BasisLevel] {
        &self.levels
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn energy_cutoff(&self) -> f64 {
        self.energy_cutoff
    }

    pub fn mean_level_density(&self) -> f64 {
        mean_level_density(&self.config)
    }

    pub fn mean_spacing(&self) -> f64 {
        1.0 / self.mean_level_density()
    }

    /// Number of levels with `E < x`.
    pub fn count_below(&self, x: f64) -> usize {
        self.energies.partition_point(|&e| e < x)
    }

    /// Index and distance of the level closest to `omega`.
    pub fn nearest_level(&self, omega: f64) -> (usize, f64) {
        let i = self.count_below(omega);
        let mut best = (usize::MAX, f64::INFINITY);
        for j in [i.wrapping_sub(1), i] {
            if let Some(&e) = self.energies.get(j) {
                let d = (omega - e).abs();
                if d < best.1 {
                    best = (j, d);
                }
            }
        }
        best
    }

    /// Eigenfunction values at `points`, level-major.
    pub fn phi_cache(&self, points: &[Point]) -> Result<PhiCache> {
        if let Some(p) = points.iter().find(|p| !self.config.contains(**p)) {
            return Err(Error::OutsideDomain { x: p.x, y: p.y });
        }
        let mut values = Vec::with_capacity(self.levels.len() * points.len());
        for level in &self.levels {
            for &p in points {
                values.push(mode_amplitude(&self.config, level.nx, level.ny, p));
            }
        }
        Ok(PhiCache {
            points: points.len(),
            values,
        })
    }
}

/// `φ_n(x_k)` for every level `n` and point `k`.
#[derive(Debug, Clone)]
pub struct PhiCache {
    points: usize,
    values: Vec<f64>,
}

impl PhiCache {
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn rows(&self) -> usize {
        self.values.len().checked_div(self.points).unwrap_or(0)
    }

    #[inline]
    pub fn row(&self, level: usize) -> &[f64] {
        &self.values[level * self.points..(level + 1) * self.points]
    }

    #[inline]
    pub fn get(&self, level: usize, point: usize) -> f64 {
        self.values[level * self.points + point]
    }
}
