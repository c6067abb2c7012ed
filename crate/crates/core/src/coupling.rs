//! Strong-coupling band of a point scatterer.
//!
//! A scatterer with inverse strength `v⁻¹` mixes eigenstates appreciably
//! where `|v⁻¹ − (M/2π) ln(ω/Λ)| ≤ πM/4`. The band centre drifts
//! logarithmically while its width stays fixed, so every scatterer decouples
//! at high enough energy.

use std::f64::consts::PI;

use serde::Serialize;

use crate::basis::BilliardConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingBand {
    pub mass: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingVerdict {
    pub strong: bool,
    /// `Δ/2 − |v⁻¹ − g(ω)|`; positive inside the band.
    pub margin: f64,
}

impl CouplingBand {
    pub fn new(mass: f64, lambda: f64) -> Self {
        Self { mass, lambda }
    }

    pub fn from_config(config: &BilliardConfig) -> Self {
        Self::new(config.mass, config.lambda)
    }

    /// Band width `Δ = πM/2`.
    pub fn width(&self) -> f64 {
        PI * self.mass / 2.0
    }

    pub fn half_width(&self) -> f64 {
        self.width() / 2.0
    }

    /// Band centre `g(ω) = (M/2π) ln(ω/Λ)`.
    pub fn g_of_omega(&self, omega: f64) -> Result<f64> {
        if !(omega > 0.0) {
            return Err(Error::NonPositiveEnergy(omega));
        }
        Ok(self.mass / (2.0 * PI) * (omega / self.lambda).ln())
    }

    pub fn is_strong(&self, inverse_strength: f64, omega: f64) -> Result<CouplingVerdict> {
        let margin = self.half_width() - (inverse_strength - self.g_of_omega(omega)?).abs();
        Ok(CouplingVerdict {
            strong: margin >= 0.0,
            margin,
        })
    }

    /// Energy interval on which `is_strong` holds.
    pub fn crossover_energies(&self, inverse_strength: f64) -> (f64, f64) {
        let scale = 2.0 * PI / self.mass;
        let lo = self.lambda * (scale * (inverse_strength - self.half_width())).exp();
        let hi = self.lambda * (scale * (inverse_strength + self.half_width())).exp();
        (lo, hi)
    }

    /// Energy at which `g(ω) = v⁻¹`.
    pub fn centre(&self, inverse_strength: f64) -> f64 {
        self.lambda * (2.0 * PI * inverse_strength / self.mass).exp()
    }

    /// True when the band covers all of `[lo, hi]`. `g` is monotone, so the
    /// endpoints decide.
    pub fn is_strong_on(&self, inverse_strength: f64, lo: f64, hi: f64) -> Result<bool> {
        Ok(self.is_strong(inverse_strength, lo)?.strong && self.is_strong(inverse_strength, hi)?.strong)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> CouplingBand {
        CouplingBand::from_config(&BilliardConfig::reference())
    }

    #[test]
    fn centre_curve() {
        let b = reference();
        assert_eq!(b.g_of_omega(1.0).unwrap(), 0.0);
        assert!((b.g_of_omega(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        assert!((b.g_of_omega(110.3579).unwrap() - 4.7037).abs() < 5e-5);
        assert!(matches!(b.g_of_omega(0.0), Err(Error::NonPositiveEnergy(_))));
        assert!(b.g_of_omega(-3.0).is_err());
    }

    #[test]
    fn reference_threshold() {
        let b = reference();
        assert!((b.half_width() - PI * PI / 2.0).abs() < 1e-15);
        assert!((b.half_width() - 4.9348).abs() < 5e-5);
    }

    #[test]
    fn verdicts() {
        let b = reference();
        let weak = b.is_strong(20.0, 110.36).unwrap();
        assert!(!weak.strong);
        assert!((weak.margin - (PI * PI / 2.0 - (20.0 - 110.36f64.ln()))).abs() < 1e-12);
        assert!(b.is_strong_on(5.0, 110.36, 1138.97).unwrap());
    }

    #[test]
    fn crossover_band() {
        let b = reference();
        let (lo, hi) = b.crossover_energies(5.0);
        assert!((lo - (5.0 - PI * PI / 2.0).exp()).abs() < 1e-12);
        assert!((lo - 1.066).abs() < 2e-3);
        assert!((hi / 2.07e4 - 1.0).abs() < 5e-3);
        assert!((hi.ln() - lo.ln() - PI * PI).abs() < 1e-12);
        let c = b.centre(5.0);
        assert!(lo < c && c < hi);
        assert!(b.is_strong(5.0, lo * (1.0 + 1e-12)).unwrap().strong);
        assert!(!b.is_strong(5.0, hi * 1.001).unwrap().strong);
    }
}
