//! Nearest-neighbour spacing statistics and spectral rigidity.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::secular::PerturbedSpectrum;

/// Offset of the logarithmic GOE rigidity curve.
pub const GOE_DELTA3_OFFSET: f64 = 0.0687;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    Poisson,
    Goe,
}

impl fmt::Display for Reference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reference::Poisson => "poisson",
            Reference::Goe => "goe",
        })
    }
}

/// Spectrum rescaled to unit mean spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfoldedSpectrum {
    values: Vec<f64>,
    energies: Vec<f64>,
    first_index: usize,
}

/// Constant-density unfolding: `ρ ω`, rescaled so the mean spacing over
/// the sample is exactly one.
pub fn unfold(omegas: &[f64], density: f64) -> Result<UnfoldedSpectrum> {
    if omegas.len() < 2 {
        return Err(Error::Statistics(format!(
            "need at least 2 levels, got {}",
            omegas.len()
        )));
    }
    if !(density > 0.0 && density.is_finite()) {
        return Err(Error::Statistics(format!("density {density} must be positive")));
    }
    if let Some(w) = omegas.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::Statistics(format!(
            "levels not strictly ascending near {} / {}",
            w[0], w[1]
        )));
    }
    let scaled: Vec<f64> = omegas.iter().map(|w| density * w).collect();
    let mean = (scaled[scaled.len() - 1] - scaled[0]) / (scaled.len() - 1) as f64;
    Ok(UnfoldedSpectrum {
        values: scaled.iter().map(|x| x / mean).collect(),
        energies: omegas.to_vec(),
        first_index: 1,
    })
}

impl UnfoldedSpectrum {
    pub fn from_spectrum(spectrum: &PerturbedSpectrum, density: f64) -> Result<Self> {
        let mut u = unfold(&spectrum.omegas(), density)?;
        u.first_index = spectrum.first_index;
        Ok(u)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Original energies, aligned with `values`.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn first_index(&self) -> usize {
        self.first_index
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacings(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn mean_spacing(&self) -> f64 {
        let s = self.spacings();
        s.iter().sum::<f64>() / s.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpacingHistogram {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    /// All spacings, overflow included.
    pub sample_count: usize,
    /// Spacings above the last edge.
    pub overflow: usize,
    /// Sorted raw spacings, kept for exact CDF comparisons.
    pub spacings: Vec<f64>,
}

impl SpacingHistogram {
    pub fn bin_centers(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn overflow_fraction(&self) -> f64 {
        self.overflow as f64 / self.sample_count as f64
    }

    /// `Σ density · width`; equals `1 − overflow_fraction`.
    pub fn mass(&self) -> f64 {
        self.bin_edges
            .windows(2)
            .zip(&self.densities)
            .map(|(w, d)| d * (w[1] - w[0]))
            .sum()
    }
}

/// Density-normalized histogram of consecutive spacings on `[0, s_max]`.
pub fn spacing_histogram(u: &UnfoldedSpectrum, bins: usize, s_max: f64) -> Result<SpacingHistogram> {
    if bins < 1 || !(s_max > 0.0) {
        return Err(Error::Statistics(format!(
            "invalid binning: {bins} bins on [0, {s_max}]"
        )));
    }
    if u.len() < 2 {
        return Err(Error::Statistics("need at least 2 levels".into()));
    }
    let mut spacings = u.spacings();
    spacings.sort_by(f64::total_cmp);
    let width = s_max / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut overflow = 0;
    for &s in &spacings {
        if s > s_max {
            overflow += 1;
            continue;
        }
        let idx = ((s * bins as f64 / s_max).floor() as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let total = spacings.len();
    Ok(SpacingHistogram {
        bin_edges: (0..=bins).map(|i| i as f64 * width).collect(),
        densities: counts.iter().map(|&c| c as f64 / (total as f64 * width)).collect(),
        sample_count: total,
        overflow,
        spacings,
    })
}

/// Limiting spacing densities: `exp(−s)` and `(πs/2) exp(−πs²/4)`.
pub fn reference_pofs(kind: Reference, s: f64) -> f64 {
    match kind {
        Reference::Poisson => (-s).exp(),
        Reference::Goe => PI * s / 2.0 * (-PI * s * s / 4.0).exp(),
    }
}

pub fn reference_cdf(kind: Reference, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    match kind {
        Reference::Poisson => -(-s).exp_m1(),
        Reference::Goe => -(-PI * s * s / 4.0).exp_m1(),
    }
}

/// Kolmogorov–Smirnov distance between the empirical spacing CDF and the
/// reference CDF.
pub fn distribution_distance(h: &SpacingHistogram, kind: Reference) -> f64 {
    let n = h.spacings.len() as f64;
    h.spacings
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let f = reference_cdf(kind, s);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// `L/15` and `(ln L − 0.0687)/π²`.
pub fn reference_delta3(kind: Reference, l: f64) -> f64 {
    match kind {
        Reference::Poisson => l / 15.0,
        Reference::Goe => (l.ln() - GOE_DELTA3_OFFSET) / (PI * PI),
    }
}

/// Least-squares deviation of the staircase from its best line over
/// `[centre − L/2, centre + L/2]`, divided by `L`. `levels` must be the
/// sorted levels strictly inside the window.
///
/// With `t = E − centre` and `n(t)` the number of levels at or below `t`,
/// the fit line is orthogonal on the symmetric window, so the minimum is
/// `∫n²/L − (∫n/L)² − 12 (∫n t)² / L⁴`, each integral a finite sum over
/// the steps.
pub fn window_deviation(levels: &[f64], centre: f64, l: f64) -> f64 {
    let h = 0.5 * l;
    let (mut i0, mut i1, mut i2) = (0.0, 0.0, 0.0);
    for (i, &x) in levels.iter().enumerate() {
        let tau = x - centre;
        let rest = h - tau;
        i0 += rest;
        i1 += 0.5 * (h * h - tau * tau);
        i2 += (2 * i + 1) as f64 * rest;
    }
    let mean = i0 / l;
    (i2 / l - mean * mean - 12.0 * i1 * i1 / l.powi(4)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delta3 {
    pub value: f64,
    pub window_count: usize,
}

/// Spectral rigidity at window length `l`, averaged over windows whose
/// centres step by `window_step` across the unfolded span.
pub fn delta3(u: &UnfoldedSpectrum, l: f64, window_step: f64) -> Result<Delta3> {
    if !(l > 0.0 && window_step > 0.0) {
        return Err(Error::Statistics(format!(
            "invalid window length {l} or step {window_step}"
        )));
    }
    let v = u.values();
    let (first, last) = (v[0], v[v.len() - 1]);
    if last - first < l {
        return Err(Error::Statistics(format!(
            "unfolded span {} is shorter than L = {l}",
            last - first
        )));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    loop {
        let centre = first + 0.5 * l + count as f64 * window_step;
        if centre + 0.5 * l > last {
            break;
        }
        let a = v.partition_point(|&x| x <= centre - 0.5 * l);
        let b = v.partition_point(|&x| x < centre + 0.5 * l);
        sum += window_deviation(&v[a..b], centre, l);
        count += 1;
    }
    Ok(Delta3 {
        value: sum / count as f64,
        window_count: count,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigidityCurve {
    pub l_values: Vec<f64>,
    pub delta3: Vec<f64>,
    pub window_count: Vec<usize>,
}

/// `Δ₃` over a grid of window lengths. `step_fraction` sets the window
/// step as a fraction of each `L`.
pub fn rigidity_curve(u: &UnfoldedSpectrum, l_values: &[f64], step_fraction: f64) -> Result<RigidityCurve> {
    let mut curve = RigidityCurve {
        l_values: l_values.to_vec(),
        delta3: Vec::with_capacity(l_values.len()),
        window_count: Vec::with_capacity(l_values.len()),
    };
    for &l in l_values {
        let d = delta3(u, l, step_fraction * l)?;
        curve.delta3.push(d.value);
        curve.window_count.push(d.window_count);
    }
    Ok(curve)
}
