//! Experiment configuration: JSON schema, validation and digest.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spectra_core::{
    default_energy_cutoff, window_top, BilliardConfig, KernelSettings, Point, ScattererSet, SolverSettings, Window,
};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Label only; excluded from the digest.
    #[serde(default)]
    pub name: String,
    pub billiard: BilliardConfig,
    pub scatterers: ScattererSpec,
    pub window: Window,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub stats: StatsSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScattererSpec {
    pub positions: Vec<[f64; 2]>,
    pub inverse_strengths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    /// Defaults to the smallest multiple of 100 at least eight times the
    /// window top.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_cutoff: Option<f64>,
    pub safety_fraction: f64,
    pub tol_omega: f64,
    pub pole_exclusion: f64,
    pub tail_correction: bool,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let s = SolverSettings::default();
        Self {
            energy_cutoff: None,
            safety_fraction: s.kernel.safety_fraction,
            tol_omega: s.tol_omega,
            pole_exclusion: s.kernel.pole_exclusion,
            tail_correction: s.kernel.tail_correction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsSpec {
    pub bins: usize,
    pub s_max: f64,
    pub l_grid: Vec<f64>,
    /// Window step for the rigidity average, as a fraction of `L`.
    pub window_step: f64,
}

impl Default for StatsSpec {
    fn default() -> Self {
        Self {
            bins: 30,
            s_max: 3.0,
            l_grid: (1..=20).map(f64::from).collect(),
            window_step: 0.25,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    /// Applied uniformly to every scatterer of a cell.
    pub inverse_strengths: Vec<f64>,
    /// Each cell keeps the first `n` configured positions.
    pub scatterer_counts: Vec<usize>,
}

fn field(name: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{name}: {e}"))
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let config = parse_config(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    Ok(config)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

impl ExperimentConfig {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.billiard.validate().map_err(|e| field("billiard", e))?;
        let sc = &self.scatterers;
        if sc.positions.len() != sc.inverse_strengths.len() {
            return Err(field(
                "scatterers.inverse_strengths",
                format!(
                    "{} values for {} positions",
                    sc.inverse_strengths.len(),
                    sc.positions.len()
                ),
            ));
        }
        if !sc.positions.is_empty() {
            self.scatterer_set(sc.positions.len(), None)?;
        }
        match self.window {
            Window::Energy { lo, hi } if !(lo.is_finite() && hi.is_finite() && lo < hi) => {
                return Err(field("window.energy", format!("need lo < hi, got [{lo}, {hi}]")));
            }
            Window::Index { lo, hi } if lo == 0 || lo > hi => {
                return Err(field("window.index", format!("need 1 ≤ lo ≤ hi, got {lo}..={hi}")));
            }
            _ => {}
        }

        let s = &self.solver;
        if let Some(c) = s.energy_cutoff {
            if !(c.is_finite() && c > 0.0) {
                return Err(field("solver.energy_cutoff", format!("{c} must be positive")));
            }
        }
        if !(s.safety_fraction > 0.0 && s.safety_fraction <= 1.0) {
            return Err(field(
                "solver.safety_fraction",
                format!("{} is not in (0, 1]", s.safety_fraction),
            ));
        }
        if !(s.tol_omega > 0.0 && s.tol_omega.is_finite()) {
            return Err(field("solver.tol_omega", format!("{} must be positive", s.tol_omega)));
        }
        if !(s.pole_exclusion > 0.0 && s.pole_exclusion < 0.5) {
            return Err(field(
                "solver.pole_exclusion",
                format!("{} is not in (0, 0.5)", s.pole_exclusion),
            ));
        }
        if let Some(c) = s.energy_cutoff {
            let top = window_top(&self.billiard, &self.window).map_err(|e| field("window", e))?;
            if top > s.safety_fraction * c {
                return Err(field(
                    "solver.energy_cutoff",
                    format!("window reaches {top}, above {} of the cutoff {c}", s.safety_fraction),
                ));
            }
        }

        let st = &self.stats;
        if st.bins == 0 {
            return Err(field("stats.bins", "must be at least 1"));
        }
        if !(st.s_max > 0.0 && st.s_max.is_finite()) {
            return Err(field("stats.s_max", format!("{} must be positive", st.s_max)));
        }
        if st.l_grid.is_empty() || st.l_grid.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(field("stats.l_grid", "needs at least one positive length"));
        }
        if st.l_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(field("stats.l_grid", "must be strictly ascending"));
        }
        if !(st.window_step > 0.0 && st.window_step <= 1.0) {
            return Err(field(
                "stats.window_step",
                format!("{} is not in (0, 1]", st.window_step),
            ));
        }

        if let Some(v) = self.sweep.inverse_strengths.iter().find(|v| !v.is_finite()) {
            return Err(field("sweep.inverse_strengths", format!("{v} is not finite")));
        }
        if let Some(n) = self.sweep.scatterer_counts.iter().find(|&&n| n > sc.positions.len()) {
            return Err(field(
                "sweep.scatterer_counts",
                format!("{n} exceeds the {} configured positions", sc.positions.len()),
            ));
        }
        Ok(())
    }

    /// Scatterers for a cell: the first `n` positions, with either their
    /// configured strengths or a uniform override.
    pub fn scatterer_set(&self, n: usize, inverse_strength: Option<f64>) -> Result<ScattererSet> {
        let sc = &self.scatterers;
        let positions = sc.positions[..n].iter().map(|p| Point::new(p[0], p[1])).collect();
        let strengths = match inverse_strength {
            Some(v) => vec![v; n],
            None => sc.inverse_strengths[..n].to_vec(),
        };
        ScattererSet::new(&self.billiard, positions, strengths).map_err(|e| field("scatterers", e))
    }

    pub fn solver_settings(&self) -> SolverSettings {
        let s = &self.solver;
        SolverSettings {
            kernel: KernelSettings {
                safety_fraction: s.safety_fraction,
                pole_exclusion: s.pole_exclusion,
                tail_correction: s.tail_correction,
            },
            tol_omega: s.tol_omega,
        }
    }

    pub fn energy_cutoff(&self) -> Result<f64> {
        match self.solver.energy_cutoff {
            Some(c) => Ok(c),
            None => {
                let top = window_top(&self.billiard, &self.window).map_err(|e| field("window", e))?;
                Ok(default_energy_cutoff(top))
            }
        }
    }

    /// SHA-256 over the canonical JSON form with the label cleared.
    pub fn digest(&self) -> String {
        let mut physics = self.clone();
        physics.name.clear();
        let bytes = serde_json::to_vec(&physics).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}
