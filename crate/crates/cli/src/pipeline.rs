//! Single runs, statistics and sweeps.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use spectra_core::{
    distribution_distance, enumerate_basis, mean_level_density, reference_delta3, reference_pofs, rigidity_curve,
    spacing_histogram, unfold, BasisTable, CouplingBand, IndexConvention, Reference, RigidityCurve, RootStatus,
    SecularProblem, SpacingHistogram, Window,
};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::output::{fmt_f64, fmt_opt, write_json, Table};

pub const SPECTRUM_HEADER: [&str; 5] = ["index", "omega", "host_interval_lo", "host_interval_hi", "residual"];
pub const META_HEADER: [&str; 3] = ["index", "host_level", "status"];
pub const POFS_HEADER: [&str; 4] = ["bin_center", "density", "reference_poisson", "reference_goe"];
pub const DELTA3_HEADER: [&str; 5] = ["L", "value", "window_count", "reference_poisson", "reference_goe"];

/// One line of `spectrum.csv` plus its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub index: usize,
    pub omega: f64,
    pub host_lo: f64,
    pub host_hi: f64,
    pub residual: f64,
    /// 1-based unperturbed level at the bottom of the host interval.
    pub host_level: Option<usize>,
    pub status: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub basis_seconds: f64,
    pub solve_seconds: f64,
    pub stats_seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Counts {
    pub basis_levels: usize,
    pub roots: usize,
    pub pole_adjacent: usize,
    pub decoupled: usize,
    pub ambiguous: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config_digest: String,
    /// Digest of the solver inputs; absent in calibration mode.
    pub solver_digest: Option<String>,
    pub tool_version: String,
    pub name: String,
    pub scatterer_count: usize,
    pub index_convention: String,
    pub first_index: usize,
    pub energy_cutoff: f64,
    pub timings: Timings,
    pub counts: Counts,
}

pub struct SolvedCell {
    pub rows: Vec<SpectrumRow>,
    pub manifest: RunManifest,
}

fn convention_name(c: IndexConvention) -> &'static str {
    match c {
        IndexConvention::Global => "global",
        IndexConvention::WindowLocal => "window_local",
    }
}

pub fn build_basis(config: &ExperimentConfig) -> Result<(Arc<BasisTable>, f64)> {
    let t = Instant::now();
    let cutoff = config.energy_cutoff()?;
    let basis = enumerate_basis(config.billiard, cutoff)?;
    Ok((Arc::new(basis), t.elapsed().as_secs_f64()))
}

/// Solves one cell. `n = 0` reports the unperturbed levels of the window.
pub fn solve_cell(
    config: &ExperimentConfig,
    basis: &Arc<BasisTable>,
    n: usize,
    inverse_strength: Option<f64>,
) -> Result<SolvedCell> {
    let t = Instant::now();
    let (rows, convention, first_index, solver_digest) = if n == 0 {
        calibration_rows(config, basis)?
    } else {
        let scatterers = config.scatterer_set(n, inverse_strength)?;
        let problem = SecularProblem::new(basis.clone(), scatterers, config.window, config.solver_settings())?;
        let spectrum = if n == 1 {
            problem.solve_single()?
        } else {
            problem.solve_multi()?
        };
        let rows = spectrum
            .roots
            .iter()
            .enumerate()
            .map(|(i, r)| SpectrumRow {
                index: spectrum.first_index + i,
                omega: r.omega,
                host_lo: r.host_lo,
                host_hi: r.host_hi,
                residual: r.residual,
                host_level: r.host_level.map(|m| m + 1),
                status: r.status.to_string(),
            })
            .collect();
        (
            rows,
            convention_name(spectrum.convention),
            spectrum.first_index,
            Some(spectrum.config_digest.clone()),
        )
    };
    let count = |s: RootStatus| rows.iter().filter(|r: &&SpectrumRow| r.status == s.to_string()).count();
    let manifest = RunManifest {
        config_digest: config.digest(),
        solver_digest,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        name: config.name.clone(),
        scatterer_count: n,
        index_convention: convention.to_string(),
        first_index,
        energy_cutoff: basis.energy_cutoff(),
        timings: Timings {
            solve_seconds: t.elapsed().as_secs_f64(),
            ..Timings::default()
        },
        counts: Counts {
            basis_levels: basis.len(),
            roots: rows.len(),
            pole_adjacent: count(RootStatus::PoleAdjacent),
            decoupled: count(RootStatus::Decoupled),
            ambiguous: count(RootStatus::Ambiguous),
        },
    };
    Ok(SolvedCell { rows, manifest })
}

type CalibrationRows = (Vec<SpectrumRow>, &'static str, usize, Option<String>);

fn calibration_rows(config: &ExperimentConfig, basis: &BasisTable) -> Result<CalibrationRows> {
    let energies = basis.energies();
    let (range, convention, first) = match config.window {
        Window::Index { lo, hi } => {
            if hi > energies.len() {
                return Err(CliError::Config(format!(
                    "window.index: {hi} exceeds the {} basis levels",
                    energies.len()
                )));
            }
            (lo - 1..hi, "global", lo)
        }
        Window::Energy { lo, hi } => {
            let a = energies.partition_point(|&e| e < lo);
            let b = energies.partition_point(|&e| e <= hi);
            (a..b, "window_local", 1)
        }
    };
    let rows = range
        .clone()
        .enumerate()
        .map(|(i, m)| SpectrumRow {
            index: first + i,
            omega: energies[m],
            host_lo: energies[m],
            host_hi: energies[m],
            residual: 0.0,
            host_level: Some(m + 1),
            status: "unperturbed".into(),
        })
        .collect();
    Ok((rows, convention, first, None))
}

pub fn write_spectrum(dir: &Path, cell: &SolvedCell) -> Result<()> {
    let mut table = Table::new(&SPECTRUM_HEADER);
    let mut meta = Table::new(&META_HEADER);
    for r in &cell.rows {
        table.push(vec![
            r.index.to_string(),
            fmt_f64(r.omega),
            fmt_f64(r.host_lo),
            fmt_f64(r.host_hi),
            fmt_f64(r.residual),
        ]);
        meta.push(vec![
            r.index.to_string(),
            r.host_level.map(|m| m.to_string()).unwrap_or_default(),
            r.status.clone(),
        ]);
    }
    table.write(&dir.join("spectrum.csv"))?;
    meta.write(&dir.join("spectrum_meta.csv"))?;
    write_json(&dir.join("manifest.json"), &cell.manifest)
}

/// `spectra run`: solve the configured window and write the spectrum files.
pub fn run_spectrum(config: &ExperimentConfig, out: &Path) -> Result<RunManifest> {
    let (basis, basis_seconds) = build_basis(config)?;
    let n = config.scatterers.positions.len();
    let mut cell = solve_cell(config, &basis, n, None)?;
    cell.manifest.timings.basis_seconds = basis_seconds;
    write_spectrum(out, &cell)?;
    Ok(cell.manifest)
}

#[derive(Debug, Clone, Serialize)]
pub struct Distances {
    pub ks_poisson: f64,
    pub ks_goe: f64,
    pub sample_count: usize,
    pub overflow_fraction: f64,
    pub mean_level_density: f64,
}

pub struct StatsResult {
    pub histogram: SpacingHistogram,
    pub rigidity: RigidityCurve,
    pub distances: Distances,
}

pub fn compute_stats(config: &ExperimentConfig, omegas: &[f64]) -> Result<StatsResult> {
    let stats = |e: spectra_core::Error| CliError::Stats(e.to_string());
    let density = mean_level_density(&config.billiard);
    let u = unfold(omegas, density).map_err(stats)?;
    let spec = &config.stats;
    let histogram = spacing_histogram(&u, spec.bins, spec.s_max).map_err(stats)?;
    let rigidity = rigidity_curve(&u, &spec.l_grid, spec.window_step).map_err(stats)?;
    let distances = Distances {
        ks_poisson: distribution_distance(&histogram, Reference::Poisson),
        ks_goe: distribution_distance(&histogram, Reference::Goe),
        sample_count: histogram.sample_count,
        overflow_fraction: histogram.overflow_fraction(),
        mean_level_density: density,
    };
    Ok(StatsResult {
        histogram,
        rigidity,
        distances,
    })
}

pub fn pofs_rows(h: &SpacingHistogram) -> Vec<Vec<String>> {
    h.bin_centers()
        .iter()
        .zip(&h.densities)
        .map(|(&s, &d)| {
            vec![
                fmt_f64(s),
                fmt_f64(d),
                fmt_f64(reference_pofs(Reference::Poisson, s)),
                fmt_f64(reference_pofs(Reference::Goe, s)),
            ]
        })
        .collect()
}

pub fn delta3_rows(c: &RigidityCurve) -> Vec<Vec<String>> {
    c.l_values
        .iter()
        .zip(&c.delta3)
        .zip(&c.window_count)
        .map(|((&l, &d), &n)| {
            vec![
                fmt_f64(l),
                fmt_f64(d),
                n.to_string(),
                fmt_f64(reference_delta3(Reference::Poisson, l)),
                fmt_f64(reference_delta3(Reference::Goe, l)),
            ]
        })
        .collect()
}

pub fn write_stats(dir: &Path, s: &StatsResult) -> Result<()> {
    let mut pofs = Table::new(&POFS_HEADER);
    pofs_rows(&s.histogram).into_iter().for_each(|r| pofs.push(r));
    pofs.write(&dir.join("pofs.csv"))?;
    let mut d3 = Table::new(&DELTA3_HEADER);
    delta3_rows(&s.rigidity).into_iter().for_each(|r| d3.push(r));
    d3.write(&dir.join("delta3.csv"))?;
    write_json(&dir.join("distances.json"), &s.distances)
}

/// Reads the `omega` column of a spectrum file, checking the header.
pub fn read_spectrum(path: &Path) -> Result<Vec<f64>> {
    let malformed = |msg: String| CliError::Stats(format!("{}: {msg}", path.display()));
    if !path.exists() {
        return Err(CliError::MissingInput(path.display().to_string()));
    }
    let mut reader = csv::Reader::from_path(path).map_err(|e| malformed(e.to_string()))?;
    let header = reader.headers().map_err(|e| malformed(e.to_string()))?.clone();
    if header.iter().ne(SPECTRUM_HEADER.iter().copied()) {
        return Err(malformed(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut omegas = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| malformed(e.to_string()))?;
        let omega: f64 = record[1]
            .parse()
            .map_err(|_| malformed(format!("row {}: bad omega {:?}", line + 1, &record[1])))?;
        omegas.push(omega);
    }
    Ok(omegas)
}

/// `spectra stats`: statistics of an existing spectrum file.
pub fn run_stats(config: &ExperimentConfig, spectrum: &Path, out: &Path) -> Result<Distances> {
    let omegas = read_spectrum(spectrum)?;
    let s = compute_stats(config, &omegas)?;
    write_stats(out, &s)?;
    Ok(s.distances)
}

#[derive(Debug, Clone, Serialize)]
pub struct CellReport {
    pub label: String,
    pub scatterer_count: usize,
    pub inverse_strength: Option<f64>,
    pub status: String,
    pub message: Option<String>,
    pub roots: Option<usize>,
    pub ks_poisson: Option<f64>,
    pub ks_goe: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepManifest {
    pub config_digest: String,
    pub tool_version: String,
    pub energy_cutoff: f64,
    pub basis_seconds: f64,
    pub cells: Vec<CellReport>,
}

pub fn cell_label(n: usize, v: Option<f64>) -> String {
    match v {
        Some(v) => format!("n{n}_v{v}"),
        None => format!("n{n}"),
    }
}

/// Grid of `(N, v⁻¹)` cells; an empty list keeps the configured value.
pub fn sweep_cells(config: &ExperimentConfig) -> Vec<(usize, Option<f64>)> {
    let counts = if config.sweep.scatterer_counts.is_empty() {
        vec![config.scatterers.positions.len()]
    } else {
        config.sweep.scatterer_counts.clone()
    };
    let strengths: Vec<Option<f64>> = if config.sweep.inverse_strengths.is_empty() {
        vec![None]
    } else {
        config.sweep.inverse_strengths.iter().copied().map(Some).collect()
    };
    counts
        .iter()
        .flat_map(|&n| strengths.iter().map(move |&v| (n, v)))
        .collect()
}

/// `spectra sweep`: every cell of the grid, plus combined long-format tables.
/// Empty sweep lists fall back to a single run written straight into `out`.
pub fn run_sweep(config: &ExperimentConfig, out: &Path) -> Result<SweepManifest> {
    let (basis, basis_seconds) = build_basis(config)?;
    let single = config.sweep.inverse_strengths.is_empty() && config.sweep.scatterer_counts.is_empty();
    let cells = sweep_cells(config);

    let mut reports = Vec::new();
    let mut pofs = Table::new(&[
        "cell",
        "scatterer_count",
        "inverse_strength",
        POFS_HEADER[0],
        POFS_HEADER[1],
        POFS_HEADER[2],
        POFS_HEADER[3],
    ]);
    let mut d3 = Table::new(&[
        "cell",
        "scatterer_count",
        "inverse_strength",
        DELTA3_HEADER[0],
        DELTA3_HEADER[1],
        DELTA3_HEADER[2],
        DELTA3_HEADER[3],
        DELTA3_HEADER[4],
    ]);
    let mut first_code = None;

    for (n, v) in cells {
        let label = cell_label(n, v);
        let dir: PathBuf = if single {
            out.to_path_buf()
        } else {
            out.join(format!("cell_{label}"))
        };
        let mut report = CellReport {
            label: label.clone(),
            scatterer_count: n,
            inverse_strength: v,
            status: "ok".into(),
            message: None,
            roots: None,
            ks_poisson: None,
            ks_goe: None,
        };
        let outcome = (|| -> Result<StatsResult> {
            let mut cell = solve_cell(config, &basis, n, v)?;
            cell.manifest.timings.basis_seconds = basis_seconds;
            report.roots = Some(cell.rows.len());
            let t = Instant::now();
            let omegas: Vec<f64> = cell.rows.iter().map(|r| r.omega).collect();
            let stats = compute_stats(config, &omegas);
            cell.manifest.timings.stats_seconds = t.elapsed().as_secs_f64();
            write_spectrum(&dir, &cell)?;
            let stats = stats?;
            write_stats(&dir, &stats)?;
            Ok(stats)
        })();
        match outcome {
            Ok(stats) => {
                report.ks_poisson = Some(stats.distances.ks_poisson);
                report.ks_goe = Some(stats.distances.ks_goe);
                let prefix = [label.clone(), n.to_string(), fmt_opt(v)];
                for row in pofs_rows(&stats.histogram) {
                    pofs.push(prefix.iter().cloned().chain(row).collect());
                }
                for row in delta3_rows(&stats.rigidity) {
                    d3.push(prefix.iter().cloned().chain(row).collect());
                }
            }
            Err(e) => {
                first_code.get_or_insert(e.exit_code());
                report.status = "failed".into();
                report.message = Some(e.to_string());
            }
        }
        reports.push(report);
    }

    let manifest = SweepManifest {
        config_digest: config.digest(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        energy_cutoff: basis.energy_cutoff(),
        basis_seconds,
        cells: reports,
    };
    if !single {
        let mut summary = Table::new(&[
            "cell",
            "scatterer_count",
            "inverse_strength",
            "status",
            "roots",
            "ks_poisson",
            "ks_goe",
        ]);
        for c in &manifest.cells {
            summary.push(vec![
                c.label.clone(),
                c.scatterer_count.to_string(),
                fmt_opt(c.inverse_strength),
                c.status.clone(),
                c.roots.map(|r| r.to_string()).unwrap_or_default(),
                fmt_opt(c.ks_poisson),
                fmt_opt(c.ks_goe),
            ]);
        }
        summary.write(&out.join("sweep_cells.csv"))?;
        pofs.write(&out.join("sweep_pofs.csv"))?;
        d3.write(&out.join("sweep_delta3.csv"))?;
        write_json(&out.join("sweep_manifest.json"), &manifest)?;
    }
    let failed = manifest.cells.iter().filter(|c| c.status != "ok").count();
    match first_code {
        Some(code) if single => Err(CliError::Sweep { failed, total: 1, code }),
        Some(code) => Err(CliError::Sweep {
            failed,
            total: manifest.cells.len(),
            code,
        }),
        None => Ok(manifest),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Prediction {
    pub inverse_strength: f64,
    pub mass: f64,
    pub lambda: f64,
    pub band_width: f64,
    pub threshold: f64,
    pub crossover_lo: f64,
    pub crossover_hi: f64,
    pub omega_lo: f64,
    pub omega_hi: f64,
    pub margin_lo: f64,
    pub margin_hi: f64,
    pub strong_on_window: bool,
}

/// `spectra predict`: where a scatterer of strength `1/v⁻¹` mixes states.
pub fn predict(mass: f64, lambda: f64, inverse_strength: f64, lo: f64, hi: f64) -> Result<Prediction> {
    if !(mass > 0.0 && lambda > 0.0) {
        return Err(CliError::Config(format!(
            "--mass {mass} and --lambda {lambda} must be positive"
        )));
    }
    if !(lo > 0.0 && hi >= lo) {
        return Err(CliError::Config(format!(
            "--omega-lo {lo} / --omega-hi {hi}: need 0 < lo ≤ hi"
        )));
    }
    let band = CouplingBand::new(mass, lambda);
    let config_err = |e: spectra_core::Error| CliError::Config(e.to_string());
    let a = band.is_strong(inverse_strength, lo).map_err(config_err)?;
    let b = band.is_strong(inverse_strength, hi).map_err(config_err)?;
    let (crossover_lo, crossover_hi) = band.crossover_energies(inverse_strength);
    Ok(Prediction {
        inverse_strength,
        mass,
        lambda,
        band_width: band.width(),
        threshold: band.half_width(),
        crossover_lo,
        crossover_hi,
        omega_lo: lo,
        omega_hi: hi,
        margin_lo: a.margin,
        margin_hi: b.margin,
        strong_on_window: a.strong && b.strong,
    })
}
