use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spectra_cli::{emit_plots, load_config, predict, run_spectrum, run_stats, run_sweep, CliError, Result};

#[derive(Parser)]
#[command(
    name = "spectra",
    version,
    about = "Spectra and level statistics of billiards with point scatterers"
)]
struct Cli {
    /// Worker threads for the solver (defaults to all cores).
    #[arg(long, env = "SPECTRA_THREADS", global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured window and write spectrum.csv and manifest.json.
    Run {
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Spacing histogram, rigidity curve and KS distances of a spectrum file.
    Stats {
        config: PathBuf,
        spectrum: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run every cell of the configured sweep grid.
    Sweep {
        config: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Predict whether a scatterer couples strongly over an energy range.
    Predict {
        #[arg(long)]
        vinv: f64,
        #[arg(long)]
        omega_lo: f64,
        #[arg(long)]
        omega_hi: f64,
        #[arg(long, default_value_t = 2.0 * PI)]
        mass: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
    },
    /// Write Vega-Lite specs for the tables in a results directory.
    Plots { dir: PathBuf },
}

fn default_out(config: &Path, name: &str) -> PathBuf {
    let stem = if name.is_empty() {
        config
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "run".into())
    } else {
        name.to_string()
    };
    PathBuf::from("results").join(stem)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("SPECTRA_THREADS: {e}")))?;
    }
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load_config(&config)?;
            let out = out.unwrap_or_else(|| default_out(&config, &cfg.name));
            let m = run_spectrum(&cfg, &out)?;
            println!(
                "{} levels ({} convention, first index {}) in {:.2}s -> {}",
                m.counts.roots,
                m.index_convention,
                m.first_index,
                m.timings.basis_seconds + m.timings.solve_seconds,
                out.display()
            );
        }
        Command::Stats { config, spectrum, out } => {
            let cfg = load_config(&config)?;
            let out = out.unwrap_or_else(|| spectrum.parent().map(Path::to_path_buf).unwrap_or_default());
            let d = run_stats(&cfg, &spectrum, &out)?;
            println!(
                "KS distance: poisson {:.4}, goe {:.4} ({} spacings) -> {}",
                d.ks_poisson,
                d.ks_goe,
                d.sample_count,
                out.display()
            );
        }
        Command::Sweep { config, out } => {
            let cfg = load_config(&config)?;
            let out = out.unwrap_or_else(|| default_out(&config, &cfg.name));
            let m = run_sweep(&cfg, &out)?;
            for c in &m.cells {
                println!(
                    "{:<12} {:>6} levels  KS poisson {:.4}  goe {:.4}",
                    c.label,
                    c.roots.unwrap_or(0),
                    c.ks_poisson.unwrap_or(f64::NAN),
                    c.ks_goe.unwrap_or(f64::NAN)
                );
            }
        }
        Command::Predict {
            vinv,
            omega_lo,
            omega_hi,
            mass,
            lambda,
        } => {
            let p = predict(mass, lambda, vinv, omega_lo, omega_hi)?;
            println!("{}", serde_json::to_string_pretty(&p).expect("prediction serializes"));
        }
        Command::Plots { dir } => {
            for path in emit_plots(&dir)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spectra: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
