//! Command-line sweep runner.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use mmwlink::config::SimConfig;
use mmwlink::report::{emit_results, to_csv, to_json, OutputFormat};
use mmwlink::sweep::run_sweep;

#[derive(Parser, Debug)]
#[command(
    name = "mmwlink",
    about = "Monte Carlo link-level sweeps for mmWave MIMO transceivers"
)]
struct Cli {
    /// TOML configuration file; defaults apply for omitted fields.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Named scenario preset (power-sweep, pa-sweep-tde, pa-sweep-ofdm,
    /// distance-sweep, gee-ofdm).
    #[arg(long)]
    preset: Option<String>,

    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, default_value = "csv")]
    format: String,

    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads (0 = all available CPUs). The MMWLINK_WORKERS
    /// environment variable applies when the flag is absent.
    #[arg(long)]
    workers: Option<usize>,
}

fn run(cli: Cli) -> mmwlink::Result<()> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => SimConfig::from_toml(&std::fs::read_to_string(path)?)?,
        (None, Some(name)) => SimConfig::preset(name)?,
        (None, None) => SimConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    let workers = cli
        .workers
        .or_else(|| {
            std::env::var("MMWLINK_WORKERS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);
    let format: OutputFormat = cli.format.parse()?;

    eprintln!(
        "running {} grid points x {} realizations (seed {})",
        cfg.p_t_dbw.len() * cfg.distances_m.len(),
        cfg.realizations,
        cfg.master_seed
    );
    let manifest = run_sweep(&cfg, workers)?;
    eprintln!(
        "done in {:.1} s; config hash {}",
        manifest.wall_clock_s, manifest.config_hash
    );

    match cli.out {
        Some(path) => emit_results(&manifest, &path, format)?,
        None => {
            let text = match format {
                OutputFormat::Csv => to_csv(&manifest),
                OutputFormat::Json => to_json(&manifest),
            };
            print!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
