//! Result serialization: fixed-column CSV and JSON manifests.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sweep::{RunManifest, SweepResult};

/// CSV header, one column per field in emission order.
pub const CSV_HEADER: &str = "scheme,arch,constellation,M,N_T,N_R,N_T_rf,N_R_rf,P_T_dBW,\
distance_m,pa_mode,realizations,ase_mean,ase_stderr,gee_mean,gee_stderr,ber_mean,ber_stderr,\
failures";

fn csv_row(r: &SweepResult) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{:e},{:e},{},{},{:e},{:e},{:e},{:e},{:e},{:e},{}",
        r.scheme,
        r.arch,
        r.constellation,
        r.m,
        r.n_tx,
        r.n_rx,
        r.n_tx_rf,
        r.n_rx_rf,
        r.p_t_dbw,
        r.distance_m,
        r.pa_mode,
        r.realizations,
        r.ase_mean,
        r.ase_stderr,
        r.gee_mean,
        r.gee_stderr,
        r.ber_mean,
        r.ber_stderr,
        r.failures
    )
}

/// Renders the manifest as CSV text (header plus one row per grid point).
pub fn to_csv(manifest: &RunManifest) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &manifest.results {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out
}

/// Renders the manifest as pretty JSON.
pub fn to_json(manifest: &RunManifest) -> String {
    serde_json::to_string_pretty(manifest).expect("manifest serializes")
}

/// Parses a JSON manifest back.
pub fn from_json(text: &str) -> Result<RunManifest> {
    serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
}

/// Output format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidConfig(format!("unknown format '{other}'"))),
        }
    }
}

/// Writes the manifest to a file in the requested format.
pub fn emit_results(manifest: &RunManifest, path: &Path, format: OutputFormat) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => to_csv(manifest),
        OutputFormat::Json => to_json(manifest),
    };
    let mut file = std::fs::File::create(path)?;
    file.write_all(text.as_bytes())?;
    Ok(())
}
