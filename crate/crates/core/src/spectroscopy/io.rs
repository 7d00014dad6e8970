//! Spectrum serialisation: CSV with a comment header carrying the full
//! configuration, plus a JSON sidecar. Floats are written in Rust's
//! shortest round-trip representation, so read(write(s)) == s bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use super::{ScanDiagnostics, Spectrum, SpectrumPoint};

#[derive(Debug, thiserror::Error)]
pub enum SpectrumIoError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed spectrum file: {0}")]
    Malformed(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub const CSV_HEADER: &str = "detuning_Hz,rate_counts_per_s,sigma";

pub fn to_csv_string(spectrum: &Spectrum) -> String {
    let mut s = String::new();
    let config = serde_json::to_string(&spectrum.config).expect("config serialises");
    let diag = serde_json::to_string(&spectrum.diagnostics).expect("diagnostics serialise");
    writeln!(s, "# cpt-sim spectrum v1").unwrap();
    writeln!(s, "# config_digest: {}", spectrum.diagnostics.config_digest).unwrap();
    writeln!(s, "# config: {config}").unwrap();
    writeln!(s, "# diagnostics: {diag}").unwrap();
    writeln!(s, "{CSV_HEADER}").unwrap();
    for p in &spectrum.points {
        writeln!(s, "{},{},{}", p.detuning_hz, p.rate, p.sigma).unwrap();
    }
    s
}

pub fn from_csv_string(text: &str) -> Result<Spectrum, SpectrumIoError> {
    let mut config = None;
    let mut diagnostics: Option<ScanDiagnostics> = None;
    let mut points = Vec::new();
    let mut saw_header = false;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# config: ") {
            config = Some(serde_json::from_str(rest)?);
        } else if let Some(rest) = line.strip_prefix("# diagnostics: ") {
            diagnostics = Some(serde_json::from_str(rest)?);
        } else if line.starts_with('#') || line.trim().is_empty() {
            continue;
        } else if line == CSV_HEADER {
            saw_header = true;
        } else {
            let mut it = line.split(',');
            let mut next = || {
                it.next()
                    .ok_or_else(|| SpectrumIoError::Malformed(format!("short row: {line}")))?
                    .parse::<f64>()
                    .map_err(|e| SpectrumIoError::Malformed(format!("{e}: {line}")))
            };
            points.push(SpectrumPoint { detuning_hz: next()?, rate: next()?, sigma: next()? });
        }
    }
    if !saw_header {
        return Err(SpectrumIoError::Malformed("missing column header".into()));
    }
    let config = config.ok_or_else(|| SpectrumIoError::Malformed("missing config comment".into()))?;
    let diagnostics =
        diagnostics.ok_or_else(|| SpectrumIoError::Malformed("missing diagnostics comment".into()))?;
    Ok(Spectrum { points, config, diagnostics })
}

pub fn write_csv(spectrum: &Spectrum, path: &Path) -> Result<(), SpectrumIoError> {
    std::fs::write(path, to_csv_string(spectrum))?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Spectrum, SpectrumIoError> {
    from_csv_string(&std::fs::read_to_string(path)?)
}

/// JSON sidecar with the metadata of a spectrum file.
pub fn write_sidecar(spectrum: &Spectrum, path: &Path) -> Result<(), SpectrumIoError> {
    let sidecar = serde_json::json!({
        "config_digest": spectrum.diagnostics.config_digest,
        "n_points": spectrum.points.len(),
        "config": spectrum.config,
        "diagnostics": spectrum.diagnostics,
        "version": env!("CARGO_PKG_VERSION"),
    });
    std::fs::write(path, format!("{}\n", serde_json::to_string_pretty(&sidecar)?))?;
    Ok(())
}
