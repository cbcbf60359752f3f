use std::path::Path;

use super::config::OutputFormat;
use super::run::RunManifest;
use crate::error::ConfigError;

pub const CSV_HEADER: [&str; 10] = [
    "n",
    "estimate",
    "std_error",
    "ci_lo",
    "ci_hi",
    "particles_mean",
    "particles_std",
    "particles_max",
    "timeouts",
    "wall_time",
];

pub fn to_json(manifest: &RunManifest) -> String {
    let mut s = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    s.push('\n');
    s
}

/// One row per `n`; a failed `n` has only its first column filled.
pub fn to_csv(manifest: &RunManifest) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("write to memory");
    for res in &manifest.results {
        let row: Vec<String> = match &res.report {
            Some(r) => vec![
                r.n.to_string(),
                r.estimate.to_string(),
                r.std_error.map(|x| x.to_string()).unwrap_or_default(),
                r.ci95[0].to_string(),
                r.ci95[1].to_string(),
                r.particles_mean.to_string(),
                r.particles_std.to_string(),
                r.particles_max.to_string(),
                r.timeouts.to_string(),
                r.wall_time.to_string(),
            ],
            None => {
                let mut row = vec![String::new(); CSV_HEADER.len()];
                row[0] = res.n.to_string();
                row
            }
        };
        w.write_record(&row).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

pub fn render(manifest: &RunManifest, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => to_json(manifest),
        OutputFormat::Csv => to_csv(manifest),
    }
}

pub fn emit(manifest: &RunManifest, format: OutputFormat, path: &Path) -> Result<(), ConfigError> {
    std::fs::write(path, render(manifest, format))?;
    Ok(())
}
