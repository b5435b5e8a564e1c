//! CSV tables and the run manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use pds_core::montecarlo::McHistogram;
use pds_core::ResponsePdf;
use serde::Serialize;

use crate::CliError;

/// Shortest representation that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Comma-delimited table with a header row. Cells never contain commas.
#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.render()).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
    }
}

pub fn pdf_table(pdf: &ResponsePdf) -> CsvTable {
    let mut t = CsvTable::new(&["value", "density", "log10_density", "background_component", "rare_component"]);
    for i in 0..pdf.values.len() {
        t.row(vec![
            num(pdf.values[i]),
            num(pdf.density[i]),
            num(pdf.density[i].log10()),
            num(pdf.background[i]),
            num(pdf.rare[i]),
        ]);
    }
    t
}

pub fn mc_table(h: &McHistogram, pdf: &ResponsePdf) -> CsvTable {
    let mut t = CsvTable::new(&["bin_lo", "bin_hi", "count", "mc_density", "pds_density", "log10_discrepancy"]);
    for b in h.bins() {
        let est = pdf.interval_mass(b.lo, b.hi) / (b.hi - b.lo);
        t.row(vec![
            num(b.lo),
            num(b.hi),
            b.count.to_string(),
            num(b.density),
            num(est),
            num(b.density.log10() - est.log10()),
        ]);
    }
    t
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config_path: String,
    /// Parsed configuration, with defaults filled in.
    pub config: serde_json::Value,
    pub seed: u64,
    pub threads: usize,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
    pub sigma_h: f64,
    pub sigma_h_dot: f64,
    pub sigma_eta: Option<f64>,
    /// Rare-event probability per quantity.
    pub probabilities: BTreeMap<String, f64>,
    pub gamma: Option<f64>,
    pub outputs: Vec<String>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text).map_err(|source| CliError::Io { path, source })
    }
}
