//! JSON reports, CSV tables and PGM slice images.

use std::fs;
use std::path::Path;

use fracreg::energy::EnergyBreakdown;
use fracreg::optimize::Termination;
use fracreg::spd::TensorImage;
use fracreg::verify::CheckRow;
use serde::Serialize;

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub before: Option<EnergyBreakdown>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub after: Option<EnergyBreakdown>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub termination: Option<Termination>,
    /// `data(after) / data(before)`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckRow>,
    /// Wall-clock seconds per phase; the only non-reproducible field.
    pub timings: Vec<(String, f64)>,
}

impl Report {
    pub fn new(command: &'static str, config: RunConfig) -> Self {
        Report {
            command,
            config,
            before: None,
            after: None,
            bound_ok: None,
            iterations: None,
            termination: None,
            data_ratio: None,
            checks: Vec::new(),
            timings: Vec::new(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("report is plain data");
        write_text(path, &(text + "\n"))
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::stage("report", fracreg::Error::Io(e)))
}

/// `|A(x) - B(x)|_F` on the axial mid-slice `k = nz / 2`, row `j`, column `i`.
pub fn residual_slice(a: &TensorImage, b: &TensorImage) -> Result<(usize, usize, Vec<f64>), CliError> {
    let sq = a.sq_distance(b).map_err(|e| CliError::stage("report", e))?;
    let grid = a.grid();
    let [nx, ny, nz] = grid.dims();
    let k = nz / 2;
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            out.push(sq[grid.index(i, j, k)].sqrt());
        }
    }
    Ok((nx, ny, out))
}

/// Plain 8-bit PGM, values mapped linearly from `[0, scale]` to `[0, 255]`.
pub fn pgm(width: usize, height: usize, values: &[f64], scale: f64) -> String {
    let mut s = format!("P2\n{width} {height}\n255\n");
    for row in values.chunks(width) {
        let line: Vec<String> = row
            .iter()
            .map(|v| {
                let level = if scale > 0.0 { (v / scale * 255.0).round().clamp(0.0, 255.0) } else { 0.0 };
                (level as u8).to_string()
            })
            .collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_layout() {
        let s = pgm(2, 2, &[0.0, 1.0, 0.5, 2.0], 1.0);
        assert_eq!(s, "P2\n2 2\n255\n0 255\n128 255\n");
        assert_eq!(pgm(1, 1, &[3.0], 0.0), "P2\n1 1\n255\n0\n");
    }
}
