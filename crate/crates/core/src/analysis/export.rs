use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DensityGroup, DensityReport, ImportanceReport, ImportanceRow};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    Csv,
    Json,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::InvalidConfiguration(e.to_string()))
}

/// Columns: `dimension, share_all, share_best, percent_all, percent_best`.
pub fn export_importance(report: &ImportanceReport, path: &Path, format: ExportFormat) -> Result<()> {
    let bytes = match format {
        ExportFormat::Json => serde_json::to_vec_pretty(report)?,
        ExportFormat::Csv => csv_bytes(
            &["dimension", "share_all", "share_best", "percent_all", "percent_best"],
            report.rows.iter().map(|r| {
                vec![
                    r.dimension.clone(),
                    format!("{:?}", r.share_all),
                    format!("{:?}", r.share_best),
                    r.percent_all.to_string(),
                    r.percent_best.to_string(),
                ]
            }),
        )?,
    };
    write_atomic(path, &bytes)
}

pub fn read_importance_csv(path: &Path) -> Result<Vec<ImportanceRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// One line of the long-format density CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub dimension: String,
    pub group: String,
    pub x: String,
    pub density: f64,
    pub empty: bool,
}

/// Long format, columns `dimension, group, x, density, empty`: one row per
/// grid point (or choice) per group per dimension. Empty groups keep their
/// rows, with zero density and `empty = true`.
pub fn export_density(report: &DensityReport, path: &Path, format: ExportFormat) -> Result<()> {
    let bytes = match format {
        ExportFormat::Json => serde_json::to_vec_pretty(report)?,
        ExportFormat::Csv => {
            let mut rows = Vec::new();
            for d in &report.dimensions {
                for g in DensityGroup::ALL {
                    let gd = &d.groups[&g];
                    for (x, v) in d.grid.iter().zip(&gd.values) {
                        rows.push(vec![
                            d.dimension.clone(),
                            g.name().to_string(),
                            x.clone(),
                            format!("{v:?}"),
                            gd.empty.to_string(),
                        ]);
                    }
                }
            }
            csv_bytes(&["dimension", "group", "x", "density", "empty"], rows.into_iter())?
        }
    };
    write_atomic(path, &bytes)
}

pub fn read_density_csv(path: &Path) -> Result<Vec<DensityRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
