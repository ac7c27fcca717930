use std::fs;
use std::path::{Path, PathBuf};

use super::ExperimentReport;
use crate::error::{Error, Result};

pub use crate::detect::SeriesKind as PlotKind;

fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

/// Writes `report.json` and one CSV per series under `dir`; returns the
/// paths written, report first.
pub fn write_outputs(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let main = dir.join("report.json");
    fs::write(&main, report.to_json()?)?;
    let mut written = vec![main];
    for (i, row) in report.rows.iter().enumerate() {
        for s in &row.verdict.series {
            let name = format!(
                "{i:03}-{}-{}-{}.csv",
                slug(&row.map),
                slug(&row.verdict.detector),
                s.kind.name()
            );
            let path = dir.join(name);
            fs::write(&path, s.to_csv())?;
            written.push(path);
        }
    }
    Ok(written)
}

/// CSV of the requested series, from row `row` or else the first row that
/// carries one.
pub fn emit_plot_data(report: &ExperimentReport, kind: PlotKind, row: Option<usize>) -> Result<String> {
    let missing = || Error::MissingSeries(kind.name().to_string());
    let series = match row {
        Some(i) => report.rows.get(i).and_then(|r| r.verdict.series(kind)),
        None => report.rows.iter().find_map(|r| r.verdict.series(kind)),
    };
    series.map(|s| s.to_csv()).ok_or_else(missing)
}
