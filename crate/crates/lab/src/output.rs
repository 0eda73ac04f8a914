//! File formats. CSV numbers use a dot separator and a fixed number of
//! decimals; missing statistics are empty fields.

use std::fs;
use std::io::Write;
use std::path::Path;

use blp_lab_core::metrics::RegretTrace;
use blp_lab_core::monitor::Masquerade;
use blp_lab_core::Table1Row;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::run::CensusRow;

pub const DECIMALS: usize = 4;

fn fixed(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:.DECIMALS$}"))
}

fn create(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    }
    fs::File::create(path).map_err(|e| LabError::io(path, e))
}

fn write_csv<R: IntoIterator<Item = Vec<String>>>(
    path: &Path,
    header: &[&str],
    rows: R,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let io = |e: csv::Error| LabError::io(path, e.into());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| LabError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = create(path)?;
    serde_json::to_writer_pretty(&mut file, value).map_err(|e| LabError::io(path, e.into()))?;
    file.write_all(b"\n").map_err(|e| LabError::io(path, e))
}

/// Columns: `range_lo, range_hi, mean_size, sd_size, mean_life, sd_life`.
pub fn write_table1(path: &Path, rows: &[Table1Row]) -> Result<()> {
    write_csv(
        path,
        &[
            "range_lo",
            "range_hi",
            "mean_size",
            "sd_size",
            "mean_life",
            "sd_life",
        ],
        rows.iter().map(|r| {
            vec![
                r.range_lo.to_string(),
                r.range_hi.to_string(),
                fixed(r.mean_size),
                fixed(r.sd_size),
                fixed(r.mean_life),
                fixed(r.sd_life),
            ]
        }),
    )
}

/// Columns: `history, m, structure`; structures print as `{1,3}`.
pub fn write_masquerades(path: &Path, rows: &[Masquerade]) -> Result<()> {
    write_csv(
        path,
        &["history", "m", "structure"],
        rows.iter().map(|r| {
            vec![
                r.history.to_string(),
                r.m.to_string(),
                r.structure.to_string(),
            ]
        }),
    )
}

pub fn write_census(path: &Path, rows: &[CensusRow]) -> Result<()> {
    write_csv(
        path,
        &["n", "s", "m", "trials", "analytic", "mc_mean", "rel_err"],
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.s.to_string(),
                r.m.to_string(),
                r.trials.to_string(),
                fixed(Some(r.analytic)),
                fixed(Some(r.mc_mean)),
                fixed(Some(r.rel_err)),
            ]
        }),
    )
}

pub fn write_regret(path: &Path, trace: &RegretTrace) -> Result<()> {
    write_csv(
        path,
        &[
            "m",
            "online_loss",
            "comparator_loss",
            "regret",
            "average_regret",
        ],
        (0..trace.regret.len()).map(|k| {
            vec![
                (k + 1).to_string(),
                trace.online_loss[k].to_string(),
                trace.comparator_loss[k].to_string(),
                fixed(Some(trace.regret[k])),
                fixed(Some(trace.average_regret[k])),
            ]
        }),
    )
}
