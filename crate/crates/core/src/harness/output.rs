//! Flat-file output: per-iteration trace CSV, crossing-event summary CSV,
//! report metadata JSON and the plain-text result table.

use std::fmt::Write as _;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::experiment::{EnsembleReport, EventSummary};
use crate::schedules::Algorithm;

pub const TRACE_HEADER: [&str; 6] = ["n", "D_n", "F_n", "alpha_n", "inner_n", "cum_time_s"];
pub const SUMMARY_HEADER: [&str; 8] = [
    "event",
    "threshold",
    "n",
    "time_s",
    "value",
    "runs_crossed",
    "mean_run_n",
    "mean_run_time_s",
];

pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const META_FILE: &str = "report.json";

/// Thirteen significant digits, scientific notation.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.12e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

pub fn write_trace<W: Write>(report: &EnsembleReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in &report.rows {
        w.write_record([
            r.n.to_string(),
            fmt_num(r.d),
            fmt_num(r.f),
            fmt_num(r.alpha),
            fmt_num(r.inner),
            fmt_num(r.time_s),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn write_summary<W: Write>(report: &EnsembleReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for e in &report.events {
        w.write_record([
            e.event.clone(),
            fmt_opt(e.threshold),
            e.n.map(|n| n.to_string()).unwrap_or_default(),
            fmt_opt(e.time_s),
            fmt_opt(e.value),
            e.runs_crossed.to_string(),
            fmt_opt(e.mean_run_n),
            fmt_opt(e.mean_run_time_s),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

/// Writes `trace.csv`, `summary.csv` and `report.json` into `dir`, creating
/// it if needed. Returns the three paths.
pub fn emit_csv(report: &EnsembleReport, dir: impl AsRef<Path>) -> Result<[PathBuf; 3]> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let trace = dir.join(TRACE_FILE);
    let summary = dir.join(SUMMARY_FILE);
    let meta = dir.join(META_FILE);
    write_trace(report, create(&trace)?)?;
    write_summary(report, create(&summary)?)?;
    let mut f = create(&meta)?;
    serde_json::to_writer_pretty(&mut f, &report.metadata)?;
    writeln!(f).map_err(|e| Error::io(&meta, e))?;
    Ok([trace, summary, meta])
}

/// A labelled row of the result table.
pub struct TableRow<'a> {
    pub label: String,
    pub report: &'a EnsembleReport,
}

pub fn table_label(algorithm: Algorithm, sampler: &str, pair_index: usize) -> String {
    let alg = match algorithm {
        Algorithm::Gradient => 1,
        Algorithm::Proximal => 2,
    };
    let pair = char::from(b'A' + (pair_index % 26) as u8);
    format!("Alg.{alg}({sampler})({pair})")
}

fn cell_n(e: &EventSummary, n_max: u64) -> String {
    match e.n {
        Some(n) => n.to_string(),
        None => format!(">{n_max}"),
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "---".into())
}

/// Text table with the three column groups: residual crossing, objective
/// stabilization and the terminal iterate.
pub fn render_table(rows: &[TableRow<'_>]) -> String {
    let mut s = String::new();
    let Some(first) = rows.first() else {
        return s;
    };
    let cfg = &first.report.metadata.config;
    let _ = writeln!(
        s,
        "{:<16}|| {:^30} | {:^30} | {:^21}",
        "",
        format!("D_n <= {:e}", cfg.d_threshold),
        format!("|F_n - F_n-1| <= {:e}", cfg.f_delta_threshold),
        format!("n = {}", cfg.n_max),
    );
    let _ = writeln!(
        s,
        "{:<16}|| {:>6} {:>11} {:>11} | {:>6} {:>11} {:>11} | {:>9} {:>11}",
        "", "n", "time [s]", "D_n", "n", "time [s]", "F_n", "time [s]", "F_n"
    );
    let _ = writeln!(s, "{}", "-".repeat(105));
    for row in rows {
        let r = row.report;
        let n_max = r.metadata.config.n_max;
        let (Some(d), Some(f), Some(t)) = (
            r.event(crate::harness::EVENT_D),
            r.event(crate::harness::EVENT_F),
            r.event(crate::harness::EVENT_TERMINAL),
        ) else {
            continue;
        };
        let _ = writeln!(
            s,
            "{:<16}|| {:>6} {:>11} {:>11} | {:>6} {:>11} {:>11} | {:>9} {:>11}",
            row.label,
            cell_n(d, n_max),
            cell(d.time_s),
            cell(d.value),
            cell_n(f, n_max),
            cell(f.time_s),
            cell(f.value),
            cell(t.time_s),
            cell(t.value),
        );
    }
    s
}
