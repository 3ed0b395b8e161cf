//! Output files: `constants.csv`, `report.json`, optional tables and SVG
//! plots, and the lock that gives one process ownership of the directory.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{ConstantsReport, EscapeReport, ProbeTable, RunConfig};
use crate::potential::AssumptionReport;

pub const LOCK_FILE: &str = ".escape-smoothing.lock";
pub const CONSTANTS_HEADER: [&str; 5] = ["R", "C0", "Q0", "ratio", "band_ok"];

/// Exclusive ownership of an output directory, released on drop.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    /// Creates `dir` if needed and takes its lock file; fails if another
    /// process holds it.
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(LOCK_FILE);
        let mut f = OpenOptions::new().write(true).create_new(true).open(&path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::AlreadyExists {
                Error::Config(format!(
                    "output directory {} is locked by another run; remove {} if that run is gone",
                    dir.display(),
                    path.display()
                ))
            } else {
                Error::io(&path, e)
            }
        })?;
        writeln!(f, "{}", std::process::id()).map_err(|e| Error::io(&path, e))?;
        Ok(Self { path })
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub escape_smoothing: String,
    pub report_format: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Self { escape_smoothing: env!("CARGO_PKG_VERSION").to_string(), report_format: 1 }
    }
}

/// Everything a subcommand produced; absent sections were not run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub config: RunConfig,
    pub seed: u64,
    pub versions: Versions,
    pub constants: ConstantsReport,
    #[serde(default)]
    pub escape: Option<EscapeReport>,
    #[serde(default)]
    pub probes: Option<ProbeTable>,
    #[serde(default)]
    pub assumption: Option<AssumptionSummary>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderSummary {
    pub order: usize,
    pub inner_sup: f64,
    pub outer_sup: f64,
    pub diverging: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionSummary {
    pub m: f64,
    pub max_order: usize,
    pub orders: Vec<OrderSummary>,
    pub upper_constant: f64,
    pub lower_constant: f64,
    pub lower_diverging: bool,
    pub pass: bool,
    pub note: String,
}

impl From<&AssumptionReport<f64>> for AssumptionSummary {
    fn from(r: &AssumptionReport<f64>) -> Self {
        Self {
            m: r.m,
            max_order: r.max_order,
            orders: r
                .orders
                .iter()
                .map(|o| OrderSummary {
                    order: o.order,
                    inner_sup: o.inner_sup,
                    outer_sup: o.outer_sup,
                    diverging: o.diverging,
                })
                .collect(),
            upper_constant: r.upper_constant,
            lower_constant: r.lower_constant,
            lower_diverging: r.lower_diverging,
            pass: r.pass,
            note: r.note.clone(),
        }
    }
}

impl RunReport {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            command: command.to_string(),
            config: config.clone(),
            seed: config.seed,
            versions: Versions::default(),
            constants: ConstantsReport::empty(),
            escape: None,
            probes: None,
            assumption: None,
            pass: true,
        }
    }

    /// Recomputes `pass` from the sections present.
    pub fn finalize(mut self) -> Self {
        self.pass = self.constants.passed()
            && self.escape.as_ref().is_none_or(|e| e.notice.is_none())
            && self.probes.as_ref().is_none_or(ProbeTable::passed)
            && self.assumption.as_ref().is_none_or(|a| a.pass);
        self
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

/// `constants.csv` with header `R,C0,Q0,ratio,band_ok`.
pub fn write_constants_csv(path: &Path, report: &ConstantsReport) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(CONSTANTS_HEADER)?;
    for row in &report.rows {
        w.write_record([
            row.r.to_string(),
            row.c0.to_string(),
            row.q0.to_string(),
            row.ratio.to_string(),
            row.band_ok.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_escape_csv(path: &Path, report: &EscapeReport) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["E", "time", "scaled"])?;
    for row in &report.rows {
        w.write_record([row.energy.to_string(), row.time.to_string(), row.scaled.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_probe_csv(path: &Path, table: &ProbeTable) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["x", "xi", "R", "S", "A", "A_bar", "S_over_A", "Abar_over_A", "Q0", "certified"])?;
    let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
    for row in &table.rows {
        w.write_record([
            join(&row.x),
            join(&row.xi),
            row.r.to_string(),
            row.s.to_string(),
            row.a.to_string(),
            row.a_bar.to_string(),
            row.s_over_a.to_string(),
            row.abar_over_a.to_string(),
            row.q0.to_string(),
            row.certified.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn plot_err<E: std::fmt::Display>(path: &Path) -> impl Fn(E) -> Error + '_ {
    move |e| Error::Plot(format!("{}: {e}", path.display()))
}

/// Log-log axis range padded by a factor on each side.
fn log_range(values: impl Iterator<Item = f64>) -> Option<std::ops::Range<f64>> {
    let (lo, hi) =
        values.filter(|v| *v > 0.0 && v.is_finite()).fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(v), b.max(v)));
    (hi > 0.0).then(|| lo / 1.5..hi * 1.5)
}

/// Deviation `|Q0/C0 − 1|` against `R` with the fitted bound `c/R`.
pub fn plot_ratio(path: &Path, report: &ConstantsReport) -> Result<()> {
    let dev: Vec<(f64, f64)> = report.rows.iter().map(|r| (r.r, (r.ratio - 1.0).abs())).collect();
    let bound: Vec<(f64, f64)> = match report.fitted_c {
        Some(c) if c > 0.0 => report.rows.iter().map(|r| (r.r, c / r.r)).collect(),
        _ => Vec::new(),
    };
    let (Some(xr), Some(yr)) = (log_range(dev.iter().map(|p| p.0)), log_range(dev.iter().chain(&bound).map(|p| p.1)))
    else {
        return Ok(());
    };
    let root = SVGBackend::new(path, (640, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err(path))?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(xr.log_scale(), yr.log_scale())
        .map_err(plot_err(path))?;
    chart.configure_mesh().x_desc("R").y_desc("|Q0/C0 - 1|").draw().map_err(plot_err(path))?;
    chart.draw_series(LineSeries::new(dev.clone(), &BLUE)).map_err(plot_err(path))?;
    chart.draw_series(dev.iter().map(|&p| Circle::new(p, 4, BLUE.filled()))).map_err(plot_err(path))?;
    if !bound.is_empty() {
        chart.draw_series(LineSeries::new(bound, &RED)).map_err(plot_err(path))?;
    }
    root.present().map_err(plot_err(path))
}

/// Occupation time against energy on log axes with the fitted power law.
pub fn plot_escape(path: &Path, report: &EscapeReport) -> Result<()> {
    let pts: Vec<(f64, f64)> = report.rows.iter().map(|r| (r.energy, r.time)).collect();
    let (Some(xr), Some(yr)) = (log_range(pts.iter().map(|p| p.0)), log_range(pts.iter().map(|p| p.1))) else {
        return Ok(());
    };
    let root = SVGBackend::new(path, (640, 480)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err(path))?;
    let mut chart = ChartBuilder::on(&root)
        .margin(20)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(xr.log_scale(), yr.log_scale())
        .map_err(plot_err(path))?;
    chart.configure_mesh().x_desc("E").y_desc("time in B_r").draw().map_err(plot_err(path))?;
    chart.draw_series(pts.iter().map(|&p| Circle::new(p, 4, BLUE.filled()))).map_err(plot_err(path))?;
    if let (Some(s), Some(b)) = (report.slope, report.intercept) {
        let line: Vec<(f64, f64)> = pts.iter().map(|&(e, _)| (e, (b + s * e.ln()).exp())).collect();
        chart.draw_series(LineSeries::new(line, &RED)).map_err(plot_err(path))?;
    }
    root.present().map_err(plot_err(path))
}

/// Writes every artifact of `report` into `dir`, which must already be
/// locked by the caller.
pub fn emit_report(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let constants = dir.join("constants.csv");
    write_constants_csv(&constants, &report.constants)?;
    written.push(constants);
    let json = dir.join("report.json");
    let text = serde_json::to_string_pretty(report)?;
    fs::write(&json, text + "\n").map_err(|e| Error::io(&json, e))?;
    written.push(json);
    if !report.constants.rows.is_empty() {
        let p = dir.join("ratio.svg");
        plot_ratio(&p, &report.constants)?;
        written.push(p);
    }
    if let Some(esc) = &report.escape {
        let p = dir.join("escape.csv");
        write_escape_csv(&p, esc)?;
        written.push(p);
        let p = dir.join("occupation.svg");
        plot_escape(&p, esc)?;
        written.push(p);
    }
    if let Some(probes) = &report.probes {
        let p = dir.join("probes.csv");
        write_probe_csv(&p, probes)?;
        written.push(p);
    }
    Ok(written)
}

/// Reads a `report.json` back.
pub fn read_report(path: &Path) -> Result<RunReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::ConstantsRow;

    #[test]
    fn lock_is_exclusive_and_released() {
        let dir = tempfile::tempdir().unwrap();
        let lock = OutputLock::acquire(dir.path()).unwrap();
        assert!(matches!(OutputLock::acquire(dir.path()), Err(Error::Config(_))));
        drop(lock);
        assert!(OutputLock::acquire(dir.path()).is_ok());
    }

    #[test]
    fn empty_report_has_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        let report = RunReport::new("correspondence", &RunConfig::default()).finalize();
        emit_report(&report, dir.path()).unwrap();
        let csv = fs::read_to_string(dir.path().join("constants.csv")).unwrap();
        assert_eq!(csv, "R,C0,Q0,ratio,band_ok\n");
        assert_eq!(read_report(&dir.path().join("report.json")).unwrap(), report);
    }

    #[test]
    fn ratio_plot_is_svg() {
        let dir = tempfile::tempdir().unwrap();
        let mut report = RunReport::new("correspondence", &RunConfig::default());
        report.constants.rows = (0..4)
            .map(|k| {
                let r = f64::from(1 << k);
                ConstantsRow { r, c0: 6.0 * r, q0: 6.0 * r - 0.5, ratio: 1.0 - 0.5 / (6.0 * r), band_ok: true }
            })
            .collect();
        report.constants.fitted_c = Some(0.1);
        emit_report(&report, dir.path()).unwrap();
        let svg = fs::read_to_string(dir.path().join("ratio.svg")).unwrap();
        assert!(svg.starts_with("<svg"));
    }
}
