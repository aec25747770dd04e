//! Plain-text and CSV output: test report bundles, power tables, and
//! bandwidth-sweep curves. Output depends only on its inputs, so identical
//! runs produce identical files (an optional header line aside).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::competitors::CompetitorReport;
use crate::data::Dataset;
use crate::dcov_test::TestReport;
use crate::error::Result;
use crate::simlab::{PowerTable, SweepPoint};

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn with_header(header: Option<&str>, body: String) -> String {
    match header {
        Some(h) => format!("# {h}\n{body}"),
        None => body,
    }
}

/// `key=value` summary of a dCov test run.
pub fn test_summary(report: &TestReport) -> String {
    let mut s = String::new();
    let d = &report.diagnostics;
    let _ = writeln!(s, "test=dcov");
    let _ = writeln!(s, "statistic={}", report.statistic);
    let _ = writeln!(s, "u_n={}", report.u_n);
    let _ = writeln!(s, "p_value={}", report.p_value);
    let _ = writeln!(s, "critical_value={}", report.critical_value);
    let _ = writeln!(s, "alpha={}", report.alpha);
    let _ = writeln!(s, "reject={}", report.reject);
    let _ = writeln!(s, "bootstrap_replicates={}", report.bootstrap_stats.len());
    if let Some(beta) = &report.mean_fit.beta_hat {
        let _ = writeln!(s, "beta_hat={}", join(beta));
    }
    if let Some(h) = report.mean_fit.bandwidth {
        let _ = writeln!(s, "bandwidth={h}");
    }
    let _ = writeln!(s, "mean_sse={}", report.mean_fit.objective);
    let _ = writeln!(s, "mean_converged={}", d.mean_converged);
    let _ = writeln!(s, "theta_hat={}", join(&report.variance_fit.theta_hat));
    let _ = writeln!(s, "variance_objective={}", report.variance_fit.objective);
    let _ = writeln!(s, "variance_converged={}", d.variance_converged);
    let _ = writeln!(s, "variance_floored={}", d.variance_floored);
    let _ = writeln!(s, "bootstrap_floored={}", d.bootstrap_floored);
    let _ = writeln!(s, "failed_replicates={}", d.failed_replicates);
    let _ = writeln!(s, "redrawn_replicates={}", d.redrawn_replicates);
    for note in &d.notes {
        let _ = writeln!(s, "note={note}");
    }
    s
}

pub fn competitor_summary(report: &CompetitorReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "test={}", report.which);
    let _ = writeln!(s, "statistic={}", report.statistic);
    let _ = writeln!(s, "p_value={}", report.p_value);
    let _ = writeln!(s, "critical_value={}", report.critical_value);
    let _ = writeln!(s, "alpha={}", report.alpha);
    let _ = writeln!(s, "reject={}", report.reject);
    let _ = writeln!(s, "bootstrap_replicates={}", report.bootstrap_stats.len());
    let _ = writeln!(s, "failed_replicates={}", report.failed_replicates);
    for note in &report.notes {
        let _ = writeln!(s, "note={note}");
    }
    s
}

/// `replicate,statistic` rows.
pub fn bootstrap_csv(stats: &[f64]) -> String {
    let mut s = String::from("replicate,statistic\n");
    for (b, v) in stats.iter().enumerate() {
        let _ = writeln!(s, "{},{}", b + 1, v);
    }
    s
}

/// Per-observation covariates, fitted mean, fitted σ, and `η̂`.
pub fn residuals_csv(ds: &Dataset, report: &TestReport) -> String {
    let mut s = String::from("index");
    for k in 0..ds.p() {
        let _ = write!(s, ",x{}", k + 1);
    }
    s.push_str(",y,fitted_mean,sigma,eta_hat\n");
    for i in 0..ds.n() {
        let _ = write!(s, "{}", i + 1);
        for v in ds.x_row(i) {
            let _ = write!(s, ",{v}");
        }
        let _ = writeln!(
            s,
            ",{},{},{},{}",
            ds.y()[i],
            report.mean_fit.fitted_values[i],
            report.variance_fit.sigma_values[i],
            report.residuals.values[i]
        );
    }
    s
}

/// Write `summary_dcov.txt`, `bootstrap_dcov.csv` and `residuals.csv` into
/// `dir`. Returns the written paths.
pub fn write_test_bundle(dir: &Path, ds: &Dataset, report: &TestReport, header: Option<&str>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let files = [
        ("summary_dcov.txt", with_header(header, test_summary(report))),
        ("bootstrap_dcov.csv", bootstrap_csv(&report.bootstrap_stats)),
        ("residuals.csv", residuals_csv(ds, report)),
    ];
    write_all(dir, &files)
}

pub fn write_competitor_bundle(dir: &Path, report: &CompetitorReport, header: Option<&str>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let files = [
        (
            &*format!("summary_{}.txt", report.which),
            with_header(header, competitor_summary(report)),
        ),
        (
            &*format!("bootstrap_{}.csv", report.which),
            bootstrap_csv(&report.bootstrap_stats),
        ),
    ];
    write_all(dir, &files)
}

fn write_all(dir: &Path, files: &[(&str, String)]) -> Result<Vec<PathBuf>> {
    files
        .iter()
        .map(|(name, body)| {
            let path = dir.join(name);
            fs::write(&path, body)?;
            Ok(path)
        })
        .collect()
}

pub const POWER_CSV_HEADER: &str = "model,mode,p,n,a,test,reps,rate,se,failures";

pub fn power_table_csv(table: &PowerTable) -> String {
    let mut s = format!("{POWER_CSV_HEADER}\n");
    for r in &table.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.model,
            r.mode.name(),
            r.p,
            r.n,
            r.a,
            r.test.name(),
            r.reps,
            r.rate(),
            r.se(),
            r.failures
        );
    }
    s
}

/// Markdown table laid out like a size/power table: one row per `(p, a)`,
/// one column per `(test, n)`.
pub fn power_table_markdown(table: &PowerTable) -> String {
    let mut columns: Vec<(&str, usize)> = Vec::new();
    let mut cells: BTreeMap<(String, usize, String), BTreeMap<(&str, usize), f64>> = BTreeMap::new();
    for r in &table.rows {
        let col = (r.test.name(), r.n);
        if !columns.contains(&col) {
            columns.push(col);
        }
        let key = (format!("{} {}", r.model, r.mode.name()), r.p, format!("{:.1}", r.a));
        cells.entry(key).or_default().insert(col, r.rate());
    }
    let mut s = String::from("| model | p | a |");
    for (t, n) in &columns {
        let _ = write!(s, " {t} n={n} |");
    }
    s.push_str("\n|---|---|---|");
    for _ in &columns {
        s.push_str("---|");
    }
    s.push('\n');
    for ((model, p, a), row) in &cells {
        let _ = write!(s, "| {model} | {p} | {a} |");
        for col in &columns {
            match row.get(col) {
                Some(v) => {
                    let _ = write!(s, " {v:.3} |");
                }
                None => s.push_str(" |"),
            }
        }
        s.push('\n');
    }
    s
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut s = String::from("c,rate,se\n");
    for pt in points {
        let _ = writeln!(s, "{},{},{}", pt.c, pt.rate, pt.se);
    }
    s
}
