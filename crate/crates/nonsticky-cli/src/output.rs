//! Deterministic result artifacts: results.csv and summary.json.
//!
//! Both artifacts are byte-identical for identical `(config, seed)`
//! regardless of worker count, so neither carries timing; wall-clock
//! provenance lives in the manifest.

use nonsticky::studies::ConvergenceReport;

/// Render a float with 17 significant digits, enough for exact
/// round-tripping of any f64.
pub fn format_g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_g17(x: Option<f64>) -> String {
    x.map(format_g17).unwrap_or_default()
}

pub const CSV_HEADER: &str = "study,level,eps,arm,statistic,ci_low,ci_high,p_value,n_paths,in_fit";

/// Rows of the report as CSV. Columns are study-kind specific but always
/// include level, statistic, ci_low, ci_high and n_paths.
pub fn results_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            report.study.as_str(),
            row.level,
            opt_g17(row.eps),
            row.arm.as_deref().unwrap_or(""),
            format_g17(row.statistic),
            opt_g17(row.ci_low),
            opt_g17(row.ci_high),
            opt_g17(row.p_value),
            row.n_paths,
            row.in_fit.map(|b| b.to_string()).unwrap_or_default(),
        ));
    }
    out
}

/// The summary artifact: the full report, pretty-printed JSON.
pub fn summary_json(report: &ConvergenceReport) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(report).expect("report serialises");
    bytes.push(b'\n');
    bytes
}
