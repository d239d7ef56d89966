//! CSV and markdown renderings of a [`MetricsReport`].

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

use super::MetricsReport;

pub const COLUMNS: [&str; 8] = [
    "method",
    "scenario",
    "chamfer",
    "hausdorff",
    "rmse_rotation_deg",
    "rmse_translation",
    "trials",
    "failures",
];

pub const TRIAL_COLUMNS: [&str; 14] = [
    "scenario",
    "trial",
    "method",
    "status",
    "chamfer",
    "hausdorff",
    "err_alpha_deg",
    "err_beta_deg",
    "err_gamma_deg",
    "rmse_translation",
    "gimbal_lock",
    "constellation",
    "flags",
    "error",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl ReportFormat {
    pub fn from_path(path: impl AsRef<Path>) -> Self {
        match path.as_ref().extension().and_then(|e| e.to_str()) {
            Some("md") | Some("markdown") => Self::Markdown,
            _ => Self::Csv,
        }
    }
}

fn cells(report: &MetricsReport) -> Vec<[String; 8]> {
    report
        .rows
        .iter()
        .map(|r| {
            [
                r.method.clone(),
                r.scenario.clone(),
                r.chamfer.to_string(),
                r.hausdorff.to_string(),
                r.rmse_rotation_deg.to_string(),
                r.rmse_translation.to_string(),
                r.trials.to_string(),
                r.failures.to_string(),
            ]
        })
        .collect()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_line<S: AsRef<str>>(fields: &[S]) -> String {
    let f: Vec<String> = fields.iter().map(|s| csv_field(s.as_ref())).collect();
    f.join(",") + "\n"
}

pub fn format_csv(report: &MetricsReport) -> String {
    let mut out = csv_line(&COLUMNS);
    for row in cells(report) {
        out.push_str(&csv_line(&row));
    }
    out
}

pub fn format_markdown(report: &MetricsReport) -> String {
    let mut out = format!("| {} |\n", COLUMNS.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(COLUMNS.len()));
    for row in cells(report) {
        let escaped: Vec<String> = row.iter().map(|c| c.replace('|', "\\|")).collect();
        let _ = writeln!(out, "| {} |", escaped.join(" | "));
    }
    out
}

pub fn format_trials_csv(report: &MetricsReport) -> String {
    let mut out = csv_line(&TRIAL_COLUMNS);
    for t in &report.trials {
        let scenario = report.scenarios[t.scenario].name.clone();
        let row: Vec<String> = match &t.outcome {
            Ok(m) => {
                let flags: Vec<String> = m.flags.iter().map(|f| format!("{f:?}")).collect();
                vec![
                    scenario,
                    t.trial.to_string(),
                    t.method.clone(),
                    "ok".into(),
                    m.chamfer.to_string(),
                    m.hausdorff.to_string(),
                    m.euler.diffs[0].to_string(),
                    m.euler.diffs[1].to_string(),
                    m.euler.diffs[2].to_string(),
                    m.rmse_translation.to_string(),
                    m.euler.gimbal_lock.to_string(),
                    m.chosen_constellation.map(|c| c.to_string()).unwrap_or_default(),
                    flags.join(";"),
                    String::new(),
                ]
            }
            Err(e) => {
                let mut row = vec![scenario, t.trial.to_string(), t.method.clone(), "failed".into()];
                row.extend(std::iter::repeat_n(String::new(), 9));
                row.push(e.clone());
                row
            }
        };
        out.push_str(&csv_line(&row));
    }
    out
}

pub fn emit_report(report: &MetricsReport, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    if report.rows.is_empty() {
        return Err(Error::invalid("report has no rows"));
    }
    let text = match format {
        ReportFormat::Csv => format_csv(report),
        ReportFormat::Markdown => format_markdown(report),
    };
    std::fs::write(path, text)?;
    Ok(())
}

pub fn emit_trials_csv(report: &MetricsReport, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_trials_csv(report))?;
    Ok(())
}
