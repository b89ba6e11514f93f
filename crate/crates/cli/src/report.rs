// SPDX-License-Identifier: Apache-2.0

//! Table and JSON-lines renderings of a [`CheckReport`].

use std::fmt::Write as _;

use serde_json::Value;

use crate::checks::{CheckName, CheckReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    JsonLines,
}

pub fn render(report: &CheckReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => render_table(report),
        ReportFormat::JsonLines => render_jsonl(report),
    }
}

fn status(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn render_table(report: &CheckReport) -> String {
    let mut out = String::new();
    writeln!(out, "{:<24} {:>10} {:>10}  status", "check", "residual", "tolerance").unwrap();
    for r in &report.records {
        let residual = r.residual.map_or("error".to_string(), |x| format!("{x:.2e}"));
        writeln!(
            out,
            "{:<24} {:>10} {:>10.2e}  {}",
            r.check.name(),
            residual,
            r.tolerance,
            status(r.passed)
        )
        .unwrap();
    }
    writeln!(out, "overall: {}", status(report.passed())).unwrap();
    out
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

/// 17 significant digits; non-finite values become strings.
fn json_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        json_str(&x.to_string())
    }
}

pub fn render_jsonl(report: &CheckReport) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "{{\"record\":\"header\",\"scenario_sha256\":{},\"checks\":{}}}",
        json_str(&report.digest),
        report.records.len()
    )
    .unwrap();
    for r in &report.records {
        writeln!(
            out,
            "{{\"record\":\"check\",\"check\":{},\"inputs\":{},\"residual\":{},\"tolerance\":{},\"status\":\"{}\",\"wall_s\":{},\"detail\":{}}}",
            json_str(r.check.name()),
            json_str(&r.inputs),
            r.residual.map_or("null".into(), json_f64),
            json_f64(r.tolerance),
            status(r.passed),
            r.wall_s.map_or("null".into(), json_f64),
            json_str(&r.detail),
        )
        .unwrap();
    }
    let failed = report.records.iter().filter(|r| !r.passed).count();
    writeln!(
        out,
        "{{\"record\":\"summary\",\"status\":\"{}\",\"passed\":{},\"failed\":{}}}",
        status(report.passed()),
        report.records.len() - failed,
        failed
    )
    .unwrap();
    out
}

/// Per-check `(name, residual, tolerance, passed)` read back from JSON lines.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRecord {
    pub check: CheckName,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

pub fn parse_jsonl(text: &str) -> Result<(String, Vec<ParsedRecord>, bool), String> {
    let mut digest = None;
    let mut records = Vec::new();
    let mut overall = None;
    for (i, line) in text.lines().enumerate() {
        let v: Value = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
        let field = |k: &str| v.get(k).ok_or_else(|| format!("line {}: missing `{k}`", i + 1));
        match field("record")?.as_str() {
            Some("header") => digest = field("scenario_sha256")?.as_str().map(str::to_string),
            Some("check") => records.push(ParsedRecord {
                check: field("check")?.as_str().unwrap_or_default().parse()?,
                residual: field("residual")?.as_f64(),
                tolerance: field("tolerance")?.as_f64().ok_or("tolerance is not a number")?,
                passed: field("status")? == "PASS",
            }),
            Some("summary") => overall = Some(field("status")? == "PASS"),
            _ => return Err(format!("line {}: unknown record", i + 1)),
        }
    }
    Ok((
        digest.ok_or("missing header record")?,
        records,
        overall.ok_or("missing summary record")?,
    ))
}

/// `time t` followed by the operator block, per evaluation time.
pub fn render_evolution(s: usize, series: &[(f64, clusterdyn_core::ManyBodyOperator)]) -> String {
    let mut out = format!("# F_{s}(t) from the cumulant series\n");
    for (t, op) in series {
        writeln!(out, "time {t:.16e}").unwrap();
        crate::format::write_operator(&mut out, op);
    }
    out
}
