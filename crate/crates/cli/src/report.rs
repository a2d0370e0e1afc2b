//! The analysis report and its text rendering.

use std::fmt::Write as _;

use benford_ecp::critical::CriticalValueMethod;
use benford_ecp::digits::{benford_probabilities, FIRST_DIGITS};
use benford_ecp::{EcpEstimate, StatisticKind};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SkippedDetail {
    pub unparsed: u64,
    pub zero: u64,
    pub negative: u64,
    pub non_finite: u64,
}

/// One statistic with its null critical values and ECP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatisticRow {
    pub kind: StatisticKind,
    pub value: f64,
    pub critical_method: CriticalValueMethod,
    pub critical_95: f64,
    pub critical_99: f64,
    pub significant_95: bool,
    pub significant_99: bool,
    pub ecp: EcpEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub label: String,
    pub n: u64,
    pub skipped: u64,
    pub skipped_detail: SkippedDetail,
    pub contaminant: String,
    pub seed: u64,
    pub counts: Vec<u64>,
    pub statistics: Vec<StatisticRow>,
    pub mad_conformity: String,
    pub ssd_conformity: String,
    pub warnings: Vec<String>,
}

/// Fixed-width rendering with enough digits for every statistic's scale.
pub fn format_statistic(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.2}")
    } else if v.abs() >= 1.0 {
        format!("{v:.4}")
    } else {
        format!("{v:.6}")
    }
}

pub fn format_percent(f: f64) -> String {
    format!("{:.2}%", 100.0 * f)
}

fn marker(row: &StatisticRow) -> &'static str {
    if row.significant_99 {
        "*"
    } else if row.significant_95 {
        "†"
    } else {
        ""
    }
}

pub fn render_text(r: &AnalysisReport) -> String {
    let mut out = String::new();
    let d = &r.skipped_detail;
    let _ = writeln!(out, "Benford first-digit analysis: {}", r.label);
    let _ = writeln!(
        out,
        "n: {} (skipped {}: {} unparsed, {} zero, {} negative, {} non-finite)",
        r.n, r.skipped, d.unparsed, d.zero, d.negative, d.non_finite
    );
    let _ = writeln!(out, "contaminant: {}", r.contaminant);
    let _ = writeln!(out, "seed: {}", r.seed);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<6}{:>10}{:>11}{:>11}",
        "digit", "count", "observed", "benford"
    );
    let benford = benford_probabilities(&FIRST_DIGITS).expect("first digits are supported");
    for (i, (&c, b)) in r.counts.iter().zip(benford.iter()).enumerate() {
        let obs = if r.n > 0 { c as f64 / r.n as f64 } else { 0.0 };
        let _ = writeln!(out, "{:<6}{:>10}{:>11.4}{:>11.4}", i + 1, c, obs, b);
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<8}{:>13}{:>13}{:>13}{:>5}{:>10}{:>9}  {:<10} {:<10} critical",
        "stat", "value", "p95", "p99", "sig", "ECP", "±SE", "method", "clamp"
    );
    for row in &r.statistics {
        let se = row
            .ecp
            .std_error
            .map(format_percent)
            .unwrap_or_else(|| "-".into());
        let method = if row.ecp.approximate {
            format!("{}~", row.ecp.method)
        } else {
            row.ecp.method.to_string()
        };
        let _ = writeln!(
            out,
            "{:<8}{:>13}{:>13}{:>13}{:>5}{:>10}{:>9}  {:<10} {:<10} {}",
            row.kind.as_str(),
            format_statistic(row.value),
            format_statistic(row.critical_95),
            format_statistic(row.critical_99),
            marker(row),
            format_percent(row.ecp.f),
            se,
            method,
            row.ecp.clamped,
            row.critical_method
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "MAD conformity: {}", r.mad_conformity);
    let _ = writeln!(out, "SSD conformity: {}", r.ssd_conformity);
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}
