//! Text formats: JSON lines for samples, CSV for histograms, JSON reports.
//!
//! Floats are written with 17 significant digits; non-finite values as `null`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::gluing::{ModelParams, SurfaceSummary};
use crate::stats::{ExperimentPlan, FiniteSizeTargets, MomentReport};

pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "null".to_string(), fmt_f64)
}

/// One sample as a JSON object with the fixed field order
/// `model,n,m,t,seed,index,B,I,genus,chi,components,connected`.
pub fn sample_json(params: &ModelParams, seed: u64, index: u64, s: &SurfaceSummary) -> String {
    format!(
        "{{\"model\":\"{}\",\"n\":{},\"m\":{},\"t\":{},\"seed\":{},\"index\":{},\"B\":{},\"I\":{},\"genus\":{},\"chi\":{},\"components\":{},\"connected\":{}}}",
        params.kind(),
        params.n(),
        params.m(),
        params.t(),
        seed,
        index,
        s.b,
        s.i,
        s.genus,
        s.chi,
        s.components,
        s.connected
    )
}

pub const SAMPLE_CSV_HEADER: &str = "model,n,m,t,seed,index,B,I,genus,chi,components,connected";

pub fn sample_csv(params: &ModelParams, seed: u64, index: u64, s: &SurfaceSummary) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        params.kind(),
        params.n(),
        params.m(),
        params.t(),
        seed,
        index,
        s.b,
        s.i,
        s.genus,
        s.chi,
        s.components,
        s.connected
    )
}

/// Run constants echoed at the top of every report.
pub fn plan_json(plan: &ExperimentPlan) -> String {
    let p = &plan.params;
    let mut out = format!(
        "{{\"model\":\"{}\",\"n\":{},\"m\":{},\"t\":{},\"samples\":{},\"seed\":{},\"log_n\":{},\"log_m\":{},\"r\":{}",
        p.kind(),
        p.n(),
        p.m(),
        p.t(),
        plan.samples,
        plan.master_seed,
        fmt_f64((p.n() as f64).ln()),
        if p.m() > 0 { fmt_f64((p.m() as f64).ln()) } else { "null".into() },
        fmt_f64(plan.r()),
    );
    if let Ok(norm) = plan.normalization() {
        write!(
            out,
            ",\"b_center\":{},\"b_scale\":{},\"genus_center\":{},\"genus_scale\":{}",
            fmt_f64(norm.b_center),
            fmt_f64(norm.b_scale),
            fmt_f64(norm.genus_center),
            fmt_f64(norm.genus_scale)
        )
        .unwrap();
    }
    out.push('}');
    out
}

pub fn moments_json(report: &MomentReport, targets: Option<&FiniteSizeTargets>) -> String {
    let mut out = format!(
        "{{\"samples\":{},\"mean_B\":{},\"var_B\":{},\"mean_genus\":{},\"var_genus\":{},\"corr_BG\":{},\"se_mean_B\":{},\"se_var_B\":{},\"se_mean_genus\":{},\"se_var_genus\":{},\"se_corr\":{}",
        report.samples,
        fmt_f64(report.mean_b),
        fmt_f64(report.var_b),
        fmt_f64(report.mean_genus),
        fmt_f64(report.var_genus),
        fmt_opt(report.corr),
        fmt_f64(report.se_mean_b),
        fmt_f64(report.se_var_b),
        fmt_f64(report.se_mean_genus),
        fmt_f64(report.se_var_genus),
        fmt_opt(report.se_corr),
    );
    if let Some(t) = targets {
        write!(
            out,
            ",\"target_mean_B\":{},\"target_var_B\":{},\"target_mean_genus\":{},\"target_var_genus\":{},\"target_corr\":{}",
            fmt_f64(t.mean_b),
            fmt_f64(t.var_b),
            fmt_f64(t.mean_genus),
            fmt_f64(t.var_genus),
            fmt_f64(t.corr)
        )
        .unwrap();
    }
    out.push('}');
    out
}

/// `value,count` rows under a header.
pub fn histogram_csv<K: std::fmt::Display>(header: &str, counts: &BTreeMap<K, u64>) -> String {
    let mut out = format!("{header},count\n");
    for (k, c) in counts {
        writeln!(out, "{k},{c}").unwrap();
    }
    out
}

/// Escapes a string for inclusion in a JSON string literal.
pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => write!(out, "\\u{:04x}", c as u32).unwrap(),
            c => out.push(c),
        }
    }
    out
}
