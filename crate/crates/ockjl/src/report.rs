//! JSON and markdown renderings of an [`EvalReport`].

use std::fmt::Write as _;

use crate::error::Result;
use crate::experiment::{EvalReport, Stat};

pub fn to_json(report: &EvalReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn from_json(text: &str) -> Result<EvalReport> {
    Ok(serde_json::from_str(text)?)
}

fn cell(s: Option<Stat>) -> String {
    match s {
        Some(s) => format!("{:.2} ± {:.2}", s.mean, s.std),
        None => "-".to_string(),
    }
}

/// One row per method; times in milliseconds per 100 points.
pub fn to_markdown(report: &EvalReport) -> String {
    let mut s = String::new();
    s.push_str("| method | AUC | train ms/100 | test ms/100 | model bytes | AUC retained | train speedup | test speedup | space reduction |\n");
    s.push_str("|---|---|---|---|---|---|---|---|---|\n");
    for m in &report.methods {
        let r = m.ratios.as_ref();
        writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} |",
            m.method,
            cell(Some(m.auc)),
            cell(Some(m.train_ms_per_100)),
            cell(Some(m.test_ms_per_100)),
            cell(Some(m.model_bytes)),
            cell(r.map(|r| r.auc_retained)),
            cell(r.map(|r| r.train_speedup)),
            cell(r.map(|r| r.test_speedup)),
            cell(r.map(|r| r.space_reduction)),
        )
        .expect("writing to a String cannot fail");
    }
    s
}
