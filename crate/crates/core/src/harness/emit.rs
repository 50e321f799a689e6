use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::run::{Check, ExperimentReport, MethodSummary};
use crate::error::{Error, Result};

pub const RESULTS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const AVERAGE_PLOT_FILE: &str = "plotdata_average.csv";
pub const RELERR_PLOT_FILE: &str = "plotdata_relerr.csv";

#[derive(Serialize)]
struct Summary<'a> {
    seed: u64,
    observables: &'a [String],
    steps: &'a [usize],
    gains: &'a [f64],
    realized_gains: &'a [Vec<f64>],
    selected: Vec<&'a str>,
    flagged: Vec<&'a str>,
    gate_counts_match: bool,
    methods: &'a [MethodSummary],
    checks: Vec<Check>,
    config: &'a ExperimentConfig,
}

/// `step,observable,method,mean,sigma,ideal,rel_err_pct,fallback,physical`.
pub fn results_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("step,observable,method,mean,sigma,ideal,rel_err_pct,fallback,physical\n");
    for e in &report.entries {
        for m in &e.estimates {
            let v = m.result.value;
            let rel = 100.0 * (v.mean - e.ideal).abs() / e.ideal.abs();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                e.step,
                report.labels[e.observable],
                m.method,
                v.mean,
                v.sigma,
                e.ideal,
                rel,
                m.result.fallback_applied,
                m.result.physical
            );
        }
    }
    out
}

/// Selected-observable averages per step and method, with the ideal.
pub fn average_plot_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("step,method,mean,sigma,ideal\n");
    for s in &report.summaries {
        for p in &s.per_step {
            let _ = writeln!(out, "{},{},{},{},{}", p.step, s.method, p.average.mean, p.average.sigma, p.ideal);
        }
    }
    out
}

pub fn relerr_plot_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("step,method,rel_err_pct,abs_err,reliable\n");
    for s in &report.summaries {
        for p in &s.per_step {
            let _ = writeln!(out, "{},{},{},{},{}", p.step, s.method, p.error.pct, p.error.abs, p.error.reliable);
        }
    }
    out
}

pub fn summary_json(report: &ExperimentReport) -> String {
    let names = |ids: &[usize]| ids.iter().map(|&i| report.labels[i].as_str()).collect();
    let summary = Summary {
        seed: report.seed,
        observables: &report.labels,
        steps: &report.steps,
        gains: &report.gains,
        realized_gains: &report.realized_gains,
        selected: names(&report.selected),
        flagged: names(&report.flagged),
        gate_counts_match: report.gate_counts_match,
        methods: &report.summaries,
        checks: report.checks(),
        config: &report.config,
    };
    serde_json::to_string_pretty(&summary).expect("summary serializes")
}

/// Writes the report files into `out_dir`, creating it if needed, and
/// returns their paths.
pub fn emit_report(report: &ExperimentReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let files = [
        (RESULTS_FILE, results_csv(report)),
        (SUMMARY_FILE, summary_json(report)),
        (AVERAGE_PLOT_FILE, average_plot_csv(report)),
        (RELERR_PLOT_FILE, relerr_plot_csv(report)),
    ];
    let mut paths = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = out_dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}
