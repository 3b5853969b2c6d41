use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Context;

use tpng_core::{Scenario, SimResult};

/// One line of the run summary.
pub struct SummaryRow {
    pub label: String,
    pub impact_time: f64,
    pub intercepted: bool,
    pub t_f: Option<f64>,
    pub miss: f64,
    pub convergence_time: Option<f64>,
    pub control_effort_j: f64,
    pub peak_a_i: f64,
    pub peak_a_cmd: f64,
    pub clamp_events: usize,
    pub guard_events: usize,
    pub infeasible_events: usize,
}

impl SummaryRow {
    pub fn new(s: &Scenario, r: &SimResult) -> Self {
        Self {
            label: s.label.clone(),
            impact_time: s.guidance.impact_time,
            intercepted: r.intercepted,
            t_f: r.t_f,
            miss: r.miss,
            convergence_time: r.convergence_time,
            control_effort_j: r.control_effort_j,
            peak_a_i: r.peak_a_i,
            peak_a_cmd: r.peak_a_cmd,
            clamp_events: r.clamp_events,
            guard_events: r.guard_events,
            infeasible_events: r.infeasible_events,
        }
    }
}

const COLUMNS: [&str; 12] = [
    "label",
    "t_d",
    "intercepted",
    "t_f",
    "miss",
    "t_conv",
    "J",
    "peak_a_i",
    "peak_a_cmd",
    "clamps",
    "guards",
    "infeasible",
];

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map_or("-".into(), |v| format!("{v:.prec$}"))
}

pub fn print_table(rows: &[SummaryRow]) {
    let width = rows.iter().map(|r| r.label.len()).max().unwrap_or(5).max(5);
    println!(
        "{:<width$} {:>7} {:>5} {:>10} {:>9} {:>8} {:>12} {:>9} {:>10} {:>7} {:>7} {:>7}",
        COLUMNS[0], COLUMNS[1], "hit", COLUMNS[3], COLUMNS[4], COLUMNS[5], COLUMNS[6], COLUMNS[7],
        COLUMNS[8], COLUMNS[9], COLUMNS[10], COLUMNS[11]
    );
    for r in rows {
        println!(
            "{:<width$} {:>7.2} {:>5} {:>10} {:>9.4} {:>8} {:>12.4} {:>9.4} {:>10.3} {:>7} {:>7} {:>7}",
            r.label,
            r.impact_time,
            if r.intercepted { "yes" } else { "no" },
            opt(r.t_f, 4),
            r.miss,
            opt(r.convergence_time, 3),
            r.control_effort_j,
            r.peak_a_i,
            r.peak_a_cmd,
            r.clamp_events,
            r.guard_events,
            r.infeasible_events
        );
    }
}

pub fn write_summary_csv(rows: &[SummaryRow], path: &Path) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    writeln!(w, "{}", COLUMNS.join(","))?;
    let num = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.label,
            r.impact_time,
            r.intercepted as u8,
            num(r.t_f),
            r.miss,
            num(r.convergence_time),
            r.control_effort_j,
            r.peak_a_i,
            r.peak_a_cmd,
            r.clamp_events,
            r.guard_events,
            r.infeasible_events
        )?;
    }
    w.flush()?;
    Ok(())
}
