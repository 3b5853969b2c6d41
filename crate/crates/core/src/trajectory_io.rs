//! Trajectory CSV files.
//!
//! One row per logged sample, angles in radians, floats written with the
//! shortest representation that parses back to the same value.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::{Record, TrajectoryLog};

pub const TRAJECTORY_HEADER: [&str; 19] = [
    "t", "x_i", "y_i", "x_t", "y_t", "r", "theta_los", "v_i", "gamma_i", "v_r", "v_theta", "t_go",
    "e", "s", "g", "a_cmd", "a_i", "clamped", "b_guard",
];

/// One parsed row of a trajectory file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x_i: f64,
    pub y_i: f64,
    pub x_t: f64,
    pub y_t: f64,
    pub r: f64,
    pub theta_los: f64,
    pub v_i: f64,
    pub gamma_i: f64,
    pub v_r: f64,
    pub v_theta: f64,
    pub t_go: f64,
    pub e: f64,
    pub s: f64,
    pub g: f64,
    pub a_cmd: f64,
    pub a_i: f64,
    pub clamped: bool,
    pub b_guard: bool,
}

impl From<&Record> for TrajectoryRow {
    fn from(r: &Record) -> Self {
        TrajectoryRow {
            t: r.t,
            x_i: r.interceptor.x,
            y_i: r.interceptor.y,
            x_t: r.target.x,
            y_t: r.target.y,
            r: r.rel.r,
            theta_los: r.rel.theta_los,
            v_i: r.interceptor.speed,
            gamma_i: r.interceptor.gamma,
            v_r: r.rel.v_r,
            v_theta: r.rel.v_theta,
            t_go: r.diag.t_go,
            e: r.diag.e,
            s: r.diag.s_val,
            g: r.diag.g_val,
            a_cmd: r.a_cmd,
            a_i: r.a_i,
            clamped: r.diag.clamped,
            b_guard: r.diag.b_star_guard,
        }
    }
}

impl TrajectoryRow {
    fn fields(&self) -> [String; 19] {
        let f = |v: f64| format!("{v}");
        let b = |v: bool| if v { "1".to_string() } else { "0".to_string() };
        [
            f(self.t),
            f(self.x_i),
            f(self.y_i),
            f(self.x_t),
            f(self.y_t),
            f(self.r),
            f(self.theta_los),
            f(self.v_i),
            f(self.gamma_i),
            f(self.v_r),
            f(self.v_theta),
            f(self.t_go),
            f(self.e),
            f(self.s),
            f(self.g),
            f(self.a_cmd),
            f(self.a_i),
            b(self.clamped),
            b(self.b_guard),
        ]
    }
}

pub fn write_trajectory<W: Write>(log: &TrajectoryLog, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_HEADER)?;
    for rec in &log.records {
        w.write_record(TrajectoryRow::from(rec).fields())?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `log` to `path`, creating parent directories.
pub fn write_trajectory_csv(log: &TrajectoryLog, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    write_trajectory(log, BufWriter::new(File::create(path)?))
}

fn parse_bool(s: &str, line: usize, col: &str) -> Result<bool> {
    match s.trim() {
        "0" | "false" => Ok(false),
        "1" | "true" => Ok(true),
        other => Err(Error::MalformedLog(format!(
            "line {line}: column {col}: expected 0/1, got '{other}'"
        ))),
    }
}

/// Parses a trajectory file, enforcing the exact header and row width.
pub fn read_trajectory<R: Read>(input: R) -> Result<Vec<TrajectoryRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(Error::MalformedLog("empty file".into())),
        Some(h) => h.map_err(|e| Error::MalformedLog(e.to_string()))?,
    };
    if header.iter().ne(TRAJECTORY_HEADER.iter().copied()) {
        return Err(Error::MalformedLog(format!(
            "header mismatch: expected '{}'",
            TRAJECTORY_HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::MalformedLog(format!("line {line}: {e}")))?;
        if rec.len() != TRAJECTORY_HEADER.len() {
            return Err(Error::MalformedLog(format!(
                "line {line}: expected {} fields, found {}",
                TRAJECTORY_HEADER.len(),
                rec.len()
            )));
        }
        let mut v = [0.0; 17];
        for (k, slot) in v.iter_mut().enumerate() {
            *slot = rec[k].trim().parse().map_err(|_| {
                Error::MalformedLog(format!(
                    "line {line}: column {}: '{}' is not a number",
                    TRAJECTORY_HEADER[k],
                    &rec[k]
                ))
            })?;
        }
        rows.push(TrajectoryRow {
            t: v[0],
            x_i: v[1],
            y_i: v[2],
            x_t: v[3],
            y_t: v[4],
            r: v[5],
            theta_los: v[6],
            v_i: v[7],
            gamma_i: v[8],
            v_r: v[9],
            v_theta: v[10],
            t_go: v[11],
            e: v[12],
            s: v[13],
            g: v[14],
            a_cmd: v[15],
            a_i: v[16],
            clamped: parse_bool(&rec[17], line, "clamped")?,
            b_guard: parse_bool(&rec[18], line, "b_guard")?,
        });
    }
    if rows.is_empty() {
        return Err(Error::MalformedLog("no data rows".into()));
    }
    Ok(rows)
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<TrajectoryRow>> {
    read_trajectory(File::open(path)?)
}
