//! Static SVG figures of one or more logged runs.
//!
//! Four panels per figure group: trajectories, time-to-go, acceleration
//! (achieved and commanded, with bound lines) and impact-time error stacked
//! over interceptor speed. Output depends only on the logs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::sim::{Termination, TrajectoryLog};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 560.0;
const MAX_POINTS: usize = 1500;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

/// One run to draw.
#[derive(Debug, Clone, Copy)]
pub struct PlotRun<'a> {
    pub label: &'a str,
    pub log: &'a TrajectoryLog,
    pub a_min: f64,
    pub a_max: f64,
}

#[derive(Clone, Copy)]
enum Marker {
    Circle,
    Cross,
}

struct Series {
    label: Option<String>,
    color: &'static str,
    dashed: bool,
    width: f64,
    points: Vec<(f64, f64)>,
}

struct Panel {
    title: String,
    x_label: String,
    y_label: String,
    series: Vec<Series>,
    hlines: Vec<(f64, &'static str)>,
    markers: Vec<(f64, f64, Marker, &'static str)>,
    /// Fixed y-range; series are clipped to it.
    y_range: Option<(f64, f64)>,
}

impl Panel {
    fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            series: Vec::new(),
            hlines: Vec::new(),
            markers: Vec::new(),
            y_range: None,
        }
    }

    fn extent(&self) -> ((f64, f64), (f64, f64)) {
        let mut xr = (f64::INFINITY, f64::NEG_INFINITY);
        let mut yr = (f64::INFINITY, f64::NEG_INFINITY);
        let mut grow = |x: f64, y: f64| {
            if x.is_finite() {
                xr = (xr.0.min(x), xr.1.max(x));
            }
            if y.is_finite() {
                yr = (yr.0.min(y), yr.1.max(y));
            }
        };
        for s in &self.series {
            for &(x, y) in &s.points {
                grow(x, y);
            }
        }
        for &(x, y, _, _) in &self.markers {
            grow(x, y);
        }
        for &(y, _) in &self.hlines {
            grow(f64::NAN, y);
        }
        let fix = |r: (f64, f64)| {
            if !r.0.is_finite() {
                (0.0, 1.0)
            } else if r.1 - r.0 < 1e-12 {
                (r.0 - 0.5, r.1 + 0.5)
            } else {
                let pad = 0.04 * (r.1 - r.0);
                (r.0 - pad, r.1 + pad)
            }
        };
        (fix(xr), self.y_range.unwrap_or_else(|| fix(yr)))
    }

    fn render(&self, svg: &mut String, x0: f64, y0: f64, w: f64, h: f64) {
        let (left, right, top, bottom) = (72.0, 20.0, 34.0, 48.0);
        let (px0, py0) = (x0 + left, y0 + top);
        let (pw, ph) = (w - left - right, h - top - bottom);
        let ((xmin, xmax), (ymin, ymax)) = self.extent();
        let sx = |x: f64| px0 + (x - xmin) / (xmax - xmin) * pw;
        let sy = |y: f64| py0 + ph - (y.clamp(ymin, ymax) - ymin) / (ymax - ymin) * ph;

        let _ = write!(
            svg,
            r##"<rect x="{px0:.1}" y="{py0:.1}" width="{pw:.1}" height="{ph:.1}" fill="white" stroke="#333"/>"##
        );
        let _ = write!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="15">{}</text>"#,
            px0 + pw / 2.0,
            y0 + 20.0,
            xml_escape(&self.title)
        );
        for t in nice_ticks(xmin, xmax) {
            let x = sx(t);
            let _ = write!(
                svg,
                r##"<line x1="{x:.1}" y1="{py0:.1}" x2="{x:.1}" y2="{:.1}" stroke="#ddd"/><text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="11">{}</text>"##,
                py0 + ph,
                py0 + ph + 15.0,
                fmt_tick(t)
            );
        }
        for t in nice_ticks(ymin, ymax) {
            let y = sy(t);
            let _ = write!(
                svg,
                r##"<line x1="{px0:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{}</text>"##,
                px0 + pw,
                px0 - 5.0,
                y + 4.0,
                fmt_tick(t)
            );
        }
        let _ = write!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{}</text>"#,
            px0 + pw / 2.0,
            y0 + h - 10.0,
            xml_escape(&self.x_label)
        );
        let (lx, ly) = (x0 + 16.0, py0 + ph / 2.0);
        let _ = write!(
            svg,
            r#"<text x="{lx:.1}" y="{ly:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 {lx:.1} {ly:.1})">{}</text>"#,
            xml_escape(&self.y_label)
        );

        for &(y, color) in &self.hlines {
            let _ = write!(
                svg,
                r#"<line x1="{px0:.1}" y1="{0:.2}" x2="{1:.1}" y2="{0:.2}" stroke="{color}" stroke-dasharray="6 4" stroke-width="1.2"/>"#,
                sy(y),
                px0 + pw
            );
        }
        for s in &self.series {
            if s.points.is_empty() {
                continue;
            }
            let mut d = String::new();
            let mut pen_up = true;
            for &(x, y) in &s.points {
                if !(x.is_finite() && y.is_finite()) {
                    pen_up = true;
                    continue;
                }
                let _ = write!(d, "{}{:.2} {:.2} ", if pen_up { 'M' } else { 'L' }, sx(x), sy(y));
                pen_up = false;
            }
            let dash = if s.dashed { r#" stroke-dasharray="5 3""# } else { "" };
            let _ = write!(
                svg,
                r#"<path d="{}" fill="none" stroke="{}" stroke-width="{}"{dash}/>"#,
                d.trim_end(),
                s.color,
                s.width
            );
        }
        for &(x, y, m, color) in &self.markers {
            let (cx, cy) = (sx(x), sy(y));
            match m {
                Marker::Circle => {
                    let _ = write!(
                        svg,
                        r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="5" fill="none" stroke="{color}" stroke-width="1.5"/>"#
                    );
                }
                Marker::Cross => {
                    let _ = write!(
                        svg,
                        r#"<path d="M{:.2} {:.2} L{:.2} {:.2} M{:.2} {:.2} L{:.2} {:.2}" stroke="{color}" stroke-width="2"/>"#,
                        cx - 5.0,
                        cy - 5.0,
                        cx + 5.0,
                        cy + 5.0,
                        cx - 5.0,
                        cy + 5.0,
                        cx + 5.0,
                        cy - 5.0
                    );
                }
            }
        }
        let mut ly = py0 + 14.0;
        for s in self.series.iter().filter(|s| s.label.is_some()) {
            let lx = px0 + pw - 150.0;
            let dash = if s.dashed { r#" stroke-dasharray="5 3""# } else { "" };
            let _ = write!(
                svg,
                r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="2"{dash}/><text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
                lx + 22.0,
                s.color,
                lx + 27.0,
                ly + 4.0,
                xml_escape(s.label.as_deref().unwrap_or_default())
            );
            ly += 15.0;
        }
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if !(span > 0.0) || !span.is_finite() {
        return vec![];
    }
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn thin<T: Copy>(items: &[T]) -> impl Iterator<Item = T> + '_ {
    let stride = items.len().div_ceil(MAX_POINTS).max(1);
    let last = items.len().saturating_sub(1);
    items
        .iter()
        .enumerate()
        .filter(move |(i, _)| i % stride == 0 || *i == last)
        .map(|(_, v)| *v)
}

fn series_of(
    run: &PlotRun<'_>,
    color: &'static str,
    label: Option<String>,
    dashed: bool,
    width: f64,
    f: impl Fn(&crate::sim::Record) -> (f64, f64),
) -> Series {
    Series {
        label,
        color,
        dashed,
        width,
        points: thin(&run.log.records).map(|r| f(&r)).collect(),
    }
}

fn document(body: &str, height: f64) -> String {
    format!(
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg version="1.1" xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">
<rect width="100%" height="100%" fill="white"/>
{body}
</svg>
"#
    )
}

fn trajectory_panel(runs: &[PlotRun<'_>]) -> Panel {
    let mut p = Panel::new("Trajectory", "x [m]", "y [m]");
    for (k, run) in runs.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        p.series.push(series_of(run, color, Some(run.label.to_string()), false, 1.8, |r| {
            (r.interceptor.x, r.interceptor.y)
        }));
        p.series.push(series_of(run, color, None, true, 1.0, |r| (r.target.x, r.target.y)));
        if let (Some(first), Some(last)) = (run.log.records.first(), run.log.records.last()) {
            p.markers.push((first.interceptor.x, first.interceptor.y, Marker::Circle, color));
            p.markers.push((first.target.x, first.target.y, Marker::Circle, color));
            if run.log.termination == Termination::Intercepted {
                p.markers.push((last.interceptor.x, last.interceptor.y, Marker::Cross, color));
            }
        }
    }
    p
}

fn time_to_go_panel(runs: &[PlotRun<'_>]) -> Panel {
    let mut p = Panel::new("Time-to-go", "t [s]", "t_go [s]");
    for (k, run) in runs.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        p.series.push(series_of(run, color, Some(run.label.to_string()), false, 1.6, |r| {
            (r.t, r.diag.t_go)
        }));
    }
    p
}

fn acceleration_panel(runs: &[PlotRun<'_>]) -> Panel {
    let mut p = Panel::new("Acceleration (a_I solid, a_I^c dashed)", "t [s]", "acceleration [m/s^2]");
    let mut lo: f64 = 0.0;
    let mut hi: f64 = 0.0;
    for (k, run) in runs.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        p.series.push(series_of(run, color, None, true, 0.8, |r| (r.t, r.a_cmd)));
        p.series.push(series_of(run, color, Some(run.label.to_string()), false, 1.8, |r| {
            (r.t, r.a_i)
        }));
        for b in [run.a_min, run.a_max] {
            if !p.hlines.iter().any(|(y, _)| *y == b) {
                p.hlines.push((b, "#000"));
            }
        }
        lo = lo.min(run.a_min);
        hi = hi.max(run.a_max);
    }
    let pad = 0.5 * (hi - lo);
    p.y_range = Some((lo - pad, hi + pad));
    p
}

fn error_velocity_panels(runs: &[PlotRun<'_>]) -> (Panel, Panel) {
    let mut e = Panel::new("Impact-time error", "t [s]", "e [s]");
    let mut v = Panel::new("Interceptor speed", "t [s]", "V_I [m/s]");
    for (k, run) in runs.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        e.series.push(series_of(run, color, Some(run.label.to_string()), false, 1.6, |r| {
            (r.t, r.diag.e)
        }));
        v.series.push(series_of(run, color, None, false, 1.6, |r| (r.t, r.interceptor.speed)));
    }
    (e, v)
}

/// Renders the four panels as SVG documents, in file order
/// `trajectory`, `time_to_go`, `acceleration`, `error_velocity`.
pub fn render_svgs(runs: &[PlotRun<'_>]) -> Vec<(&'static str, String)> {
    let single = |p: Panel| {
        let mut body = String::new();
        p.render(&mut body, 0.0, 0.0, WIDTH, HEIGHT);
        document(&body, HEIGHT)
    };
    let (e, v) = error_velocity_panels(runs);
    let mut stacked = String::new();
    e.render(&mut stacked, 0.0, 0.0, WIDTH, HEIGHT);
    v.render(&mut stacked, 0.0, HEIGHT, WIDTH, HEIGHT);
    vec![
        ("trajectory.svg", single(trajectory_panel(runs))),
        ("time_to_go.svg", single(time_to_go_panel(runs))),
        ("acceleration.svg", single(acceleration_panel(runs))),
        ("error_velocity.svg", document(&stacked, 2.0 * HEIGHT)),
    ]
}

/// Writes the four figure panels for `runs` into `out_dir` (created if missing).
pub fn render_plots(runs: &[PlotRun<'_>], out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut paths = Vec::new();
    for (name, svg) in render_svgs(runs) {
        let path = out_dir.join(name);
        std::fs::write(&path, svg)?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;
    use crate::sim::run;

    fn logs() -> Vec<(String, TrajectoryLog)> {
        let spec = parse_scenario(
            "[sweep]\nimpact_time = [60.0, 70.0]\n[sim]\ndt = 0.001\nt_max = 1.0\n",
        )
        .unwrap();
        spec.expand()
            .iter()
            .map(|s| (s.label.clone(), run(s).unwrap().1))
            .collect()
    }

    #[test]
    fn ticks_are_round_numbers() {
        assert_eq!(nice_ticks(0.0, 10.0), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert!(nice_ticks(1.0, 1.0).is_empty());
        assert_eq!(fmt_tick(2.5), "2.5");
        assert_eq!(fmt_tick(1e-6), "1.0e-6");
    }

    #[test]
    fn four_files_into_a_fresh_directory() {
        let logs = logs();
        let runs: Vec<_> = logs
            .iter()
            .map(|(l, log)| PlotRun {
                label: l,
                log,
                a_min: -4.0,
                a_max: 8.0,
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("a/b/plots");
        let paths = render_plots(&runs[..1], &out).unwrap();
        assert_eq!(paths.len(), 4);
        assert!(paths.iter().all(|p| p.exists()));

        let svgs = render_svgs(&runs);
        let traj = &svgs[0].1;
        assert!(traj.starts_with("<?xml"));
        assert!(traj.contains(r#"<svg version="1.1""#));
        // Two launch circles per run.
        assert_eq!(traj.matches("<circle").count(), 4);
        assert_eq!(svgs, render_svgs(&runs));
    }
}
