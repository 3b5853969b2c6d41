//! Invariant checks that can be replayed on a trajectory file after the fact.

use std::fmt;

use crate::trajectory_io::TrajectoryRow;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The check does not apply to this trajectory.
    Skip,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckStatus::Pass => "PASS",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Skip => "SKIP",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    pub status: CheckStatus,
    pub detail: String,
}

impl CheckReport {
    fn new(name: &'static str, ok: bool, detail: String) -> Self {
        Self {
            name,
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            detail,
        }
    }
}

/// Limits the checks are run against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckLimits {
    pub a_min: f64,
    pub a_max: f64,
    pub alpha: f64,
    /// Reaching gain `M`; one step's reaching decrement `M dt` sets the band
    /// around `S = 0` that counts as reached.
    pub reaching_gain: f64,
    /// Allowed relative deviation of the fitted error decay rate from `alpha`.
    pub decay_tolerance: f64,
}

/// Index of the first sample at which the sliding variable has crossed zero
/// or entered the band `|S| <= band`.
pub fn surface_reach_index(s: &[f64], band: f64) -> Option<usize> {
    let s0 = *s.first()?;
    s.iter()
        .position(|v| v.abs() <= band || v.signum() != s0.signum())
}

fn reach_band(rows: &[TrajectoryRow], lim: &CheckLimits) -> f64 {
    let dt = match rows {
        [a, b, ..] => b.t - a.t,
        _ => 0.0,
    };
    lim.reaching_gain * dt
}

pub fn check_time_axis(rows: &[TrajectoryRow]) -> CheckReport {
    let bad = rows.windows(2).position(|w| !(w[1].t > w[0].t));
    let non_finite = rows
        .iter()
        .position(|r| ![r.t, r.x_i, r.y_i, r.x_t, r.y_t, r.r, r.v_i, r.a_i].iter().all(|v| v.is_finite()));
    match (bad, non_finite) {
        (None, None) => CheckReport::new("well_formed", true, format!("{} rows", rows.len())),
        (Some(i), _) => CheckReport::new(
            "well_formed",
            false,
            format!("time not strictly increasing at data row {}", i + 2),
        ),
        (None, Some(i)) => CheckReport::new(
            "well_formed",
            false,
            format!("non-finite state value at data row {}", i + 1),
        ),
    }
}

pub fn check_accel_bounds(rows: &[TrajectoryRow], lim: &CheckLimits) -> CheckReport {
    let violations: Vec<_> = rows
        .iter()
        .filter(|r| !(r.a_i > lim.a_min && r.a_i < lim.a_max))
        .collect();
    let lo = rows.iter().map(|r| r.a_i).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.a_i).fold(f64::NEG_INFINITY, f64::max);
    let detail = match violations.first() {
        None => format!("a_i in [{lo:.6}, {hi:.6}] inside ({}, {})", lim.a_min, lim.a_max),
        Some(v) => format!(
            "{} samples outside ({}, {}); first at t = {} (a_i = {})",
            violations.len(),
            lim.a_min,
            lim.a_max,
            v.t,
            v.a_i
        ),
    };
    CheckReport::new("accel_bounds", violations.is_empty(), detail)
}

/// `|S|` must shrink across every reaching-phase step that was neither
/// clamped nor guarded.
pub fn check_surface_decrease(rows: &[TrajectoryRow], lim: &CheckLimits) -> CheckReport {
    let s: Vec<f64> = rows.iter().map(|r| r.s).collect();
    let reach = surface_reach_index(&s, reach_band(rows, lim)).unwrap_or(rows.len());
    let mut checked = 0;
    let mut first_bad = None;
    for i in 1..reach {
        let prev = &rows[i - 1];
        if prev.clamped || prev.b_guard {
            continue;
        }
        checked += 1;
        if !(rows[i].s.abs() < prev.s.abs()) && first_bad.is_none() {
            first_bad = Some(i);
        }
    }
    match first_bad {
        None => CheckReport::new(
            "surface_decrease",
            true,
            format!("{checked} unflagged reaching steps, |S| decreasing"),
        ),
        Some(i) => CheckReport::new(
            "surface_decrease",
            false,
            format!(
                "|S| grew from {} to {} at t = {}",
                rows[i - 1].s.abs(),
                rows[i].s.abs(),
                rows[i].t
            ),
        ),
    }
}

/// Fitted exponential decay rate of `e` after the surface is reached, over
/// the window where `|e|` is still well above the chattering floor.
pub fn fitted_error_decay(rows: &[TrajectoryRow], lim: &CheckLimits) -> Option<(f64, usize)> {
    let s: Vec<f64> = rows.iter().map(|r| r.s).collect();
    let reach = surface_reach_index(&s, reach_band(rows, lim))?;
    let e0 = rows[reach].e.abs();
    let floor = (0.02 * e0).max(5e-3);
    let window: Vec<(f64, f64)> = rows[reach..]
        .iter()
        .take_while(|r| r.e.abs() > floor && r.e.signum() == rows[reach].e.signum())
        .map(|r| (r.t, r.e.abs().ln()))
        .collect();
    if window.len() < 10 {
        return None;
    }
    let n = window.len() as f64;
    let mt = window.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = window.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = window.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    let var: f64 = window.iter().map(|p| (p.0 - mt).powi(2)).sum();
    Some((-cov / var, window.len()))
}

pub fn check_error_decay(rows: &[TrajectoryRow], lim: &CheckLimits) -> CheckReport {
    match fitted_error_decay(rows, lim) {
        None => CheckReport {
            name: "error_decay",
            status: CheckStatus::Skip,
            detail: "sliding surface not reached with a measurable error".into(),
        },
        Some((rate, n)) => {
            let rel = (rate - lim.alpha).abs() / lim.alpha;
            CheckReport::new(
                "error_decay",
                rel <= lim.decay_tolerance,
                format!(
                    "fitted rate {rate:.5} 1/s vs alpha {} ({:.2}% off, {n} samples)",
                    lim.alpha,
                    100.0 * rel
                ),
            )
        }
    }
}

pub fn run_checks(rows: &[TrajectoryRow], lim: &CheckLimits) -> Vec<CheckReport> {
    vec![
        check_time_axis(rows),
        check_accel_bounds(rows, lim),
        check_surface_decrease(rows, lim),
        check_error_decay(rows, lim),
    ]
}
