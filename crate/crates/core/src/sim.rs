//! Fixed-step closed-loop simulation of the augmented engagement state
//! (interceptor x, y, speed, heading; target x, y; achieved acceleration).
//!
//! Each step is a classical four-stage Runge-Kutta update. By default the
//! guidance command is re-evaluated at every stage; when the `B*` guard fires
//! anywhere in a step, the whole step is redone holding the previous command.

use std::fmt;

use log::warn;

use crate::error::{Error, Result};
use crate::guidance::{diagnose, GuidanceDiagnostics, GuidanceParams, Guards};
use crate::kinematics::{
    engagement_derivatives, EngagementState, RelativeState, StateDerivative, VehicleState,
};
use crate::saturation::{achieved_accel_rate, SaturationParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandMode {
    /// Recompute the command at every integrator stage.
    PerStage,
    /// Compute once per step and hold it across the stages.
    PerStep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Step size [s].
    pub dt: f64,
    /// Horizon [s].
    pub t_max: f64,
    /// Interception threshold on range [m].
    pub kill_radius: f64,
    /// `|e|` threshold that counts as converged [s].
    pub convergence_eps: f64,
    pub guards: Guards,
    pub command_mode: CommandMode,
    /// Replaces the guidance law with a constant command (open-loop runs).
    pub command_override: Option<f64>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_max: 200.0,
            kill_radius: 1.0,
            convergence_eps: 0.01,
            guards: Guards::default(),
            command_mode: CommandMode::PerStage,
            command_override: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        use crate::error::invalid;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt must be positive"));
        }
        if !(self.t_max > 0.0) {
            return Err(invalid("t_max must be positive"));
        }
        if !(self.kill_radius > 0.0) {
            return Err(invalid("kill_radius must be positive"));
        }
        if !(self.convergence_eps > 0.0) {
            return Err(invalid("convergence_eps must be positive"));
        }
        if !(self.guards.eps_denominator > 0.0 && self.guards.eps_b_star > 0.0) {
            return Err(invalid("guard thresholds must be positive"));
        }
        if !(self.guards.speed_floor > 0.0) {
            return Err(invalid("speed_floor must be positive"));
        }
        if let Some(eps) = self.guards.boundary_layer {
            if !(eps > 0.0) {
                return Err(invalid("boundary_layer must be positive"));
            }
        }
        Ok(())
    }
}

/// A single fully specified run.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: String,
    pub initial: EngagementState,
    pub guidance: GuidanceParams,
    pub saturation: SaturationParams,
    pub config: SimConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub t: f64,
    pub interceptor: VehicleState,
    pub target: VehicleState,
    pub rel: RelativeState,
    pub diag: GuidanceDiagnostics,
    pub a_i: f64,
    /// Command actually fed to the saturation model at this sample.
    pub a_cmd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Clamp,
    BStarGuard,
    Infeasible,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Clamp => "clamp",
            EventKind::BStarGuard => "b_star_guard",
            EventKind::Infeasible => "infeasible",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Intercepted,
    HorizonReached,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub records: Vec<Record>,
    pub events: Vec<Event>,
    pub termination: Termination,
    /// Refined kill-radius crossing time, when intercepted.
    pub t_f: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub intercepted: bool,
    pub t_f: Option<f64>,
    /// Closest logged approach [m].
    pub miss: f64,
    pub impact_time_error: Option<f64>,
    pub convergence_time: Option<f64>,
    /// Integral of a_I^2 up to t_f (or the last sample) [m^2/s^3].
    pub control_effort_j: f64,
    pub peak_a_i: f64,
    pub peak_a_cmd: f64,
    pub clamp_events: usize,
    pub guard_events: usize,
    pub infeasible_events: usize,
}

pub struct StepOutput {
    pub next: EngagementState,
    /// Sample of the state the step started from.
    pub record: Record,
    pub clamped: bool,
    pub guarded: bool,
}

#[derive(Clone, Copy)]
struct Stage {
    rate: StateDerivative,
    cmd: f64,
    diag: GuidanceDiagnostics,
    rel: RelativeState,
    guarded: bool,
}

fn evaluate_stage(
    state: &EngagementState,
    hold: Option<f64>,
    cfg: &SimConfig,
    gp: &GuidanceParams,
    sp: &SaturationParams,
) -> Result<Stage> {
    let mut s = *state;
    s.a_i = sp.nudge_inside(s.a_i);
    let rel = s.relative()?;
    let diag = diagnose(&s, &rel, gp, sp, &cfg.guards)?;
    let guarded = diag.b_star_guard && cfg.command_override.is_none();
    let cmd = match (cfg.command_override, hold) {
        (Some(c), _) => sp.clamp_command(c),
        (None, Some(h)) => h,
        // NaN here is never integrated: the caller retries with a hold.
        (None, None) => diag.a_cmd_clamped,
    };
    let rate_a = achieved_accel_rate(s.a_i, cmd, sp)?;
    let rate = engagement_derivatives(&s, rate_a, cfg.guards.speed_floor)?;
    Ok(Stage {
        rate,
        cmd,
        diag,
        rel,
        guarded,
    })
}

/// Advances the engagement by one step of `cfg.dt`.
///
/// `prev_cmd` is the command applied at the start of the previous step; it
/// is held for the whole step when the `B*` guard fires.
pub fn step(
    state: &EngagementState,
    prev_cmd: f64,
    cfg: &SimConfig,
    gp: &GuidanceParams,
    sp: &SaturationParams,
) -> Result<StepOutput> {
    let dt = cfg.dt;
    let first = evaluate_stage(state, None, cfg, gp, sp)?;
    let mut guarded = first.guarded;
    let mut hold = if guarded {
        Some(prev_cmd)
    } else {
        match cfg.command_mode {
            CommandMode::PerStep => Some(first.cmd),
            CommandMode::PerStage => None,
        }
    };

    let (k1, rates, clamped) = loop {
        let k1 = match hold {
            Some(h) if h.to_bits() != first.cmd.to_bits() => {
                evaluate_stage(state, hold, cfg, gp, sp)?
            }
            _ => first,
        };
        let mut stages = [k1; 4];
        let mut retry = false;
        for i in 1..4 {
            let h = if i == 3 { dt } else { 0.5 * dt };
            let st = evaluate_stage(&state.advanced(&stages[i - 1].rate, h), hold, cfg, gp, sp)?;
            if hold.is_none() && st.guarded {
                retry = true;
                break;
            }
            stages[i] = st;
        }
        if retry {
            hold = Some(prev_cmd);
            guarded = true;
            continue;
        }
        let clamped = if hold.is_none() {
            stages.iter().any(|s| s.diag.clamped)
        } else {
            !guarded && first.diag.clamped
        };
        break (k1, stages.map(|s| s.rate), clamped);
    };

    let incr = (rates[0] + rates[1] * 2.0 + rates[2] * 2.0 + rates[3]) * (1.0 / 6.0);
    let mut next = state.advanced(&incr, dt).wrapped();
    next.t_el = state.t_el + dt;
    next.a_i = sp.nudge_inside(next.a_i);
    if !next.is_finite() {
        return Err(Error::NonFinite {
            what: "engagement state",
            t: next.t_el,
        });
    }
    if !(next.a_i > sp.a_min && next.a_i < sp.a_max) {
        return Err(Error::OutOfEnvelope {
            a_i: next.a_i,
            a_min: sp.a_min,
            a_max: sp.a_max,
        });
    }
    if next.interceptor.speed < cfg.guards.speed_floor {
        return Err(Error::SpeedFloor {
            speed: next.interceptor.speed,
            floor: cfg.guards.speed_floor,
        });
    }

    // Flags describe the whole step that starts at this sample.
    let diag = GuidanceDiagnostics {
        clamped,
        b_star_guard: guarded,
        ..first.diag
    };
    let record = Record {
        t: state.t_el,
        interceptor: state.interceptor,
        target: state.target,
        rel: k1.rel,
        diag,
        a_i: state.a_i,
        a_cmd: k1.cmd,
    };
    Ok(StepOutput {
        next,
        record,
        clamped,
        guarded,
    })
}

fn snapshot(
    state: &EngagementState,
    rel: RelativeState,
    prev_cmd: f64,
    cfg: &SimConfig,
    gp: &GuidanceParams,
    sp: &SaturationParams,
) -> Record {
    let diag = diagnose(state, &rel, gp, sp, &cfg.guards).unwrap_or(GuidanceDiagnostics {
        t_go: f64::NAN,
        e: f64::NAN,
        e_dot: f64::NAN,
        f: f64::NAN,
        b: f64::NAN,
        f_star: f64::NAN,
        b_star: f64::NAN,
        s_val: f64::NAN,
        g_val: f64::NAN,
        a_cmd_raw: f64::NAN,
        a_cmd_clamped: f64::NAN,
        clamped: false,
        b_star_guard: true,
        infeasible: false,
    });
    let a_cmd = match cfg.command_override {
        Some(c) => sp.clamp_command(c),
        None if diag.b_star_guard => prev_cmd,
        None => diag.a_cmd_clamped,
    };
    Record {
        t: state.t_el,
        interceptor: state.interceptor,
        target: state.target,
        rel,
        diag,
        a_i: state.a_i,
        a_cmd,
    }
}

/// Integrates a scenario until the kill radius is crossed or the horizon
/// is reached. Aborts (speed floor, non-finite state, degenerate geometry)
/// are returned as errors.
pub fn run(scenario: &Scenario) -> Result<(SimResult, TrajectoryLog)> {
    let cfg = &scenario.config;
    let gp = &scenario.guidance;
    let sp = &scenario.saturation;
    cfg.validate()?;
    gp.validate()?;
    sp.validate()?;

    let mut state = scenario.initial;
    state.t_el = 0.0;
    let mut records = Vec::with_capacity((cfg.t_max / cfg.dt).min(1e7) as usize + 2);
    let mut events = Vec::new();
    let mut prev_cmd = 0.0;
    let mut warned_infeasible = false;
    let mut k: u64 = 0;

    let termination = loop {
        let rel = match state.relative() {
            Ok(rel) => rel,
            Err(Error::CoLocated { .. }) => break Termination::Intercepted,
            Err(e) => return Err(e),
        };
        if rel.r <= cfg.kill_radius {
            records.push(snapshot(&state, rel, prev_cmd, cfg, gp, sp));
            break Termination::Intercepted;
        }
        if state.t_el >= cfg.t_max - 0.5 * cfg.dt {
            records.push(snapshot(&state, rel, prev_cmd, cfg, gp, sp));
            break Termination::HorizonReached;
        }

        let out = step(&state, prev_cmd, cfg, gp, sp)?;
        let t = out.record.t;
        if out.clamped {
            events.push(Event { t, kind: EventKind::Clamp });
        }
        if out.guarded {
            events.push(Event {
                t,
                kind: EventKind::BStarGuard,
            });
        }
        if out.record.diag.infeasible && cfg.command_override.is_none() {
            events.push(Event {
                t,
                kind: EventKind::Infeasible,
            });
            if !warned_infeasible {
                warn!(
                    "{}: remaining time {:.3} s is shorter than the straight-line closing time at t = {t:.3} s",
                    scenario.label,
                    gp.impact_time - t
                );
                warned_infeasible = true;
            }
        }
        prev_cmd = out.record.a_cmd;
        records.push(out.record);
        k += 1;
        state = out.next;
        state.t_el = k as f64 * cfg.dt;
    };

    let t_f = match termination {
        Termination::Intercepted => Some(crossing_time(&records, cfg.kill_radius)),
        Termination::HorizonReached => None,
    };
    let log = TrajectoryLog {
        records,
        events,
        termination,
        t_f,
    };
    let result = compute_metrics(&log, gp, cfg.convergence_eps);
    Ok((result, log))
}

/// Time at which range crosses `kill_radius`, from a quadratic through the
/// last three samples (linear when fewer are available).
pub fn crossing_time(records: &[Record], kill_radius: f64) -> f64 {
    let n = records.len();
    if n == 0 {
        return 0.0;
    }
    let last = &records[n - 1];
    if n == 1 || last.rel.r > kill_radius {
        return last.t;
    }
    let prev = &records[n - 2];
    let linear = {
        let (r0, r1) = (prev.rel.r, last.rel.r);
        if r0 == r1 {
            last.t
        } else {
            prev.t + (last.t - prev.t) * (r0 - kill_radius) / (r0 - r1)
        }
    };
    if n < 3 {
        return linear;
    }
    let p = &records[n - 3];
    // Newton form in tau = t - t_{n-2}.
    let (t0, t1, t2) = (p.t, prev.t, last.t);
    let (r0, r1, r2) = (p.rel.r, prev.rel.r, last.rel.r);
    let d01 = (r1 - r0) / (t1 - t0);
    let d12 = (r2 - r1) / (t2 - t1);
    let d012 = (d12 - d01) / (t2 - t0);
    // r(t) = r1 + d12 (t - t1) + d012 (t - t1)(t - t2)
    // Solve for t in [t1, t2] with u = t - t1, h = t2 - t1.
    let h = t2 - t1;
    let qa = d012;
    let qb = d12 - d012 * h;
    let qc = r1 - kill_radius;
    let roots = if qa.abs() < 1e-14 * qb.abs().max(1.0) {
        vec![-qc / qb]
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return linear;
        }
        let sq = disc.sqrt();
        let q = -0.5 * (qb + qb.signum() * sq);
        vec![q / qa, qc / q]
    };
    roots
        .into_iter()
        .filter(|u| u.is_finite() && *u >= -1e-12 && *u <= h * (1.0 + 1e-9))
        .map(|u| t1 + u)
        .next()
        .unwrap_or(linear)
}

/// Outcome metrics of a logged run.
pub fn compute_metrics(
    log: &TrajectoryLog,
    gp: &GuidanceParams,
    convergence_eps: f64,
) -> SimResult {
    let recs = &log.records;
    let intercepted = log.termination == Termination::Intercepted;
    let miss = recs
        .iter()
        .map(|r| r.rel.r)
        .fold(f64::INFINITY, f64::min);

    let convergence_time = match recs.iter().rposition(|r| !(r.diag.e.abs() < convergence_eps)) {
        None => recs.first().map(|r| r.t),
        Some(i) if i + 1 < recs.len() => Some(recs[i + 1].t),
        Some(_) => None,
    };

    let end = log.t_f.unwrap_or_else(|| recs.last().map_or(0.0, |r| r.t));
    let mut j = 0.0;
    for w in recs.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.t >= end {
            break;
        }
        let (t1, a1) = if b.t > end {
            let frac = (end - a.t) / (b.t - a.t);
            (end, a.a_i + frac * (b.a_i - a.a_i))
        } else {
            (b.t, b.a_i)
        };
        j += 0.5 * (t1 - a.t) * (a.a_i * a.a_i + a1 * a1);
    }

    let peak = |f: fn(&Record) -> f64| {
        recs.iter()
            .map(f)
            .filter(|v| v.is_finite())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    };
    let count = |kind| log.events.iter().filter(|e| e.kind == kind).count();

    SimResult {
        intercepted,
        t_f: log.t_f,
        miss,
        impact_time_error: log.t_f.map(|t| t - gp.impact_time),
        convergence_time,
        control_effort_j: j,
        peak_a_i: peak(|r| r.a_i),
        peak_a_cmd: peak(|r| r.a_cmd),
        clamp_events: count(EventKind::Clamp),
        guard_events: count(EventKind::BStarGuard),
        infeasible_events: count(EventKind::Infeasible),
    }
}
