//! Impact-time guidance on top of true proportional navigation (TPN).
//!
//! The exact TPN time-to-go
//!
//! ```text
//! t_go = -r (V_r + 2c) / D,    D = V_theta^2 + V_r^2 + 2 c V_r
//! ```
//!
//! defines the impact-time error `e = t_go - (t_d - t_el)`. Its first
//! derivative is affine in the achieved acceleration (`e' = F + B a_I`) and,
//! through the saturation model, its second derivative is affine in the
//! command (`e'' = F* + B* a_cmd`). The command drives the sliding variable
//! `S = e' + alpha e` to zero with the reaching law `S' = -(M / g(S)) sign(S)`,
//! where `g` shapes the gain up to `M / theta_g` far from the surface.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kinematics::{EngagementState, RelativeState, DEFAULT_SPEED_FLOOR};
use crate::saturation::{saturation_gain, SaturationParams};

/// Reaching law used while the sliding variable is away from zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReachingLaw {
    /// `S' = -M sign(S)`.
    Standard,
    /// `S' = -(M / g(S)) sign(S)`.
    Exponential,
}

impl fmt::Display for ReachingLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReachingLaw::Standard => "standard",
            ReachingLaw::Exponential => "exponential",
        })
    }
}

impl FromStr for ReachingLaw {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "standard" | "std" => Ok(ReachingLaw::Standard),
            "exponential" | "exp" => Ok(ReachingLaw::Exponential),
            other => Err(invalid(format!(
                "variant must be 'standard' or 'exponential', got '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceParams {
    /// TPN proportionality factor `c` [m/s].
    pub tpn_factor: f64,
    /// Surface gain `alpha` [1/s]; sets the error decay rate on the surface.
    pub surface_gain: f64,
    /// Reaching gain `M`.
    pub reaching_gain: f64,
    /// Gain-shaping floor `theta_g` in (0, 1).
    pub shaping_floor: f64,
    /// Gain-shaping rate `kappa` > 0.
    pub shaping_rate: f64,
    /// Gain-shaping exponent `eta` >= 1.
    pub shaping_power: u32,
    /// Desired impact time `t_d` [s].
    pub impact_time: f64,
    pub variant: ReachingLaw,
}

impl GuidanceParams {
    /// Parameter set used for the baseline engagements: `c = 3 (V_I + V_T)`.
    pub fn baseline(v_i0: f64, v_t: f64, impact_time: f64) -> Self {
        Self {
            tpn_factor: 3.0 * (v_i0 + v_t),
            surface_gain: 1.2,
            reaching_gain: 1.0,
            shaping_floor: 0.6,
            shaping_rate: 5.0,
            shaping_power: 1,
            impact_time,
            variant: ReachingLaw::Exponential,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tpn_factor > 0.0 && self.tpn_factor.is_finite()) {
            return Err(invalid("c must be positive"));
        }
        if !(self.surface_gain > 0.0) {
            return Err(invalid("alpha must be positive"));
        }
        if !(self.reaching_gain > 0.0) {
            return Err(invalid("reaching_gain (M) must be positive"));
        }
        if !(self.shaping_floor > 0.0 && self.shaping_floor < 1.0) {
            return Err(invalid("theta_g must lie in (0,1)"));
        }
        if !(self.shaping_rate > 0.0) {
            return Err(invalid("kappa must be positive"));
        }
        if self.shaping_power < 1 {
            return Err(invalid("eta must be a positive integer"));
        }
        if !(self.impact_time > 0.0) {
            return Err(invalid("impact_time (t_d) must be positive"));
        }
        Ok(())
    }

    /// Checks `c` against the interception condition `c >> (V_I + V_T) / 2`.
    ///
    /// Below `1.5 (V_I0 + V_T)` the value is rejected; below `3 (V_I0 + V_T)`
    /// the returned flag asks the caller to warn.
    pub fn check_tpn_factor(&self, v_i0: f64, v_t: f64) -> Result<bool> {
        let sum = v_i0 + v_t;
        if self.tpn_factor < 1.5 * sum {
            return Err(invalid(format!(
                "c = {} is below 1.5 (V_I0 + V_T) = {}",
                self.tpn_factor,
                1.5 * sum
            )));
        }
        Ok(self.tpn_factor < 3.0 * sum)
    }
}

/// Numerical guards around the singular geometries of the guidance law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guards {
    /// Minimum `|D|` accepted by the time-to-go formula.
    pub eps_denominator: f64,
    /// Minimum `|B*|` before the command is considered singular.
    pub eps_b_star: f64,
    /// Minimum interceptor speed [m/s].
    pub speed_floor: f64,
    /// Optional boundary layer: `sign(S)` becomes `tanh(S / eps)`.
    pub boundary_layer: Option<f64>,
}

impl Default for Guards {
    fn default() -> Self {
        Self {
            eps_denominator: 1e-6,
            eps_b_star: 1e-8,
            speed_floor: DEFAULT_SPEED_FLOOR,
            boundary_layer: None,
        }
    }
}

/// Everything the guidance law evaluated on the way to a command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceDiagnostics {
    pub t_go: f64,
    pub e: f64,
    pub e_dot: f64,
    pub f: f64,
    pub b: f64,
    pub f_star: f64,
    pub b_star: f64,
    pub s_val: f64,
    pub g_val: f64,
    /// Unclamped command; NaN when the B* guard fired.
    pub a_cmd_raw: f64,
    /// Command after the `chi` clamp; NaN when the B* guard fired.
    pub a_cmd_clamped: f64,
    pub clamped: bool,
    pub b_star_guard: bool,
    /// Remaining time is more than 5% shorter than the straight-line closing
    /// time at current speeds.
    pub infeasible: bool,
}

fn denominator(rel: &RelativeState, c: f64, eps: f64) -> Result<f64> {
    let d = rel.v_theta * rel.v_theta + rel.v_r * rel.v_r + 2.0 * c * rel.v_r;
    if !(d.abs() > eps) {
        return Err(Error::DegenerateDenominator {
            value: d.abs(),
            eps,
        });
    }
    Ok(d)
}

/// Exact TPN time-to-go.
pub fn time_to_go(rel: &RelativeState, c: f64) -> Result<f64> {
    time_to_go_guarded(rel, c, Guards::default().eps_denominator)
}

pub fn time_to_go_guarded(rel: &RelativeState, c: f64, eps_denominator: f64) -> Result<f64> {
    let d = denominator(rel, c, eps_denominator)?;
    Ok(-rel.r * (rel.v_r + 2.0 * c) / d)
}

/// Coefficients `(F, B)` of `e' = F + B a_I`.
pub fn first_order_terms(rel: &RelativeState, c: f64) -> Result<(f64, f64)> {
    first_order_terms_guarded(rel, c, Guards::default().eps_denominator)
}

pub fn first_order_terms_guarded(
    rel: &RelativeState,
    c: f64,
    eps_denominator: f64,
) -> Result<(f64, f64)> {
    let d = denominator(rel, c, eps_denominator)?;
    let lead = rel.v_r + 2.0 * c;
    let d2 = d * d;
    let f = 2.0 * c * lead * rel.v_theta * rel.v_theta / d2;
    let b = -2.0 * lead * rel.v_theta * rel.r / d2;
    Ok((f, b))
}

fn f_star_terms(rel: &RelativeState, c: f64, lambda: f64, a_i: f64, d: f64) -> f64 {
    let RelativeState {
        r,
        v_r,
        v_theta: vt,
        theta_dot,
        ..
    } = *rel;
    let lead = v_r + 2.0 * c;
    let d2 = d * d;
    let d3 = d2 * d;
    let vt2 = vt * vt;
    let vt3 = vt2 * vt;
    2.0 * c * theta_dot * vt * (vt2 - 2.0 * v_r * v_r - 4.0 * c * v_r) / d2
        - 4.0 * c * vt * lead * a_i / d2
        - 8.0 * c * lead * vt3 * (c * theta_dot - a_i) / d3
        - 2.0 * a_i * (vt3 - r * lead * a_i) / d2
        + 8.0 * vt2 * a_i * lead * (c * vt - r * a_i) / d3
        + 2.0 * lead * vt * r * lambda * a_i / d2
}

/// Coefficients `(F*, B*)` of `e'' = F* + B* a_cmd`.
pub fn second_order_terms(
    state: &EngagementState,
    rel: &RelativeState,
    gp: &GuidanceParams,
    sp: &SaturationParams,
) -> Result<(f64, f64)> {
    second_order_terms_guarded(state, rel, gp, sp, Guards::default().eps_denominator)
}

pub fn second_order_terms_guarded(
    state: &EngagementState,
    rel: &RelativeState,
    gp: &GuidanceParams,
    sp: &SaturationParams,
    eps_denominator: f64,
) -> Result<(f64, f64)> {
    let c = gp.tpn_factor;
    let d = denominator(rel, c, eps_denominator)?;
    let gain = saturation_gain(state.a_i, sp)?;
    let (_, b) = first_order_terms_guarded(rel, c, eps_denominator)?;
    Ok((f_star_terms(rel, c, sp.lambda, state.a_i, d), b * gain))
}

pub fn sliding_surface(e: f64, e_dot: f64, alpha: f64) -> f64 {
    e_dot + alpha * e
}

/// `g(S) = theta_g + (1 - theta_g) exp(-kappa |S|^eta)`.
pub fn gain_shaping(s_val: f64, theta_g: f64, kappa: f64, eta: u32) -> f64 {
    theta_g + (1.0 - theta_g) * (-kappa * s_val.abs().powi(eta as i32)).exp()
}

fn signum0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

const INFEASIBLE_SLACK: f64 = 0.95;

/// Evaluates the full guidance chain without failing on a singular `B*`;
/// in that case the command fields are NaN and `b_star_guard` is set.
pub fn diagnose(
    state: &EngagementState,
    rel: &RelativeState,
    gp: &GuidanceParams,
    sp: &SaturationParams,
    guards: &Guards,
) -> Result<GuidanceDiagnostics> {
    let c = gp.tpn_factor;
    let d = denominator(rel, c, guards.eps_denominator)?;
    let gain = saturation_gain(state.a_i, sp)?;

    let lead = rel.v_r + 2.0 * c;
    let t_go = -rel.r * lead / d;
    let (f, b) = first_order_terms_guarded(rel, c, guards.eps_denominator)?;
    let f_star = f_star_terms(rel, c, sp.lambda, state.a_i, d);
    let b_star = b * gain;

    let e = t_go - (gp.impact_time - state.t_el);
    let e_dot = f + b * state.a_i;
    let s_val = sliding_surface(e, e_dot, gp.surface_gain);
    let g_val = match gp.variant {
        ReachingLaw::Standard => 1.0,
        ReachingLaw::Exponential => {
            gain_shaping(s_val, gp.shaping_floor, gp.shaping_rate, gp.shaping_power)
        }
    };
    let switching = match guards.boundary_layer {
        Some(eps) => (s_val / eps).tanh(),
        None => signum0(s_val),
    };

    let closing = state.interceptor.speed + state.target.speed;
    let infeasible = closing > 0.0 && gp.impact_time - state.t_el < INFEASIBLE_SLACK * rel.r / closing;

    let b_star_guard = !(b_star.abs() >= guards.eps_b_star);
    let (a_cmd_raw, a_cmd_clamped, clamped) = if b_star_guard {
        (f64::NAN, f64::NAN, false)
    } else {
        let raw =
            (-f_star - gp.surface_gain * e_dot - gp.reaching_gain / g_val * switching) / b_star;
        let limited = sp.clamp_command(raw);
        (raw, limited, limited != raw)
    };

    Ok(GuidanceDiagnostics {
        t_go,
        e,
        e_dot,
        f,
        b,
        f_star,
        b_star,
        s_val,
        g_val,
        a_cmd_raw,
        a_cmd_clamped,
        clamped,
        b_star_guard,
        infeasible,
    })
}

/// Commanded acceleration (clamped to `chi`) together with its diagnostics.
pub fn guidance_command(
    state: &EngagementState,
    rel: &RelativeState,
    gp: &GuidanceParams,
    sp: &SaturationParams,
    guards: &Guards,
) -> Result<(f64, GuidanceDiagnostics)> {
    let diag = diagnose(state, rel, gp, sp, guards)?;
    if diag.b_star_guard {
        return Err(Error::BStarSingular {
            value: diag.b_star.abs(),
            eps: guards.eps_b_star,
        });
    }
    Ok((diag.a_cmd_clamped, diag))
}

/// Reaching times `(t_r1, t_r2)` from an initial surface value: the standard
/// law takes `|S0| / M`; the shaped law takes
/// `(theta |S0| + (1 - theta) int_0^|S0| exp(-kappa s^eta) ds) / M`.
pub fn reaching_times(s0: f64, gp: &GuidanceParams) -> (f64, f64) {
    let m = gp.reaching_gain;
    let s = s0.abs();
    let theta = gp.shaping_floor;
    let kappa = gp.shaping_rate;
    let integral = if gp.shaping_power == 1 {
        -(-kappa * s).exp_m1() / kappa
    } else {
        let eta = gp.shaping_power as i32;
        adaptive_simpson(&|x: f64| (-kappa * x.powi(eta)).exp(), 0.0, s, 1e-10)
    };
    let t_r1 = s / m;
    // Mathematically t_r2 <= t_r1; clamp away rounding at theta -> 1.
    let t_r2 = ((theta * s + (1.0 - theta) * integral) / m).min(t_r1);
    (t_r1, t_r2)
}

/// Adaptive Simpson quadrature to an absolute tolerance.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::VehicleState;
    use approx::assert_relative_eq;

    fn launch() -> (EngagementState, RelativeState) {
        let state = EngagementState {
            interceptor: VehicleState::new(0.0, 0.0, 70.0, 15f64.to_radians()),
            target: VehicleState::new(5000.0, 0.0, 50.0, 120f64.to_radians()),
            a_i: 0.0,
            t_el: 0.0,
        };
        let rel = state.relative().unwrap();
        (state, rel)
    }

    fn rel_with(r: f64, v_r: f64, v_theta: f64) -> RelativeState {
        RelativeState {
            r,
            theta_los: 0.0,
            theta_i: 0.0,
            theta_t: 0.0,
            v_r,
            v_theta,
            theta_dot: v_theta / r,
        }
    }

    #[test]
    fn time_to_go_pure_closing() {
        let t = time_to_go(&rel_with(1000.0, -100.0, 0.0), 360.0).unwrap();
        assert_relative_eq!(t, 10.0, epsilon = 1e-12);
    }

    #[test]
    fn time_to_go_at_launch() {
        let (_, rel) = launch();
        assert_relative_eq!(time_to_go(&rel, 360.0).unwrap(), 54.582_830_867_588_44, epsilon = 1e-9);
    }

    #[test]
    fn time_to_go_shrinks_with_range() {
        let t = time_to_go(&rel_with(1e-6, -92.6, 25.2), 360.0).unwrap();
        assert!(t.abs() < 1e-6);
    }

    #[test]
    fn degenerate_denominator() {
        // V_theta = 0 and V_r = -2c makes D = 0.
        let rel = rel_with(1000.0, -720.0, 0.0);
        assert!(matches!(
            time_to_go(&rel, 360.0),
            Err(Error::DegenerateDenominator { .. })
        ));
        assert!(first_order_terms(&rel, 360.0).is_err());
    }

    #[test]
    fn first_order_terms_at_launch() {
        let (_, rel) = launch();
        let (f, b) = first_order_terms(&rel, 360.0).unwrap();
        assert_relative_eq!(f, 0.086_739_634_016_150_04, epsilon = 1e-12);
        assert_relative_eq!(b, -0.047_836_727_735_629_43, epsilon = 1e-12);
        assert!(f > 0.0 && b < 0.0);
    }

    #[test]
    fn collision_course_has_no_first_order_terms() {
        let (f, b) = first_order_terms(&rel_with(800.0, -120.0, 0.0), 360.0).unwrap();
        assert_eq!(f, 0.0);
        assert_eq!(b, 0.0);
    }

    #[test]
    fn second_order_terms_at_launch() {
        let (state, rel) = launch();
        let gp = GuidanceParams::baseline(70.0, 50.0, 70.0);
        let sp = SaturationParams::default();
        let (fs, bs) = second_order_terms(&state, &rel, &gp, &sp).unwrap();
        assert_relative_eq!(fs, 3.506_569_471_286_305e-3, epsilon = 1e-12);
        let (_, b) = first_order_terms(&rel, 360.0).unwrap();
        assert_eq!(bs, b);
    }

    #[test]
    fn second_order_terms_vanish_without_turn_rate_or_accel() {
        let state = EngagementState {
            interceptor: VehicleState::new(0.0, 0.0, 70.0, 0.0),
            target: VehicleState::new(5000.0, 0.0, 50.0, std::f64::consts::PI),
            a_i: 0.0,
            t_el: 0.0,
        };
        let rel = state.relative().unwrap();
        let gp = GuidanceParams::baseline(70.0, 50.0, 70.0);
        let (fs, bs) = second_order_terms(&state, &rel, &gp, &SaturationParams::default()).unwrap();
        assert!(fs.abs() < 1e-15);
        assert!(bs.abs() < 1e-15);
    }

    #[test]
    fn b_star_carries_the_saturation_gain() {
        let (mut state, rel) = launch();
        state.a_i = 4.0;
        let gp = GuidanceParams::baseline(70.0, 50.0, 70.0);
        let sp = SaturationParams::default();
        let (_, bs) = second_order_terms(&state, &rel, &gp, &sp).unwrap();
        let (_, b) = first_order_terms(&rel, 360.0).unwrap();
        assert_relative_eq!(bs, 0.75 * b, epsilon = 1e-15);
    }

    #[test]
    fn surface_values() {
        assert_eq!(sliding_surface(0.0, 0.0, 1.2), 0.0);
        assert_relative_eq!(sliding_surface(-15.417, 0.08674, 1.2), -18.41366, epsilon = 1e-9);
        assert_eq!(sliding_surface(3.0, 0.25, 0.0), 0.25);
    }

    #[test]
    fn gain_shaping_values() {
        assert_eq!(gain_shaping(0.0, 0.6, 5.0, 1), 1.0);
        assert_relative_eq!(gain_shaping(0.2, 0.6, 5.0, 1), 0.747_151_776_468_576_9, epsilon = 1e-12);
        assert_relative_eq!(gain_shaping(-1e3, 0.6, 5.0, 1), 0.6, epsilon = 1e-15);
        let mut prev = 1.0;
        for k in 1..100 {
            let g = gain_shaping(0.05 * k as f64, 0.3, 2.0, 2);
            assert!(g <= prev && g >= 0.3);
            prev = g;
        }
    }

    #[test]
    fn launch_command() {
        let (state, rel) = launch();
        let gp = GuidanceParams::baseline(70.0, 50.0, 70.0);
        let sp = SaturationParams::default();
        let (cmd, d) = guidance_command(&state, &rel, &gp, &sp, &Guards::default()).unwrap();
        assert_relative_eq!(d.s_val, -18.413_863_324_877_72, epsilon = 1e-9);
        assert_relative_eq!(d.g_val, 0.6, epsilon = 1e-12);
        assert_relative_eq!(cmd, -32.591_538_137_646_96, epsilon = 1e-8);
        assert!(!d.clamped && !d.b_star_guard && !d.infeasible);
        assert_relative_eq!(d.e, d.t_go - 70.0, epsilon = 1e-12);
    }

    #[test]
    fn standard_variant_forces_unit_shaping() {
        let (state, rel) = launch();
        let mut gp = GuidanceParams::baseline(70.0, 50.0, 70.0);
        gp.variant = ReachingLaw::Standard;
        let d = diagnose(&state, &rel, &gp, &SaturationParams::default(), &Guards::default()).unwrap();
        assert_eq!(d.g_val, 1.0);
        let expected = (-d.f_star - 1.2 * d.e_dot + 1.0) / d.b_star;
        assert_relative_eq!(d.a_cmd_raw, expected, epsilon = 1e-12);
    }

    #[test]
    fn equivalent_control_on_the_surface() {
        let (state, rel) = launch();
        let mut gp = GuidanceParams::baseline(70.0, 50.0, 70.0);
        let sp = SaturationParams::default();
        // With a_I = 0, S = F + alpha e, so e = -F / alpha puts the state on the surface.
        let base = diagnose(&state, &rel, &gp, &sp, &Guards::default()).unwrap();
        gp.impact_time = base.t_go + base.f / gp.surface_gain;
        let d = diagnose(&state, &rel, &gp, &sp, &Guards::default()).unwrap();
        assert!(d.s_val.abs() < 1e-12);
        let eq = (-d.f_star - gp.surface_gain * d.e_dot) / d.b_star;
        // Rounding leaves S a few ulps off zero, so the switching term keeps its full size.
        let switching = gp.reaching_gain / d.g_val * signum0(d.s_val) / d.b_star;
        assert_relative_eq!(d.a_cmd_raw, eq - switching, epsilon = 1e-9);
        assert_relative_eq!(d.g_val, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn exact_zero_surface_uses_zero_sign() {
        assert_eq!(signum0(0.0), 0.0);
        assert_eq!(signum0(-0.0), 0.0);
        assert_eq!(signum0(2.0), 1.0);
    }

    #[test]
    fn collision_course_trips_the_b_star_guard() {
        let state = EngagementState {
            interceptor: VehicleState::new(0.0, 0.0, 70.0, 0.0),
            target: VehicleState::new(5000.0, 0.0, 50.0, std::f64::consts::PI),
            a_i: 0.0,
            t_el: 0.0,
        };
        let rel = state.relative().unwrap();
        let gp = GuidanceParams::baseline(70.0, 50.0, 70.0);
        let r = guidance_command(&state, &rel, &gp, &SaturationParams::default(), &Guards::default());
        assert!(matches!(r, Err(Error::BStarSingular { .. })));
    }

    #[test]
    fn clamp_is_applied_and_flagged() {
        let (mut state, rel) = launch();
        state.a_i = 7.9999;
        let gp = GuidanceParams::baseline(70.0, 50.0, 70.0);
        let sp = SaturationParams::default();
        let d = diagnose(&state, &rel, &gp, &sp, &Guards::default()).unwrap();
        assert!(d.clamped);
        assert_eq!(d.a_cmd_clamped.abs(), sp.chi);
    }

    #[test]
    fn infeasible_flag_for_short_impact_time() {
        let (state, rel) = launch();
        let gp = GuidanceParams::baseline(70.0, 50.0, 30.0);
        let d = diagnose(&state, &rel, &gp, &SaturationParams::default(), &Guards::default()).unwrap();
        assert!(d.infeasible);
    }

    #[test]
    fn boundary_layer_smooths_the_switch() {
        let (state, rel) = launch();
        let gp = GuidanceParams::baseline(70.0, 50.0, 70.0);
        let guards = Guards {
            boundary_layer: Some(1e6),
            ..Guards::default()
        };
        let d = diagnose(&state, &rel, &gp, &SaturationParams::default(), &guards).unwrap();
        let sw = (d.s_val / 1e6).tanh();
        let expected = (-d.f_star - 1.2 * d.e_dot - sw / d.g_val) / d.b_star;
        assert_relative_eq!(d.a_cmd_raw, expected, epsilon = 1e-12);
    }

    #[test]
    fn reaching_time_values() {
        let mut gp = GuidanceParams::baseline(70.0, 50.0, 70.0);
        let (t1, t2) = reaching_times(1.0, &gp);
        assert_eq!(t1, 1.0);
        assert_relative_eq!(t2, 0.679_460_964_240_073_2, epsilon = 1e-12);
        let (t1n, t2n) = reaching_times(-1.0, &gp);
        assert_eq!((t1, t2), (t1n, t2n));

        gp.shaping_floor = 1.0 - 1e-12;
        let (t1, t2) = reaching_times(5.0, &gp);
        assert_relative_eq!(t1, t2, epsilon = 1e-10);
    }

    #[test]
    fn reaching_time_quadrature_branch() {
        // eta = 2, theta = 0.3, kappa = 2, |S0| = 3, M = 2; reference from
        // high-precision quadrature.
        let gp = GuidanceParams {
            shaping_floor: 0.3,
            shaping_rate: 2.0,
            shaping_power: 2,
            reaching_gain: 2.0,
            ..GuidanceParams::baseline(70.0, 50.0, 70.0)
        };
        let (t1, t2) = reaching_times(3.0, &gp);
        assert_eq!(t1, 1.5);
        assert_relative_eq!(t2, 0.669_329_973_597_436_1, epsilon = 1e-10);
    }

    #[test]
    fn simpson_matches_closed_form() {
        let v = adaptive_simpson(&|x: f64| (-5.0 * x).exp(), 0.0, 7.0, 1e-12);
        assert_relative_eq!(v, (1.0 - (-35.0f64).exp()) / 5.0, epsilon = 1e-11);
        assert_eq!(adaptive_simpson(&|x: f64| x, 1.0, 1.0, 1e-12), 0.0);
    }

    #[test]
    fn parameter_validation() {
        let mut gp = GuidanceParams::baseline(70.0, 50.0, 70.0);
        assert!(gp.validate().is_ok());
        gp.shaping_floor = 1.3;
        let err = gp.validate().unwrap_err().to_string();
        assert!(err.contains("theta_g must lie in (0,1)"), "{err}");
        let gp = GuidanceParams::baseline(70.0, 50.0, 70.0);
        assert!(!gp.check_tpn_factor(70.0, 50.0).unwrap());
        assert!(gp.check_tpn_factor(70.0, 70.0).unwrap());
        assert!(gp.check_tpn_factor(200.0, 100.0).is_err());
        assert_eq!("Exponential".parse::<ReachingLaw>().unwrap(), ReachingLaw::Exponential);
        assert!("fast".parse::<ReachingLaw>().is_err());
    }
}
