//! Planar point-mass kinematics for the interceptor and a constant-velocity
//! target, and the line-of-sight (LOS) frame quantities derived from them.
//!
//! Positions, speed and flight-path angle are the integrated states. Range,
//! LOS angle and the relative-velocity components are always recomputed from
//! the Cartesian ground truth, so the polar relations hold by construction.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul};

use crate::error::{Error, Result};

/// Below this separation the LOS angle is undefined.
pub const CO_LOCATION_RADIUS: f64 = 1e-9;

/// Default lower limit on interceptor speed; the heading rate divides by it.
pub const DEFAULT_SPEED_FLOOR: f64 = 1.0;

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    /// East position [m].
    pub x: f64,
    /// North position [m].
    pub y: f64,
    /// Speed [m/s].
    pub speed: f64,
    /// Flight-path angle [rad], measured from east.
    pub gamma: f64,
}

impl VehicleState {
    pub fn new(x: f64, y: f64, speed: f64, gamma: f64) -> Self {
        Self {
            x,
            y,
            speed,
            gamma: wrap_angle(gamma),
        }
    }

    pub fn velocity(&self) -> (f64, f64) {
        let (s, c) = self.gamma.sin_cos();
        (self.speed * c, self.speed * s)
    }
}

/// Relative geometry and velocity resolved along and across the LOS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeState {
    /// Separation [m].
    pub r: f64,
    /// LOS angle from east [rad].
    pub theta_los: f64,
    /// Interceptor lead angle, gamma_I - theta [rad].
    pub theta_i: f64,
    /// Target lead angle, gamma_T - theta [rad].
    pub theta_t: f64,
    /// Closing component of relative velocity (negative when closing) [m/s].
    pub v_r: f64,
    /// Relative velocity normal to the LOS [m/s].
    pub v_theta: f64,
    /// LOS rate [rad/s].
    pub theta_dot: f64,
}

/// Evaluates the LOS-frame relative state of `target` as seen from `interceptor`.
pub fn derive_relative_state(
    interceptor: &VehicleState,
    target: &VehicleState,
) -> Result<RelativeState> {
    let dx = target.x - interceptor.x;
    let dy = target.y - interceptor.y;
    let r = dx.hypot(dy);
    if !(r >= CO_LOCATION_RADIUS) {
        return Err(Error::CoLocated { r });
    }
    let theta_los = dy.atan2(dx);
    let theta_i = wrap_angle(interceptor.gamma - theta_los);
    let theta_t = wrap_angle(target.gamma - theta_los);
    let (sin_i, cos_i) = theta_i.sin_cos();
    let (sin_t, cos_t) = theta_t.sin_cos();
    let v_r = target.speed * cos_t - interceptor.speed * cos_i;
    let v_theta = target.speed * sin_t - interceptor.speed * sin_i;
    Ok(RelativeState {
        r,
        theta_los,
        theta_i,
        theta_t,
        v_r,
        v_theta,
        theta_dot: v_theta / r,
    })
}

/// Full augmented state of one engagement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngagementState {
    pub interceptor: VehicleState,
    pub target: VehicleState,
    /// Achieved lateral acceleration, the output of the saturation model [m/s^2].
    pub a_i: f64,
    /// Elapsed time since launch [s].
    pub t_el: f64,
}

impl EngagementState {
    pub fn relative(&self) -> Result<RelativeState> {
        derive_relative_state(&self.interceptor, &self.target)
    }

    /// Euler-style update `self + h * rate`, used for integrator stages.
    /// Flight-path angles are left unwrapped; call [`EngagementState::wrapped`]
    /// once a step is complete.
    pub fn advanced(&self, rate: &StateDerivative, h: f64) -> EngagementState {
        EngagementState {
            interceptor: rate.interceptor.apply(&self.interceptor, h),
            target: rate.target.apply(&self.target, h),
            a_i: self.a_i + h * rate.a_i,
            t_el: self.t_el + h * rate.t_el,
        }
    }

    pub fn wrapped(mut self) -> Self {
        self.interceptor.gamma = wrap_angle(self.interceptor.gamma);
        self.target.gamma = wrap_angle(self.target.gamma);
        self
    }

    pub fn is_finite(&self) -> bool {
        [
            self.interceptor.x,
            self.interceptor.y,
            self.interceptor.speed,
            self.interceptor.gamma,
            self.target.x,
            self.target.y,
            self.target.speed,
            self.target.gamma,
            self.a_i,
            self.t_el,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VehicleRates {
    pub x: f64,
    pub y: f64,
    pub speed: f64,
    pub gamma: f64,
}

impl VehicleRates {
    fn apply(&self, v: &VehicleState, h: f64) -> VehicleState {
        VehicleState {
            x: v.x + h * self.x,
            y: v.y + h * self.y,
            speed: v.speed + h * self.speed,
            gamma: v.gamma + h * self.gamma,
        }
    }
}

impl Add for VehicleRates {
    type Output = VehicleRates;
    fn add(self, o: VehicleRates) -> VehicleRates {
        VehicleRates {
            x: self.x + o.x,
            y: self.y + o.y,
            speed: self.speed + o.speed,
            gamma: self.gamma + o.gamma,
        }
    }
}

impl Mul<f64> for VehicleRates {
    type Output = VehicleRates;
    fn mul(self, k: f64) -> VehicleRates {
        VehicleRates {
            x: self.x * k,
            y: self.y * k,
            speed: self.speed * k,
            gamma: self.gamma * k,
        }
    }
}

/// Time derivative of an [`EngagementState`], field for field.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StateDerivative {
    pub interceptor: VehicleRates,
    pub target: VehicleRates,
    pub a_i: f64,
    pub t_el: f64,
}

impl Add for StateDerivative {
    type Output = StateDerivative;
    fn add(self, o: StateDerivative) -> StateDerivative {
        StateDerivative {
            interceptor: self.interceptor + o.interceptor,
            target: self.target + o.target,
            a_i: self.a_i + o.a_i,
            t_el: self.t_el + o.t_el,
        }
    }
}

impl Mul<f64> for StateDerivative {
    type Output = StateDerivative;
    fn mul(self, k: f64) -> StateDerivative {
        StateDerivative {
            interceptor: self.interceptor * k,
            target: self.target * k,
            a_i: self.a_i * k,
            t_el: self.t_el * k,
        }
    }
}

/// Rates of the augmented engagement state.
///
/// The achieved acceleration acts normal to the LOS; resolved on the
/// interceptor's velocity frame it turns the flight path at
/// `a_i cos(theta_i) / V_I` and changes speed at `a_i sin(theta_i)`.
/// The target flies a straight line at constant speed. `a_i_rate` is the
/// saturation-model output and is passed through unchanged.
pub fn engagement_derivatives(
    state: &EngagementState,
    a_i_rate: f64,
    speed_floor: f64,
) -> Result<StateDerivative> {
    let interceptor = &state.interceptor;
    if interceptor.speed < speed_floor {
        return Err(Error::SpeedFloor {
            speed: interceptor.speed,
            floor: speed_floor,
        });
    }
    let rel = state.relative()?;
    let (vx_i, vy_i) = interceptor.velocity();
    let (vx_t, vy_t) = state.target.velocity();
    let (sin_i, cos_i) = rel.theta_i.sin_cos();
    Ok(StateDerivative {
        interceptor: VehicleRates {
            x: vx_i,
            y: vy_i,
            speed: state.a_i * sin_i,
            gamma: state.a_i * cos_i / interceptor.speed,
        },
        target: VehicleRates {
            x: vx_t,
            y: vy_t,
            speed: 0.0,
            gamma: 0.0,
        },
        a_i: a_i_rate,
        t_el: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn launch_state(a_i: f64) -> EngagementState {
        EngagementState {
            interceptor: VehicleState::new(0.0, 0.0, 70.0, 15f64.to_radians()),
            target: VehicleState::new(5000.0, 0.0, 50.0, 120f64.to_radians()),
            a_i,
            t_el: 0.0,
        }
    }

    #[test]
    fn launch_geometry_relative_velocity() {
        let s = launch_state(0.0);
        let rel = s.relative().unwrap();
        // Hand trigonometry: 50 cos 120 - 70 cos 15, 50 sin 120 - 70 sin 15.
        let v_r = -25.0 - 70.0 * 0.965_925_826_289_068_3;
        let v_theta = 50.0 * 0.866_025_403_784_438_6 - 70.0 * 0.258_819_045_102_520_76;
        assert_relative_eq!(rel.v_r, v_r, epsilon = 1e-9);
        assert_relative_eq!(rel.v_theta, v_theta, epsilon = 1e-9);
        assert_relative_eq!(rel.v_r, -92.615, epsilon = 1e-3);
        assert_relative_eq!(rel.v_theta, 25.184, epsilon = 1e-3);
        assert_relative_eq!(rel.r, 5000.0);
        assert_eq!(rel.theta_los, 0.0);
        assert_relative_eq!(rel.theta_dot * rel.r, rel.v_theta, epsilon = 1e-12);
    }

    #[test]
    fn matched_velocities_along_los_give_zero_relative_velocity() {
        let theta = 0.7_f64;
        let i = VehicleState::new(0.0, 0.0, 60.0, theta);
        let t = VehicleState::new(300.0 * theta.cos(), 300.0 * theta.sin(), 60.0, theta);
        let rel = derive_relative_state(&i, &t).unwrap();
        assert!(rel.v_r.abs() < 1e-12);
        assert!(rel.v_theta.abs() < 1e-12);
    }

    #[test]
    fn stationary_target_pure_pursuit() {
        let i = VehicleState::new(0.0, 0.0, 70.0, 0.0);
        let t = VehicleState::new(1000.0, 0.0, 0.0, 1.0);
        let rel = derive_relative_state(&i, &t).unwrap();
        assert_eq!(rel.v_r, -70.0);
        assert_eq!(rel.v_theta, 0.0);
    }

    #[test]
    fn co_located_is_an_error() {
        let v = VehicleState::new(3.0, 4.0, 10.0, 0.0);
        assert!(matches!(
            derive_relative_state(&v, &v),
            Err(Error::CoLocated { .. })
        ));
    }

    #[test]
    fn unforced_rates() {
        let d = engagement_derivatives(&launch_state(0.0), 0.0, DEFAULT_SPEED_FLOOR).unwrap();
        assert_eq!(d.interceptor.speed, 0.0);
        assert_eq!(d.interceptor.gamma, 0.0);
        assert_eq!(d.target.speed, 0.0);
        assert_eq!(d.target.gamma, 0.0);
    }

    #[test]
    fn lead_angle_ninety_degrees_is_purely_axial() {
        let s = EngagementState {
            interceptor: VehicleState::new(0.0, 0.0, 70.0, std::f64::consts::FRAC_PI_2),
            target: VehicleState::new(5000.0, 0.0, 50.0, 0.0),
            a_i: 8.0,
            t_el: 0.0,
        };
        let d = engagement_derivatives(&s, 0.0, DEFAULT_SPEED_FLOOR).unwrap();
        assert_relative_eq!(d.interceptor.speed, 8.0, epsilon = 1e-12);
        assert!(d.interceptor.gamma.abs() < 1e-15);
    }

    #[test]
    fn launch_rates_with_unit_acceleration() {
        let d = engagement_derivatives(&launch_state(1.0), 0.3, DEFAULT_SPEED_FLOOR).unwrap();
        assert_relative_eq!(d.interceptor.gamma, 0.013_799, epsilon = 1e-6);
        assert_relative_eq!(d.interceptor.speed, 0.258_819, epsilon = 1e-6);
        assert_eq!(d.a_i, 0.3);
        assert_eq!(d.t_el, 1.0);
        assert_relative_eq!(d.target.x, 50.0 * 120f64.to_radians().cos(), epsilon = 1e-12);
    }

    #[test]
    fn speed_floor_is_enforced() {
        let mut s = launch_state(1.0);
        s.interceptor.speed = 0.5;
        assert!(matches!(
            engagement_derivatives(&s, 0.0, DEFAULT_SPEED_FLOOR),
            Err(Error::SpeedFloor { .. })
        ));
    }

    #[test]
    fn wrap_endpoints() {
        assert_eq!(wrap_angle(PI), PI);
        assert_relative_eq!(wrap_angle(-PI), PI);
        assert_relative_eq!(wrap_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-12);
        assert_eq!(wrap_angle(0.0), 0.0);
    }

    proptest! {
        #[test]
        fn wrapping_preserves_trig(x in -1e3f64..1e3) {
            let w = wrap_angle(x);
            prop_assert!(w > -PI && w <= PI);
            prop_assert!((w.cos() - x.cos()).abs() < 1e-9);
            prop_assert!((w.sin() - x.sin()).abs() < 1e-9);
        }

        #[test]
        fn relative_state_invariants(
            xt in -1e4f64..1e4, yt in -1e4f64..1e4,
            vi in 1.0f64..400.0, vt in 0.0f64..400.0,
            gi in -10.0f64..10.0, gt in -10.0f64..10.0,
        ) {
            prop_assume!(xt.hypot(yt) > 1.0);
            let i = VehicleState::new(0.0, 0.0, vi, gi);
            let t = VehicleState::new(xt, yt, vt, gt);
            let rel = derive_relative_state(&i, &t).unwrap();
            prop_assert!(rel.r > 0.0);
            prop_assert!(rel.theta_i > -PI && rel.theta_i <= PI);
            prop_assert!(rel.theta_t > -PI && rel.theta_t <= PI);
            prop_assert_eq!(rel.v_r, vt * rel.theta_t.cos() - vi * rel.theta_i.cos());
            prop_assert_eq!(rel.v_theta, vt * rel.theta_t.sin() - vi * rel.theta_i.sin());
            // Cartesian projection of the relative velocity agrees.
            let (vxi, vyi) = i.velocity();
            let (vxt, vyt) = t.velocity();
            let (ux, uy) = (xt / rel.r, yt / rel.r);
            let radial = (vxt - vxi) * ux + (vyt - vyi) * uy;
            let normal = -(vxt - vxi) * uy + (vyt - vyi) * ux;
            prop_assert!((radial - rel.v_r).abs() < 1e-9 * (vi + vt));
            prop_assert!((normal - rel.v_theta).abs() < 1e-9 * (vi + vt));
        }
    }
}
