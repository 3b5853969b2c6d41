//! First-order asymmetric smooth saturation of the lateral acceleration.
//!
//! The achieved acceleration `a` follows
//!
//! ```text
//! da/dt = sigma(a) * a_cmd - lambda * a
//! sigma(a) = 1 - (a / a_max)^rho   for a >= 0
//!          = 1 - (a / a_min)^rho   for a <  0
//! ```
//!
//! with `rho = 2n`. For any bounded command `|a_cmd| <= chi` the state never
//! leaves `(a_min, a_max)`: at either bound `sigma` vanishes and the leak term
//! pulls `a` back toward zero.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default command clamp as a multiple of the larger bound magnitude.
pub const DEFAULT_CHI_FACTOR: f64 = 50.0;

/// Distance from a bound that a landed-on-bound state is moved back by.
pub const BOUND_NUDGE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationParams {
    /// Upper acceleration bound [m/s^2], positive.
    pub a_max: f64,
    /// Lower acceleration bound [m/s^2], negative.
    pub a_min: f64,
    /// Half the exponent; `rho = 2n`.
    pub n: u32,
    /// Leak rate [1/s], in (0, 1).
    pub lambda: f64,
    /// Magnitude limit applied to commands before they enter the model [m/s^2].
    pub chi: f64,
}

impl Default for SaturationParams {
    fn default() -> Self {
        Self::new(-4.0, 8.0, 1, 0.15, None).expect("default saturation parameters are valid")
    }
}

impl SaturationParams {
    /// Builds and validates a parameter set. `chi = None` selects
    /// `50 * max(a_max, -a_min)`.
    pub fn new(a_min: f64, a_max: f64, n: u32, lambda: f64, chi: Option<f64>) -> Result<Self> {
        let chi = chi.unwrap_or(DEFAULT_CHI_FACTOR * a_max.max(-a_min));
        let p = Self {
            a_max,
            a_min,
            n,
            lambda,
            chi,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a_max > 0.0 && self.a_max.is_finite()) {
            return Err(invalid("a_max must be positive"));
        }
        if !(self.a_min < 0.0 && self.a_min.is_finite()) {
            return Err(invalid("a_min must be negative"));
        }
        if self.n < 1 {
            return Err(invalid("n must be a positive integer (rho = 2n)"));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(invalid("lambda must lie in (0,1)"));
        }
        if !(self.chi > self.a_max.max(-self.a_min) && self.chi.is_finite()) {
            return Err(invalid("chi must exceed max(a_max, -a_min)"));
        }
        Ok(())
    }

    pub fn rho(&self) -> i32 {
        2 * self.n as i32
    }

    pub fn clamp_command(&self, a_cmd: f64) -> f64 {
        a_cmd.clamp(-self.chi, self.chi)
    }

    /// Moves a value that landed on (or within rounding of) a bound back inside.
    /// Anything further out is left alone so that [`saturation_gain`] reports it.
    pub fn nudge_inside(&self, a_i: f64) -> f64 {
        let tol = 1e-9;
        if a_i >= self.a_max && a_i <= self.a_max * (1.0 + tol) {
            self.a_max - BOUND_NUDGE
        } else if a_i <= self.a_min && a_i >= self.a_min * (1.0 + tol) {
            self.a_min + BOUND_NUDGE
        } else {
            a_i
        }
    }
}

/// Analytic bounds on the acceleration reachable under `|a_cmd| <= chi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub a_tilde_max: f64,
    pub a_tilde_min: f64,
}

/// The bracketed factor `sigma(a)` of the saturation model.
///
/// Evaluates on the closed interval `[a_min, a_max]`, where it lies in
/// `[0, 1]` and vanishes at the bounds.
pub fn saturation_gain(a_i: f64, p: &SaturationParams) -> Result<f64> {
    if !(a_i >= p.a_min && a_i <= p.a_max) {
        return Err(Error::OutOfEnvelope {
            a_i,
            a_min: p.a_min,
            a_max: p.a_max,
        });
    }
    let bound = if a_i >= 0.0 { p.a_max } else { p.a_min };
    Ok(1.0 - (a_i / bound).powi(p.rho()))
}

/// Rate of the achieved acceleration for a (pre-clamped) command.
pub fn achieved_accel_rate(a_i: f64, a_cmd: f64, p: &SaturationParams) -> Result<f64> {
    Ok(saturation_gain(a_i, p)? * a_cmd - p.lambda * a_i)
}

/// One fixed RK4 step of the saturation model alone, with the command held
/// over the step. Landing on a bound is nudged back inside.
pub fn saturation_step(a_i: f64, a_cmd: f64, dt: f64, p: &SaturationParams) -> Result<f64> {
    let k1 = achieved_accel_rate(a_i, a_cmd, p)?;
    let k2 = achieved_accel_rate(p.nudge_inside(a_i + 0.5 * dt * k1), a_cmd, p)?;
    let k3 = achieved_accel_rate(p.nudge_inside(a_i + 0.5 * dt * k2), a_cmd, p)?;
    let k4 = achieved_accel_rate(p.nudge_inside(a_i + dt * k3), a_cmd, p)?;
    let next = p.nudge_inside(a_i + dt * ((k1 + k2 * 2.0 + k3 * 2.0 + k4) * (1.0 / 6.0)));
    if !(next > p.a_min && next < p.a_max) {
        return Err(Error::OutOfEnvelope {
            a_i: next,
            a_min: p.a_min,
            a_max: p.a_max,
        });
    }
    Ok(next)
}

/// Reachable-acceleration envelope under commands bounded by `chi`.
///
/// Both limits come from bounding the fixed point of the model at full
/// command: `|a|^rho (chi + lambda |bound|) <= chi |bound|^rho`, which gives
/// `a_bound * (chi / (chi + lambda |a_bound|))^(1/rho)` on each side.
pub fn envelope(p: &SaturationParams) -> Result<Envelope> {
    p.validate()?;
    // Guard kept on the signed quantity; with a validated chi it is always positive.
    let signed = p.chi + p.lambda * p.a_min;
    if signed <= 0.0 {
        return Err(Error::DegenerateEnvelope { value: signed });
    }
    let inv_rho = 1.0 / p.rho() as f64;
    let shrink = |bound: f64| bound * (p.chi / (p.chi + p.lambda * bound.abs())).powf(inv_rho);
    Ok(Envelope {
        a_tilde_max: shrink(p.a_max),
        a_tilde_min: shrink(p.a_min),
    })
}
