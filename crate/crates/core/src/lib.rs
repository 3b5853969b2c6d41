//! Impact-time guidance for a planar interceptor with saturated, first-order
//! acceleration dynamics.
//!
//! The guidance law is a sliding-mode correction on top of a time-to-go
//! estimate derived from true proportional navigation. Engagements are
//! integrated with fixed-step RK4 and can be described in TOML scenario files.

// Negated comparisons reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod error;
pub mod guidance;
pub mod kinematics;
pub mod plot;
pub mod saturation;
pub mod scenario;
pub mod sim;
pub mod trajectory_io;

pub use error::{Error, Result};
pub use guidance::{
    gain_shaping, guidance_command, reaching_times, time_to_go, GuidanceDiagnostics, GuidanceParams,
    Guards, ReachingLaw,
};
pub use kinematics::{derive_relative_state, EngagementState, RelativeState, VehicleState};
pub use saturation::{achieved_accel_rate, envelope, saturation_gain, Envelope, SaturationParams};
pub use scenario::{load_scenario, parse_scenario, ScenarioSpec};
pub use sim::{run, step, Scenario, SimConfig, SimResult, Termination, TrajectoryLog};
