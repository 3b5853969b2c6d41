//! Scenario documents.
//!
//! A scenario is a small TOML document; every key is optional and missing
//! values fall back to the baseline engagement (V_I = 70 m/s, V_T = 50 m/s,
//! r0 = 5 km, LOS 0 deg, gamma_I = 15 deg, gamma_T = 120 deg, bounds
//! (-4, 8) m/s^2, t_d = 70 s). See `docs/scenario-format.md` for the grammar.
//!
//! ```toml
//! schema_version = 1
//! variant = "exponential"
//!
//! [geometry]
//! range = 5000.0
//! los_angle_deg = 0.0
//!
//! [interceptor]
//! speed = 70.0
//! heading_deg = 15.0
//!
//! [sweep]
//! impact_time = [60.0, 70.0, 80.0, 90.0]
//! ```

use std::path::{Path, PathBuf};

use log::warn;
use serde::Deserialize;

use crate::error::{invalid, Error, Result};
use crate::guidance::{GuidanceParams, Guards, ReachingLaw};
use crate::kinematics::{EngagementState, VehicleState};
use crate::saturation::SaturationParams;
use crate::sim::{CommandMode, Scenario, SimConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    schema_version: Option<u32>,
    name: Option<String>,
    variant: Option<String>,
    output_dir: Option<String>,
    geometry: Option<RawGeometry>,
    interceptor: Option<RawVehicle>,
    target: Option<RawVehicle>,
    saturation: Option<RawSaturation>,
    guidance: Option<RawGuidance>,
    sim: Option<RawSim>,
    sweep: Option<RawSweep>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    range: Option<f64>,
    los_angle_deg: Option<f64>,
    interceptor_position: Option<[f64; 2]>,
    target_position: Option<[f64; 2]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVehicle {
    speed: Option<f64>,
    heading_deg: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSaturation {
    a_min: Option<f64>,
    a_max: Option<f64>,
    n: Option<u32>,
    lambda: Option<f64>,
    chi: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGuidance {
    #[serde(alias = "tpn_factor")]
    c: Option<f64>,
    #[serde(alias = "surface_gain")]
    alpha: Option<f64>,
    #[serde(alias = "m")]
    reaching_gain: Option<f64>,
    #[serde(alias = "shaping_floor")]
    theta_g: Option<f64>,
    #[serde(alias = "shaping_rate")]
    kappa: Option<f64>,
    #[serde(alias = "shaping_power")]
    eta: Option<u32>,
    #[serde(alias = "t_d")]
    impact_time: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    dt: Option<f64>,
    t_max: Option<f64>,
    kill_radius: Option<f64>,
    convergence_eps: Option<f64>,
    eps_denominator: Option<f64>,
    eps_b_star: Option<f64>,
    speed_floor: Option<f64>,
    boundary_layer: Option<f64>,
    command_mode: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    #[serde(alias = "t_d")]
    impact_time: Option<Vec<f64>>,
    interceptor_heading_deg: Option<Vec<f64>>,
    target_heading_deg: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    /// Interceptor at the origin, target at `range` along `los_angle` [rad].
    Polar { range: f64, los_angle: f64 },
    Cartesian {
        interceptor: [f64; 2],
        target: [f64; 2],
    },
}

impl Geometry {
    fn positions(&self) -> ([f64; 2], [f64; 2]) {
        match *self {
            Geometry::Polar { range, los_angle } => {
                ([0.0, 0.0], [range * los_angle.cos(), range * los_angle.sin()])
            }
            Geometry::Cartesian {
                interceptor,
                target,
            } => (interceptor, target),
        }
    }
}

/// Parameter lists whose cartesian product defines the runs of a document.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub impact_time: Vec<f64>,
    pub interceptor_heading_deg: Vec<f64>,
    pub target_heading_deg: Vec<f64>,
}

impl Sweep {
    pub fn len(&self) -> usize {
        self.impact_time.len() * self.interceptor_heading_deg.len() * self.target_heading_deg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A validated scenario document.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub schema_version: u32,
    pub name: String,
    pub variant: ReachingLaw,
    pub output_dir: Option<PathBuf>,
    pub geometry: Geometry,
    pub interceptor_speed: f64,
    pub target_speed: f64,
    /// Guidance gains; `impact_time` is the value used when the sweep has a
    /// single entry.
    pub guidance: GuidanceParams,
    /// Explicit TPN factor; otherwise `3 (V_I0 + V_T)`.
    pub tpn_factor: Option<f64>,
    pub saturation: SaturationParams,
    pub sim: SimConfig,
    /// Explicit horizon; otherwise `2 t_d + 10 s` per run.
    pub t_max: Option<f64>,
    pub sweep: Sweep,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        parse_scenario("").expect("empty scenario is valid")
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn non_empty(name: &str, v: Option<Vec<f64>>, default: f64) -> Result<Vec<f64>> {
    match v {
        None => Ok(vec![default]),
        Some(v) if v.is_empty() => Err(invalid(format!("sweep.{name} must not be empty"))),
        Some(v) if v.iter().any(|x| !x.is_finite()) => {
            Err(invalid(format!("sweep.{name} entries must be finite")))
        }
        Some(v) => Ok(v),
    }
}

/// Parses and validates a scenario document, applying defaults.
pub fn parse_scenario(text: &str) -> Result<ScenarioSpec> {
    let raw: RawDoc = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;

    let schema_version = raw.schema_version.unwrap_or(SCHEMA_VERSION);
    if schema_version != SCHEMA_VERSION {
        return Err(invalid(format!(
            "unsupported schema_version {schema_version} (expected {SCHEMA_VERSION})"
        )));
    }
    let variant = match raw.variant.as_deref() {
        Some(v) => v.parse()?,
        None => ReachingLaw::Exponential,
    };

    let geo = raw.geometry.unwrap_or_default();
    let polar = geo.range.is_some() || geo.los_angle_deg.is_some();
    let cartesian = geo.interceptor_position.is_some() || geo.target_position.is_some();
    let geometry = match (polar, cartesian) {
        (true, true) => {
            return Err(invalid(
                "geometry: give either range/los_angle_deg or interceptor_position/target_position, not both",
            ))
        }
        (false, true) => match (geo.interceptor_position, geo.target_position) {
            (Some(i), Some(t)) => Geometry::Cartesian {
                interceptor: i,
                target: t,
            },
            _ => {
                return Err(invalid(
                    "geometry: cartesian form needs both interceptor_position and target_position",
                ))
            }
        },
        _ => Geometry::Polar {
            range: geo.range.unwrap_or(5000.0),
            los_angle: geo.los_angle_deg.unwrap_or(0.0).to_radians(),
        },
    };

    let iv = raw.interceptor.unwrap_or_default();
    let tv = raw.target.unwrap_or_default();
    let interceptor_speed = iv.speed.unwrap_or(70.0);
    let target_speed = tv.speed.unwrap_or(50.0);

    let rs = raw.saturation.unwrap_or_default();
    let saturation = SaturationParams::new(
        rs.a_min.unwrap_or(-4.0),
        rs.a_max.unwrap_or(8.0),
        rs.n.unwrap_or(1),
        rs.lambda.unwrap_or(0.15),
        rs.chi,
    )?;

    let rg = raw.guidance.unwrap_or_default();
    let base = GuidanceParams::baseline(interceptor_speed, target_speed, 70.0);
    let guidance = GuidanceParams {
        tpn_factor: rg.c.unwrap_or(base.tpn_factor),
        surface_gain: rg.alpha.unwrap_or(base.surface_gain),
        reaching_gain: rg.reaching_gain.unwrap_or(base.reaching_gain),
        shaping_floor: rg.theta_g.unwrap_or(base.shaping_floor),
        shaping_rate: rg.kappa.unwrap_or(base.shaping_rate),
        shaping_power: rg.eta.unwrap_or(base.shaping_power),
        impact_time: rg.impact_time.unwrap_or(base.impact_time),
        variant,
    };
    guidance.validate()?;

    let rsim = raw.sim.unwrap_or_default();
    let defaults = SimConfig::default();
    let command_mode = match rsim.command_mode.as_deref() {
        None | Some("stage") => CommandMode::PerStage,
        Some("step") => CommandMode::PerStep,
        Some(other) => {
            return Err(invalid(format!(
                "sim.command_mode must be 'stage' or 'step', got '{other}'"
            )))
        }
    };
    let sim = SimConfig {
        dt: rsim.dt.unwrap_or(defaults.dt),
        t_max: rsim.t_max.unwrap_or(defaults.t_max),
        kill_radius: rsim.kill_radius.unwrap_or(defaults.kill_radius),
        convergence_eps: rsim.convergence_eps.unwrap_or(defaults.convergence_eps),
        guards: Guards {
            eps_denominator: rsim.eps_denominator.unwrap_or(defaults.guards.eps_denominator),
            eps_b_star: rsim.eps_b_star.unwrap_or(defaults.guards.eps_b_star),
            speed_floor: rsim.speed_floor.unwrap_or(defaults.guards.speed_floor),
            boundary_layer: rsim.boundary_layer,
        },
        command_mode,
        command_override: None,
    };
    sim.validate()?;

    let rsw = raw.sweep.unwrap_or_default();
    let sweep = Sweep {
        impact_time: non_empty("impact_time", rsw.impact_time, guidance.impact_time)?,
        interceptor_heading_deg: non_empty(
            "interceptor_heading_deg",
            rsw.interceptor_heading_deg,
            iv.heading_deg.unwrap_or(15.0),
        )?,
        target_heading_deg: non_empty(
            "target_heading_deg",
            rsw.target_heading_deg,
            tv.heading_deg.unwrap_or(120.0),
        )?,
    };

    let spec = ScenarioSpec {
        schema_version,
        name: raw.name.unwrap_or_else(|| "scenario".to_string()),
        variant,
        output_dir: raw.output_dir.map(PathBuf::from),
        geometry,
        interceptor_speed,
        target_speed,
        guidance,
        tpn_factor: rg.c,
        saturation,
        sim,
        t_max: rsim.t_max,
        sweep,
    };
    spec.validate()?;
    Ok(spec)
}

pub fn load_scenario(path: &Path) -> Result<ScenarioSpec> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.interceptor_speed >= self.sim.guards.speed_floor) {
            return Err(invalid("interceptor.speed must be at least sim.speed_floor"));
        }
        if !(self.target_speed >= 0.0 && self.target_speed.is_finite()) {
            return Err(invalid("target.speed must be non-negative"));
        }
        let (pi, pt) = self.geometry.positions();
        let r0 = (pt[0] - pi[0]).hypot(pt[1] - pi[1]);
        if !(r0 > self.sim.kill_radius) {
            return Err(invalid("initial range must exceed sim.kill_radius"));
        }
        if self.sweep.impact_time.iter().any(|t| *t <= 0.0) {
            return Err(invalid("impact_time values must be positive"));
        }
        if self.sweep.is_empty() {
            return Err(invalid("sweep axes must not be empty"));
        }
        self.guidance.validate()?;
        self.saturation.validate()?;
        self.sim.validate()?;
        let probe = GuidanceParams {
            tpn_factor: self.resolved_tpn_factor(),
            ..self.guidance
        };
        if probe.check_tpn_factor(self.interceptor_speed, self.target_speed)? {
            warn!(
                "c = {} is below 3 (V_I0 + V_T); interception margin may be thin",
                probe.tpn_factor
            );
        }
        Ok(())
    }

    pub fn resolved_tpn_factor(&self) -> f64 {
        self.tpn_factor
            .unwrap_or(3.0 * (self.interceptor_speed + self.target_speed))
    }

    /// Replaces the impact-time axis with a single value.
    pub fn with_impact_time(mut self, t_d: f64) -> Result<Self> {
        self.guidance.impact_time = t_d;
        self.sweep.impact_time = vec![t_d];
        self.validate()?;
        Ok(self)
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        self.sim.dt = dt;
        self.validate()?;
        Ok(self)
    }

    pub fn with_variant(mut self, variant: ReachingLaw) -> Self {
        self.variant = variant;
        self.guidance.variant = variant;
        self
    }

    /// Expands the sweep axes into individual runs, impact time outermost.
    pub fn expand(&self) -> Vec<Scenario> {
        let (pi, pt) = self.geometry.positions();
        let multi = self.sweep.len() > 1;
        let mut runs = Vec::with_capacity(self.sweep.len());
        for &t_d in &self.sweep.impact_time {
            for &gi in &self.sweep.interceptor_heading_deg {
                for &gt in &self.sweep.target_heading_deg {
                    let label = if multi {
                        format!("{}_td{}_gi{}_gt{}", self.name, fmt_num(t_d), fmt_num(gi), fmt_num(gt))
                    } else {
                        self.name.clone()
                    };
                    let guidance = GuidanceParams {
                        tpn_factor: self.resolved_tpn_factor(),
                        impact_time: t_d,
                        variant: self.variant,
                        ..self.guidance
                    };
                    let config = SimConfig {
                        t_max: self.t_max.unwrap_or(2.0 * t_d + 10.0),
                        ..self.sim
                    };
                    runs.push(Scenario {
                        label,
                        initial: EngagementState {
                            interceptor: VehicleState::new(
                                pi[0],
                                pi[1],
                                self.interceptor_speed,
                                gi.to_radians(),
                            ),
                            target: VehicleState::new(pt[0], pt[1], self.target_speed, gt.to_radians()),
                            a_i: 0.0,
                            t_el: 0.0,
                        },
                        guidance,
                        saturation: self.saturation,
                        config,
                    });
                }
            }
        }
        runs
    }
}

fn fmt_num(v: f64) -> String {
    let s = format!("{v}");
    s.replace('-', "m").replace('.', "p")
}
