//! Python bindings: `import tpng`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tpng_core::guidance::first_order_terms as first_order;
use tpng_core::saturation::saturation_step;
use tpng_core::{
    achieved_accel_rate, derive_relative_state as derive, envelope, gain_shaping as shaping,
    parse_scenario, reaching_times as reaching, run, saturation_gain, time_to_go as tgo,
    GuidanceParams, ReachingLaw, RelativeState as CoreRelative, SaturationParams as CoreSat,
    VehicleState,
};

fn to_py(e: tpng_core::Error) -> PyErr {
    if e.is_config_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

/// Planar point-mass vehicle. Heading in radians from east.
#[pyclass(frozen, skip_from_py_object, name = "Vehicle", module = "tpng")]
#[derive(Clone, Copy)]
struct Vehicle {
    #[pyo3(get)]
    x: f64,
    #[pyo3(get)]
    y: f64,
    #[pyo3(get)]
    speed: f64,
    #[pyo3(get)]
    gamma: f64,
}

#[pymethods]
impl Vehicle {
    #[new]
    fn new(x: f64, y: f64, speed: f64, gamma: f64) -> Self {
        Vehicle { x, y, speed, gamma }
    }

    fn velocity(&self) -> (f64, f64) {
        self.core().velocity()
    }

    fn __repr__(&self) -> String {
        format!(
            "Vehicle(x={}, y={}, speed={}, gamma={})",
            self.x, self.y, self.speed, self.gamma
        )
    }
}

impl Vehicle {
    fn core(&self) -> VehicleState {
        VehicleState::new(self.x, self.y, self.speed, self.gamma)
    }
}

/// Line-of-sight frame quantities of an engagement.
#[pyclass(frozen, skip_from_py_object, name = "RelativeState", module = "tpng")]
#[derive(Clone, Copy)]
struct RelativeState {
    inner: CoreRelative,
}

#[pymethods]
impl RelativeState {
    #[getter]
    fn r(&self) -> f64 {
        self.inner.r
    }
    #[getter]
    fn theta_los(&self) -> f64 {
        self.inner.theta_los
    }
    #[getter]
    fn theta_i(&self) -> f64 {
        self.inner.theta_i
    }
    #[getter]
    fn theta_t(&self) -> f64 {
        self.inner.theta_t
    }
    #[getter]
    fn v_r(&self) -> f64 {
        self.inner.v_r
    }
    #[getter]
    fn v_theta(&self) -> f64 {
        self.inner.v_theta
    }
    #[getter]
    fn theta_dot(&self) -> f64 {
        self.inner.theta_dot
    }

    fn __repr__(&self) -> String {
        let s = &self.inner;
        format!(
            "RelativeState(r={}, v_r={}, v_theta={}, theta_los={})",
            s.r, s.v_r, s.v_theta, s.theta_los
        )
    }
}

/// Asymmetric smooth saturation model.
#[pyclass(frozen, skip_from_py_object, name = "SaturationParams", module = "tpng")]
#[derive(Clone, Copy)]
struct SaturationParams {
    inner: CoreSat,
}

#[pymethods]
impl SaturationParams {
    #[new]
    #[pyo3(signature = (a_min=-4.0, a_max=8.0, n=1, leak=0.15, chi=None))]
    fn new(a_min: f64, a_max: f64, n: u32, leak: f64, chi: Option<f64>) -> PyResult<Self> {
        let inner = CoreSat::new(a_min, a_max, n, leak, chi).map_err(to_py)?;
        Ok(SaturationParams { inner })
    }

    #[getter]
    fn a_min(&self) -> f64 {
        self.inner.a_min
    }
    #[getter]
    fn a_max(&self) -> f64 {
        self.inner.a_max
    }
    #[getter]
    fn chi(&self) -> f64 {
        self.inner.chi
    }
    #[getter]
    fn leak(&self) -> f64 {
        self.inner.lambda
    }

    /// The factor multiplying the command at acceleration `a`.
    fn gain(&self, a: f64) -> PyResult<f64> {
        saturation_gain(a, &self.inner).map_err(to_py)
    }

    fn rate(&self, a: f64, a_cmd: f64) -> PyResult<f64> {
        achieved_accel_rate(a, a_cmd, &self.inner).map_err(to_py)
    }

    /// One RK4 step with the command held.
    fn step(&self, a: f64, a_cmd: f64, dt: f64) -> PyResult<f64> {
        saturation_step(a, self.inner.clamp_command(a_cmd), dt, &self.inner).map_err(to_py)
    }

    /// `(a_tilde_min, a_tilde_max)`.
    fn envelope(&self) -> PyResult<(f64, f64)> {
        let env = envelope(&self.inner).map_err(to_py)?;
        Ok((env.a_tilde_min, env.a_tilde_max))
    }
}

#[pyfunction]
fn derive_relative_state(interceptor: &Vehicle, target: &Vehicle) -> PyResult<RelativeState> {
    let inner = derive(&interceptor.core(), &target.core()).map_err(to_py)?;
    Ok(RelativeState { inner })
}

#[pyfunction]
fn time_to_go(rel: &RelativeState, c: f64) -> PyResult<f64> {
    tgo(&rel.inner, c).map_err(to_py)
}

/// `(F, B)` with `e' = F + B a_I`.
#[pyfunction]
fn first_order_terms(rel: &RelativeState, c: f64) -> PyResult<(f64, f64)> {
    first_order(&rel.inner, c).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (s, theta_g=0.6, kappa=5.0, eta=1))]
fn gain_shaping(s: f64, theta_g: f64, kappa: f64, eta: u32) -> f64 {
    shaping(s, theta_g, kappa, eta)
}

/// `(t_r1, t_r2)` for the standard and shaped reaching laws.
#[pyfunction]
#[pyo3(signature = (s0, reaching_gain=1.0, theta_g=0.6, kappa=5.0, eta=1))]
fn reaching_times(s0: f64, reaching_gain: f64, theta_g: f64, kappa: f64, eta: u32) -> PyResult<(f64, f64)> {
    let gp = GuidanceParams {
        reaching_gain,
        shaping_floor: theta_g,
        shaping_rate: kappa,
        shaping_power: eta,
        ..GuidanceParams::baseline(70.0, 50.0, 70.0)
    };
    gp.validate().map_err(to_py)?;
    Ok(reaching(s0, &gp))
}

/// Runs every point of a scenario document (TOML text; empty for the
/// baseline) and returns one dict per run with the summary metrics and the
/// sampled trajectory as lists.
#[pyfunction]
#[pyo3(signature = (config="", impact_time=None, dt=None, variant=None))]
fn run_scenario<'py>(
    py: Python<'py>,
    config: &str,
    impact_time: Option<f64>,
    dt: Option<f64>,
    variant: Option<&str>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut spec = parse_scenario(config).map_err(to_py)?;
    if let Some(t_d) = impact_time {
        spec = spec.with_impact_time(t_d).map_err(to_py)?;
    }
    if let Some(dt) = dt {
        spec = spec.with_dt(dt).map_err(to_py)?;
    }
    if let Some(v) = variant {
        spec = spec.with_variant(v.parse::<ReachingLaw>().map_err(to_py)?);
    }
    let mut out = Vec::new();
    for scenario in spec.expand() {
        let (res, log) = py.detach(|| run(&scenario)).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("label", &scenario.label)?;
        d.set_item("impact_time", scenario.guidance.impact_time)?;
        d.set_item("intercepted", res.intercepted)?;
        d.set_item("t_f", res.t_f)?;
        d.set_item("miss", res.miss)?;
        d.set_item("convergence_time", res.convergence_time)?;
        d.set_item("control_effort", res.control_effort_j)?;
        d.set_item("peak_a_i", res.peak_a_i)?;
        let recs = &log.records;
        let col = |f: fn(&tpng_core::sim::Record) -> f64| recs.iter().map(f).collect::<Vec<_>>();
        d.set_item("t", col(|r| r.t))?;
        d.set_item("x_i", col(|r| r.interceptor.x))?;
        d.set_item("y_i", col(|r| r.interceptor.y))?;
        d.set_item("x_t", col(|r| r.target.x))?;
        d.set_item("y_t", col(|r| r.target.y))?;
        d.set_item("r", col(|r| r.rel.r))?;
        d.set_item("v_i", col(|r| r.interceptor.speed))?;
        d.set_item("t_go", col(|r| r.diag.t_go))?;
        d.set_item("e", col(|r| r.diag.e))?;
        d.set_item("s", col(|r| r.diag.s_val))?;
        d.set_item("a_cmd", col(|r| r.a_cmd))?;
        d.set_item("a_i", col(|r| r.a_i))?;
        out.push(d);
    }
    Ok(out)
}

#[pymodule]
fn tpng(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Vehicle>()?;
    m.add_class::<RelativeState>()?;
    m.add_class::<SaturationParams>()?;
    m.add_function(wrap_pyfunction!(derive_relative_state, m)?)?;
    m.add_function(wrap_pyfunction!(time_to_go, m)?)?;
    m.add_function(wrap_pyfunction!(first_order_terms, m)?)?;
    m.add_function(wrap_pyfunction!(gain_shaping, m)?)?;
    m.add_function(wrap_pyfunction!(reaching_times, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
