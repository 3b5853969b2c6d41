use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("interceptor and target are co-located (r = {r:e} m)")]
    CoLocated { r: f64 },

    #[error("interceptor speed {speed} m/s fell below the floor of {floor} m/s")]
    SpeedFloor { speed: f64, floor: f64 },

    #[error("achieved acceleration {a_i} m/s^2 is outside the actuator bounds ({a_min}, {a_max})")]
    OutOfEnvelope { a_i: f64, a_min: f64, a_max: f64 },

    #[error("saturation envelope is degenerate: chi + lambda * a_min = {value} <= 0")]
    DegenerateEnvelope { value: f64 },

    #[error("time-to-go denominator |V_theta^2 + V_r^2 + 2 c V_r| = {value:e} is below {eps:e}")]
    DegenerateDenominator { value: f64, eps: f64 },

    #[error("control effectiveness |B*| = {value:e} is below {eps:e}")]
    BStarSingular { value: f64, eps: f64 },

    #[error("non-finite value in {what} at t = {t} s")]
    NonFinite { what: &'static str, t: f64 },

    #[error("invalid parameter: {0}")]
    Validation(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed trajectory file: {0}")]
    MalformedLog(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Configuration problems (as opposed to run-time aborts).
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::Parse { .. } | Error::MalformedLog(_)
        )
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}
