use thiserror::Error;

/// Errors produced by the glider library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("drag coefficient must be positive: {context}")]
    NonPositiveDrag { context: String },

    #[error("angle-of-attack samples must be strictly increasing (row {row})")]
    NonMonotoneAlpha { row: usize },

    #[error("coefficient table needs at least {min} rows, got {got}")]
    InsufficientRows { min: usize, got: usize },

    #[error("angle {alpha_deg:.3} deg is outside the measured range and no symmetry fold reaches it")]
    OutOfMeasuredRange { alpha_deg: f64 },

    #[error("polar form is singular at zero speed (v = {v:e})")]
    SingularAtZeroSpeed { v: f64 },

    #[error("dimensional parameter `{name}` must be positive, got {value}")]
    NonPositiveParam { name: &'static str, value: f64 },

    #[error("trajectory escaped (|v| > {v_escape}) inside the flow-map window")]
    EscapeDuringWindow { v_escape: f64 },

    #[error("glide angle {gamma} lies outside the open interval (0, pi)")]
    GammaOutOfDomain { gamma: f64 },

    #[error("no valid nullcline samples in the requested gamma range")]
    EmptyBranch,

    #[error("bisection bracket endpoints classify identically ({low:?} / {high:?})")]
    InvalidBracket {
        low: crate::manifold::Origin,
        high: crate::manifold::Origin,
    },

    #[error("bisection bracket endpoint classified as indeterminate")]
    IndeterminateEndpoint,

    #[error("no valid bisection bracket found on the seed slice at vx = {vx}")]
    SeedNotFound { vx: f64 },

    #[error("equilibrium is not a saddle: no eigenvalue with positive real part")]
    NotASaddle,

    #[error("acceleration magnitude {magnitude:e} is below the degeneracy threshold; trajectory normal undefined")]
    DegenerateTangent { magnitude: f64 },

    #[error("repulsion field has fewer than two unmasked columns")]
    EmptyField,

    #[error("stroboscopic return map requires a sinusoidal pitch schedule")]
    NotPeriodicSchedule,

    #[error("simulation visited pitch {theta_deg:.3} deg outside the surface range [{lo_deg:.3}, {hi_deg:.3}]")]
    ThetaOutOfSurfaceRange {
        theta_deg: f64,
        lo_deg: f64,
        hi_deg: f64,
    },

    #[error("invalid configuration field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("{path}:{line}: {message}")]
    TableParse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
