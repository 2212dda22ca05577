use thiserror::Error;

/// Errors raised by configuration, numerical kernels and the integrator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    #[error("dt = {dt} does not divide `{key}` = {delay}; nearest admissible dt is {suggested}")]
    IncommensurateStep {
        key: String,
        dt: f64,
        delay: f64,
        suggested: f64,
    },

    #[error("dt = {dt} exceeds the explicit reaction stability bound {bound}")]
    UnstableStep { dt: f64, bound: f64 },

    #[error("field has length {got}, domain expects {expected}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("negative diffusion time {0}")]
    NegativeTime(f64),

    #[error("kernel time d*t = {dt_eff} is below the resolvable floor {floor}")]
    KernelTimeBelowFloor { dt_eff: f64, floor: f64 },

    #[error("value {value} at grid index {index} must be strictly positive")]
    NonPositive { index: usize, value: f64 },

    #[error("history holds {available} lags, {required} required")]
    InsufficientHistory { required: usize, available: usize },

    #[error("non-finite value in component u{component} at step {step}")]
    NonFinite { step: usize, component: usize },

    #[error("state left the invariant box at step {step}: u{component}[{index}] = {value}")]
    BoxViolation {
        step: usize,
        component: usize,
        index: usize,
        value: f64,
    },

    #[error("no endemic equilibrium exists (R0 = {0} <= 1)")]
    NoEndemicEquilibrium(f64),

    #[error("g is defined for positive arguments only, got {0}")]
    GDomain(f64),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;
