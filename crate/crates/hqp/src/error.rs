use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("material file {path}:{line}: {msg}")]
    MaterialFile { path: String, line: usize, msg: String },

    #[error("singular medium: {0}")]
    SingularMedium(String),

    #[error("field singular on the lossless resonance cone at {0:?}")]
    ConeSingularity([f64; 3]),

    #[error("no super-resonance in [{omega_low:.3}, {omega_high:.3}] cm^-1: target ratio {target:.6} outside attainable range [{min:.6}, {max:.6}]")]
    NoResonance { target: f64, min: f64, max: f64, omega_low: f64, omega_high: f64 },

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("coupling matrix not positive semidefinite: min eigenvalue {0:e}")]
    NotPsd(f64),

    #[error("trace drift {drift:e} at t = {t_ps} ps exceeds 1e-8 (step {step_ps:e} ps)")]
    TraceDrift { t_ps: f64, drift: f64, step_ps: f64 },

    #[error("step-size underflow at t = {t_ps} ps (h = {step_ps:e} ps); the problem is stiff, reduce Gamma/hbar*dt or loosen tol")]
    Stiff { t_ps: f64, step_ps: f64 },

    #[error("channel not trace preserving: deviation {0:e}")]
    NotTracePreserving(f64),

    #[error("series did not converge after {n_terms} terms (estimate {estimate:e})")]
    SeriesNotConverged { n_terms: usize, estimate: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
