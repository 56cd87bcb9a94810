use thiserror::Error;

/// Errors raised by the core pipelines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum VptError {
    #[error("inverse temperature must be positive and finite, got {0}")]
    InvalidBeta(f64),

    #[error("field strength must be non-negative and finite, got {0}")]
    InvalidField(f64),

    #[error("frequency {name} must be non-negative and finite, got {value}")]
    InvalidFrequency { name: &'static str, value: f64 },

    #[error("invalid fluctuation widths: a_perp^2 = {a_perp_sq}, a_par^2 = {a_par_sq}")]
    InvalidWidths { a_perp_sq: f64, a_par_sq: f64 },

    #[error("quadrature did not reach tolerance: value {value}, error estimate {abs_error}")]
    QuadratureFailed { value: f64, abs_error: f64 },

    #[error("bare Coulomb potential is singular at the origin")]
    SingularOrigin,

    #[error("fixed-point iteration diverged after {iterations} steps")]
    Diverged { iterations: usize },

    #[error("singular linear system at order {order}")]
    SingularSystem { order: usize },

    #[error("argument out of domain: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, VptError>;

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(VptError::InvalidBeta(beta))
    }
}

pub(crate) fn check_field(b: f64) -> Result<()> {
    if b.is_finite() && b >= 0.0 {
        Ok(())
    } else {
        Err(VptError::InvalidField(b))
    }
}

pub(crate) fn check_frequency(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(VptError::InvalidFrequency { name, value })
    }
}
