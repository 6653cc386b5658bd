use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("point ({0}, {1}, {2}) is not on the unit sphere")]
    NotOnSphere(f64, f64, f64),

    #[error("curvature density {density:.3e} is not positive at ({}, {}, {})", at[0], at[1], at[2])]
    NonPositiveCurvature { density: f64, at: [f64; 3] },

    #[error("integrand is not finite at quadrature node {node}")]
    NonFiniteIntegrand { node: usize },

    #[error(
        "quadrature underresolved: refinement changed the probe Gram diagonal by {change:.3e}"
    )]
    QuadratureUnderresolved { change: f64 },

    #[error("Gram matrix is not positive definite (N = {n_power})")]
    GramNotPositiveDefinite { n_power: u32 },

    #[error("Bergman density {value:.3e} is not positive")]
    NonPositiveDensity { value: f64 },

    #[error("P_N does not act as a scalar on the zonal harmonic of degree {degree}: residual {residual:.3e}")]
    EquivarianceViolation { degree: u32, residual: f64 },

    #[error("rate fit needs at least 3 points with positive errors, got {usable}")]
    DegenerateFit { usable: usize },

    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),
}

impl Error {
    /// Numerical failures as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonPositiveCurvature { .. }
                | Error::NonFiniteIntegrand { .. }
                | Error::QuadratureUnderresolved { .. }
                | Error::GramNotPositiveDefinite { .. }
                | Error::NonPositiveDensity { .. }
                | Error::EquivarianceViolation { .. }
                | Error::DegenerateFit { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
