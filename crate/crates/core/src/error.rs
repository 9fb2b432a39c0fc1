use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("time {t} outside the loop interval [0, {t_ad}]")]
    TimeOutOfRange { t: f64, t_ad: f64 },

    #[error("negative frequency {0} passed to the spectral density")]
    NegativeFrequency(f64),

    #[error("quadrature did not converge: estimated error {error:.3e} > tolerance {tolerance:.3e} after {evaluations} evaluations")]
    Quadrature {
        error: f64,
        tolerance: f64,
        evaluations: usize,
    },

    #[error("memory time is infinite at T = 0")]
    InfiniteMemoryTime,

    #[error("adiabaticity violated: leakage out of the logical subspace {leakage:.3e} exceeds {threshold:.3e}")]
    Adiabaticity { leakage: f64, threshold: f64 },

    #[error("density matrix lost positivity at t = {t:.6}: minimum eigenvalue {min_eigenvalue:.3e}")]
    Positivity { t: f64, min_eigenvalue: f64 },

    #[error("fidelity expectation value {0:.3e} is negative beyond the clamp threshold")]
    NegativeFidelity(f64),

    #[error("integrator configuration: {0}")]
    Integrator(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("degenerate drive: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
