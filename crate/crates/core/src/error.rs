use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument is outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// The adaptive integrator shrank its step below the floor.
    #[error("step size underflow at t = {time} (step {step:e} below floor {floor:e}); stiff or blowing up")]
    StepSizeUnderflow { time: f64, step: f64, floor: f64 },

    /// Adaptive quadrature ran out of refinements.
    #[error("quadrature did not reach tolerance: best estimate {estimate} with error bound {error_bound:e}")]
    Accuracy { estimate: f64, error_bound: f64 },

    /// Newton iteration diverged or hit its iteration cap.
    #[error("root finder did not converge after {iterations} iterations: residual norm {residual_norm:e}")]
    NonConvergence {
        best: Vec<f64>,
        residual_norm: f64,
        iterations: usize,
    },

    /// Two independent computations of the same quantity disagree.
    #[error("internal consistency failure: {0}")]
    Consistency(String),

    /// Fitting a closed-form pendulum solution failed.
    #[error("fit error: {0}")]
    Fit(String),

    /// No multistart shooting run converged.
    #[error("shooting search failed; best residuals {best_residuals:?}")]
    SearchFailure { best_residuals: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;
