//! Error type shared by all modules.

use thiserror::Error;

/// Library result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A point (or a finite-difference probe) left the chart domain.
    #[error("chart '{chart}': coordinate {index} = {value} violates {constraint} ({context})")]
    ChartDomain {
        chart: String,
        index: usize,
        value: f64,
        constraint: String,
        context: String,
    },

    /// Mismatch between a point and the chart it is used with.
    #[error("expected {expected} coordinates on chart '{chart}', got {got}")]
    DimensionMismatch {
        chart: String,
        expected: usize,
        got: usize,
    },

    /// Newton iteration hit the iteration cap.
    #[error("Newton did not converge after {iters} iterations, last residual {residual:.3e}")]
    NonConvergence { iters: usize, residual: f64 },

    /// The Newton matrix is singular or numerically unusable.
    #[error("singular Jacobian (condition estimate {cond:.3e})")]
    SingularJacobian { cond: f64 },

    /// A step of a trajectory failed.
    #[error("step {index}: {source}")]
    StepFailed {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    /// The two Routh-potential candidates (from f⁻ and from f⁺) disagree.
    #[error("inconsistent Routh potential candidates, disagreement {defect:.3e} (tol {tol:.1e})")]
    InconsistentBeta { defect: f64, tol: f64 },

    /// A corrected two-form was requested without a valid Routh certificate.
    #[error("operation requires a Routh certificate with is_routh = true")]
    RequiresRouthCertificate,

    /// The two momentum-map expressions disagree: the Lagrangian is not invariant.
    #[error("momentum map expressions disagree by {defect:.3e}: Lagrangian not invariant under the action")]
    InvarianceViolation { defect: f64 },

    /// The discrete-connection equation has no solution in reach of the solver.
    #[error("no group element solves the discrete connection equation (residual {residual:.3e})")]
    NoSolution { residual: f64 },

    /// A form expected to drop to the quotient pairs non-trivially with vertical directions.
    #[error("form is not basic: contraction with a generator is {defect:.3e} (tol {tol:.1e})")]
    NotBasic { defect: f64, tol: f64 },

    /// A chosen quotient representative violates the chart domain.
    #[error("quotient representative left the chart: {0}")]
    RepresentativeOutOfChart(String),

    /// The adaptive integrator reduced the step below the representable floor.
    #[error("adaptive step underflow at t = {t} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },

    /// Invalid configuration value.
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Wraps an error with the index of the failing trajectory step.
    pub fn at_step(self, index: usize) -> Error {
        Error::StepFailed {
            index,
            source: Box::new(self),
        }
    }
}
