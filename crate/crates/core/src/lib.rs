//! Forced discrete mechanical systems on a single chart.
//!
//! A forced discrete mechanical system (FDMS) is a triple `(Q, L_d, f_d)`: a
//! configuration chart, a discrete Lagrangian `L_d : Q × Q → ℝ` and a discrete
//! force split into slot covector fields `f⁻ ⊕ f⁺`.  This crate provides
//!
//! * a forward-mode automatic differentiation engine ([`dual`], [`fields`])
//!   producing every slot derivative the rest of the library consumes,
//! * the discrete Euler–Lagrange residual, forced Legendre transforms and the
//!   Newton-based discrete flow ([`fdms`]),
//! * discrete two-forms on `Q × Q`, Routh-force detection with extraction of
//!   the generating potential, and flow-pullback preservation checks
//!   ([`forms`]),
//! * group actions, discrete momentum maps and the affine discrete connection
//!   attached to a momentum level ([`symmetry`]),
//! * discrete Routh reduction to the quotient chart ([`reduction`]),
//! * continuous reference integrators: RK4 and an embedded adaptive pair used
//!   as the "exact" solution ([`ode`]).
//!
//! Field definitions are generic over the scalar type through the [`Scalar`]
//! trait, so a Lagrangian written once can be evaluated on `f32`, `f64` or on
//! (nested) dual numbers.  Solvers and reports work at the concrete precision
//! fixed by the crate-root alias [`Real`].

pub mod chart;
pub mod dual;
pub mod error;
pub mod fdms;
pub mod fields;
pub mod forms;
pub mod linalg;
pub mod ode;
pub mod reduction;
pub mod sampling;
pub mod scalar;
pub mod symmetry;
pub mod systems;

pub use chart::{Chart, ChartPoint, Covector, TangentVector};
pub use dual::Dual;
pub use error::{Error, Result};
pub use fdms::{DiscreteSystem, SolverConfig, StepDiagnostics, Trajectory};
pub use linalg::Matrix;
pub use scalar::Scalar;

/// Working precision of solvers, diagnostics and emitted data.
pub type Real = f64;

/// Dual number over the working precision.
pub type DualReal = Dual<Real>;
