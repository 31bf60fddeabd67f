//! Forced discrete mechanical systems and their Newton-based local flow.
//!
//! A trajectory is characterized by the three-point residual
//! `D₂L_d(q0,q1) + D₁L_d(q1,q2) + f⁺(q0,q1) + f⁻(q1,q2) = 0`, equivalently by
//! matching the forced discrete Legendre transforms 𝔽⁺(q0,q1) = 𝔽⁻(q1,q2).
//! `step` solves the residual for `q2` by Newton iteration seeded with the
//! chart extrapolation `2q1 − q0`.

use crate::chart::{Chart, ChartPoint, Covector};
use crate::error::{Error, Result};
use crate::fields::{self, CovectorField2, ScalarField2};
use crate::linalg::{self, Matrix};
use crate::scalar::Scalar;

/// A forced discrete mechanical system on a fixed chart.
///
/// `force_minus(q0, q1)` is a covector at `q0`, `force_plus(q0, q1)` a
/// covector at `q1`; both default to zero (unforced system).
pub trait DiscreteSystem: Sync {
    fn chart(&self) -> &Chart;

    fn lagrangian<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S;

    fn force_minus<S: Scalar>(&self, q0: &[S], q1: &[S]) -> Vec<S> {
        let _ = (q0, q1);
        vec![S::zero(); self.chart().dim()]
    }

    fn force_plus<S: Scalar>(&self, q0: &[S], q1: &[S]) -> Vec<S> {
        let _ = (q0, q1);
        vec![S::zero(); self.chart().dim()]
    }
}

/// The discrete Lagrangian of a system as a scalar field.
pub struct LagrangianField<'a, Y: DiscreteSystem>(pub &'a Y);

impl<Y: DiscreteSystem> ScalarField2 for LagrangianField<'_, Y> {
    fn dim(&self) -> usize {
        self.0.chart().dim()
    }
    fn eval<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S {
        self.0.lagrangian(q0, q1)
    }
}

/// The slot-1 force of a system as a covector field.
pub struct ForceMinusField<'a, Y: DiscreteSystem>(pub &'a Y);

impl<Y: DiscreteSystem> CovectorField2 for ForceMinusField<'_, Y> {
    fn dim(&self) -> usize {
        self.0.chart().dim()
    }
    fn eval<S: Scalar>(&self, q0: &[S], q1: &[S]) -> Vec<S> {
        self.0.force_minus(q0, q1)
    }
}

/// The slot-2 force of a system as a covector field.
pub struct ForcePlusField<'a, Y: DiscreteSystem>(pub &'a Y);

impl<Y: DiscreteSystem> CovectorField2 for ForcePlusField<'_, Y> {
    fn dim(&self) -> usize {
        self.0.chart().dim()
    }
    fn eval<S: Scalar>(&self, q0: &[S], q1: &[S]) -> Vec<S> {
        self.0.force_plus(q0, q1)
    }
}

/// Forced discrete Legendre transform 𝔽⁺ = D₂L_d + f⁺, a covector at `q1`.
pub fn legendre_plus_coords<S: Scalar>(sys: &impl DiscreteSystem, q0: &[S], q1: &[S]) -> Vec<S> {
    let mut p = fields::d2(&LagrangianField(sys), q0, q1);
    for (pi, fi) in p.iter_mut().zip(sys.force_plus(q0, q1)) {
        *pi = *pi + fi;
    }
    p
}

/// Forced discrete Legendre transform 𝔽⁻ = −D₁L_d − f⁻, a covector at `q0`.
pub fn legendre_minus_coords<S: Scalar>(sys: &impl DiscreteSystem, q0: &[S], q1: &[S]) -> Vec<S> {
    let mut p = fields::d1(&LagrangianField(sys), q0, q1);
    for (pi, fi) in p.iter_mut().zip(sys.force_minus(q0, q1)) {
        *pi = -(*pi + fi);
    }
    p
}

/// Three-point residual at `q1`; zero exactly on trajectories.
///
/// Computed as 𝔽⁺(q0,q1) − 𝔽⁻(q1,q2) so the Legendre identity holds by
/// construction.
pub fn del_residual_coords<S: Scalar>(
    sys: &impl DiscreteSystem,
    q0: &[S],
    q1: &[S],
    q2: &[S],
) -> Vec<S> {
    let plus = legendre_plus_coords(sys, q0, q1);
    let minus = legendre_minus_coords(sys, q1, q2);
    linalg::sub_vec(&plus, &minus)
}

fn checked<'a>(sys: &impl DiscreteSystem, p: &'a ChartPoint, what: &str) -> Result<&'a [f64]> {
    sys.chart().check_point(p, what)?;
    Ok(&p.coords)
}

/// Chart-point wrapper for [`del_residual_coords`].
pub fn del_residual(
    sys: &impl DiscreteSystem,
    q0: &ChartPoint,
    q1: &ChartPoint,
    q2: &ChartPoint,
) -> Result<Covector> {
    let a = checked(sys, q0, "del_residual q0")?;
    let b = checked(sys, q1, "del_residual q1")?;
    let c = checked(sys, q2, "del_residual q2")?;
    Ok(Covector {
        coords: del_residual_coords(sys, a, b, c),
        base: q1.clone(),
    })
}

/// Chart-point wrapper for [`legendre_plus_coords`].
pub fn legendre_plus(
    sys: &impl DiscreteSystem,
    q0: &ChartPoint,
    q1: &ChartPoint,
) -> Result<Covector> {
    let a = checked(sys, q0, "legendre_plus q0")?;
    let b = checked(sys, q1, "legendre_plus q1")?;
    Ok(Covector {
        coords: legendre_plus_coords(sys, a, b),
        base: q1.clone(),
    })
}

/// Chart-point wrapper for [`legendre_minus_coords`].
pub fn legendre_minus(
    sys: &impl DiscreteSystem,
    q0: &ChartPoint,
    q1: &ChartPoint,
) -> Result<Covector> {
    let a = checked(sys, q0, "legendre_minus q0")?;
    let b = checked(sys, q1, "legendre_minus q1")?;
    Ok(Covector {
        coords: legendre_minus_coords(sys, a, b),
        base: q0.clone(),
    })
}

/// The two bilinear maps controlling local invertibility of the Legendre
/// transforms, together with the regularity verdict.
pub struct RegularityReport {
    /// `∂²L_d/∂q0∂q1 + ∂f⁺/∂q0`, entry `(i,j) = ∂(𝔽⁺)_i/∂q0ʲ`.
    pub b_plus: Matrix<f64>,
    /// `−∂²L_d/∂q0∂q1 − ∂f⁻/∂q1`, entry `(i,j) = ∂(𝔽⁻)_i/∂q1ʲ`.
    pub b_minus: Matrix<f64>,
    pub is_regular: bool,
}

/// Evaluates the regularity matrices of the system at `(q0, q1)`.
pub fn regularity_matrices(sys: &impl DiscreteSystem, q0: &[f64], q1: &[f64]) -> RegularityReport {
    let lag = LagrangianField(sys);
    let b_plus = fields::d1d2(&lag, q0, q1).add(&fields::jac1(&ForcePlusField(sys), q0, q1));
    let b_minus = fields::d2d1(&lag, q0, q1)
        .add(&fields::jac2(&ForceMinusField(sys), q0, q1))
        .scale(-1.0);
    let is_regular = linalg::is_invertible(&b_plus) && linalg::is_invertible(&b_minus);
    RegularityReport {
        b_plus,
        b_minus,
        is_regular,
    }
}

/// Newton solver configuration for the discrete flow.
#[derive(Clone, Copy, Debug)]
pub struct SolverConfig {
    /// ∞-norm residual tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Step scaling; 1.0 = undamped Newton.
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-12,
            max_iter: 50,
            damping: 1.0,
        }
    }
}

/// Newton matrix `∂(residual)/∂q2 = −[∂(𝔽⁻)/∂q1-slot]` at `(q1, q2)`.
pub fn newton_matrix(sys: &impl DiscreteSystem, q1: &[f64], q2: &[f64]) -> Matrix<f64> {
    // residual = 𝔽⁺(q0,q1) − 𝔽⁻(q1,q2); only the second term depends on q2
    fields::d2d1(&LagrangianField(sys), q1, q2).add(&fields::jac2(&ForceMinusField(sys), q1, q2))
}

/// Advances the discrete flow one step: solves the residual for `q2`.
pub fn step_coords(
    sys: &impl DiscreteSystem,
    q0: &[f64],
    q1: &[f64],
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, StepDiagnostics)> {
    let chart = sys.chart();
    chart.check_coords(q0, "step q0")?;
    chart.check_coords(q1, "step q1")?;
    let mut q2: Vec<f64> = q1.iter().zip(q0).map(|(&b, &a)| 2.0 * b - a).collect();
    chart.check_coords(&q2, "step initial guess 2q1 - q0")?;

    let mut residual_norm = f64::INFINITY;
    for iter in 0..cfg.max_iter {
        let r = del_residual_coords(sys, q0, q1, &q2);
        residual_norm = linalg::norm_inf(&r);
        if residual_norm <= cfg.tol {
            return Ok((
                q2,
                StepDiagnostics {
                    newton_iters: iter,
                    residual_norm,
                },
            ));
        }
        let jac = newton_matrix(sys, q1, &q2);
        let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
        let delta = linalg::solve_checked(&jac, &rhs)?;
        for (x, d) in q2.iter_mut().zip(&delta) {
            *x += cfg.damping * d;
        }
        chart.check_coords(&q2, "step Newton iterate")?;
    }
    Err(Error::NonConvergence {
        iters: cfg.max_iter,
        residual: residual_norm,
    })
}

/// Chart-point wrapper for [`step_coords`].
pub fn step(
    sys: &impl DiscreteSystem,
    q0: &ChartPoint,
    q1: &ChartPoint,
    cfg: &SolverConfig,
) -> Result<ChartPoint> {
    let (coords, _) = step_coords(sys, &q0.coords, &q1.coords, cfg)?;
    sys.chart().point(coords)
}

/// Per-step solver diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct StepDiagnostics {
    pub newton_iters: usize,
    pub residual_norm: f64,
}

/// A computed discrete trajectory `q_0 … q_N` with per-step diagnostics.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub points: Vec<ChartPoint>,
    pub step_diagnostics: Vec<StepDiagnostics>,
}

impl Trajectory {
    pub fn coords(&self, k: usize) -> &[f64] {
        &self.points[k].coords
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.step_diagnostics
            .iter()
            .fold(0.0, |a, d| a.max(d.residual_norm))
    }
}

/// Iterates [`step_coords`] `n_steps` times from the seed pair.
pub fn run(
    sys: &impl DiscreteSystem,
    q0: &ChartPoint,
    q1: &ChartPoint,
    n_steps: usize,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    sys.chart().check_point(q0, "run seed q0")?;
    sys.chart().check_point(q1, "run seed q1")?;
    let mut points = vec![q0.clone(), q1.clone()];
    let mut diags = Vec::with_capacity(n_steps);
    for k in 0..n_steps {
        let m = points.len();
        let (next, diag) = step_coords(sys, &points[m - 2].coords, &points[m - 1].coords, cfg)
            .map_err(|e| e.at_step(k))?;
        points.push(sys.chart().point(next).map_err(|e| e.at_step(k))?);
        diags.push(diag);
    }
    Ok(Trajectory {
        points,
        step_diagnostics: diags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::FreeParticle;

    fn pt(sys: &impl DiscreteSystem, coords: &[f64]) -> ChartPoint {
        sys.chart().point(coords.to_vec()).unwrap()
    }

    #[test]
    fn free_particle_uniform_motion_solves_residual() {
        let sys = FreeParticle::new(1.0, 1.0, 1);
        let r = del_residual_coords(&sys, &[0.0f64], &[1.0], &[2.0]);
        assert_eq!(r, vec![0.0]);
    }

    #[test]
    fn free_particle_residual_value() {
        // m(q1−q0)/h − m(q2−q1)/h = 1 − 2 = −1 at (0,1,3), h = 1
        let sys = FreeParticle::new(1.0, 1.0, 1);
        let r = del_residual_coords(&sys, &[0.0f64], &[1.0], &[3.0]);
        assert!((r[0] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn free_particle_legendre_values() {
        let sys = FreeParticle::new(1.0, 0.5, 1);
        let p = legendre_plus_coords(&sys, &[0.0f64], &[1.0]);
        let m = legendre_minus_coords(&sys, &[0.0f64], &[1.0]);
        assert!((p[0] - 2.0).abs() < 1e-15);
        assert!((m[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn residual_equals_legendre_mismatch_exactly() {
        let sys = FreeParticle::new(0.7, 0.3, 2);
        let (q0, q1, q2) = ([0.1f64, 0.2], [0.5, -0.1], [1.4, 0.4]);
        let r = del_residual_coords(&sys, &q0, &q1, &q2);
        let p = legendre_plus_coords(&sys, &q0, &q1);
        let m = legendre_minus_coords(&sys, &q1, &q2);
        for i in 0..2 {
            assert_eq!(r[i], p[i] - m[i]);
        }
    }

    #[test]
    fn step_free_particle_is_linear_extrapolation() {
        let sys = FreeParticle::new(1.0, 0.1, 1);
        let cfg = SolverConfig::default();
        let (q2, d) = step_coords(&sys, &[0.0], &[1.0], &cfg).unwrap();
        assert!((q2[0] - 2.0).abs() < 1e-12);
        assert!(d.newton_iters <= 1);
    }

    #[test]
    fn run_free_particle_line() {
        let sys = FreeParticle::new(1.0, 0.1, 1);
        let cfg = SolverConfig::default();
        let traj = run(&sys, &pt(&sys, &[0.0]), &pt(&sys, &[1.0]), 5, &cfg).unwrap();
        let xs: Vec<f64> = traj.points.iter().map(|p| p.coords[0]).collect();
        for (k, x) in xs.iter().enumerate() {
            assert!((x - k as f64).abs() < 1e-10);
        }
        assert!(traj.max_residual() <= 1e-12);
    }

    #[test]
    fn degenerate_lagrangian_is_irregular() {
        // L = q0·q0 has no slot coupling
        struct Degenerate(Chart);
        impl DiscreteSystem for Degenerate {
            fn chart(&self) -> &Chart {
                &self.0
            }
            fn lagrangian<S: Scalar>(&self, q0: &[S], _q1: &[S]) -> S {
                crate::linalg::dot(q0, q0)
            }
        }
        let sys = Degenerate(Chart::euclidean("plane", 2));
        let rep = regularity_matrices(&sys, &[0.3, 0.1], &[0.5, 0.2]);
        assert!(!rep.is_regular);
        assert!(rep.b_plus.max_abs() < 1e-14);
        // and the Newton matrix of its flow is singular
        let err = step_coords(&sys, &[0.3, 0.1], &[0.5, 0.2], &SolverConfig::default());
        assert!(matches!(err, Err(Error::SingularJacobian { .. })));
    }

    #[test]
    fn bar_regularity_matrices() {
        use crate::systems::PlanarBar;
        let sys = PlanarBar::new(1.0, 1.0, 0.2);
        let rep = regularity_matrices(&sys, &[0.1, 0.2, 0.3], &[0.2, 0.4, 0.1]);
        assert!(rep.is_regular);
        // chart (φ, x, y): both bilinear maps are −diag(J, m, m)/h
        for i in 0..3 {
            assert!((rep.b_plus[(i, i)] + 5.0).abs() < 1e-12);
            assert!((rep.b_minus[(i, i)] - 5.0).abs() < 1e-12);
        }
    }

    #[test]
    fn central_reduced_regular_at_reference_points() {
        use crate::systems::{ReducedCentralMp, Sextic};
        let sys = ReducedCentralMp::new(
            1.0,
            0.2,
            -0.114,
            Sextic {
                alpha: 0.1,
                beta: 2.0,
            },
        );
        for pair in [[1.0, 1.1], [0.2, 0.201]] {
            let rep = regularity_matrices(&sys, &pair[..1], &pair[1..]);
            assert!(rep.is_regular);
            assert!(rep.b_plus[(0, 0)].abs() > 1e-6);
        }
    }

    #[test]
    fn bar_closed_form_triple_solves_residual() {
        use crate::systems::PlanarBar;
        let sys = PlanarBar::new(1.0, 1.3, 0.2);
        let q0 = [0.1f64, 0.4, -0.2];
        let q1 = [0.15, 0.65, -0.1];
        let q2: Vec<f64> = q1.iter().zip(&q0).map(|(&b, &a)| 2.0 * b - a).collect();
        let r = del_residual_coords(&sys, &q0, &q1, &q2);
        assert!(crate::linalg::norm_inf(&r) < 1e-12);
    }

    #[test]
    fn central_reduced_step_golden_value() {
        use crate::systems::{ReducedCentralMp, Sextic};
        let sys = ReducedCentralMp::new(
            1.0,
            0.2,
            -0.114,
            Sextic {
                alpha: 0.1,
                beta: 2.0,
            },
        );
        let cfg = SolverConfig::default();
        let (q2, d) = step_coords(&sys, &[0.2], &[0.201], &cfg).unwrap();
        assert!(q2[0] > 0.0);
        assert!(d.residual_norm <= 1e-12);
        // independent bisection oracle on the scalar residual
        let f = |r2: f64| del_residual_coords(&sys, &[0.2], &[0.201], &[r2])[0];
        let (mut lo, mut hi) = (0.15f64, 0.4);
        assert!(f(lo) > 0.0 && f(hi) < 0.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let bisected = 0.5 * (lo + hi);
        assert!((q2[0] - bisected).abs() < 1e-10);
        assert!((q2[0] - 0.2506166311244465).abs() < 1e-12);
    }

    #[test]
    fn iteration_cap_reports_nonconvergence() {
        use crate::systems::{ReducedCentralMp, Sextic};
        let sys = ReducedCentralMp::new(
            1.0,
            0.2,
            -0.114,
            Sextic {
                alpha: 0.1,
                beta: 2.0,
            },
        );
        let cfg = SolverConfig {
            tol: 1e-14,
            max_iter: 1,
            damping: 1.0,
        };
        let err = step_coords(&sys, &[0.2], &[0.201], &cfg);
        assert!(matches!(err, Err(Error::NonConvergence { .. })));
    }
}
