//! Concrete discrete systems used across the library and its test suites.

use crate::chart::Chart;
use crate::fdms::DiscreteSystem;
use crate::fields::ScalarField2;
use crate::linalg::{dot, sub_vec};
use crate::scalar::Scalar;

/// Radial potential, evaluable on any scalar; `dv` is the closed-form
/// derivative kept alongside for reference results.
pub trait Potential: Sync + Send {
    fn v<S: Scalar>(&self, r: S) -> S;
    fn dv<S: Scalar>(&self, r: S) -> S;
}

/// Double-well sextic `V(r) = α r²(r² − β)²`.
#[derive(Clone, Copy, Debug)]
pub struct Sextic {
    pub alpha: f64,
    pub beta: f64,
}

impl Potential for Sextic {
    fn v<S: Scalar>(&self, r: S) -> S {
        let w = r * r - S::of(self.beta);
        S::of(self.alpha) * r * r * w * w
    }

    /// `V'(r) = 2αr(r² − β)(3r² − β)`
    fn dv<S: Scalar>(&self, r: S) -> S {
        let r2 = r * r;
        S::of(2.0 * self.alpha) * r * (r2 - S::of(self.beta)) * (S::of(3.0) * r2 - S::of(self.beta))
    }
}

/// `V ≡ 0`.
#[derive(Clone, Copy, Debug)]
pub struct NoPotential;

impl Potential for NoPotential {
    fn v<S: Scalar>(&self, _r: S) -> S {
        S::zero()
    }
    fn dv<S: Scalar>(&self, _r: S) -> S {
        S::zero()
    }
}

/// Unforced free particle on ℝⁿ: `L_d = m‖q1 − q0‖²/(2h)`.
pub struct FreeParticle {
    pub mass: f64,
    pub h: f64,
    chart: Chart,
}

impl FreeParticle {
    pub fn new(mass: f64, h: f64, dim: usize) -> Self {
        FreeParticle {
            mass,
            h,
            chart: Chart::euclidean("euclidean", dim),
        }
    }
}

impl DiscreteSystem for FreeParticle {
    fn chart(&self) -> &Chart {
        &self.chart
    }
    fn lagrangian<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S {
        let d = sub_vec(q1, q0);
        S::of(self.mass / (2.0 * self.h)) * dot(&d, &d)
    }
}

/// Planar rigid bar, chart `(φ, x, y)` with the angle unwrapped to ℝ:
/// `L_d = m/(2h)[(x1−x0)² + (y1−y0)²] + J/(2h)(φ1−φ0)²`.
pub struct PlanarBar {
    pub mass: f64,
    pub inertia: f64,
    pub h: f64,
    chart: Chart,
}

impl PlanarBar {
    pub fn new(mass: f64, inertia: f64, h: f64) -> Self {
        PlanarBar {
            mass,
            inertia,
            h,
            chart: Chart::euclidean("bar-S1xR2", 3),
        }
    }
}

impl DiscreteSystem for PlanarBar {
    fn chart(&self) -> &Chart {
        &self.chart
    }
    fn lagrangian<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S {
        let dphi = q1[0] - q0[0];
        let dx = q1[1] - q0[1];
        let dy = q1[2] - q0[2];
        S::of(self.mass / (2.0 * self.h)) * (dx * dx + dy * dy)
            + S::of(self.inertia / (2.0 * self.h)) * dphi * dphi
    }
}

/// Planar central-potential system in polar-type coordinates `(r, η)` on the
/// covering space, discretized by the midpoint rule:
/// `L_d = h[ m/2((Δr/h)² + r̄²(Δη/h)²) − V(r̄) ]` with `r̄ = (r0+r1)/2`.
pub struct CentralPotentialMp<P: Potential> {
    pub mass: f64,
    pub h: f64,
    pub potential: P,
    chart: Chart,
}

impl<P: Potential> CentralPotentialMp<P> {
    pub fn new(mass: f64, h: f64, potential: P) -> Self {
        CentralPotentialMp {
            mass,
            h,
            potential,
            chart: Chart::euclidean("central-r-eta", 2).with_positive(0),
        }
    }
}

impl<P: Potential> DiscreteSystem for CentralPotentialMp<P> {
    fn chart(&self) -> &Chart {
        &self.chart
    }
    fn lagrangian<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S {
        let h = S::of(self.h);
        let vr = (q1[0] - q0[0]) / h;
        let veta = (q1[1] - q0[1]) / h;
        let rbar = (q0[0] + q1[0]) * S::of(0.5);
        h * (S::of(self.mass * 0.5) * (vr * vr + rbar * rbar * veta * veta)
            - self.potential.v(rbar))
    }
}

/// Closed-form reduced midpoint system on the radial chart `r > 0`:
/// `L̆(r0,r1) = h[ m/2((Δr/h)² + (μ/m)²(2/(r0+r1))²) − V(r̄) ]`,
/// `f̆∓ = 8hμ²/m · (r0+r1)⁻³` on each slot.
pub struct ReducedCentralMp<P: Potential> {
    pub mass: f64,
    pub h: f64,
    pub mu: f64,
    pub potential: P,
    chart: Chart,
}

impl<P: Potential> ReducedCentralMp<P> {
    pub fn new(mass: f64, h: f64, mu: f64, potential: P) -> Self {
        ReducedCentralMp {
            mass,
            h,
            mu,
            potential,
            chart: Chart::euclidean("reduced-r", 1).with_positive(0),
        }
    }

    fn force_coefficient<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S {
        let s = q0[0] + q1[0];
        S::of(8.0 * self.h * self.mu * self.mu / self.mass) / (s * s * s)
    }
}

impl<P: Potential> DiscreteSystem for ReducedCentralMp<P> {
    fn chart(&self) -> &Chart {
        &self.chart
    }
    fn lagrangian<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S {
        let h = S::of(self.h);
        let vr = (q1[0] - q0[0]) / h;
        let s = q0[0] + q1[0];
        let ang = S::of(self.mu / self.mass) * S::of(2.0) / s;
        let rbar = s * S::of(0.5);
        h * (S::of(self.mass * 0.5) * (vr * vr + ang * ang) - self.potential.v(rbar))
    }
    fn force_minus<S: Scalar>(&self, q0: &[S], q1: &[S]) -> Vec<S> {
        vec![self.force_coefficient(q0, q1)]
    }
    fn force_plus<S: Scalar>(&self, q0: &[S], q1: &[S]) -> Vec<S> {
        vec![self.force_coefficient(q0, q1)]
    }
}

/// Exact discrete potential with `f̆ = dγ` for [`ReducedCentralMp`]:
/// `γ(r0,r1) = −4hμ²/(m(r0+r1)²)`.
pub struct GammaMp {
    pub mass: f64,
    pub h: f64,
    pub mu: f64,
}

impl ScalarField2 for GammaMp {
    fn dim(&self) -> usize {
        1
    }
    fn eval<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S {
        let s = q0[0] + q1[0];
        S::of(-4.0 * self.h * self.mu * self.mu / self.mass) / (s * s)
    }
}

/// Force absorbed into the Lagrangian: `(Q, L_d + γ_d, 0)`.
pub struct AbsorbedForce<'a, Y: DiscreteSystem, G: ScalarField2> {
    pub base: &'a Y,
    pub gamma: G,
}

impl<Y: DiscreteSystem, G: ScalarField2> DiscreteSystem for AbsorbedForce<'_, Y, G> {
    fn chart(&self) -> &Chart {
        self.base.chart()
    }
    fn lagrangian<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S {
        self.base.lagrangian(q0, q1) + self.gamma.eval(q0, q1)
    }
}

/// Kinetic Lagrangian on ℝ² with the rotational Routh force pair
/// `f⁻ = c(−y0 dx0 + x0 dy0)`, `f⁺ = c(y1 dx1 − x1 dy1)`.
pub struct SyntheticRouthPlane {
    pub c: f64,
    pub h: f64,
    chart: Chart,
}

impl SyntheticRouthPlane {
    pub fn new(c: f64, h: f64) -> Self {
        SyntheticRouthPlane {
            c,
            h,
            chart: Chart::euclidean("plane", 2),
        }
    }
}

impl DiscreteSystem for SyntheticRouthPlane {
    fn chart(&self) -> &Chart {
        &self.chart
    }
    fn lagrangian<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S {
        let d = sub_vec(q1, q0);
        dot(&d, &d) / S::of(2.0 * self.h)
    }
    fn force_minus<S: Scalar>(&self, q0: &[S], _q1: &[S]) -> Vec<S> {
        vec![-S::of(self.c) * q0[1], S::of(self.c) * q0[0]]
    }
    fn force_plus<S: Scalar>(&self, _q0: &[S], q1: &[S]) -> Vec<S> {
        vec![S::of(self.c) * q1[1], -S::of(self.c) * q1[0]]
    }
}

/// Kinetic Lagrangian on ℝ³ with `f⁻ = A(q0)`, `f⁺ = −A(q1)` for the 1-form
/// `A = c(z² dx + x² dy + y² dz)`; its Routh potential is the non-constant
/// exact 2-form `dA`.
pub struct SyntheticRouthSpace {
    pub c: f64,
    pub h: f64,
    chart: Chart,
}

impl SyntheticRouthSpace {
    pub fn new(c: f64, h: f64) -> Self {
        SyntheticRouthSpace {
            c,
            h,
            chart: Chart::euclidean("space", 3),
        }
    }

    fn one_form<S: Scalar>(&self, q: &[S]) -> Vec<S> {
        let c = S::of(self.c);
        vec![c * q[2] * q[2], c * q[0] * q[0], c * q[1] * q[1]]
    }
}

impl DiscreteSystem for SyntheticRouthSpace {
    fn chart(&self) -> &Chart {
        &self.chart
    }
    fn lagrangian<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S {
        let d = sub_vec(q1, q0);
        dot(&d, &d) / S::of(2.0 * self.h)
    }
    fn force_minus<S: Scalar>(&self, q0: &[S], _q1: &[S]) -> Vec<S> {
        self.one_form(q0)
    }
    fn force_plus<S: Scalar>(&self, _q0: &[S], q1: &[S]) -> Vec<S> {
        self.one_form(q1).into_iter().map(|x| -x).collect()
    }
}

/// Viscous control case on ℝ²: `f⁺ = −κ(q1 − q0) dq1`, not a Routh force.
pub struct ViscousPlane {
    pub kappa: f64,
    pub h: f64,
    chart: Chart,
}

impl ViscousPlane {
    pub fn new(kappa: f64, h: f64) -> Self {
        ViscousPlane {
            kappa,
            h,
            chart: Chart::euclidean("plane", 2),
        }
    }
}

impl DiscreteSystem for ViscousPlane {
    fn chart(&self) -> &Chart {
        &self.chart
    }
    fn lagrangian<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S {
        let d = sub_vec(q1, q0);
        dot(&d, &d) / S::of(2.0 * self.h)
    }
    fn force_plus<S: Scalar>(&self, q0: &[S], q1: &[S]) -> Vec<S> {
        sub_vec(q1, q0)
            .into_iter()
            .map(|x| -S::of(self.kappa) * x)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{self, FdStep};

    #[test]
    fn sextic_derivative_routes_agree() {
        let v = Sextic {
            alpha: 0.1,
            beta: 2.0,
        };
        // closed form vs dual numbers vs reference value
        assert!((v.dv(0.2f64) - 0.147392).abs() < 1e-15);
        for &r in &[0.2f64, 0.7, 1.3, 2.4] {
            let ad = crate::dual::derivative(|x| v.v(x), r);
            assert!((ad - v.dv(r)).abs() < 1e-12, "r = {r}");
        }
    }

    #[test]
    fn midpoint_lagrangian_first_slot_derivative() {
        // hand value at (r0,η0,r1,η1) = (1, 0, 1.2, 0.3), m = 1, h = 0.2, V ≡ 0
        let sys = CentralPotentialMp::new(1.0, 0.2, NoPotential);
        let lag = crate::fdms::LagrangianField(&sys);
        let g = fields::d1(&lag, &[1.0f64, 0.0], &[1.2, 0.3]);
        assert!((g[0] - (-0.7525)).abs() < 1e-12);
        let fd = fields::d1_fd(
            &lag,
            sys.chart(),
            &[1.0, 0.0],
            &[1.2, 0.3],
            FdStep(Some(1e-5)),
        )
        .unwrap();
        for (a, b) in g.iter().zip(&fd) {
            assert!((a - b).abs() / a.abs().max(1.0) < 1e-6);
        }
    }

    #[test]
    fn bar_coupling_matrix_is_diagonal() {
        let sys = PlanarBar::new(1.0, 1.0, 0.2);
        let lag = crate::fdms::LagrangianField(&sys);
        let m = fields::d1d2(&lag, &[0.1f64, 0.2, 0.3], &[0.2, 0.4, 0.1]);
        // chart order (φ, x, y): −diag(J/h, m/h, m/h)
        let expect = [-5.0, -5.0, -5.0];
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { expect[i] } else { 0.0 };
                assert!((m[(i, j)] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reduced_force_coefficient_value() {
        let sys = ReducedCentralMp::new(
            1.0,
            0.2,
            -0.114,
            Sextic {
                alpha: 0.1,
                beta: 2.0,
            },
        );
        let f = sys.force_minus(&[1.0f64], &[1.0]);
        assert!((f[0] - 0.0025992).abs() < 1e-12);
        let fp = sys.force_plus(&[1.0], &[1.0]);
        assert_eq!(f[0], fp[0]);
    }

    #[test]
    fn gamma_gradient_matches_reduced_force() {
        let gamma = GammaMp {
            mass: 1.0,
            h: 0.2,
            mu: -0.114,
        };
        let g = fields::d1(&gamma, &[1.0f64], &[1.0]);
        assert!((g[0] - 0.0025992).abs() < 1e-12);
    }
}
