//! Group actions, discrete momentum maps and the affine discrete connection
//! attached to a momentum level.
//!
//! Two concrete actions ship: the special Euclidean group of the plane
//! ([`Se2`], chart `(α, a, b)` with the angle on the covering space) and
//! one-parameter translations along a chart coordinate
//! ([`TranslationSymmetry`]). The reduction machinery works with the latter,
//! which is exactly the isotropy-subgroup situation of the shipped examples.

use crate::chart::Chart;
use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::fdms::{DiscreteSystem, LagrangianField};
use crate::fields;
use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;

/// Tolerance for the agreement of the two momentum-map expressions.
pub const INVARIANCE_TOL: f64 = 1e-8;

/// A Lie group acting on a chart.
///
/// Group elements are coordinate vectors in a fixed group chart containing the
/// identity at the origin of curves `t ↦ t·ξ` (enough to generate the
/// infinitesimal machinery by differentiation).
pub trait GroupAction: Sync {
    fn lie_dim(&self) -> usize;

    fn identity(&self) -> Vec<f64>;

    fn compose<S: Scalar>(&self, g: &[S], h: &[S]) -> Vec<S>;

    fn inverse<S: Scalar>(&self, g: &[S]) -> Vec<S>;

    fn act<S: Scalar>(&self, g: &[S], q: &[S]) -> Vec<S>;

    /// Infinitesimal generator of the `i`-th Lie-algebra basis element at `q`,
    /// by default differentiated out of the action along the chart curve
    /// `t ↦ t·e_i`.
    fn generator(&self, i: usize, q: &[f64]) -> Vec<f64> {
        let g: Vec<Dual<f64>> = (0..self.lie_dim())
            .map(|k| Dual::new(0.0, if k == i { 1.0 } else { 0.0 }))
            .collect();
        let qc: Vec<Dual<f64>> = q.iter().map(|&x| Dual::constant(x)).collect();
        self.act(&g, &qc).into_iter().map(|x| x.eps).collect()
    }

    /// Adjoint representation as a matrix, differentiated out of conjugation.
    fn adjoint(&self, g: &[f64]) -> Matrix<f64> {
        let n = self.lie_dim();
        let gc: Vec<Dual<f64>> = g.iter().map(|&x| Dual::constant(x)).collect();
        let ginv = self.inverse(&gc);
        Matrix::from_fn(n, n, |i, j| {
            let xi: Vec<Dual<f64>> = (0..n)
                .map(|k| Dual::new(0.0, if k == j { 1.0 } else { 0.0 }))
                .collect();
            let conj = self.compose(&self.compose(&gc, &xi), &ginv);
            conj[i].eps
        })
    }

    /// Left coadjoint action `⟨g·μ, ξ⟩ = ⟨μ, Ad_{g⁻¹} ξ⟩`; instances override
    /// this with closed formulas, the default differentiates conjugation.
    fn coadjoint(&self, g: &[f64], mu: &[f64]) -> Vec<f64> {
        let ginv = self.inverse(g);
        self.adjoint(&ginv).transpose().matvec(mu)
    }
}

/// Special Euclidean group of the plane, identified with `S¹ × ℝ²` via the
/// chart `(α, a, b)`, acting on the bar chart `(φ, x, y)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Se2;

impl Se2 {
    /// Embedding of the x-translation isotropy subgroup `{(0, a, 0)}`.
    pub fn embed_x_translation(a: f64) -> Vec<f64> {
        vec![0.0, a, 0.0]
    }
}

impl GroupAction for Se2 {
    fn lie_dim(&self) -> usize {
        3
    }

    fn identity(&self) -> Vec<f64> {
        vec![0.0; 3]
    }

    fn compose<S: Scalar>(&self, g: &[S], h: &[S]) -> Vec<S> {
        let (alpha, a, b) = (g[0], g[1], g[2]);
        let (c, s) = (alpha.cos(), alpha.sin());
        vec![
            alpha + h[0],
            h[1] * c - h[2] * s + a,
            h[1] * s + h[2] * c + b,
        ]
    }

    fn inverse<S: Scalar>(&self, g: &[S]) -> Vec<S> {
        let (alpha, a, b) = (g[0], g[1], g[2]);
        let (c, s) = (alpha.cos(), alpha.sin());
        vec![-alpha, -(a * c + b * s), a * s - b * c]
    }

    fn act<S: Scalar>(&self, g: &[S], q: &[S]) -> Vec<S> {
        let (alpha, a, b) = (g[0], g[1], g[2]);
        let (c, s) = (alpha.cos(), alpha.sin());
        vec![
            q[0] + alpha,
            q[1] * c - q[2] * s + a,
            q[1] * s + q[2] * c + b,
        ]
    }

    fn coadjoint(&self, g: &[f64], mu: &[f64]) -> Vec<f64> {
        let (alpha, a, b) = (g[0], g[1], g[2]);
        let (c, s) = (alpha.cos(), alpha.sin());
        vec![
            mu[0] + mu[1] * (a * s - b * c) + mu[2] * (a * c + b * s),
            mu[1] * c - mu[2] * s,
            mu[1] * s + mu[2] * c,
        ]
    }
}

/// Principal-connection 1-form with affine coefficients
/// `coeffs(q) = constant + linear·q`; the group-coordinate entry must be 1.
#[derive(Clone, Debug)]
pub struct ConnectionForm {
    pub constant: Vec<f64>,
    pub linear: Option<Matrix<f64>>,
}

impl ConnectionForm {
    pub fn constant(coeffs: Vec<f64>) -> Self {
        ConnectionForm {
            constant: coeffs,
            linear: None,
        }
    }

    pub fn with_linear(coeffs: Vec<f64>, linear: Matrix<f64>) -> Self {
        ConnectionForm {
            constant: coeffs,
            linear: Some(linear),
        }
    }

    pub fn coeffs<S: Scalar>(&self, q: &[S]) -> Vec<S> {
        let mut c: Vec<S> = self.constant.iter().map(|&x| S::of(x)).collect();
        if let Some(m) = &self.linear {
            for i in 0..c.len() {
                for j in 0..q.len() {
                    c[i] = c[i] + S::of(m[(i, j)]) * q[j];
                }
            }
        }
        c
    }
}

/// One-parameter translation symmetry along `group_coord` of a chart, with a
/// declared principal connection.
#[derive(Clone, Debug)]
pub struct TranslationSymmetry {
    chart: Chart,
    quotient_chart: Chart,
    pub group_coord: usize,
    pub connection: ConnectionForm,
}

impl TranslationSymmetry {
    pub fn new(
        chart: Chart,
        group_coord: usize,
        quotient_chart: Chart,
        connection: ConnectionForm,
    ) -> Self {
        assert_eq!(quotient_chart.dim() + 1, chart.dim());
        assert_eq!(connection.constant.len(), chart.dim());
        assert_eq!(connection.constant[group_coord], 1.0);
        TranslationSymmetry {
            chart,
            quotient_chart,
            group_coord,
            connection,
        }
    }

    /// Translation with the flat connection (horizontal = coordinate planes).
    pub fn flat(chart: Chart, group_coord: usize, quotient_chart: Chart) -> Self {
        let mut coeffs = vec![0.0; chart.dim()];
        coeffs[group_coord] = 1.0;
        Self::new(
            chart,
            group_coord,
            quotient_chart,
            ConnectionForm::constant(coeffs),
        )
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn quotient_chart(&self) -> &Chart {
        &self.quotient_chart
    }

    pub fn quotient_dim(&self) -> usize {
        self.quotient_chart.dim()
    }

    /// Quotient projection: drops the group coordinate.
    pub fn project(&self, q: &[f64]) -> Vec<f64> {
        q.iter()
            .enumerate()
            .filter(|(i, _)| *i != self.group_coord)
            .map(|(_, &x)| x)
            .collect()
    }

    /// Representative over `tau` with the group coordinate set to `value`.
    pub fn lift_with<S: Scalar>(&self, tau: &[S], value: S) -> Vec<S> {
        let mut q = Vec::with_capacity(self.chart.dim());
        let mut it = tau.iter();
        for i in 0..self.chart.dim() {
            if i == self.group_coord {
                q.push(value);
            } else {
                q.push(*it.next().expect("quotient coordinate count"));
            }
        }
        q
    }

    /// Deterministic section: group coordinate fixed to zero.
    pub fn lift_base<S: Scalar>(&self, tau: &[S]) -> Vec<S> {
        self.lift_with(tau, S::zero())
    }

    /// Horizontal lift of a quotient tangent vector at `q`: quotient slots
    /// carry `dtau`, the group slot is solved from `𝔄(δq) = 0`.
    pub fn horizontal_lift<S: Scalar>(&self, q: &[S], dtau: &[S]) -> Vec<S> {
        let w = self.connection.coeffs(q);
        let mut lift = self.lift_with(dtau, S::zero());
        let mut vertical = S::zero();
        for (i, l) in lift.iter().enumerate() {
            if i != self.group_coord {
                vertical = vertical + w[i] * *l;
            }
        }
        lift[self.group_coord] = -vertical;
        lift
    }

    /// Coefficients of the 1-form `⟨μ, 𝔄(·)⟩` at `q`.
    pub fn connection_one_form_mu<S: Scalar>(&self, mu: f64, q: &[S]) -> Vec<S> {
        self.connection
            .coeffs(q)
            .into_iter()
            .map(|c| S::of(mu) * c)
            .collect()
    }
}

impl GroupAction for TranslationSymmetry {
    fn lie_dim(&self) -> usize {
        1
    }

    fn identity(&self) -> Vec<f64> {
        vec![0.0]
    }

    fn compose<S: Scalar>(&self, g: &[S], h: &[S]) -> Vec<S> {
        vec![g[0] + h[0]]
    }

    fn inverse<S: Scalar>(&self, g: &[S]) -> Vec<S> {
        vec![-g[0]]
    }

    fn act<S: Scalar>(&self, g: &[S], q: &[S]) -> Vec<S> {
        let mut out = q.to_vec();
        out[self.group_coord] = out[self.group_coord] + g[0];
        out
    }
}

/// Discrete momentum map `J_d(q0, q1)ξ = D₂L_d(q0, q1)·ξ_Q(q1)`.
///
/// The invariance of the Lagrangian makes this equal to
/// `−D₁L_d(q0, q1)·ξ_Q(q0)`; both expressions are evaluated and their
/// disagreement raises [`Error::InvarianceViolation`].
pub fn momentum(
    sys: &impl DiscreteSystem,
    action: &impl GroupAction,
    q0: &[f64],
    q1: &[f64],
) -> Result<Vec<f64>> {
    let lag = LagrangianField(sys);
    let g1 = fields::d1(&lag, q0, q1);
    let g2 = fields::d2(&lag, q0, q1);
    let mut j = Vec::with_capacity(action.lie_dim());
    let mut defect = 0.0f64;
    for i in 0..action.lie_dim() {
        let via_d2 = dot(&g2, &action.generator(i, q1));
        let via_d1 = -dot(&g1, &action.generator(i, q0));
        defect = defect.max((via_d2 - via_d1).abs());
        j.push(via_d2);
    }
    if defect > INVARIANCE_TOL {
        return Err(Error::InvarianceViolation { defect });
    }
    Ok(j)
}

/// Scalar momentum of a translation symmetry, generic over the scalar type
/// (this is what the Newton-based discrete connection differentiates).
pub fn translation_momentum<S: Scalar>(
    sys: &impl DiscreteSystem,
    setup: &TranslationSymmetry,
    q0: &[S],
    q1: &[S],
) -> S {
    fields::d2(&LagrangianField(sys), q0, q1)[setup.group_coord]
}

/// Worst equivariance defect `‖J_d(g·q0, g·q1) − g·J_d(q0, q1)‖∞` over the
/// provided samples.
pub fn check_equivariance(
    sys: &impl DiscreteSystem,
    action: &impl GroupAction,
    samples: &[(Vec<f64>, Vec<f64>, Vec<f64>)],
) -> Result<f64> {
    let mut defect = 0.0f64;
    for (g, q0, q1) in samples {
        let j = momentum(sys, action, q0, q1)?;
        let moved = momentum(sys, action, &action.act(g, q0), &action.act(g, q1))?;
        let expected = action.coadjoint(g, &j);
        for (a, b) in moved.iter().zip(&expected) {
            defect = defect.max((a - b).abs());
        }
    }
    Ok(defect)
}

/// Affine discrete connection attached to a momentum level of a translation
/// symmetry: `a_mu(q0, q1)` is the group element `g` with
/// `J(q0, (-g)·q1) = μ`.
pub trait DiscreteConnection: Sync {
    fn a_mu<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S;

    /// Fallible entry point (the Newton-backed instance reports `NoSolution`).
    fn try_a_mu(&self, q0: &[f64], q1: &[f64]) -> Result<f64> {
        Ok(self.a_mu(q0, q1))
    }
}

/// Closed-form connection for flat kinetic terms `m/(2h)(Δx)²` in the group
/// direction: `a_mu(q0, q1) = (x1 − x0) − μ h/m`.
#[derive(Clone, Copy, Debug)]
pub struct TranslationGapConnection {
    pub group_coord: usize,
    /// `μ h / m`.
    pub gap: f64,
}

impl DiscreteConnection for TranslationGapConnection {
    fn a_mu<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S {
        q1[self.group_coord] - q0[self.group_coord] - S::of(self.gap)
    }
}

/// Closed-form connection of the midpoint central-potential system on the
/// chart `(r, η)` with η-translation: `a_mu = (η1 − η0) − μ h/(m r̄²)`.
#[derive(Clone, Copy, Debug)]
pub struct CentralMpConnection {
    pub mass: f64,
    pub h: f64,
    pub mu: f64,
}

impl DiscreteConnection for CentralMpConnection {
    fn a_mu<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S {
        let rbar = (q0[0] + q1[0]) * S::of(0.5);
        q1[1] - q0[1] - S::of(self.mu * self.h / self.mass) / (rbar * rbar)
    }
}

/// Newton-based connection solving `J(q0, (−g)·q1) = μ` on the group
/// coordinate; generic over the scalar, so it can be differentiated through.
pub struct NewtonConnection<'a, Y: DiscreteSystem> {
    pub sys: &'a Y,
    pub setup: &'a TranslationSymmetry,
    pub mu: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl<'a, Y: DiscreteSystem> NewtonConnection<'a, Y> {
    pub fn new(sys: &'a Y, setup: &'a TranslationSymmetry, mu: f64) -> Self {
        NewtonConnection {
            sys,
            setup,
            mu,
            tol: 1e-12,
            max_iter: 50,
        }
    }

    fn solve<S: Scalar>(&self, q0: &[S], q1: &[S]) -> (S, f64) {
        let mut g = q1[self.setup.group_coord] - q0[self.setup.group_coord];
        let mut best = f64::INFINITY;
        let mut polish = 0usize;
        for _ in 0..self.max_iter {
            let gd = Dual::variable(g);
            let q0d: Vec<Dual<S>> = q0.iter().map(|&x| Dual::constant(x)).collect();
            let q1d: Vec<Dual<S>> = q1.iter().map(|&x| Dual::constant(x)).collect();
            let shifted = self.setup.act(&[-gd], &q1d);
            let r = translation_momentum(self.sys, self.setup, &q0d, &shifted)
                - Dual::constant(S::of(self.mu));
            best = r.re.real().abs();
            if !r.eps.real().is_finite() || r.eps.real() == 0.0 {
                break;
            }
            g = g - r.re / r.eps;
            if best <= self.tol {
                // converged on the value part: a couple of extra iterations
                // settle any derivative payload carried by S
                polish += 1;
                if polish >= 3 {
                    break;
                }
            }
        }
        (g, best)
    }
}

impl<Y: DiscreteSystem> DiscreteConnection for NewtonConnection<'_, Y> {
    fn a_mu<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S {
        let (g, best) = self.solve(q0, q1);
        assert!(
            best <= self.tol * 1e3,
            "discrete connection solve did not converge (residual {best:.3e})"
        );
        g
    }

    fn try_a_mu(&self, q0: &[f64], q1: &[f64]) -> Result<f64> {
        let (g, best) = self.solve(q0, q1);
        if best > self.tol {
            return Err(Error::NoSolution { residual: best });
        }
        Ok(g)
    }
}

/// Probes μ-goodness numerically: for each sample `q`, the group-coordinate
/// grid must contain exactly one solution of `J(q, g·q) = μ`.
pub fn verify_mu_goodness(
    sys: &impl DiscreteSystem,
    setup: &TranslationSymmetry,
    mu: f64,
    q_samples: &[Vec<f64>],
    g_range: (f64, f64),
    grid: usize,
) -> Result<bool> {
    for q in q_samples {
        let phi = |g: f64| -> f64 {
            let moved = setup.act(&[g], q);
            translation_momentum(sys, setup, q, &moved) - mu
        };
        let mut crossings = 0;
        let dg = (g_range.1 - g_range.0) / grid as f64;
        let mut prev = phi(g_range.0);
        for k in 1..=grid {
            let cur = phi(g_range.0 + dg * k as f64);
            if prev.signum() != cur.signum() {
                crossings += 1;
            }
            prev = cur;
        }
        if crossings != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Fixed points of the coadjoint action on a grid of group elements.
pub fn coadjoint_fixed_points(
    action: &impl GroupAction,
    mu: &[f64],
    grid: &[Vec<f64>],
    tol: f64,
) -> Vec<Vec<f64>> {
    grid.iter()
        .filter(|g| {
            let moved = action.coadjoint(g, mu);
            moved
                .iter()
                .zip(mu)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
                <= tol
        })
        .cloned()
        .collect()
}
