//! Discrete Routh reduction: builds the forced system on the quotient chart
//! out of an invariant system, a translation symmetry and the discrete
//! connection attached to a momentum level.
//!
//! The reduced Lagrangian evaluates the original one on the discrete
//! horizontal lift of the quotient pair; the reduced force pairs the momentum
//! level with the derivative of the discrete connection along
//! principal-connection horizontal lifts. Its Routh potential is the drop of
//! `d⟨μ, 𝔄(·)⟩` to the quotient ([`routh_potential_from_connection`]).

use crate::chart::Chart;
use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::fdms::{self, DiscreteSystem, SolverConfig, Trajectory};
use crate::linalg::Matrix;
use crate::sampling::QuasiRandom;
use crate::scalar::Scalar;
use crate::symmetry::{momentum, DiscreteConnection, GroupAction, TranslationSymmetry};
use crate::systems::{GammaMp, Potential, ReducedCentralMp};

/// The reduced forced discrete mechanical system on the quotient chart.
pub struct Reduced<'a, Y: DiscreteSystem, C: DiscreteConnection> {
    base: &'a Y,
    setup: &'a TranslationSymmetry,
    conn: C,
    mu: f64,
    /// Group coordinate of the section representatives (0 by default; tests
    /// re-randomize it to confirm the reduction does not depend on it).
    base_offset: f64,
}

impl<'a, Y: DiscreteSystem, C: DiscreteConnection> Reduced<'a, Y, C> {
    pub fn new(base: &'a Y, setup: &'a TranslationSymmetry, conn: C, mu: f64) -> Self {
        Reduced {
            base,
            setup,
            conn,
            mu,
            base_offset: 0.0,
        }
    }

    pub fn with_base_offset(mut self, offset: f64) -> Self {
        self.base_offset = offset;
        self
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn setup(&self) -> &TranslationSymmetry {
        self.setup
    }

    /// Section representative over `tau`.
    pub fn lift_base<S: Scalar>(&self, tau: &[S]) -> Vec<S> {
        self.setup.lift_with(tau, S::of(self.base_offset))
    }

    /// Discrete horizontal lift: the unique point over `tau1` pairing with
    /// `q0` on the momentum level.
    pub fn horizontal_partner<S: Scalar>(&self, q0: &[S], tau1: &[S]) -> Vec<S> {
        let q1 = self.lift_base(tau1);
        let g = self.conn.a_mu(q0, &q1);
        self.setup.act(&[-g], &q1)
    }

    /// Pair on the momentum level over `(tau0, tau1)`.
    pub fn reconstruct_coords<S: Scalar>(&self, tau0: &[S], tau1: &[S]) -> (Vec<S>, Vec<S>) {
        let q0 = self.lift_base(tau0);
        let q1 = self.horizontal_partner(&q0, tau1);
        (q0, q1)
    }

    /// Validated reconstruction at working precision.
    pub fn reconstruct(&self, tau0: &[f64], tau1: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (q0, q1) = self.reconstruct_coords(tau0, tau1);
        let chart = self.setup.chart();
        for (q, name) in [(&q0, "first"), (&q1, "second")] {
            chart
                .check_coords(q, "reconstruct")
                .map_err(|e| Error::RepresentativeOutOfChart(format!("{name} point: {e}")))?;
        }
        Ok((q0, q1))
    }

    /// Routh potential of the reduced force at `tau`, from the connection.
    pub fn routh_potential(&self, tau: &[f64]) -> Result<Matrix<f64>> {
        routh_potential_from_connection(self.setup, self.mu, tau, 1e-10)
    }

    fn reduced_force<S: Scalar>(&self, tau0: &[S], tau1: &[S], first_slot: bool) -> Vec<S> {
        let (q0, q1) = self.reconstruct_coords(tau0, tau1);
        let nq = self.setup.quotient_dim();
        let mu = S::of(self.mu);
        (0..nq)
            .map(|j| {
                let mut e = vec![S::zero(); nq];
                e[j] = S::one();
                let seed_point = if first_slot { &q0 } else { &q1 };
                let dir = self.setup.horizontal_lift(seed_point, &e);
                let lift = |q: &[S], seeded: bool| -> Vec<Dual<S>> {
                    q.iter()
                        .enumerate()
                        .map(|(k, &x)| {
                            if seeded {
                                Dual::new(x, dir[k])
                            } else {
                                Dual::constant(x)
                            }
                        })
                        .collect()
                };
                let q0d = lift(&q0, first_slot);
                let q1d = lift(&q1, !first_slot);
                mu * self.conn.a_mu(&q0d, &q1d).eps
            })
            .collect()
    }
}

impl<Y: DiscreteSystem, C: DiscreteConnection> DiscreteSystem for Reduced<'_, Y, C> {
    fn chart(&self) -> &Chart {
        self.setup.quotient_chart()
    }

    fn lagrangian<S: Scalar>(&self, tau0: &[S], tau1: &[S]) -> S {
        let (q0, q1) = self.reconstruct_coords(tau0, tau1);
        self.base.lagrangian(&q0, &q1)
    }

    fn force_minus<S: Scalar>(&self, tau0: &[S], tau1: &[S]) -> Vec<S> {
        self.reduced_force(tau0, tau1, true)
    }

    fn force_plus<S: Scalar>(&self, tau0: &[S], tau1: &[S]) -> Vec<S> {
        self.reduced_force(tau0, tau1, false)
    }
}

/// Builds the reduced system, probing that reconstruction lands on the
/// momentum level and that the Lagrangian is invariant along the way.
pub fn reduce<'a, Y: DiscreteSystem, C: DiscreteConnection>(
    base: &'a Y,
    setup: &'a TranslationSymmetry,
    conn: C,
    mu: f64,
    probe: &[(Vec<f64>, Vec<f64>)],
) -> Result<Reduced<'a, Y, C>> {
    let reduced = Reduced::new(base, setup, conn, mu);
    for (tau0, tau1) in probe {
        let (q0, q1) = reduced.reconstruct(tau0, tau1)?;
        let j = momentum(base, setup, &q0, &q1)?;
        let defect = (j[0] - mu).abs();
        if defect > 1e-9 {
            return Err(Error::NoSolution { residual: defect });
        }
    }
    Ok(reduced)
}

/// The 2-form on the quotient obtained by dropping `d⟨μ, 𝔄(·)⟩`: the Routh
/// potential of every reduced force built from this connection.
///
/// Fails with [`Error::NotBasic`] when the differential pairs non-trivially
/// with the group direction or depends on the representative.
pub fn routh_potential_from_connection(
    setup: &TranslationSymmetry,
    mu: f64,
    tau: &[f64],
    tol: f64,
) -> Result<Matrix<f64>> {
    let n = setup.chart().dim();
    let gc = setup.group_coord;
    let differential = |q: &[f64]| -> Matrix<f64> {
        // jac[i][j] = ∂c_i/∂q^j for c = ⟨μ, 𝔄(·)⟩, exact via duals
        let jac = Matrix::from_fn(n, n, |i, j| {
            let qd: Vec<Dual<f64>> = q
                .iter()
                .enumerate()
                .map(|(k, &x)| Dual::new(x, if k == j { 1.0 } else { 0.0 }))
                .collect();
            setup.connection_one_form_mu(mu, &qd)[i].eps
        });
        jac.transpose().sub(&jac)
    };

    let q = setup.lift_base(tau);
    setup
        .chart()
        .check_coords(&q, "connection differential")
        .map_err(|e| Error::RepresentativeOutOfChart(e.to_string()))?;
    let m = differential(&q);

    // contraction with the generator must vanish
    let mut vertical_defect = 0.0f64;
    for k in 0..n {
        vertical_defect = vertical_defect.max(m[(gc, k)].abs()).max(m[(k, gc)].abs());
    }
    // and the dropped form must not depend on the representative
    let q_shift = setup.lift_with(tau, 0.77);
    let drift = differential(&q_shift).sub(&m).max_abs();
    if vertical_defect > tol || drift > tol {
        return Err(Error::NotBasic {
            defect: vertical_defect.max(drift),
            tol,
        });
    }

    let nq = setup.quotient_dim();
    let mut out = Matrix::zeros(nq, nq);
    let keep: Vec<usize> = (0..n).filter(|&i| i != gc).collect();
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in keep.iter().enumerate() {
            out[(a, b)] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Report of the reduction correspondence check.
pub struct CorrespondenceReport {
    /// Worst coordinate discrepancy between the projected unreduced flow and
    /// the reduced flow.
    pub max_discrepancy: f64,
    pub unreduced: Trajectory,
    pub reduced: Trajectory,
}

/// Runs the unreduced flow from the reconstructed seed and the reduced flow
/// from the quotient seed, and compares their quotient trajectories.
pub fn verify_reduction<Y: DiscreteSystem, C: DiscreteConnection>(
    reduced: &Reduced<'_, Y, C>,
    tau0: &[f64],
    tau1: &[f64],
    n_steps: usize,
    cfg: &SolverConfig,
) -> Result<CorrespondenceReport> {
    let (q0, q1) = reduced.reconstruct(tau0, tau1)?;
    let base_chart = reduced.base.chart();
    let full = fdms::run(
        reduced.base,
        &base_chart.point(q0)?,
        &base_chart.point(q1)?,
        n_steps,
        cfg,
    )?;
    let quotient_chart = reduced.setup.quotient_chart();
    let red = fdms::run(
        reduced,
        &quotient_chart.point(tau0.to_vec())?,
        &quotient_chart.point(tau1.to_vec())?,
        n_steps,
        cfg,
    )?;
    let mut max_discrepancy = 0.0f64;
    for (full_pt, red_pt) in full.points.iter().zip(&red.points) {
        let projected = reduced.setup.project(&full_pt.coords);
        for (a, b) in projected.iter().zip(&red_pt.coords) {
            max_discrepancy = max_discrepancy.max((a - b).abs());
        }
    }
    Ok(CorrespondenceReport {
        max_discrepancy,
        unreduced: full,
        reduced: red,
    })
}

/// Worst defect of the identity `L̆ + γ = h·R((r0+r1)/2, (r1−r0)/h)` between
/// the closed-form reduced midpoint system and the continuous reduced
/// Lagrangian `R`, over quasi-random samples in `[0.1, 3]²`.
pub fn midpoint_identity_defect<P: Potential + Clone>(
    reduced: &ReducedCentralMp<P>,
    n_samples: usize,
) -> f64 {
    let cont = crate::ode::ContinuousReducedSystem::new(
        reduced.mass,
        reduced.mu,
        reduced.potential.clone(),
    );
    let gamma = GammaMp {
        mass: reduced.mass,
        h: reduced.h,
        mu: reduced.mu,
    };
    let mut gen = QuasiRandom::new(2);
    let mut worst = 0.0f64;
    for _ in 0..n_samples {
        let p = gen.next_in(&[0.1, 0.1], &[3.0, 3.0]);
        let (r0, r1) = (p[0], p[1]);
        let lhs = reduced.lagrangian(&[r0], &[r1])
            + crate::fields::ScalarField2::eval(&gamma, &[r0], &[r1]);
        let rhs = reduced.h * cont.reduced_lagrangian(0.5 * (r0 + r1), (r1 - r0) / reduced.h);
        worst = worst.max((lhs - rhs).abs());
    }
    worst
}
