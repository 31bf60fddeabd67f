//! Fields on `Q × Q` and their slot derivatives.
//!
//! `D₁`/`D₂` denote differentiation in the first/second factor. The default
//! backend seeds dual numbers (exact to machine precision, nests for second
//! derivatives); central finite differences are provided as an independent
//! cross-check backend.

use crate::chart::{Chart, ChartPoint, Covector};
use crate::dual::Dual;
use crate::error::Result;
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use num_traits::Zero;

/// Scalar-valued field on pairs `(q0, q1)`, e.g. a discrete Lagrangian.
///
/// Implementations must be deterministic and generic over the scalar type so
/// the differentiation engine can evaluate them on dual numbers.
pub trait ScalarField2: Sync {
    fn dim(&self) -> usize;
    fn eval<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S;
}

/// Covector-valued field on pairs, anchored at one of the two slots
/// (slot 1 for `f⁻`, slot 2 for `f⁺`). Returns the coefficient vector.
pub trait CovectorField2: Sync {
    fn dim(&self) -> usize;
    fn eval<S: Scalar>(&self, q0: &[S], q1: &[S]) -> Vec<S>;
}

/// Identically-zero force term.
pub struct ZeroForce(pub usize);

impl CovectorField2 for ZeroForce {
    fn dim(&self) -> usize {
        self.0
    }
    fn eval<S: Scalar>(&self, _q0: &[S], _q1: &[S]) -> Vec<S> {
        vec![S::zero(); self.0]
    }
}

#[inline]
fn seeded<S: Scalar>(q: &[S], j: usize) -> Vec<Dual<S>> {
    q.iter()
        .enumerate()
        .map(|(k, &x)| {
            if k == j {
                Dual::variable(x)
            } else {
                Dual::constant(x)
            }
        })
        .collect()
}

#[inline]
fn constants<S: Scalar>(q: &[S]) -> Vec<Dual<S>> {
    q.iter().map(|&x| Dual::constant(x)).collect()
}

/// ∂F/∂q0 as a coefficient vector at `q0`.
pub fn d1<S: Scalar>(f: &impl ScalarField2, q0: &[S], q1: &[S]) -> Vec<S> {
    let q1c = constants(q1);
    (0..q0.len())
        .map(|j| f.eval(&seeded(q0, j), &q1c).eps)
        .collect()
}

/// ∂F/∂q1 as a coefficient vector at `q1`.
pub fn d2<S: Scalar>(f: &impl ScalarField2, q0: &[S], q1: &[S]) -> Vec<S> {
    let q0c = constants(q0);
    (0..q1.len())
        .map(|j| f.eval(&q0c, &seeded(q1, j)).eps)
        .collect()
}

fn mixed_second<S: Scalar>(
    f: &impl ScalarField2,
    q0: &[S],
    q1: &[S],
    outer_first_slot: bool,
    i: usize,
    j: usize,
) -> S {
    // outer seed direction j in one slot, inner seed direction i in the other
    let (oj, ii) = (j, i);
    let lift = |q: &[S], inner: Option<usize>, outer: Option<usize>| -> Vec<Dual<Dual<S>>> {
        q.iter()
            .enumerate()
            .map(|(k, &x)| Dual {
                re: Dual {
                    re: x,
                    eps: if Some(k) == inner {
                        S::one()
                    } else {
                        S::zero()
                    },
                },
                eps: Dual::constant(if Some(k) == outer {
                    S::one()
                } else {
                    S::zero()
                }),
            })
            .collect()
    };
    let (a0, a1) = if outer_first_slot {
        (lift(q0, None, Some(oj)), lift(q1, Some(ii), None))
    } else {
        (lift(q0, Some(ii), None), lift(q1, None, Some(oj)))
    };
    f.eval(&a0, &a1).eps.eps
}

/// Mixed second derivatives, entry `(i, j) = ∂²F/∂q0ʲ∂q1ⁱ`.
pub fn d1d2<S: Scalar>(f: &impl ScalarField2, q0: &[S], q1: &[S]) -> Matrix<S> {
    Matrix::from_fn(q1.len(), q0.len(), |i, j| {
        mixed_second(f, q0, q1, true, i, j)
    })
}

/// Mixed second derivatives, entry `(i, j) = ∂²F/∂q1ʲ∂q0ⁱ` (transpose route of [`d1d2`]).
pub fn d2d1<S: Scalar>(f: &impl ScalarField2, q0: &[S], q1: &[S]) -> Matrix<S> {
    Matrix::from_fn(q0.len(), q1.len(), |i, j| {
        mixed_second(f, q0, q1, false, i, j)
    })
}

fn same_slot_hessian<S: Scalar>(
    f: &impl ScalarField2,
    q0: &[S],
    q1: &[S],
    first: bool,
) -> Matrix<S> {
    let n = if first { q0.len() } else { q1.len() };
    Matrix::from_fn(n, n, |i, j| {
        let lift = |q: &[S], inner: Option<usize>, outer: Option<usize>| -> Vec<Dual<Dual<S>>> {
            q.iter()
                .enumerate()
                .map(|(k, &x)| Dual {
                    re: Dual {
                        re: x,
                        eps: if Some(k) == inner {
                            S::one()
                        } else {
                            S::zero()
                        },
                    },
                    eps: Dual::constant(if Some(k) == outer {
                        S::one()
                    } else {
                        S::zero()
                    }),
                })
                .collect()
        };
        let (a0, a1) = if first {
            (lift(q0, Some(i), Some(j)), lift(q1, None, None))
        } else {
            (lift(q0, None, None), lift(q1, Some(i), Some(j)))
        };
        f.eval(&a0, &a1).eps.eps
    })
}

/// Hessian in the first slot, entry `(i, j) = ∂²F/∂q0ʲ∂q0ⁱ`.
pub fn d1d1<S: Scalar>(f: &impl ScalarField2, q0: &[S], q1: &[S]) -> Matrix<S> {
    same_slot_hessian(f, q0, q1, true)
}

/// Hessian in the second slot, entry `(i, j) = ∂²F/∂q1ʲ∂q1ⁱ`.
pub fn d2d2<S: Scalar>(f: &impl ScalarField2, q0: &[S], q1: &[S]) -> Matrix<S> {
    same_slot_hessian(f, q0, q1, false)
}

/// Jacobian of a covector field in the first slot, entry `(i, j) = ∂f_i/∂q0ʲ`.
pub fn jac1<S: Scalar>(f: &impl CovectorField2, q0: &[S], q1: &[S]) -> Matrix<S> {
    let q1c = constants(q1);
    let n = f.dim();
    let mut m = Matrix::zeros(n, q0.len());
    for j in 0..q0.len() {
        let col = f.eval(&seeded(q0, j), &q1c);
        for i in 0..n {
            m[(i, j)] = col[i].eps;
        }
    }
    m
}

/// Jacobian of a covector field in the second slot, entry `(i, j) = ∂f_i/∂q1ʲ`.
pub fn jac2<S: Scalar>(f: &impl CovectorField2, q0: &[S], q1: &[S]) -> Matrix<S> {
    let q0c = constants(q0);
    let n = f.dim();
    let mut m = Matrix::zeros(n, q1.len());
    for j in 0..q1.len() {
        let col = f.eval(&q0c, &seeded(q1, j));
        for i in 0..n {
            m[(i, j)] = col[i].eps;
        }
    }
    m
}

/// Entry `(i, j)` of `∂/∂q1ᵏ [∂f_i/∂q0ʲ]` for a covector field (cross second
/// derivative, used by the Routh-potential locality conditions).
pub fn jac1_dslot2<S: Scalar>(
    f: &impl CovectorField2,
    q0: &[S],
    q1: &[S],
    i: usize,
    j: usize,
    k: usize,
) -> S {
    let a0: Vec<Dual<Dual<S>>> = q0
        .iter()
        .enumerate()
        .map(|(m, &x)| Dual {
            re: Dual {
                re: x,
                eps: if m == j { S::one() } else { S::zero() },
            },
            eps: Dual::zero(),
        })
        .collect();
    let a1: Vec<Dual<Dual<S>>> = q1
        .iter()
        .enumerate()
        .map(|(m, &x)| Dual {
            re: Dual::constant(x),
            eps: Dual::constant(if m == k { S::one() } else { S::zero() }),
        })
        .collect();
    f.eval(&a0, &a1)[i].eps.eps
}

/// Entry `(i, j)` of `∂/∂q0ᵏ [∂f_i/∂q1ʲ]` for a covector field.
pub fn jac2_dslot1<S: Scalar>(
    f: &impl CovectorField2,
    q0: &[S],
    q1: &[S],
    i: usize,
    j: usize,
    k: usize,
) -> S {
    let a0: Vec<Dual<Dual<S>>> = q0
        .iter()
        .enumerate()
        .map(|(m, &x)| Dual {
            re: Dual::constant(x),
            eps: Dual::constant(if m == k { S::one() } else { S::zero() }),
        })
        .collect();
    let a1: Vec<Dual<Dual<S>>> = q1
        .iter()
        .enumerate()
        .map(|(m, &x)| Dual {
            re: Dual {
                re: x,
                eps: if m == j { S::one() } else { S::zero() },
            },
            eps: Dual::zero(),
        })
        .collect();
    f.eval(&a0, &a1)[i].eps.eps
}

// ---------------------------------------------------------------------------
// Finite-difference cross-check backend
// ---------------------------------------------------------------------------

/// Central-difference step: `eps^(1/3) · max(1, |x|)`, or a fixed override.
#[derive(Clone, Copy, Debug, Default)]
pub struct FdStep(pub Option<f64>);

impl FdStep {
    pub fn at(&self, x: f64) -> f64 {
        match self.0 {
            Some(s) => s,
            None => f64::EPSILON.cbrt() * x.abs().max(1.0),
        }
    }
}

fn fd_probe(chart: &Chart, coords: &[f64], j: usize, delta: f64, slot: usize) -> Result<Vec<f64>> {
    let mut probe = coords.to_vec();
    probe[j] += delta;
    chart.check_coords(
        &probe,
        &format!(
            "finite-difference probe slot {} coordinate {} {} {:.3e}",
            slot,
            j,
            if delta >= 0.0 { "+" } else { "-" },
            delta.abs()
        ),
    )?;
    Ok(probe)
}

/// Central finite-difference ∂F/∂q0; probes are validated against the chart.
pub fn d1_fd(
    f: &impl ScalarField2,
    chart: &Chart,
    q0: &[f64],
    q1: &[f64],
    step: FdStep,
) -> Result<Vec<f64>> {
    (0..q0.len())
        .map(|j| {
            let s = step.at(q0[j]);
            let hi = fd_probe(chart, q0, j, s, 1)?;
            let lo = fd_probe(chart, q0, j, -s, 1)?;
            Ok((f.eval(&hi, q1) - f.eval(&lo, q1)) / (2.0 * s))
        })
        .collect()
}

/// Central finite-difference ∂F/∂q1.
pub fn d2_fd(
    f: &impl ScalarField2,
    chart: &Chart,
    q0: &[f64],
    q1: &[f64],
    step: FdStep,
) -> Result<Vec<f64>> {
    (0..q1.len())
        .map(|j| {
            let s = step.at(q1[j]);
            let hi = fd_probe(chart, q1, j, s, 2)?;
            let lo = fd_probe(chart, q1, j, -s, 2)?;
            Ok((f.eval(q0, &hi) - f.eval(q0, &lo)) / (2.0 * s))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Chart-point level operations
// ---------------------------------------------------------------------------

fn covector_at(chart: &Chart, base: &ChartPoint, coords: Vec<f64>) -> Covector {
    debug_assert_eq!(chart.dim(), coords.len());
    Covector {
        coords,
        base: base.clone(),
    }
}

/// ∂F/∂q0 as a covector at `q0`, with chart validation.
pub fn d1_at(
    f: &impl ScalarField2,
    chart: &Chart,
    q0: &ChartPoint,
    q1: &ChartPoint,
) -> Result<Covector> {
    chart.check_point(q0, "d1 first argument")?;
    chart.check_point(q1, "d1 second argument")?;
    Ok(covector_at(chart, q0, d1(f, &q0.coords, &q1.coords)))
}

/// ∂F/∂q1 as a covector at `q1`, with chart validation.
pub fn d2_at(
    f: &impl ScalarField2,
    chart: &Chart,
    q0: &ChartPoint,
    q1: &ChartPoint,
) -> Result<Covector> {
    chart.check_point(q0, "d2 first argument")?;
    chart.check_point(q1, "d2 second argument")?;
    Ok(covector_at(chart, q1, d2(f, &q0.coords, &q1.coords)))
}

/// Mixed second-derivative matrix with chart validation.
pub fn d1d2_at(
    f: &impl ScalarField2,
    chart: &Chart,
    q0: &ChartPoint,
    q1: &ChartPoint,
) -> Result<Matrix<f64>> {
    chart.check_point(q0, "d1d2 first argument")?;
    chart.check_point(q1, "d1d2 second argument")?;
    Ok(d1d2(f, &q0.coords, &q1.coords))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// F(q0, q1) = q1 · q1 (independent of q0)
    struct SqSecond;
    impl ScalarField2 for SqSecond {
        fn dim(&self) -> usize {
            2
        }
        fn eval<S: Scalar>(&self, _q0: &[S], q1: &[S]) -> S {
            crate::linalg::dot(q1, q1)
        }
    }

    /// F(q0, q1) = q0 · q0
    struct SqFirst;
    impl ScalarField2 for SqFirst {
        fn dim(&self) -> usize {
            2
        }
        fn eval<S: Scalar>(&self, q0: &[S], _q1: &[S]) -> S {
            crate::linalg::dot(q0, q0)
        }
    }

    /// F(q0, q1) = q0 · q1 on ℝ²
    struct DotField;
    impl ScalarField2 for DotField {
        fn dim(&self) -> usize {
            2
        }
        fn eval<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S {
            crate::linalg::dot(q0, q1)
        }
    }

    /// Free particle L = m‖q1−q0‖²/(2h) in one dimension
    struct Free1 {
        m: f64,
        h: f64,
    }
    impl ScalarField2 for Free1 {
        fn dim(&self) -> usize {
            1
        }
        fn eval<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S {
            let d = q1[0] - q0[0];
            S::of(self.m) * d * d / S::of(2.0 * self.h)
        }
    }

    #[test]
    fn d1_ignores_independent_slot() {
        let g = d1(&SqSecond, &[0.3f64, -0.4], &[1.0, 2.0]);
        assert_eq!(g, vec![0.0, 0.0]);
        let g = d2(&SqFirst, &[0.3f64, -0.4], &[1.0, 2.0]);
        assert_eq!(g, vec![0.0, 0.0]);
    }

    #[test]
    fn free_particle_slot_derivatives() {
        let f = Free1 { m: 1.0, h: 0.5 };
        // ∂/∂q0 [m(q1−q0)²/2h] = −m(q1−q0)/h = −2 at (0, 1)
        assert_eq!(d1(&f, &[0.0f64], &[1.0]), vec![-2.0]);
        assert_eq!(d2(&f, &[0.0f64], &[1.0]), vec![2.0]);
    }

    #[test]
    fn free_particle_coupling_matrix() {
        let f = Free1 { m: 1.0, h: 0.2 };
        let m = d1d2(&f, &[0.3f64], &[0.9]);
        assert!((m[(0, 0)] + 5.0).abs() < 1e-12);
    }

    #[test]
    fn dot_field_coupling_is_identity() {
        let m = d1d2(&DotField, &[0.1f64, 0.2], &[0.3, 0.4]);
        assert_eq!(m[(0, 0)], 1.0);
        assert_eq!(m[(1, 1)], 1.0);
        assert_eq!(m[(0, 1)], 0.0);
        assert_eq!(m[(1, 0)], 0.0);
    }

    #[test]
    fn mixed_derivative_routes_agree() {
        // generic smooth field: d1d2 == d2d1ᵀ to machine precision
        struct Smooth;
        impl ScalarField2 for Smooth {
            fn dim(&self) -> usize {
                2
            }
            fn eval<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S {
                (q0[0] * q1[1]).sin() + q0[1] * q0[1] * q1[0] + (q1[0] * q0[0]).exp()
            }
        }
        let q0 = [0.37f64, -0.81];
        let q1 = [0.92, 0.44];
        let a = d1d2(&Smooth, &q0, &q1);
        let b = d2d1(&Smooth, &q0, &q1).transpose();
        assert!(a.sub(&b).max_abs() < 1e-12);
    }

    #[test]
    fn translation_invariant_total_derivative() {
        // F = ‖q1−q0‖²: d1 + d2 contracted with equal directions vanishes
        struct SqDiff;
        impl ScalarField2 for SqDiff {
            fn dim(&self) -> usize {
                2
            }
            fn eval<S: Scalar>(&self, q0: &[S], q1: &[S]) -> S {
                let d = crate::linalg::sub_vec(q1, q0);
                crate::linalg::dot(&d, &d)
            }
        }
        let mut probes = crate::sampling::QuasiRandom::new(4);
        for _ in 0..20 {
            let p = probes.next_in(&[-2.0; 4], &[2.0; 4]);
            let (q0, q1) = (&p[..2], &p[2..]);
            let g1 = d1(&SqDiff, q0, q1);
            let g2 = d2(&SqDiff, q0, q1);
            let dir = [0.7, -0.3];
            let total = crate::linalg::dot(&g1, &dir) + crate::linalg::dot(&g2, &dir);
            assert!(total.abs() < 1e-12);
        }
    }

    #[test]
    fn fd_matches_ad_on_free_particle() {
        let f = Free1 { m: 1.3, h: 0.25 };
        let chart = Chart::euclidean("line", 1);
        let ad = d1(&f, &[0.4f64], &[1.7]);
        let fd = d1_fd(&f, &chart, &[0.4], &[1.7], FdStep(Some(1e-5))).unwrap();
        let rel = (ad[0] - fd[0]).abs() / ad[0].abs().max(1.0);
        assert!(rel < 1e-6);
    }

    #[test]
    fn fd_probe_reports_chart_exit() {
        let f = Free1 { m: 1.0, h: 0.1 };
        let chart = Chart::euclidean("radial", 1).with_positive(0);
        let err = d1_fd(&f, &chart, &[1e-7], &[0.5], FdStep(Some(1e-5))).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("probe"), "unexpected message: {msg}");
    }

    #[test]
    fn second_derivatives_of_covector_fields() {
        // covector field f(q0,q1) = [q0[0]² q1[0]]; ∂/∂q1 of ∂f/∂q0 = 2 q0[0]
        struct F2;
        impl CovectorField2 for F2 {
            fn dim(&self) -> usize {
                1
            }
            fn eval<S: Scalar>(&self, q0: &[S], q1: &[S]) -> Vec<S> {
                vec![q0[0] * q0[0] * q1[0]]
            }
        }
        let v = jac1_dslot2(&F2, &[1.5f64], &[2.0], 0, 0, 0);
        assert!((v - 3.0).abs() < 1e-13);
        let w = jac2_dslot1(&F2, &[1.5f64], &[2.0], 0, 0, 0);
        assert!((w - 3.0).abs() < 1e-13);
    }

    #[test]
    fn chart_point_operations() {
        let f = Free1 { m: 1.0, h: 0.5 };
        let chart = Chart::euclidean("line", 1);
        let q0 = chart.point(vec![0.0]).unwrap();
        let q1 = chart.point(vec![1.0]).unwrap();
        let dv = d1_at(&f, &chart, &q0, &q1).unwrap();
        assert_eq!(dv.coords, vec![-2.0]);
        assert_eq!(dv.base, q0);
        let dv = d2_at(&f, &chart, &q0, &q1).unwrap();
        assert_eq!(dv.coords, vec![2.0]);
        assert_eq!(dv.base, q1);
        let m = d1d2_at(&f, &chart, &q0, &q1).unwrap();
        assert!((m[(0, 0)] + 2.0).abs() < 1e-14);
        // points from a different chart are rejected
        let other = Chart::euclidean("other", 1);
        let alien = other.point(vec![0.3]).unwrap();
        assert!(d1_at(&f, &chart, &alien, &q1).is_err());
    }
}
