//! Discrete two-forms on `Q × Q`, Routh-force certification and the
//! flow-pullback preservation checker.
//!
//! Matrix convention: a two-form at a point of `Q × Q` is stored as the
//! antisymmetric `2n × 2n` matrix `M` with `ω(u, v) = uᵀ M v`, tangent
//! coordinates ordered as `(δq0, δq1)`. A coefficient sum `Σ c_ab dx^a ∧ dx^b`
//! lands in `M` as `M[a][b] += c_ab`, `M[b][a] -= c_ab`.
//!
//! A force is *of Routh type* when `−df_d = pr₂*β − pr₁*β` for a 2-form β on
//! `Q` (its Routh potential). [`detect_routh`] certifies this numerically and
//! extracts β; [`omega_plus_corrected`] subtracts the `pr₂` pullback of β so
//! that the resulting structure is preserved by the discrete flow, which
//! [`check_preservation`] verifies along computed trajectories.

use crate::error::{Error, Result};
use crate::fdms::{
    step_coords, DiscreteSystem, ForceMinusField, ForcePlusField, LagrangianField, SolverConfig,
};
use crate::fields::{self};
use crate::linalg::{self, Matrix};
use crate::sampling::{QuasiRandom, UnitVectors};

/// Antisymmetric matrix of a two-form on `Q × Q` at a base pair.
#[derive(Clone, Debug)]
pub struct TwoFormMatrix {
    pub base: (Vec<f64>, Vec<f64>),
    pub matrix: Matrix<f64>,
}

impl TwoFormMatrix {
    pub fn eval(&self, u: &[f64], v: &[f64]) -> f64 {
        self.matrix.bilinear(u, v)
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        self.matrix.antisymmetry_defect()
    }
}

fn assemble(
    q0: &[f64],
    q1: &[f64],
    m00: Matrix<f64>,
    m01: Matrix<f64>,
    m11: Matrix<f64>,
) -> TwoFormMatrix {
    let n = q0.len();
    let mut m = Matrix::zeros(2 * n, 2 * n);
    m.set_block(0, 0, &m00);
    m.set_block(0, n, &m01);
    m.set_block(n, 0, &m01.transpose().scale(-1.0));
    m.set_block(n, n, &m11);
    TwoFormMatrix {
        base: (q0.to_vec(), q1.to_vec()),
        matrix: m,
    }
}

/// Symplectic form of the unforced Lagrangian,
/// `ω_{L_d} = −∂²L_d/∂q0ⁱ∂q1ʲ dq0ⁱ ∧ dq1ʲ`.
pub fn omega_ld(sys: &impl DiscreteSystem, q0: &[f64], q1: &[f64]) -> TwoFormMatrix {
    let n = q0.len();
    let coupling = fields::d1d2(&LagrangianField(sys), q0, q1);
    assemble(
        q0,
        q1,
        Matrix::zeros(n, n),
        coupling.transpose().scale(-1.0),
        Matrix::zeros(n, n),
    )
}

/// Two-form `ω⁺_{f_d} = ω_{L_d} − d f⁺` of the forced system.
pub fn omega_f_plus(sys: &impl DiscreteSystem, q0: &[f64], q1: &[f64]) -> TwoFormMatrix {
    let n = q0.len();
    let b_plus = fields::d1d2(&LagrangianField(sys), q0, q1).add(&fields::jac1(
        &ForcePlusField(sys),
        q0,
        q1,
    ));
    let jp = fields::jac2(&ForcePlusField(sys), q0, q1);
    assemble(
        q0,
        q1,
        Matrix::zeros(n, n),
        b_plus.transpose().scale(-1.0),
        jp.antisymmetrize(),
    )
}

/// Two-form `ω⁻_{f_d} = ω_{L_d} + d f⁻` of the forced system.
pub fn omega_f_minus(sys: &impl DiscreteSystem, q0: &[f64], q1: &[f64]) -> TwoFormMatrix {
    let n = q0.len();
    let b_minus = fields::d2d1(&LagrangianField(sys), q0, q1)
        .add(&fields::jac2(&ForceMinusField(sys), q0, q1))
        .scale(-1.0);
    let jm = fields::jac1(&ForceMinusField(sys), q0, q1);
    assemble(
        q0,
        q1,
        jm.transpose().sub(&jm),
        b_minus,
        Matrix::zeros(n, n),
    )
}

/// Exterior derivative `d f_d` of the force as a two-form matrix at `(q0, q1)`
/// (dual-number route; see [`exterior_derivative_fd`] for the independent
/// finite-difference oracle).
pub fn force_exterior_derivative(
    sys: &impl DiscreteSystem,
    q0: &[f64],
    q1: &[f64],
) -> TwoFormMatrix {
    let fminus = ForceMinusField(sys);
    let fplus = ForcePlusField(sys);
    let pm = fields::jac1(&fminus, q0, q1);
    let pp = fields::jac2(&fplus, q0, q1);
    let m00 = pm.transpose().sub(&pm);
    let m11 = pp.transpose().sub(&pp);
    let m01 = fields::jac1(&fplus, q0, q1)
        .transpose()
        .sub(&fields::jac2(&fminus, q0, q1));
    assemble(q0, q1, m00, m01, m11)
}

/// Routh potential β of the force at base point `q`, averaged over the two
/// coordinate routes `(∂f⁻/∂q0)ᵀ − ∂f⁻/∂q0` and `∂f⁺/∂q1 − (∂f⁺/∂q1)ᵀ`,
/// both evaluated on the diagonal pair `(q, q)`.
pub fn routh_potential_at(sys: &impl DiscreteSystem, q: &[f64]) -> Matrix<f64> {
    let pm = fields::jac1(&ForceMinusField(sys), q, q);
    let pp = fields::jac2(&ForcePlusField(sys), q, q);
    let from_minus = pm.transpose().sub(&pm);
    let from_plus = pp.sub(&pp.transpose());
    from_minus.add(&from_plus).scale(0.5)
}

/// Certificate produced by [`detect_routh`].
///
/// `violations` holds the worst residual of the three conditions the detector
/// checks over the probe set:
/// 1. the candidate potential extracted from `f⁻` depends on the first base
///    point only,
/// 2. the candidate extracted from `f⁺` depends on the second base point only,
/// 3. the defining residual `−df_d − (pr₂*β − pr₁*β)` vanishes.
#[derive(Clone, Debug)]
pub struct RouthCertificate {
    pub is_routh: bool,
    /// β at the probe-region midpoint (antisymmetric n×n matrix).
    pub beta: Matrix<f64>,
    pub max_violation: f64,
    pub violations: [f64; 3],
    pub tol: f64,
}

/// Axis-aligned box of chart coordinates the probes are drawn from.
#[derive(Clone, Debug)]
pub struct ProbeRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ProbeRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        ProbeRegion { lo, hi }
    }

    pub fn cube(n: usize, lo: f64, hi: f64) -> Self {
        ProbeRegion {
            lo: vec![lo; n],
            hi: vec![hi; n],
        }
    }

    fn midpoint(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&a, &b)| 0.5 * (a + b))
            .collect()
    }
}

/// Default number of quasi-random probe pairs for [`detect_routh`].
pub const DEFAULT_ROUTH_PROBES: usize = 64;
/// Default residual tolerance for [`detect_routh`].
pub const DEFAULT_ROUTH_TOL: f64 = 1e-8;

/// Decides whether the force of `sys` is a Routh force on the probed region
/// and extracts its potential.
///
/// Fails with [`Error::InconsistentBeta`] when the two β routes disagree on a
/// common base point (a non-Routh force whose per-slot candidates both look
/// locally consistent).
pub fn detect_routh(
    sys: &impl DiscreteSystem,
    region: &ProbeRegion,
    n_probes: usize,
    tol: f64,
) -> Result<RouthCertificate> {
    let n = sys.chart().dim();
    let fminus = ForceMinusField(sys);
    let fplus = ForcePlusField(sys);
    let mut gen = QuasiRandom::new(2 * n);
    let lo2: Vec<f64> = region.lo.iter().chain(&region.lo).copied().collect();
    let hi2: Vec<f64> = region.hi.iter().chain(&region.hi).copied().collect();

    let beta_minus_at = |q0: &[f64], q1: &[f64]| -> Matrix<f64> {
        let p = fields::jac1(&fminus, q0, q1);
        p.transpose().sub(&p)
    };
    let beta_plus_at = |q0: &[f64], q1: &[f64]| -> Matrix<f64> {
        let p = fields::jac2(&fplus, q0, q1);
        p.sub(&p.transpose())
    };

    let mut v1 = 0.0f64;
    let mut v2 = 0.0f64;
    let mut v3 = 0.0f64;
    let mut beta_mismatch = 0.0f64;

    for _ in 0..n_probes {
        let p = gen.next_in(&lo2, &hi2);
        let (q0, q1) = (&p[..n], &p[n..]);

        // condition 1: antisymmetrized ∂f⁻/∂q0 does not vary with q1
        for i in 0..n {
            for j in 0..i {
                for k in 0..n {
                    let d = fields::jac1_dslot2(&fminus, q0, q1, i, j, k)
                        - fields::jac1_dslot2(&fminus, q0, q1, j, i, k);
                    v1 = v1.max(d.abs());
                }
            }
        }
        // condition 2: antisymmetrized ∂f⁺/∂q1 does not vary with q0
        for i in 0..n {
            for j in 0..i {
                for k in 0..n {
                    let d = fields::jac2_dslot1(&fplus, q0, q1, i, j, k)
                        - fields::jac2_dslot1(&fplus, q0, q1, j, i, k);
                    v2 = v2.max(d.abs());
                }
            }
        }
        // route agreement on common base points
        for q in [q0, q1] {
            let d = beta_minus_at(q, q).sub(&beta_plus_at(q, q)).max_abs();
            beta_mismatch = beta_mismatch.max(d);
        }
        // condition 3: −df equals pr₂*β − pr₁*β with the extracted β
        let df = force_exterior_derivative(sys, q0, q1);
        let beta0 = beta_minus_at(q0, q0).add(&beta_plus_at(q0, q0)).scale(0.5);
        let beta1 = beta_minus_at(q1, q1).add(&beta_plus_at(q1, q1)).scale(0.5);
        let mut residual = df.matrix.scale(-1.0);
        for i in 0..n {
            for j in 0..n {
                residual[(i, j)] += beta0[(i, j)];
                residual[(n + i, n + j)] -= beta1[(i, j)];
            }
        }
        v3 = v3.max(residual.max_abs());
    }

    if beta_mismatch > tol {
        return Err(Error::InconsistentBeta {
            defect: beta_mismatch,
            tol,
        });
    }

    let mid = region.midpoint();
    let beta = routh_potential_at(sys, &mid);
    let violations = [v1, v2, v3];
    let max_violation = violations.iter().fold(0.0f64, |a, &b| a.max(b));
    Ok(RouthCertificate {
        is_routh: max_violation <= tol,
        beta,
        max_violation,
        violations,
        tol,
    })
}

/// `ω⁺ = ω⁺_{f_d} − pr₂*β`: the structure preserved by the flow of a Routh
/// system. The bottom-right block cancels against β.
pub fn omega_plus_corrected(
    sys: &impl DiscreteSystem,
    cert: &RouthCertificate,
    q0: &[f64],
    q1: &[f64],
) -> Result<TwoFormMatrix> {
    if !cert.is_routh {
        return Err(Error::RequiresRouthCertificate);
    }
    let n = q0.len();
    let mut form = omega_f_plus(sys, q0, q1);
    let beta = routh_potential_at(sys, q1);
    for i in 0..n {
        for j in 0..n {
            form.matrix[(n + i, n + j)] -= beta[(i, j)];
        }
    }
    Ok(form)
}

/// `ω⁻ = ω⁻_{f_d} − pr₁*β`, mirror of [`omega_plus_corrected`].
pub fn omega_minus_corrected(
    sys: &impl DiscreteSystem,
    cert: &RouthCertificate,
    q0: &[f64],
    q1: &[f64],
) -> Result<TwoFormMatrix> {
    if !cert.is_routh {
        return Err(Error::RequiresRouthCertificate);
    }
    let n = q0.len();
    let mut form = omega_f_minus(sys, q0, q1);
    let beta = routh_potential_at(sys, q0);
    for i in 0..n {
        for j in 0..n {
            form.matrix[(i, j)] -= beta[(i, j)];
        }
    }
    Ok(form)
}

/// Tangent map of the discrete flow at `(q0, q1)` by implicit differentiation
/// of the three-point residual: columns send `(δq0, δq1)` to `(δq1, δq2)`.
/// Returns the matrix together with the converged `q2`.
pub fn flow_jacobian(
    sys: &impl DiscreteSystem,
    q0: &[f64],
    q1: &[f64],
    cfg: &SolverConfig,
) -> Result<(Matrix<f64>, Vec<f64>)> {
    let (q2, _) = step_coords(sys, q0, q1, cfg)?;
    let lag = LagrangianField(sys);
    let n = q0.len();
    let j0 = fields::d1d2(&lag, q0, q1).add(&fields::jac1(&ForcePlusField(sys), q0, q1));
    let j1 = fields::d2d2(&lag, q0, q1)
        .add(&fields::d1d1(&lag, q1, &q2))
        .add(&fields::jac2(&ForcePlusField(sys), q0, q1))
        .add(&fields::jac1(&ForceMinusField(sys), q1, &q2));
    let j2 = fields::d2d1(&lag, q1, &q2).add(&fields::jac2(&ForceMinusField(sys), q1, &q2));

    let lu = linalg::Lu::factor(&j2)?;
    let cond = lu.cond_inf(&j2);
    if cond > linalg::SINGULARITY_COND {
        return Err(Error::SingularJacobian { cond });
    }
    let mut tf = Matrix::zeros(2 * n, 2 * n);
    tf.set_block(0, n, &Matrix::identity(n));
    // δq2 = −J2⁻¹ (J0 δq0 + J1 δq1)
    let minus_j2inv = |m: &Matrix<f64>| -> Matrix<f64> {
        let mut out = Matrix::zeros(n, n);
        for col in 0..n {
            let rhs: Vec<f64> = (0..n).map(|row| -m[(row, col)]).collect();
            let x = lu.solve(&rhs);
            for row in 0..n {
                out[(row, col)] = x[row];
            }
        }
        out
    };
    tf.set_block(n, 0, &minus_j2inv(&j0));
    tf.set_block(n, n, &minus_j2inv(&j1));
    Ok((tf, q2))
}

/// Which discrete two-form to track along the flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormKind {
    /// `ω_{L_d}` (ignores forces).
    Lagrangian,
    /// `ω⁺_{f_d}`.
    ForcedPlus,
    /// `ω⁻_{f_d}`.
    ForcedMinus,
    /// `ω⁺_{f_d} − pr₂*β` (requires a Routh certificate).
    CorrectedPlus,
    /// `ω⁻_{f_d} − pr₁*β` (requires a Routh certificate).
    CorrectedMinus,
}

/// Result of [`check_preservation`].
#[derive(Clone, Debug)]
pub struct PreservationReport {
    /// Worst absolute defect `ω_next(TF u, TF v) − ω_prev(u, v)` over all
    /// steps and tangent pairs.
    pub max_defect: f64,
    /// Defect relative to the local form magnitude.
    pub max_rel_defect: f64,
    /// Worst deviation of the defect from the flow-pullback of `−df_d`
    /// (the exact evolution law of the uncorrected forms).
    pub max_formula_mismatch: f64,
    pub steps: usize,
}

/// Number of seeded random unit tangent pairs added to the canonical basis
/// pairs in [`check_preservation`].
const RANDOM_TANGENT_PAIRS: usize = 8;

/// Tracks a two-form along `n_steps` of the discrete flow and reports the
/// worst pullback defect over canonical and random tangent pairs.
#[allow(clippy::too_many_arguments)]
pub fn check_preservation(
    sys: &impl DiscreteSystem,
    kind: FormKind,
    cert: Option<&RouthCertificate>,
    q0: &[f64],
    q1: &[f64],
    n_steps: usize,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<PreservationReport> {
    let n = sys.chart().dim();
    let form_at = |a: &[f64], b: &[f64]| -> Result<TwoFormMatrix> {
        Ok(match kind {
            FormKind::Lagrangian => omega_ld(sys, a, b),
            FormKind::ForcedPlus => omega_f_plus(sys, a, b),
            FormKind::ForcedMinus => omega_f_minus(sys, a, b),
            FormKind::CorrectedPlus => {
                omega_plus_corrected(sys, cert.ok_or(Error::RequiresRouthCertificate)?, a, b)?
            }
            FormKind::CorrectedMinus => {
                omega_minus_corrected(sys, cert.ok_or(Error::RequiresRouthCertificate)?, a, b)?
            }
        })
    };

    let mut rng = UnitVectors::new(2 * n, seed);
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for i in 0..2 * n {
        for j in i + 1..2 * n {
            let mut u = vec![0.0; 2 * n];
            let mut v = vec![0.0; 2 * n];
            u[i] = 1.0;
            v[j] = 1.0;
            pairs.push((u, v));
        }
    }
    for _ in 0..RANDOM_TANGENT_PAIRS {
        pairs.push((rng.next_vec(), rng.next_vec()));
    }

    let mut a = q0.to_vec();
    let mut b = q1.to_vec();
    let mut report = PreservationReport {
        max_defect: 0.0,
        max_rel_defect: 0.0,
        max_formula_mismatch: 0.0,
        steps: n_steps,
    };
    for k in 0..n_steps {
        let prev = form_at(&a, &b).map_err(|e| e.at_step(k))?;
        let (tf, q2) = flow_jacobian(sys, &a, &b, cfg).map_err(|e| e.at_step(k))?;
        let next = form_at(&b, &q2).map_err(|e| e.at_step(k))?;
        let pulled = tf.transpose().matmul(&next.matrix).matmul(&tf);
        let df_next = force_exterior_derivative(sys, &b, &q2);
        let df_pulled = tf.transpose().matmul(&df_next.matrix).matmul(&tf);
        let scale = prev.matrix.max_abs().max(1.0);
        for (u, v) in &pairs {
            let defect = pulled.bilinear(u, v) - prev.matrix.bilinear(u, v);
            let expected = -df_pulled.bilinear(u, v);
            report.max_defect = report.max_defect.max(defect.abs());
            report.max_rel_defect = report.max_rel_defect.max(defect.abs() / scale);
            report.max_formula_mismatch =
                report.max_formula_mismatch.max((defect - expected).abs());
        }
        a = b;
        b = q2;
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Finite-difference exterior-derivative oracle
// ---------------------------------------------------------------------------

/// Default probe step of the finite-difference oracle.
pub const FD_ORACLE_STEP: f64 = 1e-5;

/// Exterior derivative of a 1-form given by its coefficient function, as an
/// antisymmetric matrix: `M[j][i] = ∂c_i/∂x^j − ∂c_j/∂x^i`, by central
/// differences. Independent of the dual-number backend.
pub fn exterior_derivative_fd(
    coeffs: &dyn Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
    step: f64,
) -> Matrix<f64> {
    let n = x.len();
    // jac[i][j] = ∂c_i/∂x^j
    let mut jac = Matrix::zeros(n, n);
    for j in 0..n {
        let mut hi = x.to_vec();
        let mut lo = x.to_vec();
        hi[j] += step;
        lo[j] -= step;
        let chi = coeffs(&hi);
        let clo = coeffs(&lo);
        for i in 0..n {
            jac[(i, j)] = (chi[i] - clo[i]) / (2.0 * step);
        }
    }
    jac.transpose().sub(&jac)
}

/// Worst component of `dβ` for a 2-form field given by its matrix function,
/// by central differences: `(dβ)(e_k, e_j, e_i) = ∂_k β_ji − ∂_j β_ki + ∂_i β_kj`.
pub fn closedness_defect_fd(beta: &dyn Fn(&[f64]) -> Matrix<f64>, x: &[f64], step: f64) -> f64 {
    let n = x.len();
    let partial = |k: usize| -> Matrix<f64> {
        let mut hi = x.to_vec();
        let mut lo = x.to_vec();
        hi[k] += step;
        lo[k] -= step;
        beta(&hi).sub(&beta(&lo)).scale(1.0 / (2.0 * step))
    };
    let grads: Vec<Matrix<f64>> = (0..n).map(partial).collect();
    let mut worst = 0.0f64;
    for k in 0..n {
        for j in k + 1..n {
            for i in j + 1..n {
                let v = grads[k][(j, i)] - grads[j][(k, i)] + grads[i][(k, j)];
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

/// The force of `sys` as a 1-form coefficient function on `Q × Q`
/// (for feeding the finite-difference oracle).
pub fn force_coefficients<'a>(
    sys: &'a (impl DiscreteSystem + 'a),
) -> impl Fn(&[f64]) -> Vec<f64> + 'a {
    move |x: &[f64]| {
        let n = x.len() / 2;
        let (q0, q1) = (&x[..n], &x[n..]);
        let mut c = sys.force_minus(q0, q1);
        c.extend(sys.force_plus(q0, q1));
        c
    }
}

/// The 1-form `θ⁺ = D₂L_d + f⁺` as a coefficient function on `Q × Q`.
pub fn theta_plus_coefficients<'a>(
    sys: &'a (impl DiscreteSystem + 'a),
) -> impl Fn(&[f64]) -> Vec<f64> + 'a {
    move |x: &[f64]| {
        let n = x.len() / 2;
        let (q0, q1) = (&x[..n], &x[n..]);
        let mut c = vec![0.0; n];
        c.extend(crate::fdms::legendre_plus_coords(sys, q0, q1));
        c
    }
}

/// Pullback of the canonical cotangent two-form through 𝔽⁺, computed by
/// Jacobian composition (cross-check route for `ω⁺_{f_d}`).
pub fn canonical_pullback_plus(sys: &impl DiscreteSystem, q0: &[f64], q1: &[f64]) -> TwoFormMatrix {
    let n = q0.len();
    let lag = LagrangianField(sys);
    // 𝔽⁺(q0, q1) = (q1, p): base rows are (0 | I), momentum rows its slot derivatives
    let dp_dq0 = fields::d1d2(&lag, q0, q1).add(&fields::jac1(&ForcePlusField(sys), q0, q1));
    let dp_dq1 = fields::d2d2(&lag, q0, q1).add(&fields::jac2(&ForcePlusField(sys), q0, q1));
    let mut jf = Matrix::zeros(2 * n, 2 * n);
    jf.set_block(0, n, &Matrix::identity(n));
    jf.set_block(n, 0, &dp_dq0);
    jf.set_block(n, n, &dp_dq1);
    // canonical form in (x, p) coordinates: ω(u, v) = u_x·v_p − u_p·v_x
    let mut canonical = Matrix::zeros(2 * n, 2 * n);
    canonical.set_block(0, n, &Matrix::identity(n));
    canonical.set_block(n, 0, &Matrix::identity(n).scale(-1.0));
    TwoFormMatrix {
        base: (q0.to_vec(), q1.to_vec()),
        matrix: jf.transpose().matmul(&canonical).matmul(&jf),
    }
}
