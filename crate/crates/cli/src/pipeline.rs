//! Scenario pipelines: trajectory generation, convergence study and the
//! invariant check suites.

use crate::config::{Config, Scenario};
use routhe_core::chart::Chart;
use routhe_core::fdms::{self, step_coords, DiscreteSystem, SolverConfig};
use routhe_core::fields;
use routhe_core::forms::{self, FormKind, ProbeRegion};
use routhe_core::linalg;
use routhe_core::ode::{adaptive_solve, rk4_step, ContinuousReducedSystem, DenseTrajectory};
use routhe_core::reduction::{self, Reduced};
use routhe_core::sampling::QuasiRandom;
use routhe_core::symmetry::{
    self, CentralMpConnection, ConnectionForm, GroupAction, Se2, TranslationGapConnection,
    TranslationSymmetry,
};
use routhe_core::systems::{
    AbsorbedForce, CentralPotentialMp, GammaMp, PlanarBar, ReducedCentralMp, Sextic,
    SyntheticRouthPlane, SyntheticRouthSpace, ViscousPlane,
};
use routhe_core::{Error, Result};

pub fn solver_config(cfg: &Config) -> SolverConfig {
    SolverConfig {
        tol: cfg.newton_tol,
        max_iter: cfg.newton_max_iter,
        damping: cfg.newton_damping,
    }
}

pub fn sextic(cfg: &Config) -> Sextic {
    Sextic {
        alpha: cfg.alpha,
        beta: cfg.beta,
    }
}

pub fn central_setup() -> TranslationSymmetry {
    TranslationSymmetry::flat(
        Chart::euclidean("central-r-eta", 2).with_positive(0),
        1,
        Chart::euclidean("reduced-r", 1).with_positive(0),
    )
}

pub fn bar_setup(nu: f64) -> TranslationSymmetry {
    TranslationSymmetry::new(
        Chart::euclidean("bar-S1xR2", 3),
        1,
        Chart::euclidean("bar-reduced", 2),
        ConnectionForm::constant(vec![0.0, 1.0, -nu]),
    )
}

/// A step index paired with the error that interrupted a trajectory.
pub type Failure = (usize, String);

// ---------------------------------------------------------------------------
// Central-potential experiment
// ---------------------------------------------------------------------------

pub struct CentralRun {
    pub mu: f64,
    pub mu_from_ics: f64,
    /// Output grid `t_k = k h`, `k = 0..=n`.
    pub times: Vec<f64>,
    pub r_mp: Vec<f64>,
    pub r_rk4: Vec<f64>,
    pub r_oracle: Vec<f64>,
    pub err_mp: Vec<f64>,
    pub err_rk4: Vec<f64>,
    /// Discrete energy of the variational integrator, from the midpoint state
    /// of the pair `(k, k+1)`; the final row repeats the last pair value.
    pub e_mp: Vec<f64>,
    pub e_rk4: Vec<f64>,
    pub e_oracle: Vec<f64>,
    pub failure: Option<Failure>,
}

/// Runs the three integrators (variational midpoint on the reduced system,
/// RK4 on the reduced equation, adaptive oracle) on a common grid.
pub fn run_central(cfg: &Config) -> Result<CentralRun> {
    let mu = cfg.momentum_level();
    let mu_from_ics = cfg.mass * cfg.r0 * cfg.r0 * cfg.etadot0;
    let n = cfg.n_steps();
    let mut out = CentralRun {
        mu,
        mu_from_ics,
        times: Vec::new(),
        r_mp: Vec::new(),
        r_rk4: Vec::new(),
        r_oracle: Vec::new(),
        err_mp: Vec::new(),
        err_rk4: Vec::new(),
        e_mp: Vec::new(),
        e_rk4: Vec::new(),
        e_oracle: Vec::new(),
        failure: None,
    };
    if n == 0 {
        return Ok(out);
    }

    let cont = ContinuousReducedSystem::new(cfg.mass, mu, sextic(cfg));
    let reduced = ReducedCentralMp::new(cfg.mass, cfg.h, mu, sextic(cfg));
    let scfg = solver_config(cfg);

    let run_oracle = || {
        let rhs = |y: &[f64]| cont.rhs_state(y);
        adaptive_solve(&rhs, &[cfg.r0, cfg.rdot0], (0.0, cfg.t_end), cfg.oracle_tol)
    };
    let run_mp = || {
        let mut mp = vec![cfg.r0, cfg.r1];
        let mut fail = None;
        for k in 1..n {
            let m = mp.len();
            match step_coords(&reduced, &[mp[m - 2]], &[mp[m - 1]], &scfg) {
                Ok((q2, _)) => mp.push(q2[0]),
                Err(e) => {
                    fail = Some((k, format!("variational step: {e}")));
                    break;
                }
            }
        }
        (mp, fail)
    };
    let run_rk4 = || {
        let rhs = |y: &[f64]| cont.rhs_state(y);
        let mut rk = vec![[cfg.r0, cfg.rdot0]];
        let mut fail = None;
        for k in 0..n {
            let y = rk.last().unwrap();
            match rk4_step(&rhs, y, cfg.h) {
                Ok(next) => rk.push([next[0], next[1]]),
                Err(e) => {
                    fail = Some((k, format!("rk4 step: {e}")));
                    break;
                }
            }
        }
        (rk, fail)
    };

    // the three methods share no mutable state, so they may run on separate
    // threads; the assembled output is identical either way
    let (oracle, (mp, mp_fail), (rk, rk_fail)) = if cfg.concurrent {
        std::thread::scope(|scope| {
            let ho = scope.spawn(run_oracle);
            let hm = scope.spawn(run_mp);
            let hr = scope.spawn(run_rk4);
            (
                ho.join().expect("oracle thread"),
                hm.join().expect("variational thread"),
                hr.join().expect("rk4 thread"),
            )
        })
    } else {
        (run_oracle(), run_mp(), run_rk4())
    };
    let oracle = oracle?;
    let failure = match (mp_fail, rk_fail) {
        (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
        (a, b) => a.or(b),
    };

    let rows = (n + 1).min(mp.len()).min(rk.len());
    for k in 0..rows {
        let t = k as f64 * cfg.h;
        let yo = oracle.eval(t);
        out.times.push(t);
        out.r_mp.push(mp[k]);
        out.r_rk4.push(rk[k][0]);
        out.r_oracle.push(yo[0]);
        out.err_mp.push((mp[k] - yo[0]).abs());
        out.err_rk4.push((rk[k][0] - yo[0]).abs());
        let pair = if k + 1 < mp.len() { k } else { mp.len() - 2 };
        let rbar = 0.5 * (mp[pair] + mp[pair + 1]);
        let v = (mp[pair + 1] - mp[pair]) / cfg.h;
        out.e_mp.push(cont.energy(rbar, v)?);
        out.e_rk4.push(cont.energy(rk[k][0], rk[k][1])?);
        out.e_oracle.push(cont.energy(yo[0], yo[1])?);
    }
    out.failure = failure;
    Ok(out)
}

/// Least-squares secular drift: fitted slope times the covered span.
pub fn secular_drift(times: &[f64], values: &[f64]) -> f64 {
    let n = times.len() as f64;
    if times.len() < 2 {
        return 0.0;
    }
    let tm = times.iter().sum::<f64>() / n;
    let vm = values.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, v) in times.iter().zip(values) {
        num += (t - tm) * (v - vm);
        den += (t - tm) * (t - tm);
    }
    let slope = num / den;
    slope * (times.last().unwrap() - times[0])
}

pub fn oscillation_amplitude(values: &[f64]) -> f64 {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

pub fn time_mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

// ---------------------------------------------------------------------------
// Bar scenario
// ---------------------------------------------------------------------------

pub struct BarRun {
    pub times: Vec<f64>,
    /// Reduced trajectory (φ, y) from the Newton flow.
    pub tau: Vec<[f64; 2]>,
    /// Closed-form linear flow from the same seeds.
    pub closed: Vec<[f64; 2]>,
    pub defect: Vec<f64>,
    pub failure: Option<Failure>,
}

pub fn run_bar(cfg: &Config) -> Result<BarRun> {
    let bar = PlanarBar::new(cfg.mass, cfg.inertia, cfg.h);
    let setup = bar_setup(cfg.nu);
    let conn = TranslationGapConnection {
        group_coord: 1,
        gap: cfg.mu2 * cfg.h / cfg.mass,
    };
    let reduced = Reduced::new(&bar, &setup, conn, cfg.mu2);
    let scfg = solver_config(cfg);
    let n = cfg.n_steps();

    let mut tau = vec![cfg.bar_tau0, cfg.bar_tau1];
    let mut failure = None;
    for k in 1..n {
        let m = tau.len();
        let (a, b) = (tau[m - 2], tau[m - 1]);
        match step_coords(&reduced, &a, &b, &scfg) {
            Ok((q2, _)) => tau.push([q2[0], q2[1]]),
            Err(e) => {
                failure = Some((k, e.to_string()));
                break;
            }
        }
    }

    let mut out = BarRun {
        times: Vec::new(),
        tau: Vec::new(),
        closed: Vec::new(),
        defect: Vec::new(),
        failure,
    };
    let mut closed = vec![cfg.bar_tau0, cfg.bar_tau1];
    for k in 2..tau.len() {
        let prev = closed[k - 1];
        let prev2 = closed[k - 2];
        closed.push([2.0 * prev[0] - prev2[0], 2.0 * prev[1] - prev2[1]]);
    }
    for (k, (t, c)) in tau.iter().zip(&closed).enumerate() {
        out.times.push(k as f64 * cfg.h);
        out.tau.push(*t);
        out.closed.push(*c);
        out.defect
            .push((t[0] - c[0]).abs().max((t[1] - c[1]).abs()));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Synthetic scenario
// ---------------------------------------------------------------------------

pub struct SyntheticRun {
    pub times: Vec<f64>,
    pub xy: Vec<[f64; 2]>,
    /// Per-step matrix defect of the flow pullback of the corrected form.
    pub step_defect: Vec<f64>,
    pub failure: Option<Failure>,
}

pub fn run_synthetic(cfg: &Config) -> Result<SyntheticRun> {
    let sys = SyntheticRouthPlane::new(cfg.c, cfg.h);
    let cert = forms::detect_routh(
        &sys,
        &ProbeRegion::cube(2, -2.0, 2.0),
        forms::DEFAULT_ROUTH_PROBES,
        forms::DEFAULT_ROUTH_TOL,
    )?;
    let scfg = solver_config(cfg);
    let n = cfg.n_steps();
    let mut q = vec![vec![0.1, 0.2], vec![0.15, 0.22]];
    let mut out = SyntheticRun {
        times: vec![0.0, cfg.h],
        xy: vec![[0.1, 0.2], [0.15, 0.22]],
        step_defect: vec![0.0, 0.0],
        failure: None,
    };
    for k in 1..n {
        let m = q.len();
        let (a, b) = (q[m - 2].clone(), q[m - 1].clone());
        let prev = forms::omega_plus_corrected(&sys, &cert, &a, &b)?;
        match forms::flow_jacobian(&sys, &a, &b, &scfg) {
            Ok((tf, q2)) => {
                let next = forms::omega_plus_corrected(&sys, &cert, &b, &q2)?;
                let pulled = tf.transpose().matmul(&next.matrix).matmul(&tf);
                out.step_defect.push(pulled.sub(&prev.matrix).max_abs());
                out.times.push((k as f64 + 1.0) * cfg.h);
                out.xy.push([q2[0], q2[1]]);
                q.push(q2);
            }
            Err(e) => {
                out.failure = Some((k, e.to_string()));
                break;
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Convergence study
// ---------------------------------------------------------------------------

pub struct ConvergenceRow {
    pub h: f64,
    /// Time-averaged absolute error on the output grid over `[0, t_end]`.
    pub err_mp: f64,
    pub err_rk4: f64,
    /// Endpoint errors, for reference.
    pub err_mp_end: f64,
    pub err_rk4_end: f64,
}

pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    pub order_mp: f64,
    pub order_rk4: f64,
    pub skipped: Vec<(f64, String)>,
}

/// Global-error study against the adaptive oracle.
///
/// The fitted orders use the time-averaged absolute error, which is stable
/// against accidental smallness of the endpoint error coefficient; endpoint
/// errors are reported alongside.
pub fn run_convergence(cfg: &Config) -> Result<ConvergenceStudy> {
    let mu = cfg.momentum_level();
    let cont = ContinuousReducedSystem::new(cfg.mass, mu, sextic(cfg));
    let rhs = |y: &[f64]| cont.rhs_state(y);
    let t_end = cfg.conv_t_end;
    let oracle = adaptive_solve(&rhs, &[cfg.r0, cfg.rdot0], (0.0, t_end), cfg.oracle_tol)?;

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &h in &cfg.h_list {
        match convergence_at(cfg, &cont, &oracle, h, t_end) {
            Ok(row) => rows.push(row),
            Err(e) => skipped.push((h, e.to_string())),
        }
    }
    let fit = |err: &dyn Fn(&ConvergenceRow) -> f64| -> f64 {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.h.log2(), err(r).log2())).collect();
        let n = pts.len() as f64;
        let xm = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let num: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
        let den: f64 = pts.iter().map(|p| (p.0 - xm) * (p.0 - xm)).sum();
        num / den
    };
    if rows.len() < 2 {
        return Err(Error::Config(
            "convergence study needs at least two successful step sizes".into(),
        ));
    }
    Ok(ConvergenceStudy {
        order_mp: fit(&|r| r.err_mp),
        order_rk4: fit(&|r| r.err_rk4),
        rows,
        skipped,
    })
}

fn convergence_at(
    cfg: &Config,
    cont: &ContinuousReducedSystem<Sextic>,
    oracle: &DenseTrajectory,
    h: f64,
    t_end: f64,
) -> Result<ConvergenceRow> {
    let n = (t_end / h).round() as usize;
    let rhs = |y: &[f64]| cont.rhs_state(y);
    let reduced = ReducedCentralMp::new(cfg.mass, h, cont.mu, sextic(cfg));
    let scfg = solver_config(cfg);

    // seed the two-point method with a single accurate step
    let first = rk4_step(&rhs, &[cfg.r0, cfg.rdot0], h)?;
    let mut mp = vec![cfg.r0, first[0]];
    for k in 1..n {
        let m = mp.len();
        let (q2, _) =
            step_coords(&reduced, &[mp[m - 2]], &[mp[m - 1]], &scfg).map_err(|e| e.at_step(k))?;
        mp.push(q2[0]);
    }
    let mut rk = vec![[cfg.r0, cfg.rdot0]];
    for k in 0..n {
        let y = rk.last().unwrap();
        let next = rk4_step(&rhs, y, h).map_err(|e| e.at_step(k))?;
        rk.push([next[0], next[1]]);
    }

    let mut sum_mp = 0.0;
    let mut sum_rk = 0.0;
    for k in 0..=n {
        let r_ref = oracle.eval(k as f64 * h)[0];
        sum_mp += (mp[k] - r_ref).abs();
        sum_rk += (rk[k][0] - r_ref).abs();
    }
    let r_end = oracle.eval(t_end)[0];
    Ok(ConvergenceRow {
        h,
        err_mp: sum_mp / (n + 1) as f64,
        err_rk4: sum_rk / (n + 1) as f64,
        err_mp_end: (mp[n] - r_end).abs(),
        err_rk4_end: (rk[n][0] - r_end).abs(),
    })
}

// ---------------------------------------------------------------------------
// Invariant check suites
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    /// Pass when `value <= threshold`.
    AtMost,
    /// Pass when `value >= threshold` (expected-violation controls).
    AtLeast,
}

#[derive(Clone, Debug)]
pub struct CheckLine {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub cmp: Cmp,
    pub pass: bool,
}

impl CheckLine {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        CheckLine {
            name: name.into(),
            value,
            threshold,
            cmp: Cmp::AtMost,
            pass: value <= threshold,
        }
    }

    fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        CheckLine {
            name: name.into(),
            value,
            threshold,
            cmp: Cmp::AtLeast,
            pass: value >= threshold,
        }
    }

    pub fn render(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.name,
            crate::csvout::fmt(self.value),
            crate::csvout::fmt(self.threshold),
            match self.cmp {
                Cmp::AtMost => "<=",
                Cmp::AtLeast => ">=",
            },
            if self.pass { "pass" } else { "fail" }
        )
    }
}

/// Runs the invariant suite of the configured scenario.
pub fn run_checks(cfg: &Config) -> Result<Vec<CheckLine>> {
    match cfg.scenario {
        Scenario::Bar => bar_checks(cfg),
        Scenario::CentralPotential => central_checks(cfg),
        Scenario::SyntheticRouth => synthetic_checks(cfg),
    }
}

fn bar_checks(cfg: &Config) -> Result<Vec<CheckLine>> {
    let scfg = solver_config(cfg);
    let bar = PlanarBar::new(cfg.mass, cfg.inertia, cfg.h);
    let setup = bar_setup(cfg.nu);
    let conn = TranslationGapConnection {
        group_coord: 1,
        gap: cfg.mu2 * cfg.h / cfg.mass,
    };
    let reduced = reduction::reduce(
        &bar,
        &setup,
        conn,
        cfg.mu2,
        &[(cfg.bar_tau0.to_vec(), cfg.bar_tau1.to_vec())],
    )?;
    let mut lines = Vec::new();

    // closed-form reduced flow
    let run = run_bar(cfg)?;
    let flow_defect = run.defect.iter().cloned().fold(0.0, f64::max);
    lines.push(CheckLine::at_most(
        "bar-closed-form-flow",
        flow_defect,
        1e-10,
    ));

    // momentum conservation of the full group along an unreduced trajectory
    let chart = bar.chart();
    let q0 = chart.point(vec![0.1, 0.4, -0.2])?;
    let q1 = chart.point(vec![0.15, 0.45, -0.1])?;
    let traj = fdms::run(&bar, &q0, &q1, cfg.n_steps(), &scfg)?;
    let se2 = Se2;
    let j0 = symmetry::momentum(&bar, &se2, traj.coords(0), traj.coords(1))?;
    let mut jdrift = 0.0f64;
    for k in 1..traj.len() - 1 {
        let j = symmetry::momentum(&bar, &se2, traj.coords(k), traj.coords(k + 1))?;
        for (a, b) in j.iter().zip(&j0) {
            jdrift = jdrift.max((a - b).abs());
        }
    }
    lines.push(CheckLine::at_most(
        "bar-momentum-conservation",
        jdrift,
        1e-10,
    ));

    // equivariance of the momentum map and of the flow
    let mut gen = QuasiRandom::new(9);
    let samples: Vec<_> = (0..10)
        .map(|_| {
            let p = gen.next_in(&[-1.0; 9], &[1.0; 9]);
            (p[..3].to_vec(), p[3..6].to_vec(), p[6..].to_vec())
        })
        .collect();
    let eq = symmetry::check_equivariance(&bar, &se2, &samples)?;
    lines.push(CheckLine::at_most("bar-momentum-equivariance", eq, 1e-10));

    let mut flow_eq = 0.0f64;
    for (g, a, b) in &samples {
        let (q2, _) = step_coords(&bar, a, b, &scfg)?;
        let (q2g, _) = step_coords(&bar, &se2.act(g, a), &se2.act(g, b), &scfg)?;
        for (x, y) in se2.act(g, &q2).iter().zip(&q2g) {
            flow_eq = flow_eq.max((x - y).abs());
        }
    }
    lines.push(CheckLine::at_most("bar-flow-equivariance", flow_eq, 1e-10));

    // reduction correspondence
    let rep =
        reduction::verify_reduction(&reduced, &cfg.bar_tau0, &cfg.bar_tau1, cfg.n_steps(), &scfg)?;
    lines.push(CheckLine::at_most(
        "bar-reduction-correspondence",
        rep.max_discrepancy,
        1e-9,
    ));

    // Routh certificate of the reduced force and its potential
    let cert = forms::detect_routh(
        &reduced,
        &ProbeRegion::cube(2, -2.0, 2.0),
        forms::DEFAULT_ROUTH_PROBES,
        forms::DEFAULT_ROUTH_TOL,
    )?;
    lines.push(CheckLine::at_most(
        "bar-reduced-routh-certificate",
        if cert.is_routh {
            cert.max_violation
        } else {
            1.0
        },
        1e-8,
    ));
    let beta_conn = reduced.routh_potential(&[0.3, -0.4])?;
    let beta_force = forms::routh_potential_at(&reduced, &[0.3, -0.4]);
    lines.push(CheckLine::at_most(
        "bar-connection-potential-match",
        beta_conn.sub(&beta_force).max_abs(),
        1e-8,
    ));

    // preservation of the corrected structure (unreduced and reduced)
    let pres_full = forms::check_preservation(
        &bar,
        FormKind::Lagrangian,
        None,
        &[0.1, 0.4, -0.2],
        &[0.15, 0.45, -0.1],
        50,
        &scfg,
        cfg.seed,
    )?;
    lines.push(CheckLine::at_most(
        "bar-preservation-unreduced",
        pres_full.max_rel_defect,
        1e-8,
    ));
    let pres_red = forms::check_preservation(
        &reduced,
        FormKind::CorrectedPlus,
        Some(&cert),
        &cfg.bar_tau0,
        &cfg.bar_tau1,
        50,
        &scfg,
        cfg.seed,
    )?;
    lines.push(CheckLine::at_most(
        "bar-preservation-reduced",
        pres_red.max_rel_defect,
        1e-8,
    ));

    // regularity flag agrees with nondegeneracy of the forced two-form
    lines.push(regularity_agreement_check(
        "bar", &bar, &[-1.0; 3], &[1.0; 3],
    ));
    Ok(lines)
}

fn central_checks(cfg: &Config) -> Result<Vec<CheckLine>> {
    let scfg = solver_config(cfg);
    let mu = cfg.momentum_level();
    let base = CentralPotentialMp::new(cfg.mass, cfg.h, sextic(cfg));
    let setup = central_setup();
    let conn = CentralMpConnection {
        mass: cfg.mass,
        h: cfg.h,
        mu,
    };
    let closed = ReducedCentralMp::new(cfg.mass, cfg.h, mu, sextic(cfg));
    let mut lines = Vec::new();

    // momentum level from the continuous initial data (only meaningful when
    // the level is derived rather than overridden)
    if cfg.mu.is_none() {
        let mu_from_ics = cfg.mass * cfg.r0 * cfg.r0 * cfg.etadot0;
        lines.push(CheckLine::at_most(
            "central-mu-consistency",
            (mu_from_ics - mu).abs(),
            1e-12,
        ));
    }

    // discrete momentum conservation along the unreduced flow
    let q0 = vec![cfg.r0, cfg.eta0];
    let q1 = vec![cfg.r1, cfg.eta0 + cfg.h * cfg.etadot0];
    let chart = base.chart();
    let traj = fdms::run(
        &base,
        &chart.point(q0.clone())?,
        &chart.point(q1.clone())?,
        cfg.n_steps(),
        &scfg,
    )?;
    let j0 = symmetry::momentum(&base, &setup, traj.coords(0), traj.coords(1))?;
    let mut jdrift = 0.0f64;
    for k in 1..traj.len() - 1 {
        let j = symmetry::momentum(&base, &setup, traj.coords(k), traj.coords(k + 1))?;
        jdrift = jdrift.max((j[0] - j0[0]).abs());
    }
    lines.push(CheckLine::at_most(
        "central-momentum-conservation",
        jdrift,
        1e-9,
    ));

    // reduction correspondence over the full run
    let reduced = reduction::reduce(&base, &setup, conn, mu, &[(vec![cfg.r0], vec![cfg.r1])])?;
    let rep = reduction::verify_reduction(&reduced, &[cfg.r0], &[cfg.r1], cfg.n_steps(), &scfg)?;
    lines.push(CheckLine::at_most(
        "central-reduction-correspondence",
        rep.max_discrepancy,
        1e-8,
    ));

    // reduced Lagrangian identity with the continuous Routhian
    let identity = reduction::midpoint_identity_defect(&closed, 1000);
    lines.push(CheckLine::at_most(
        "central-midpoint-identity",
        identity,
        1e-12,
    ));

    // the reduced force is the differential of the discrete potential
    let gamma = GammaMp {
        mass: cfg.mass,
        h: cfg.h,
        mu,
    };
    let mut grad_defect = 0.0f64;
    let mut gen = QuasiRandom::new(2);
    for _ in 0..100 {
        let p = gen.next_in(&[0.1, 0.1], &[3.0, 3.0]);
        let (a, b) = (&p[..1], &p[1..]);
        let g1 = fields::d1(&gamma, a, b);
        let g2 = fields::d2(&gamma, a, b);
        let fm = closed.force_minus(a, b);
        let fp = closed.force_plus(a, b);
        grad_defect = grad_defect
            .max((g1[0] - fm[0]).abs())
            .max((g2[0] - fp[0]).abs());
    }
    lines.push(CheckLine::at_most(
        "central-force-is-gradient",
        grad_defect,
        1e-10,
    ));

    // Routh certificate (trivially zero potential on a one-dimensional base)
    let cert = forms::detect_routh(
        &closed,
        &ProbeRegion::cube(1, 0.1, 3.0),
        forms::DEFAULT_ROUTH_PROBES,
        forms::DEFAULT_ROUTH_TOL,
    )?;
    lines.push(CheckLine::at_most(
        "central-routh-certificate",
        if cert.is_routh {
            cert.max_violation
        } else {
            1.0
        },
        1e-8,
    ));

    // preservation of the corrected structure along the reduced flow
    let pres = forms::check_preservation(
        &closed,
        FormKind::CorrectedPlus,
        Some(&cert),
        &[cfg.r0],
        &[cfg.r1],
        50,
        &scfg,
        cfg.seed,
    )?;
    lines.push(CheckLine::at_most(
        "central-preservation-reduced",
        pres.max_rel_defect,
        1e-8,
    ));

    // absorbing the exact force into the Lagrangian leaves the flow unchanged
    let absorbed = AbsorbedForce {
        base: &closed,
        gamma,
    };
    let rchart = closed.chart();
    let ta = fdms::run(
        &closed,
        &rchart.point(vec![cfg.r0])?,
        &rchart.point(vec![cfg.r1])?,
        100.min(cfg.n_steps()),
        &scfg,
    )?;
    let tb = fdms::run(
        &absorbed,
        &rchart.point(vec![cfg.r0])?,
        &rchart.point(vec![cfg.r1])?,
        100.min(cfg.n_steps()),
        &scfg,
    )?;
    let mut absorb = 0.0f64;
    for (a, b) in ta.points.iter().zip(&tb.points) {
        absorb = absorb.max((a.coords[0] - b.coords[0]).abs());
    }
    lines.push(CheckLine::at_most(
        "central-force-absorption",
        absorb,
        1e-10,
    ));

    lines.push(regularity_agreement_check(
        "central",
        &closed,
        &[0.15],
        &[2.5],
    ));
    Ok(lines)
}

fn synthetic_checks(cfg: &Config) -> Result<Vec<CheckLine>> {
    let scfg = solver_config(cfg);
    let mut lines = Vec::new();

    let plane = SyntheticRouthPlane::new(cfg.c, cfg.h);
    let cert = forms::detect_routh(
        &plane,
        &ProbeRegion::cube(2, -2.0, 2.0),
        forms::DEFAULT_ROUTH_PROBES,
        forms::DEFAULT_ROUTH_TOL,
    )?;
    lines.push(CheckLine::at_most(
        "synthetic-routh-certificate",
        if cert.is_routh {
            cert.max_violation
        } else {
            1.0
        },
        1e-8,
    ));
    lines.push(CheckLine::at_most(
        "synthetic-potential-value",
        (cert.beta[(0, 1)] - 2.0 * cfg.c).abs(),
        1e-8,
    ));
    let pres = forms::check_preservation(
        &plane,
        FormKind::CorrectedPlus,
        Some(&cert),
        &[0.1, 0.2],
        &[0.15, 0.22],
        50,
        &scfg,
        cfg.seed,
    )?;
    lines.push(CheckLine::at_most(
        "synthetic-preservation",
        pres.max_rel_defect,
        1e-8,
    ));

    // non-constant potential on ℝ³, closed by the oracle
    let space = SyntheticRouthSpace::new(0.2, cfg.h);
    let cert3 = forms::detect_routh(
        &space,
        &ProbeRegion::cube(3, -2.0, 2.0),
        forms::DEFAULT_ROUTH_PROBES,
        forms::DEFAULT_ROUTH_TOL,
    )?;
    lines.push(CheckLine::at_most(
        "space-routh-certificate",
        if cert3.is_routh {
            cert3.max_violation
        } else {
            1.0
        },
        1e-8,
    ));
    let beta_field = |q: &[f64]| forms::routh_potential_at(&space, q);
    let closed_defect =
        forms::closedness_defect_fd(&beta_field, &[0.4, -0.7, 1.1], forms::FD_ORACLE_STEP);
    lines.push(CheckLine::at_most(
        "space-potential-closed",
        closed_defect,
        1e-7,
    ));

    // viscous control: expected violations
    let viscous = ViscousPlane::new(cfg.kappa, cfg.h);
    let vcert = forms::detect_routh(
        &viscous,
        &ProbeRegion::cube(2, -2.0, 2.0),
        forms::DEFAULT_ROUTH_PROBES,
        forms::DEFAULT_ROUTH_TOL,
    )?;
    lines.push(CheckLine::at_least(
        "dissipative-condition-violation",
        if vcert.is_routh {
            0.0
        } else {
            vcert.violations[2]
        },
        0.8 * cfg.kappa,
    ));
    let vpres = forms::check_preservation(
        &viscous,
        FormKind::ForcedPlus,
        None,
        &[0.0, 0.0],
        &[0.3, 0.1],
        50,
        &scfg,
        cfg.seed,
    )?;
    lines.push(CheckLine::at_least(
        "dissipative-nonpreservation",
        vpres.max_defect,
        1e-3,
    ));
    lines.push(CheckLine::at_most(
        "dissipative-evolution-law",
        vpres.max_formula_mismatch,
        1e-8,
    ));
    Ok(lines)
}

/// Agreement between the regularity flag and invertibility of the forced
/// two-form over 50 sample points; the reported value is the number of
/// disagreements.
fn regularity_agreement_check(
    name: &str,
    sys: &impl DiscreteSystem,
    lo: &[f64],
    hi: &[f64],
) -> CheckLine {
    let n = sys.chart().dim();
    let mut gen = QuasiRandom::new(2 * n);
    let lo2: Vec<f64> = lo.iter().chain(lo).copied().collect();
    let hi2: Vec<f64> = hi.iter().chain(hi).copied().collect();
    let mut disagreements = 0usize;
    for _ in 0..50 {
        let p = gen.next_in(&lo2, &hi2);
        let (q0, q1) = (&p[..n], &p[n..]);
        let rep = fdms::regularity_matrices(sys, q0, q1);
        let omega = forms::omega_f_plus(sys, q0, q1);
        if rep.is_regular != linalg::is_invertible(&omega.matrix) {
            disagreements += 1;
        }
    }
    CheckLine::at_most(
        &format!("{name}-regularity-agreement"),
        disagreements as f64,
        0.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn central_run_grid_and_energies() {
        let cfg = Config {
            t_end: 4.0,
            ..Config::default()
        };
        let run = run_central(&cfg).unwrap();
        assert_eq!(run.times.len(), 21);
        assert!(run.failure.is_none());
        assert!((run.mu_from_ics - run.mu).abs() < 1e-12);
        // all finite
        for v in run
            .e_mp
            .iter()
            .chain(&run.e_rk4)
            .chain(&run.e_oracle)
            .chain(&run.err_mp)
        {
            assert!(v.is_finite());
        }
    }

    #[test]
    fn central_run_zero_span() {
        let cfg = Config {
            t_end: 0.0,
            ..Config::default()
        };
        let run = run_central(&cfg).unwrap();
        assert!(run.times.is_empty());
    }

    #[test]
    fn bar_run_matches_closed_form() {
        let cfg = Config {
            scenario: Scenario::Bar,
            t_end: 20.0,
            ..Config::default()
        };
        let run = run_bar(&cfg).unwrap();
        assert_eq!(run.tau.len(), 101);
        assert!(run.defect.iter().cloned().fold(0.0, f64::max) < 1e-10);
    }

    #[test]
    fn secular_drift_of_linear_series() {
        let times: Vec<f64> = (0..100).map(|k| k as f64).collect();
        let values: Vec<f64> = times.iter().map(|t| 3.0 + 0.01 * t).collect();
        let d = secular_drift(&times, &values);
        assert!((d - 0.99).abs() < 1e-12);
    }

    #[test]
    fn convergence_orders_small_grid() {
        let cfg = Config {
            h_list: vec![0.1, 0.05],
            conv_t_end: 4.0,
            ..Config::default()
        };
        let study = run_convergence(&cfg).unwrap();
        assert!(study.order_mp > 1.5 && study.order_mp < 2.5);
        assert!(study.order_rk4 > 3.2 && study.order_rk4 < 5.0);
    }

    #[test]
    fn synthetic_checks_pass() {
        let cfg = Config {
            scenario: Scenario::SyntheticRouth,
            ..Config::default()
        };
        let lines = run_checks(&cfg).unwrap();
        assert!(lines.iter().all(|l| l.pass), "{:#?}", lines);
    }
}
