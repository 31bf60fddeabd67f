//! Flat key-value configuration with command-line overrides.
//!
//! Defaults reproduce the central-potential experiment: sextic coefficients
//! α = 0.1, β = 2, unit mass, time step h = 0.2 over t ∈ [0, 100], initial
//! data (r0, η0) = (0.2, 1.5708), (ṙ0, η̇0) = (0.01, −2.85), discrete seed
//! r1 = 0.201 and momentum level μ = m r0² η̇0 = −0.114.

use routhe_core::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Bar,
    CentralPotential,
    SyntheticRouth,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Bar => "bar",
            Scenario::CentralPotential => "central-potential",
            Scenario::SyntheticRouth => "synthetic-routh",
        }
    }
}

/// Parsed scenario configuration.
#[derive(Clone, Debug)]
pub struct Config {
    pub scenario: Scenario,
    /// Particle / bar mass.
    pub mass: f64,
    /// Bar moment of inertia.
    pub inertia: f64,
    /// Sextic potential coefficients.
    pub alpha: f64,
    pub beta: f64,
    /// Principal-connection slope of the bar reduction.
    pub nu: f64,
    pub h: f64,
    pub t_end: f64,
    /// Continuous initial data (central potential).
    pub r0: f64,
    pub eta0: f64,
    pub rdot0: f64,
    pub etadot0: f64,
    /// Discrete seed radius.
    pub r1: f64,
    /// Momentum level; `None` means derived from the initial data.
    pub mu: Option<f64>,
    /// Bar momentum level and quotient seeds (φ, y).
    pub mu2: f64,
    pub bar_tau0: [f64; 2],
    pub bar_tau1: [f64; 2],
    /// Synthetic scenario coefficients.
    pub c: f64,
    pub kappa: f64,
    /// Solver settings.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub newton_damping: f64,
    pub oracle_tol: f64,
    pub seed: u64,
    /// Run the three integrators of the central experiment on separate
    /// threads (they share no mutable state; the output is identical).
    pub concurrent: bool,
    /// Convergence study.
    pub h_list: Vec<f64>,
    pub conv_t_end: f64,
}

impl Default for Config {
    // 1.5708 is the printed initial angle of the experiment, not a π/2 stand-in
    #[allow(clippy::approx_constant)]
    fn default() -> Self {
        Config {
            scenario: Scenario::CentralPotential,
            mass: 1.0,
            inertia: 1.0,
            alpha: 0.1,
            beta: 2.0,
            nu: 0.7,
            h: 0.2,
            t_end: 100.0,
            r0: 0.2,
            eta0: 1.5708,
            rdot0: 0.01,
            etadot0: -2.85,
            r1: 0.201,
            mu: None,
            mu2: 2.5,
            bar_tau0: [0.0, 0.0],
            bar_tau1: [0.1, 0.2],
            c: 0.3,
            kappa: 0.5,
            newton_tol: 1e-12,
            newton_max_iter: 50,
            newton_damping: 1.0,
            oracle_tol: 1e-12,
            seed: 42,
            concurrent: false,
            h_list: vec![0.2, 0.1, 0.05, 0.025],
            conv_t_end: 10.0,
        }
    }
}

impl Config {
    /// Momentum level: explicit override or `m r0² η̇0`.
    pub fn momentum_level(&self) -> f64 {
        self.mu
            .unwrap_or(self.mass * self.r0 * self.r0 * self.etadot0)
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.h).round() as usize
    }

    /// Loads `path` (if given) and applies `key=value` overrides in order.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Config> {
        let mut raw: BTreeMap<String, String> = BTreeMap::new();
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    Error::Config(format!(
                        "{}:{}: expected key = value",
                        p.display(),
                        lineno + 1
                    ))
                })?;
                raw.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        for item in overrides {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override '{item}': expected key=value")))?;
            raw.insert(k.trim().to_string(), v.trim().to_string());
        }
        Config::from_map(raw)
    }

    fn from_map(raw: BTreeMap<String, String>) -> Result<Config> {
        let mut cfg = Config::default();
        let parse_f64 = |k: &str, v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| Error::Config(format!("key '{k}': '{v}' is not a number")))
        };
        for (k, v) in &raw {
            match k.as_str() {
                "scenario" => {
                    cfg.scenario = match v.as_str() {
                        "bar" => Scenario::Bar,
                        "central-potential" => Scenario::CentralPotential,
                        "synthetic-routh" => Scenario::SyntheticRouth,
                        other => return Err(Error::Config(format!("unknown scenario '{other}'"))),
                    }
                }
                "m" | "mass" => cfg.mass = parse_f64(k, v)?,
                "J" | "inertia" => cfg.inertia = parse_f64(k, v)?,
                "alpha" => cfg.alpha = parse_f64(k, v)?,
                "beta" => cfg.beta = parse_f64(k, v)?,
                "nu" => cfg.nu = parse_f64(k, v)?,
                "h" => cfg.h = parse_f64(k, v)?,
                "t_end" => cfg.t_end = parse_f64(k, v)?,
                "r0" => cfg.r0 = parse_f64(k, v)?,
                "eta0" => cfg.eta0 = parse_f64(k, v)?,
                "rdot0" => cfg.rdot0 = parse_f64(k, v)?,
                "etadot0" => cfg.etadot0 = parse_f64(k, v)?,
                "r1" => cfg.r1 = parse_f64(k, v)?,
                "mu" => cfg.mu = Some(parse_f64(k, v)?),
                "mu2" => cfg.mu2 = parse_f64(k, v)?,
                "phi0" => cfg.bar_tau0[0] = parse_f64(k, v)?,
                "y0" => cfg.bar_tau0[1] = parse_f64(k, v)?,
                "phi1" => cfg.bar_tau1[0] = parse_f64(k, v)?,
                "y1" => cfg.bar_tau1[1] = parse_f64(k, v)?,
                "c" => cfg.c = parse_f64(k, v)?,
                "kappa" => cfg.kappa = parse_f64(k, v)?,
                "newton_tol" => cfg.newton_tol = parse_f64(k, v)?,
                "newton_max_iter" => {
                    cfg.newton_max_iter = v
                        .parse()
                        .map_err(|_| Error::Config(format!("key '{k}': bad integer '{v}'")))?
                }
                "newton_damping" => cfg.newton_damping = parse_f64(k, v)?,
                "oracle_tol" => cfg.oracle_tol = parse_f64(k, v)?,
                "concurrent" => {
                    cfg.concurrent = v
                        .parse()
                        .map_err(|_| Error::Config(format!("key '{k}': bad boolean '{v}'")))?
                }
                "seed" => {
                    cfg.seed = v
                        .parse()
                        .map_err(|_| Error::Config(format!("key '{k}': bad integer '{v}'")))?
                }
                "h_list" => {
                    cfg.h_list = v
                        .split(',')
                        .map(|s| parse_f64(k, s.trim()))
                        .collect::<Result<Vec<f64>>>()?
                }
                "conv_t_end" => cfg.conv_t_end = parse_f64(k, v)?,
                other => return Err(Error::Config(format!("unknown key '{other}'"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.h.is_finite() || self.h <= 0.0 {
            return Err(Error::Config("h must be positive".into()));
        }
        if self.t_end < 0.0 {
            return Err(Error::Config("t_end must be non-negative".into()));
        }
        if self.scenario == Scenario::CentralPotential && (self.r0 <= 0.0 || self.r1 <= 0.0) {
            return Err(Error::Config("radial seeds must be positive".into()));
        }
        if self.h_list.len() < 2 {
            return Err(Error::Config("h_list needs at least two entries".into()));
        }
        Ok(())
    }

    /// Canonical listing of the effective configuration (for CSV headers).
    pub fn describe(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "scenario={} m={} h={} t_end={}",
            self.scenario.name(),
            self.mass,
            self.h,
            self.t_end
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_reproduce_experiment_parameters() {
        let cfg = Config::default();
        assert_eq!(cfg.n_steps(), 500);
        assert!((cfg.momentum_level() - (-0.114)).abs() < 1e-12);
    }

    #[test]
    fn overrides_and_errors() {
        let cfg = Config::load(None, &["h=0.1".into(), "scenario=bar".into()]).unwrap();
        assert_eq!(cfg.scenario, Scenario::Bar);
        assert_eq!(cfg.h, 0.1);
        assert!(Config::load(None, &["h=zero".into()]).is_err());
        assert!(Config::load(None, &["nope=1".into()]).is_err());
        assert!(Config::load(None, &["h=-1".into()]).is_err());
    }
}
