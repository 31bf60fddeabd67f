//! The three batch commands: `run`, `check`, `convergence`.
//!
//! Each writes one CSV file per invocation into the output directory and
//! reports a process outcome: 0 success, 1 check failure, 2 configuration
//! error, 3 solver failure.

use crate::config::{Config, Scenario};
use crate::csvout::{fmt, Csv};
use crate::pipeline;
use routhe_core::{Error, Result};
use std::path::Path;

/// Process outcome; maps onto the exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    CheckFailure,
    ConfigError,
    SolverFailure,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::CheckFailure => 1,
            Outcome::ConfigError => 2,
            Outcome::SolverFailure => 3,
        }
    }
}

pub fn classify(err: &Error) -> Outcome {
    match err {
        Error::Config(_) | Error::DimensionMismatch { .. } => Outcome::ConfigError,
        _ => Outcome::SolverFailure,
    }
}

fn write_file(out_dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", out_dir.display())))?;
    let path = out_dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

/// `run`: emits the per-step trajectory table of the configured scenario.
pub fn cmd_run(cfg: &Config, out_dir: &Path) -> Result<Outcome> {
    let (name, body, failure) = match cfg.scenario {
        Scenario::CentralPotential => {
            let run = pipeline::run_central(cfg)?;
            let mut csv = Csv::new();
            csv.comment(&format!("scenario {}", cfg.scenario.name()));
            csv.comment(&cfg.describe());
            csv.comment(&format!(
                "mu {} mu-from-ics {} defect {}",
                fmt(run.mu),
                fmt(run.mu_from_ics),
                fmt((run.mu - run.mu_from_ics).abs())
            ));
            csv.header(&[
                "k",
                "t",
                "r_mp",
                "r_rk4",
                "r_oracle",
                "err_mp",
                "err_rk4",
                "energy_mp",
                "energy_rk4",
                "energy_oracle",
            ]);
            for k in 0..run.times.len() {
                let mut row = vec![k.to_string()];
                for v in [
                    run.times[k],
                    run.r_mp[k],
                    run.r_rk4[k],
                    run.r_oracle[k],
                    run.err_mp[k],
                    run.err_rk4[k],
                    run.e_mp[k],
                    run.e_rk4[k],
                    run.e_oracle[k],
                ] {
                    row.push(fmt(v));
                }
                csv.row(&row);
            }
            ("run-central-potential.csv", csv, run.failure)
        }
        Scenario::Bar => {
            let run = pipeline::run_bar(cfg)?;
            let mut csv = Csv::new();
            csv.comment(&format!("scenario {}", cfg.scenario.name()));
            csv.comment(&cfg.describe());
            csv.header(&["k", "t", "phi", "y", "phi_closed", "y_closed", "defect"]);
            for k in 0..run.times.len() {
                let mut row = vec![k.to_string()];
                for v in [
                    run.times[k],
                    run.tau[k][0],
                    run.tau[k][1],
                    run.closed[k][0],
                    run.closed[k][1],
                    run.defect[k],
                ] {
                    row.push(fmt(v));
                }
                csv.row(&row);
            }
            ("run-bar.csv", csv, run.failure)
        }
        Scenario::SyntheticRouth => {
            let run = pipeline::run_synthetic(cfg)?;
            let mut csv = Csv::new();
            csv.comment(&format!("scenario {}", cfg.scenario.name()));
            csv.comment(&cfg.describe());
            csv.header(&["k", "t", "x", "y", "form_defect"]);
            for k in 0..run.times.len() {
                let mut row = vec![k.to_string()];
                for v in [run.times[k], run.xy[k][0], run.xy[k][1], run.step_defect[k]] {
                    row.push(fmt(v));
                }
                csv.row(&row);
            }
            ("run-synthetic-routh.csv", csv, run.failure)
        }
    };
    let mut body = body;
    let outcome = match &failure {
        Some((k, msg)) => {
            body.comment(&format!("failure step={k} error={msg}"));
            Outcome::SolverFailure
        }
        None => Outcome::Success,
    };
    write_file(out_dir, name, &body.finish())?;
    Ok(outcome)
}

/// `check`: runs the invariant suite, one machine-readable line per check.
pub fn cmd_check(cfg: &Config, out_dir: &Path) -> Result<Outcome> {
    let lines = pipeline::run_checks(cfg)?;
    let mut csv = Csv::new();
    csv.comment(&format!("scenario {}", cfg.scenario.name()));
    csv.header(&["name", "value", "threshold", "comparison", "verdict"]);
    let mut all_pass = true;
    for line in &lines {
        println!("{}", line.render());
        csv.row(&[
            line.name.clone(),
            fmt(line.value),
            fmt(line.threshold),
            match line.cmp {
                pipeline::Cmp::AtMost => "<=".into(),
                pipeline::Cmp::AtLeast => ">=".into(),
            },
            if line.pass { "pass" } else { "fail" }.into(),
        ]);
        all_pass &= line.pass;
    }
    write_file(
        out_dir,
        &format!("check-{}.csv", cfg.scenario.name()),
        &csv.finish(),
    )?;
    Ok(if all_pass {
        Outcome::Success
    } else {
        Outcome::CheckFailure
    })
}

/// `convergence`: global error against the adaptive oracle per step size,
/// with fitted orders.
pub fn cmd_convergence(cfg: &Config, out_dir: &Path) -> Result<Outcome> {
    let study = pipeline::run_convergence(cfg)?;
    let mut csv = Csv::new();
    csv.comment(&format!("scenario {}", cfg.scenario.name()));
    csv.comment(&format!("t_end {}", fmt(cfg.conv_t_end)));
    csv.comment(&format!(
        "fitted-order mp {} rk4 {}",
        fmt(study.order_mp),
        fmt(study.order_rk4)
    ));
    for (h, msg) in &study.skipped {
        csv.comment(&format!("skipped h={} error={msg}", fmt(*h)));
    }
    csv.header(&["h", "err_mp", "err_rk4", "err_mp_end", "err_rk4_end"]);
    for row in &study.rows {
        csv.number_row(&[
            row.h,
            row.err_mp,
            row.err_rk4,
            row.err_mp_end,
            row.err_rk4_end,
        ]);
    }
    write_file(out_dir, "convergence.csv", &csv.finish())?;
    println!(
        "fitted orders: mp {:.3} rk4 {:.3}",
        study.order_mp, study.order_rk4
    );
    Ok(Outcome::Success)
}
