//! ε-refinement study of the slow-manifold lift for a configured preset.

use crate::compare::fit_slope;
use crate::config::RunConfig;
use crate::error::{LabError, LabResult};
use crate::presets;
use crate::runs::fmt_f64;
use serde::Serialize;
use std::path::Path;
use wkbflow_core::extension::{wave_action_mean, AcousticEikonal};
use wkbflow_core::hamiltonian::isothermal_hamiltonian;
use wkbflow_core::slow_manifold::tendencies;
use wkbflow_core::wave_mean_flow::wave_action_from_fluctuations;

/// Finite-difference step for the tendencies, in units of time.
pub const FD_STEP: f64 = 1e-4;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub invariance_residual: f64,
    pub fast_tendency: f64,
    pub lambda_tendency: f64,
    /// ∫⨍Ĩ dθ dx / (−ε³∫I dx).
    pub glm_ratio: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Fitted order of the invariance residual in ε (1 expected).
    pub invariance_slope: f64,
    /// Fitted order of |glm_ratio − 1| in ε (at least 1 expected).
    pub glm_slope: f64,
}

pub fn study_at(cfg: &RunConfig, eps: f64) -> LabResult<ConvergenceRow> {
    let cfg = cfg.with_eps(eps);
    let g = cfg.grid()?;
    let params = cfg.params()?;
    let ext = presets::initial_extended(&cfg, g)?;
    let (mean, rho_hat) = presets::mean_and_fluctuation(&cfg, g)?;
    if rho_hat.max_fluctuation() == 0.0 {
        return Err(LabError::Config("convergence needs a wave preset".into()));
    }
    let err = |e| LabError::solver("convergence study", &g, e);
    let t = tendencies(&ext, &isothermal_hamiltonian(params), &AcousticEikonal { c_s: params.c_s }, &params, FD_STEP).map_err(err)?;
    let i = wave_action_from_fluctuations(&mean.rho, &rho_hat, &mean.phase, &params).map_err(err)?;
    let tilde = wave_action_mean(&ext).map_err(err)?;
    Ok(ConvergenceRow {
        eps,
        invariance_residual: t.invariance,
        fast_tendency: t.fast,
        lambda_tendency: t.lambda,
        glm_ratio: tilde.integral() / (-eps.powi(3) * i.integral()),
    })
}

/// Runs [`study_at`] for every ε in parallel; rows follow `eps_list` order.
pub fn study(cfg: &RunConfig, eps_list: &[f64]) -> LabResult<ConvergenceReport> {
    use rayon::prelude::*;
    if eps_list.len() < 2 {
        return Err(LabError::Config("convergence needs at least two eps values".into()));
    }
    let rows: Vec<ConvergenceRow> = eps_list.par_iter().map(|&e| study_at(cfg, e)).collect::<LabResult<_>>()?;
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let inv: Vec<f64> = rows.iter().map(|r| r.invariance_residual).collect();
    let glm: Vec<f64> = rows.iter().map(|r| (r.glm_ratio - 1.0).abs()).collect();
    Ok(ConvergenceReport { invariance_slope: fit_slope(&eps, &inv), glm_slope: fit_slope(&eps, &glm), rows })
}

/// Writes `convergence.csv` and `convergence.json`.
pub fn write_report(report: &ConvergenceReport, dir: &Path) -> LabResult<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("convergence.csv"))?;
    w.write_record(["eps", "invariance_residual", "fast_tendency", "lambda_tendency", "glm_ratio"])?;
    for r in &report.rows {
        w.write_record([r.eps, r.invariance_residual, r.fast_tendency, r.lambda_tendency, r.glm_ratio].map(fmt_f64))?;
    }
    w.flush()?;
    std::fs::write(dir.join("convergence.json"), serde_json::to_string_pretty(report)?)?;
    Ok(())
}
