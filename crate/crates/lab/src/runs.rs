//! Time-stepping drivers for the three tiers, with CSV diagnostics and
//! snapshot output.

use crate::config::{HamiltonianName, RunConfig, Tier};
use crate::error::{LabError, LabResult};
use crate::presets;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};
use wkbflow_core::extension::{self, AcousticEikonal, ExtendedState};
use wkbflow_core::hamiltonian::{isothermal_hamiltonian, Capillary, HamiltonianSpec, Isothermal, IsothermalParams};
use wkbflow_core::lbep::{self, BaseState, DEFAULT_CFL};
use wkbflow_core::snapshot::Snapshot;
use wkbflow_core::torus_field::TorusGrid;
use wkbflow_core::wave_mean_flow::{self as wmf, MeanWaveState};

/// Circulation-family sample count written to extended-tier CSV rows.
pub const FAMILY_SAMPLES: usize = 8;

/// How the step size is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepRule {
    Fixed(f64),
    Cfl(f64),
}

impl StepRule {
    pub fn from_config(cfg: &RunConfig) -> Self {
        match (cfg.time.dt, cfg.time.cfl) {
            (Some(dt), _) => StepRule::Fixed(dt),
            (None, c) => StepRule::Cfl(c.unwrap_or(DEFAULT_CFL)),
        }
    }
}

/// One tier's state update, stability limit and diagnostics.
pub trait Stepper {
    type State: Clone;

    fn time(&self, s: &Self::State) -> f64;
    fn grid<'a>(&self, s: &'a Self::State) -> &'a TorusGrid;
    /// Largest stable step at the given CFL number.
    fn stable_dt(&self, s: &Self::State, cfl: f64) -> LabResult<f64>;
    fn step(&self, s: &Self::State, dt: f64) -> LabResult<Self::State>;
    fn columns(&self, dim: usize) -> Vec<String>;
    fn diagnostics(&self, s: &Self::State) -> LabResult<Vec<f64>>;
    fn snapshot(&self, s: &Self::State) -> Snapshot;
}

fn axis_columns(name: &str, dim: usize) -> Vec<String> {
    if dim == 1 {
        vec![name.to_string()]
    } else {
        ["x", "y"].iter().take(dim).map(|a| format!("{name}_{a}")).collect()
    }
}

fn solver_err<'a>(context: &'a str, grid: &'a TorusGrid) -> impl Fn(wkbflow_core::Error) -> LabError + 'a {
    move |e| LabError::solver(context, grid, e)
}

pub struct BaseStepper {
    pub ham: Box<dyn HamiltonianSpec>,
}

impl BaseStepper {
    pub fn from_config(cfg: &RunConfig) -> LabResult<Self> {
        let base = isothermal_hamiltonian(cfg.params()?);
        let ham: Box<dyn HamiltonianSpec> =
            if cfg.physics.hamiltonian == HamiltonianName::Isothermal { Box::new(base) } else { Box::new(Capillary { base, kappa: cfg.physics.kappa }) };
        Ok(BaseStepper { ham })
    }
}

impl Stepper for BaseStepper {
    type State = BaseState;

    fn time(&self, s: &BaseState) -> f64 {
        s.t
    }

    fn grid<'a>(&self, s: &'a BaseState) -> &'a TorusGrid {
        s.grid()
    }

    fn stable_dt(&self, s: &BaseState, cfl: f64) -> LabResult<f64> {
        Ok(lbep::cfl_limit(s, self.ham.as_ref(), cfl))
    }

    fn step(&self, s: &BaseState, dt: f64) -> LabResult<BaseState> {
        lbep::step_rk4(s, self.ham.as_ref(), dt).map_err(solver_err("base step", s.grid()))
    }

    fn columns(&self, dim: usize) -> Vec<String> {
        let mut c = vec!["t".into(), "mass".into()];
        c.extend(axis_columns("momentum", dim));
        c.push("energy".into());
        c.extend(axis_columns("circulation", dim));
        c
    }

    fn diagnostics(&self, s: &BaseState) -> LabResult<Vec<f64>> {
        let mut row = vec![s.t, lbep::mass(s)];
        row.extend(lbep::momentum(s));
        row.push(lbep::energy(s, self.ham.as_ref()));
        row.extend(lbep::circulation_base(s));
        Ok(row)
    }

    fn snapshot(&self, s: &BaseState) -> Snapshot {
        Snapshot::from_base(s)
    }
}

pub struct ExtendedStepper {
    pub ham: Isothermal,
    pub closure: AcousticEikonal,
}

impl ExtendedStepper {
    pub fn new(params: IsothermalParams) -> Self {
        ExtendedStepper { ham: isothermal_hamiltonian(params), closure: AcousticEikonal { c_s: params.c_s } }
    }
}

/// θ-averaged energy ∫⨍ H(p̃, ρ̃) dθ dx of an extended state.
pub fn extended_energy(s: &ExtendedState, ham: &dyn HamiltonianSpec) -> f64 {
    let g = *s.grid();
    let nt = g.n_theta();
    let rho = s.rho.values();
    let p: Vec<Vec<f64>> = s.p.comps().iter().map(|c| c.values()).collect();
    let total: f64 = (0..g.n_space() * nt)
        .map(|q| {
            let mut pq = [0.0; 2];
            for (a, c) in p.iter().enumerate() {
                pq[a] = c[q];
            }
            ham.eval(pq, rho[q], [0.0; 2])
        })
        .sum();
    total * g.cell_volume() / nt as f64
}

impl Stepper for ExtendedStepper {
    type State = ExtendedState;

    fn time(&self, s: &ExtendedState) -> f64 {
        s.t
    }

    fn grid<'a>(&self, s: &'a ExtendedState) -> &'a TorusGrid {
        s.grid()
    }

    fn stable_dt(&self, s: &ExtendedState, cfl: f64) -> LabResult<f64> {
        extension::cfl_extended(s, &self.ham, &self.closure, cfl).map_err(solver_err("extended CFL", s.grid()))
    }

    fn step(&self, s: &ExtendedState, dt: f64) -> LabResult<ExtendedState> {
        extension::step_extended(s, &self.ham, &self.closure, dt).map_err(solver_err("extended step", s.grid()))
    }

    fn columns(&self, dim: usize) -> Vec<String> {
        let mut c = vec!["t".into(), "mass".into()];
        c.extend(axis_columns("momentum", dim));
        c.push("energy".into());
        c.push("circulation".into());
        c.extend(["wave_action_mean", "circulation_theta_min", "circulation_theta_max", "min_grad_S"].map(String::from));
        c
    }

    fn diagnostics(&self, s: &ExtendedState) -> LabResult<Vec<f64>> {
        let fam = extension::circulation_family(s, FAMILY_SAMPLES);
        let (lo, hi) = fam.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| (lo.min(c), hi.max(c)));
        let action = extension::wave_action_mean(s).map_err(solver_err("wave action", s.grid()))?.integral();
        let mut row = vec![s.t, s.mass()];
        row.extend(s.momentum());
        row.push(extended_energy(s, &self.ham));
        row.push(fam.iter().sum::<f64>() / fam.len() as f64);
        row.extend([action, lo, hi, s.phase.min_gradient_norm().0]);
        Ok(row)
    }

    fn snapshot(&self, s: &ExtendedState) -> Snapshot {
        Snapshot::from_extended(s)
    }
}

pub struct ReducedStepper {
    pub params: IsothermalParams,
}

impl Stepper for ReducedStepper {
    type State = MeanWaveState;

    fn time(&self, s: &MeanWaveState) -> f64 {
        s.t
    }

    fn grid<'a>(&self, s: &'a MeanWaveState) -> &'a TorusGrid {
        s.grid()
    }

    fn stable_dt(&self, s: &MeanWaveState, cfl: f64) -> LabResult<f64> {
        Ok(wmf::cfl_reduced(s, &self.params, cfl))
    }

    fn step(&self, s: &MeanWaveState, dt: f64) -> LabResult<MeanWaveState> {
        wmf::step_reduced(s, &self.params, dt).map_err(solver_err("reduced step", s.grid()))
    }

    fn columns(&self, dim: usize) -> Vec<String> {
        let mut c = vec!["t".into(), "mass".into()];
        c.extend(axis_columns("momentum", dim));
        c.push("wave_action_total".into());
        c.extend(axis_columns("mean_circulation", dim));
        c.push("min_grad_S".into());
        c
    }

    fn diagnostics(&self, s: &MeanWaveState) -> LabResult<Vec<f64>> {
        let mut row = vec![s.t, wmf::mass(s)];
        row.extend(wmf::momentum(s));
        row.push(wmf::total_action(s));
        row.extend(wmf::mean_circulation(s));
        row.push(s.phase.min_gradient_norm().0);
        Ok(row)
    }

    fn snapshot(&self, s: &MeanWaveState) -> Snapshot {
        Snapshot::from_mean(s)
    }
}

/// Step size for the next step towards `t_target`, never overshooting.
fn next_dt<S: Stepper>(stepper: &S, s: &S::State, rule: StepRule, t_target: f64) -> LabResult<f64> {
    let remaining = t_target - stepper.time(s);
    let dt = match rule {
        StepRule::Fixed(dt) => dt,
        StepRule::Cfl(c) => stepper.stable_dt(s, c)?,
    };
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(LabError::solver(
            "step size",
            stepper.grid(s),
            wkbflow_core::Error::StepRejected(format!("non-positive stable step {dt:e}")),
        ));
    }
    // Land exactly on the target instead of leaving a sliver step.
    let n = (remaining / dt * (1.0 - 1e-12)).ceil().max(1.0);
    Ok(remaining / n)
}

/// Advances to `t_target`; returns the new state and the number of steps.
pub fn advance<S: Stepper>(stepper: &S, mut s: S::State, rule: StepRule, t_target: f64) -> LabResult<(S::State, usize)> {
    let mut steps = 0;
    while t_target - stepper.time(&s) > 1e-12 * t_target.abs().max(1.0) {
        let dt = next_dt(stepper, &s, rule, t_target)?;
        s = stepper.step(&s, dt)?;
        steps += 1;
    }
    Ok((s, steps))
}

/// Outcome of a run, also written to `report.json`.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RunReport {
    pub tier: Tier,
    pub status: String,
    pub steps: usize,
    pub t_final: f64,
    pub csv: PathBuf,
    pub snapshots: Vec<PathBuf>,
    pub error: Option<String>,
}

/// Formats a value with 17 significant digits (exact f64 round trip).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn drive<S: Stepper>(stepper: &S, init: S::State, cfg: &RunConfig, dir: &Path) -> (RunReport, Option<LabError>) {
    let tier = cfg.tier;
    let name = format!("{tier:?}").to_lowercase();
    let csv_path = dir.join(format!("{name}.csv"));
    let mut report = RunReport {
        tier,
        status: "ok".into(),
        steps: 0,
        t_final: stepper.time(&init),
        csv: csv_path.clone(),
        snapshots: Vec::new(),
        error: None,
    };
    let result = (|| -> LabResult<()> {
        let snap_dir = dir.join("snapshots");
        fs::create_dir_all(&snap_dir)?;
        let mut csv = csv::Writer::from_path(&csv_path)?;
        csv.write_record(stepper.columns(stepper.grid(&init).dim()))?;
        let write_row = |s: &S::State, csv: &mut csv::Writer<fs::File>| -> LabResult<()> {
            csv.write_record(stepper.diagnostics(s)?.into_iter().map(fmt_f64))?;
            csv.flush()?;
            Ok(())
        };
        let save = |s: &S::State, step: usize, report: &mut RunReport| -> LabResult<()> {
            let path = snap_dir.join(format!("{name}_{step:07}.wkbf"));
            stepper.snapshot(s).save(&path).map_err(|e| LabError::Io(e.to_string()))?;
            report.snapshots.push(path);
            Ok(())
        };
        let rule = StepRule::from_config(cfg);
        let t_end = cfg.time.t_end;
        let out = &cfg.output;
        let mut s = init.clone();
        write_row(&s, &mut csv)?;
        save(&s, 0, &mut report)?;
        let mut step = 0;
        let mut last_row = 0;
        while t_end - stepper.time(&s) > 1e-12 * t_end.max(1.0) {
            let dt = next_dt(stepper, &s, rule, t_end)?;
            s = stepper.step(&s, dt)?;
            step += 1;
            report.steps = step;
            report.t_final = stepper.time(&s);
            if step % out.diag_every == 0 {
                write_row(&s, &mut csv)?;
                last_row = step;
            }
            if out.snapshot_every > 0 && step % out.snapshot_every == 0 {
                save(&s, step, &mut report)?;
            }
        }
        if last_row != step {
            write_row(&s, &mut csv)?;
        }
        if out.snapshot_every == 0 || step % out.snapshot_every != 0 {
            save(&s, step, &mut report)?;
        }
        Ok(())
    })();
    match result {
        Ok(()) => (report, None),
        Err(e) => {
            report.status = "failed".into();
            report.error = Some(e.to_string());
            (report, Some(e))
        }
    }
}

/// Runs the configured tier, writing `<tier>.csv`, snapshots and
/// `report.json` under `output.dir`. The report is written even on failure.
pub fn run(cfg: &RunConfig) -> LabResult<RunReport> {
    cfg.validate()?;
    let dir = cfg.output.dir.clone();
    fs::create_dir_all(&dir)?;
    let g = cfg.grid()?;
    let (report, err) = match cfg.tier {
        Tier::Base => drive(&BaseStepper::from_config(cfg)?, presets::initial_base(cfg, g)?, cfg, &dir),
        Tier::Extended => drive(&ExtendedStepper::new(cfg.params()?), presets::initial_extended(cfg, g)?, cfg, &dir),
        Tier::Reduced => drive(&ReducedStepper { params: cfg.params()? }, presets::initial_reduced(cfg, g)?, cfg, &dir),
    };
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)?)?;
    match err {
        Some(e) => Err(e),
        None => Ok(report),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            assert_eq!(s.split('e').next().unwrap().chars().filter(char::is_ascii_digit).count(), 17);
        }
    }

    #[test]
    fn column_names_follow_dimension() {
        let s = ReducedStepper { params: IsothermalParams::new(1.0, 1.0).unwrap() };
        assert_eq!(s.columns(1), ["t", "mass", "momentum", "wave_action_total", "mean_circulation", "min_grad_S"]);
        assert_eq!(s.columns(2)[2..4], ["momentum_x", "momentum_y"]);
    }
}
