//! Named initial conditions shared by all three tiers.
//!
//! Wave presets are specified once as slow mean fields plus a density
//! fluctuation ρ̂(x, θ); each tier receives the matching data: the extended
//! tier the slow-manifold lift, the reduced tier the wave action computed from
//! ρ̂, and the base tier the reconstruction of the lift.

use crate::config::{PresetName, RunConfig};
use crate::error::{describe, LabError, LabResult};
use std::f64::consts::PI;
use wkbflow_core::extension::{init_slow_manifold, reconstruct, ExtendedState};
use wkbflow_core::lbep::BaseState;
use wkbflow_core::torus_field::{LoopField, PhaseField, ScalarField, TorusGrid, VectorField, VectorLoopField};
use wkbflow_core::wave_mean_flow::{wave_action_from_fluctuations, MeanWaveState};

fn guard(grid: &TorusGrid) -> impl Fn(wkbflow_core::Error) -> LabError + '_ {
    move |e| LabError::Config(format!("initial data violates a validity guard: {}", describe(&e, grid)))
}

fn phase(cfg: &RunConfig, g: TorusGrid) -> LabResult<PhaseField> {
    if cfg.initial.winding.is_empty() {
        Ok(PhaseField::zero(g))
    } else {
        PhaseField::linear(g, &cfg.initial.winding).map_err(guard(&g))
    }
}

/// Background ρ̄ = ρ_ref(1 + b sin(2πmx/L)), p̄ = u₀ρ̄ along the first axis.
fn background(cfg: &RunConfig, g: TorusGrid) -> (ScalarField, VectorField) {
    let ini = &cfg.initial;
    let (rho0, l0, m) = (cfg.physics.rho_ref, g.length(0), ini.mode as f64);
    let rho = ScalarField::from_fn(g, |x| rho0 * (1.0 + ini.rho_offset * (2.0 * PI * m * x[0] / l0).sin()));
    let mut comps = vec![rho.scale(ini.u0)];
    comps.extend((1..g.dim()).map(|_| ScalarField::zeros(g)));
    (rho, VectorField::new(comps).expect("same grid"))
}

/// Slow mean fields of the preset (no wave action) and its fluctuation ρ̂.
pub fn mean_and_fluctuation(cfg: &RunConfig, g: TorusGrid) -> LabResult<(MeanWaveState, LoopField)> {
    let ini = &cfg.initial;
    let eps = cfg.eps.unwrap_or(1.0);
    let (rho, p) = match ini.preset {
        PresetName::Rest => (ScalarField::constant(g, cfg.physics.rho_ref), VectorField::zeros(g)),
        _ => background(cfg, g),
    };
    let (l0, a) = (g.length(0), ini.amplitude * cfg.physics.rho_ref);
    let rho_hat = match ini.preset {
        PresetName::Rest | PresetName::Acoustic => LoopField::zeros(g),
        PresetName::WaveTrain => LoopField::from_fn(g, |x, t| a * (1.0 + 0.5 * (2.0 * PI * x[0] / l0).cos()) * t.cos()),
        PresetName::WavePacket => {
            let w2 = 2.0 * ini.width * ini.width;
            LoopField::from_fn(g, |x, t| a * (-(x[0] - 0.5 * l0).powi(2) / w2).exp() * t.cos())
        }
    };
    let phase = phase(cfg, g)?;
    let mean = MeanWaveState { rho, p, chi: ScalarField::zeros(g), action: ScalarField::zeros(g), phase, eps, t: 0.0 };
    Ok((mean, rho_hat))
}

/// Extended-tier initial state on `g`.
pub fn initial_extended(cfg: &RunConfig, g: TorusGrid) -> LabResult<ExtendedState> {
    let eps = cfg.eps.ok_or_else(|| LabError::Config("eps is required".into()))?;
    if cfg.initial.preset == PresetName::Acoustic {
        let base = initial_base(cfg, g)?;
        return ExtendedState::from_base(&base, phase(cfg, g)?, eps).map_err(guard(&g));
    }
    let (mean, rho_hat) = mean_and_fluctuation(cfg, g)?;
    if rho_hat.max_fluctuation() == 0.0 {
        let base = BaseState::new(mean.rho, mean.p, VectorField::zeros(g), mean.chi, 0.0).map_err(guard(&g))?;
        return ExtendedState::from_base(&base, mean.phase, eps).map_err(guard(&g));
    }
    init_slow_manifold(&mean, &rho_hat, &cfg.params()?, eps).map_err(guard(&g))
}

/// Reduced-tier initial state on `g`, with I computed from ρ̂.
pub fn initial_reduced(cfg: &RunConfig, g: TorusGrid) -> LabResult<MeanWaveState> {
    let (mut mean, rho_hat) = mean_and_fluctuation(cfg, g)?;
    mean.action = wave_action_from_fluctuations(&mean.rho, &rho_hat, &mean.phase, &cfg.params()?).map_err(guard(&g))?;
    MeanWaveState::new(mean.rho, mean.p, mean.chi, mean.action, mean.phase, mean.eps, 0.0).map_err(guard(&g))
}

/// Base-tier initial state on `g`; wave presets are lifted and reconstructed
/// on `g` itself, which must resolve the wavenumber |∇S|/ε.
pub fn initial_base(cfg: &RunConfig, g: TorusGrid) -> LabResult<BaseState> {
    let ini = &cfg.initial;
    match ini.preset {
        PresetName::Rest => BaseState::at_rest(g, cfg.physics.rho_ref).map_err(guard(&g)),
        PresetName::Acoustic => {
            let (rho0, c, m, a, u0) = (cfg.physics.rho_ref, cfg.physics.c_s, ini.mode as f64, ini.amplitude, ini.u0);
            let k = 2.0 * PI * m / g.length(0);
            let rho = ScalarField::from_fn(g, |x| rho0 * (1.0 + a * (k * x[0]).cos()));
            let mut comps = vec![ScalarField::from_fn(g, |x| rho0 * (u0 + (u0 + c) * a * (k * x[0]).cos()))];
            comps.extend((1..g.dim()).map(|_| ScalarField::zeros(g)));
            let p = VectorField::new(comps).expect("same grid");
            BaseState::new(rho, p, VectorField::zeros(g), ScalarField::zeros(g), 0.0).map_err(guard(&g))
        }
        PresetName::WaveTrain | PresetName::WavePacket => Ok(reconstruct(&initial_extended(cfg, g)?)),
    }
}

/// Spectrally resamples an extended state to `target` and evaluates it on
/// θ = S/ε there; `target` must resolve the fastest base-frame mode.
pub fn base_from_extended(ext: &ExtendedState, target: &TorusGrid) -> LabResult<BaseState> {
    let err = |e| LabError::solver("resampling extended state", ext.grid(), e);
    let loop_r = |f: &LoopField| f.resample(target).map_err(err);
    let vec_r = |f: &VectorLoopField| -> LabResult<VectorLoopField> {
        VectorLoopField::new(f.comps().iter().map(loop_r).collect::<LabResult<Vec<_>>>()?).map_err(err)
    };
    let fine = ExtendedState::new(
        loop_r(&ext.rho)?,
        vec_r(&ext.p)?,
        vec_r(&ext.h)?,
        loop_r(&ext.chi)?,
        ext.phase.resample(target).map_err(err)?,
        ext.eps,
        ext.t,
    )
    .map_err(err)?;
    Ok(reconstruct(&fine))
}

/// Grid refined along every axis so that base-frame modes up to
/// `harmonics`·max|∂ₐS|/ε stay below the dealiasing cutoff.
pub fn resolving_grid(ext: &ExtendedState, harmonics: f64) -> LabResult<TorusGrid> {
    let g = *ext.grid();
    let gs = ext.phase.gradient();
    let n: Vec<usize> = (0..g.dim())
        .map(|a| {
            let modes = g.n_x()[a] as f64 / 2.0 + harmonics * gs.comp(a).max_abs() / ext.eps * g.length(a) / (2.0 * PI);
            ((3.0 * modes).ceil() as usize).next_power_of_two().max(g.n_x()[a])
        })
        .collect();
    TorusGrid::new(g.lengths(), &n, g.n_theta()).map_err(|e| LabError::Config(e.to_string()))
}
