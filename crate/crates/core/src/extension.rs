//! Extended tier: the fluid equations lifted to (x, θ) with a phase S.
//!
//! Every base-tier derivative is replaced by its shifted counterpart,
//! ∂ₜ → ∂ₜ + (∂ₜS/ε)∂θ and ∂ᵢ → Dᵢ = ∂ᵢ + (∂ᵢS/ε)∂θ, while ∂ₜS itself comes
//! from a pluggable [`PhaseClosure`]. Evaluating any solution at
//! θ = S(x)/ε gives a solution of the base tier.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hamiltonian::{HamiltonianSpec, IsothermalParams};
use crate::lbep::{check_density, BaseState};
use crate::rk4::{self, Evolvable, Tangent};
use crate::slow_manifold::{slaving_leading, SlowFields};
use crate::torus_field::{LoopField, PhaseField, ScalarField, TorusGrid, VectorField, VectorLoopField};
use crate::wave_mean_flow::MeanWaveState;

/// |∇S| floor relative to the fundamental wavenumber 2π/L.
pub const GRAD_S_FLOOR_FACTOR: f64 = 1e-6;

/// Smallest admissible |∇S| on `grid`.
pub fn grad_s_floor(grid: &TorusGrid) -> f64 {
    let longest = grid.lengths().iter().cloned().fold(0.0, f64::max);
    GRAD_S_FLOOR_FACTOR * 2.0 * PI / longest
}

pub(crate) fn check_grad_s(phase: &PhaseField) -> Result<()> {
    let (min, index) = phase.min_gradient_norm();
    if !(min >= grad_s_floor(phase.grid())) {
        return Err(Error::VanishingPhaseGradient { min, index });
    }
    Ok(())
}

/// State of the extended tier. `h` holds the displacement h̃ − x.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedState {
    pub rho: LoopField,
    pub p: VectorLoopField,
    pub h: VectorLoopField,
    pub chi: LoopField,
    pub phase: PhaseField,
    pub eps: f64,
    pub t: f64,
}

/// Time derivatives of an [`ExtendedState`]; `phase` is ∂ₜS.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedRates {
    pub rho: LoopField,
    pub p: VectorLoopField,
    pub h: VectorLoopField,
    pub chi: LoopField,
    pub phase: ScalarField,
}

/// Rule supplying ∂ₜS.
pub trait PhaseClosure: Send + Sync {
    fn phase_rate(&self, state: &ExtendedState, ham: &dyn HamiltonianSpec) -> Result<ScalarField>;
    /// Whether the rule divides by |∇S|.
    fn uses_phase_gradient(&self) -> bool {
        true
    }
}

/// Positive acoustic branch: ∂ₜS = −(p̄/ρ̄)·∇S − c_s|∇S| with θ-mean fields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AcousticEikonal {
    pub c_s: f64,
}

impl PhaseClosure for AcousticEikonal {
    fn phase_rate(&self, state: &ExtendedState, _: &dyn HamiltonianSpec) -> Result<ScalarField> {
        let rho = state.rho.theta_average();
        let p = state.p.theta_average();
        Ok(eikonal_rate(&rho, &p, &state.phase, self.c_s))
    }
}

/// −(p/ρ)·∇S − c|∇S|, truncated by the 2/3 rule.
pub(crate) fn eikonal_rate(rho: &ScalarField, p: &VectorField, phase: &PhaseField, c: f64) -> ScalarField {
    let g = *rho.grid();
    let gs = phase.gradient();
    let vals = (0..g.n_space())
        .map(|i| {
            let (k, pi) = (gs.at(i), p.at(i));
            -(pi[0] * k[0] + pi[1] * k[1]) / rho.values()[i] - c * k[0].hypot(k[1])
        })
        .collect();
    ScalarField::from_vec_unchecked(g, vals).dealiased()
}

/// ∂ₜS = 0.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FrozenPhase;

impl PhaseClosure for FrozenPhase {
    fn phase_rate(&self, state: &ExtendedState, _: &dyn HamiltonianSpec) -> Result<ScalarField> {
        Ok(ScalarField::zeros(*state.grid()))
    }

    fn uses_phase_gradient(&self) -> bool {
        false
    }
}

impl ExtendedState {
    pub fn new(
        rho: LoopField,
        p: VectorLoopField,
        h: VectorLoopField,
        chi: LoopField,
        phase: PhaseField,
        eps: f64,
        t: f64,
    ) -> Result<Self> {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
        }
        let g = *rho.grid();
        for other in [p.grid(), h.grid(), chi.grid(), phase.grid()] {
            g.same_as(other)?;
        }
        let s = ExtendedState { rho, p, h, chi, phase, eps, t };
        s.check_invariants()?;
        Ok(s)
    }

    /// θ-independent lift of a base state.
    pub fn from_base(base: &BaseState, phase: PhaseField, eps: f64) -> Result<Self> {
        let lift = |v: &VectorField| VectorLoopField::from_components(v.comps().iter().map(LoopField::from_scalar).collect());
        Self::new(
            LoopField::from_scalar(&base.rho),
            lift(&base.p),
            lift(&base.h),
            LoopField::from_scalar(&base.chi),
            phase,
            eps,
            base.t,
        )
    }

    pub fn grid(&self) -> &TorusGrid {
        self.rho.grid()
    }

    /// Positive density and finite values at every (x, θ) node.
    pub fn check_invariants(&self) -> Result<()> {
        let nt = self.grid().n_theta();
        let rho = self.rho.values();
        check_density(&rho).map_err(|e| match e {
            Error::NonPositiveDensity { min, index } => Error::NonPositiveDensity { min, index: index / nt },
            other => other,
        })?;
        let named = [("p", self.p.comps()), ("h", self.h.comps())];
        for (name, comps) in named {
            for c in comps {
                if let Some(i) = c.values().iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { field: name.into(), index: i / nt });
                }
            }
        }
        if let Some(i) = self.chi.values().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { field: "chi".into(), index: i / nt });
        }
        if let Some(i) = self.phase.periodic().values().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { field: "S".into(), index: i });
        }
        Ok(())
    }

    fn has_fluctuations(&self) -> bool {
        self.rho.max_fluctuation() > 0.0 || self.p.max_fluctuation() > 0.0
    }

    /// ∫∮ ρ̃ dθ dx.
    pub fn mass(&self) -> f64 {
        self.rho.theta_average().integral()
    }

    /// ∫∮ p̃ dθ dx.
    pub fn momentum(&self) -> Vec<f64> {
        self.p.theta_average().integral()
    }
}

impl Tangent for ExtendedRates {
    fn combine(k: [&Self; 4], w: [f64; 4]) -> Self {
        let vec = |f: [&VectorLoopField; 4]| {
            VectorLoopField::from_components(
                (0..f[0].dim())
                    .map(|a| LoopField::combine4([f[0].comp(a), f[1].comp(a), f[2].comp(a), f[3].comp(a)], w))
                    .collect(),
            )
        };
        let g = *k[0].phase.grid();
        let phase = ScalarField::from_vec_unchecked(
            g,
            rk4::combine_slices([k[0].phase.values(), k[1].phase.values(), k[2].phase.values(), k[3].phase.values()], w),
        );
        ExtendedRates {
            rho: LoopField::combine4([&k[0].rho, &k[1].rho, &k[2].rho, &k[3].rho], w),
            p: vec([&k[0].p, &k[1].p, &k[2].p, &k[3].p]),
            h: vec([&k[0].h, &k[1].h, &k[2].h, &k[3].h]),
            chi: LoopField::combine4([&k[0].chi, &k[1].chi, &k[2].chi, &k[3].chi], w),
            phase,
        }
    }
}

impl Evolvable for ExtendedState {
    type Rates = ExtendedRates;
    fn displaced(&self, dt: f64, k: &ExtendedRates) -> Self {
        let vec = |a: &VectorLoopField, b: &VectorLoopField| a.zip(b, |x, y| x.axpy(dt, y));
        ExtendedState {
            rho: self.rho.axpy(dt, &k.rho),
            p: vec(&self.p, &k.p),
            h: vec(&self.h, &k.h),
            chi: self.chi.axpy(dt, &k.chi),
            phase: self.phase.with_periodic(self.phase.periodic().zip_map(&k.phase, |s, r| s + dt * r)),
            eps: self.eps,
            t: self.t + dt,
        }
    }
}

/// Collocation values of Dₐf = ∂ₐf + (∂ₐS/ε)∂θf, laid out `[space][θ]`.
fn shifted_deriv(f: &LoopField, axis: usize, gs: &[[f64; 2]], inv_eps: f64) -> Vec<f64> {
    let nt = f.grid().n_theta();
    let mut out = f.deriv(axis).expect("axis within dim").values();
    if gs.iter().any(|k| k[axis] != 0.0) {
        let dth = f.d_theta().values();
        for (i, o) in out.iter_mut().enumerate() {
            *o += gs[i / nt][axis] * inv_eps * dth[i];
        }
    }
    out
}

/// Truncate collocation values by the 2/3 rule in x and θ.
fn dealias(g: TorusGrid, vals: &[f64]) -> LoopField {
    LoopField::from_values_dealiased(g, vals).dealiased()
}

/// Collocation values of −(σ/ε)∂θf added into `acc`.
fn add_phase_advection(acc: &mut [f64], f: &LoopField, sigma: &[f64], inv_eps: f64) {
    if sigma.iter().all(|&s| s == 0.0) {
        return;
    }
    let nt = f.grid().n_theta();
    let dth = f.d_theta().values();
    for (i, a) in acc.iter_mut().enumerate() {
        *a -= sigma[i / nt] * inv_eps * dth[i];
    }
}

/// Time derivatives of every extended field, including ∂ₜS from `closure`.
pub fn rhs_extended(state: &ExtendedState, ham: &dyn HamiltonianSpec, closure: &dyn PhaseClosure) -> Result<ExtendedRates> {
    let g = *state.grid();
    let d = g.dim();
    let nt = g.n_theta();
    let n = g.n_space() * nt;
    let inv_eps = 1.0 / state.eps;

    let rho = state.rho.values();
    check_density(&rho).map_err(|e| match e {
        Error::NonPositiveDensity { min, index } => Error::NonPositiveDensity { min, index: index / nt },
        other => other,
    })?;
    if closure.uses_phase_gradient() && state.has_fluctuations() {
        check_grad_s(&state.phase)?;
    }
    let gs_field = state.phase.gradient();
    let gs: Vec<[f64; 2]> = (0..g.n_space()).map(|i| gs_field.at(i)).collect();
    let sigma_field = closure.phase_rate(state, ham)?;
    if let Some(i) = sigma_field.values().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { field: "dS/dt".into(), index: i });
    }
    let sigma = sigma_field.values();

    let p: Vec<Vec<f64>> = state.p.comps().iter().map(|c| c.values()).collect();
    let p_at = |i: usize| {
        let mut v = [0.0; 2];
        for a in 0..d {
            v[a] = p[a][i];
        }
        v
    };
    let grad_rho: Vec<Vec<f64>> = (0..d).map(|a| shifted_deriv(&state.rho, a, &gs, inv_eps)).collect();
    let gr_at = |i: usize| {
        let mut v = [0.0; 2];
        for a in 0..d {
            v[a] = grad_rho[a][i];
        }
        v
    };

    let mut v = vec![[0.0; 2]; n];
    let mut h_rho = vec![0.0; n];
    let mut gr = vec![[0.0; 2]; n];
    let mut energy = vec![0.0; n];
    for i in 0..n {
        let (pi, gi) = (p_at(i), gr_at(i));
        v[i] = ham.d_p(pi, rho[i], gi);
        h_rho[i] = ham.d_rho(pi, rho[i], gi);
        gr[i] = ham.d_grad_rho(pi, rho[i], gi);
        energy[i] = ham.eval(pi, rho[i], gi);
    }
    let uses_grad = ham.depends_on_grad_rho();
    let mut div_g = vec![0.0; n];
    if uses_grad {
        for a in 0..d {
            let ga = dealias(g, &gr.iter().map(|x| x[a]).collect::<Vec<_>>());
            div_g.iter_mut().zip(shifted_deriv(&ga, a, &gs, inv_eps)).for_each(|(s, x)| *s += x);
        }
    }

    // continuity
    let mut drho = vec![0.0; n];
    add_phase_advection(&mut drho, &state.rho, sigma, inv_eps);
    for a in 0..d {
        let flux = dealias(g, &(0..n).map(|i| rho[i] * v[i][a]).collect::<Vec<_>>());
        drho.iter_mut().zip(shifted_deriv(&flux, a, &gs, inv_eps)).for_each(|(s, x)| *s -= x);
    }

    // momentum
    let pressure: Vec<f64> = (0..n)
        .map(|i| {
            let pi = p_at(i);
            rho[i] * h_rho[i] - rho[i] * div_g[i] + pi[0] * v[i][0] + pi[1] * v[i][1] - energy[i]
        })
        .collect();
    let mut dp = Vec::with_capacity(d);
    for j in 0..d {
        let mut acc = vec![0.0; n];
        add_phase_advection(&mut acc, state.p.comp(j), sigma, inv_eps);
        for ia in 0..d {
            let flux: Vec<f64> = (0..n)
                .map(|i| {
                    let mut f = v[i][ia] * p[j][i] + if ia == j { pressure[i] } else { 0.0 };
                    if uses_grad {
                        f += gr[i][ia] * grad_rho[j][i];
                    }
                    f
                })
                .collect();
            let flux = dealias(g, &flux);
            acc.iter_mut().zip(shifted_deriv(&flux, ia, &gs, inv_eps)).for_each(|(s, x)| *s -= x);
        }
        dp.push(dealias(g, &acc));
    }

    // labels (displacement form)
    let mut dh = Vec::with_capacity(d);
    for a in 0..d {
        let da = state.h.comp(a);
        let grads: Vec<Vec<f64>> = (0..d).map(|i| shifted_deriv(da, i, &gs, inv_eps)).collect();
        let mut acc: Vec<f64> = (0..n)
            .map(|i| -v[i][a] - (0..d).map(|ia| v[i][ia] * grads[ia][i]).sum::<f64>())
            .collect();
        add_phase_advection(&mut acc, da, sigma, inv_eps);
        dh.push(dealias(g, &acc));
    }

    // multiplier
    let grad_chi: Vec<Vec<f64>> = (0..d).map(|i| shifted_deriv(&state.chi, i, &gs, inv_eps)).collect();
    let mut dchi: Vec<f64> = (0..n)
        .map(|i| -(0..d).map(|ia| v[i][ia] * grad_chi[ia][i]).sum::<f64>() + h_rho[i] - div_g[i])
        .collect();
    add_phase_advection(&mut dchi, &state.chi, sigma, inv_eps);

    Ok(ExtendedRates {
        rho: dealias(g, &drho),
        p: VectorLoopField::from_components(dp),
        h: VectorLoopField::from_components(dh),
        chi: dealias(g, &dchi),
        phase: sigma_field,
    })
}

/// One RK4 step of all fields (the winding of S is untouched).
pub fn step_extended(
    state: &ExtendedState,
    ham: &dyn HamiltonianSpec,
    closure: &dyn PhaseClosure,
    dt: f64,
) -> Result<ExtendedState> {
    let next = rk4::rk4(state, dt, |s| rhs_extended(s, ham, closure))?;
    next.check_invariants()
        .map_err(|e| Error::StepRejected(format!("t = {}: {e}", next.t)))?;
    Ok(next)
}

/// Stable step for explicit RK4 given x-transport and stiff θ-transport.
///
/// The θ-speed bound is (max|Ω| + c_wave·max|∇S|)/ε with Ω = ∂ₜS + v·∇S;
/// the extra c_wave term covers the counter-propagating acoustic branch.
pub fn cfl_extended(state: &ExtendedState, ham: &dyn HamiltonianSpec, closure: &dyn PhaseClosure, cfl: f64) -> Result<f64> {
    let g = *state.grid();
    let nt = g.n_theta();
    let rho = state.rho.values();
    let p: Vec<Vec<f64>> = state.p.comps().iter().map(|c| c.values()).collect();
    let gs = state.phase.gradient();
    let sigma = closure.phase_rate(state, ham)?;
    let (mut vmax, mut omega_max, mut rho_max) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..g.n_space() * nt {
        let mut pi = [0.0; 2];
        for (a, c) in p.iter().enumerate() {
            pi[a] = c[i];
        }
        let v = ham.d_p(pi, rho[i], [0.0; 2]);
        let k = gs.at(i / nt);
        vmax = vmax.max(v[0].hypot(v[1]));
        omega_max = omega_max.max((sigma.values()[i / nt] + v[0] * k[0] + v[1] * k[1]).abs());
        rho_max = rho_max.max(rho[i]);
    }
    let kmax_s = gs.norm().max_abs();
    let k_eff = g.max_wavenumber() + kmax_s * (nt / 2) as f64 / state.eps;
    let c_wave = ham.wave_speed(rho_max, k_eff);
    let rate = (vmax + c_wave) / g.min_spacing() + (omega_max + c_wave * kmax_s) / (state.eps * g.theta_spacing());
    Ok(cfl / rate)
}

/// Base-frame fields φ(x) = φ̃(x, S(x)/ε).
pub fn reconstruct(state: &ExtendedState) -> BaseState {
    let at = |f: &LoopField| f.phase_shift(&state.phase, 1.0 / state.eps).eval_theta(0.0);
    let vec = |f: &VectorLoopField| VectorField::from_components(f.comps().iter().map(at).collect());
    BaseState {
        rho: at(&state.rho),
        p: vec(&state.p),
        h: vec(&state.h),
        chi: at(&state.chi),
        t: state.t,
    }
}

/// Collocation values of each component of a vector loop field.
fn comps_values(f: &VectorLoopField) -> Vec<Vec<f64>> {
    f.comps().iter().map(|c| c.values()).collect()
}

/// Ĩ = ρ̃∂θχ̃ + (p̃ + ρ̃∇^{S/ε}χ̃)·ζ̃ with ζ̃ solving (∇^{S/ε}h̃)ᵀζ̃ = −∂θh̃.
pub fn specific_wave_action(state: &ExtendedState) -> Result<LoopField> {
    let g = *state.grid();
    let d = g.dim();
    let nt = g.n_theta();
    let n = g.n_space() * nt;
    let inv_eps = 1.0 / state.eps;
    let gsf = state.phase.gradient();
    let gs: Vec<[f64; 2]> = (0..g.n_space()).map(|i| gsf.at(i)).collect();

    let rho = state.rho.values();
    let p = comps_values(&state.p);
    let dth_chi = state.chi.d_theta().values();
    let grad_chi: Vec<Vec<f64>> = (0..d).map(|i| shifted_deriv(&state.chi, i, &gs, inv_eps)).collect();
    let dth_h = comps_values(&state.h.map(|c| c.d_theta()));
    // m[a][i] = D_i d_a
    let m: Vec<Vec<Vec<f64>>> = (0..d)
        .map(|a| (0..d).map(|i| shifted_deriv(state.h.comp(a), i, &gs, inv_eps)).collect())
        .collect();

    let mut out = vec![0.0; n];
    for q in 0..n {
        let zeta = if d == 1 {
            let det = 1.0 + m[0][0][q];
            if !(det.abs() > 1e-12) {
                return Err(Error::SingularLabelMap { det, index: q / nt });
            }
            [-dth_h[0][q] / det, 0.0]
        } else {
            // M_{ia} = δ_ia + D_i d_a; solve Σ_i M_{ia} ζ_i = −∂θ d_a.
            let mm = |i: usize, a: usize| (if i == a { 1.0 } else { 0.0 }) + m[a][i][q];
            let (m00, m01, m10, m11) = (mm(0, 0), mm(0, 1), mm(1, 0), mm(1, 1));
            let det = m00 * m11 - m01 * m10;
            if !(det.abs() > 1e-12) {
                return Err(Error::SingularLabelMap { det, index: q / nt });
            }
            // Mᵀ = [[m00, m10], [m01, m11]]
            let (r0, r1) = (-dth_h[0][q], -dth_h[1][q]);
            [(m11 * r0 - m10 * r1) / det, (m00 * r1 - m01 * r0) / det]
        };
        let mut acc = rho[q] * dth_chi[q];
        for a in 0..d {
            acc += (p[a][q] + rho[q] * grad_chi[a][q]) * zeta[a];
        }
        out[q] = acc;
    }
    LoopField::from_values(g, &out)
}

/// θ-mean of Ĩ.
pub fn wave_action_mean(state: &ExtendedState) -> Result<ScalarField> {
    Ok(specific_wave_action(state)?.theta_average())
}

/// θ-mean flux ∮(vĨ − ∂θρ̃ ∂H/∂∇ρ) dθ of the wave-action conservation law.
pub fn wave_action_flux(state: &ExtendedState, ham: &dyn HamiltonianSpec) -> Result<VectorField> {
    let g = *state.grid();
    let d = g.dim();
    let nt = g.n_theta();
    let inv_eps = 1.0 / state.eps;
    let gsf = state.phase.gradient();
    let gs: Vec<[f64; 2]> = (0..g.n_space()).map(|i| gsf.at(i)).collect();
    let action = specific_wave_action(state)?.values();
    let rho = state.rho.values();
    let dth_rho = state.rho.d_theta().values();
    let p = comps_values(&state.p);
    let grad_rho: Vec<Vec<f64>> = (0..d).map(|a| shifted_deriv(&state.rho, a, &gs, inv_eps)).collect();
    let mut flux = vec![vec![0.0; g.n_space() * nt]; d];
    for q in 0..g.n_space() * nt {
        let (mut pi, mut gi) = ([0.0; 2], [0.0; 2]);
        for a in 0..d {
            pi[a] = p[a][q];
            gi[a] = grad_rho[a][q];
        }
        let v = ham.d_p(pi, rho[q], gi);
        let gr = ham.d_grad_rho(pi, rho[q], gi);
        for a in 0..d {
            flux[a][q] = v[a] * action[q] - dth_rho[q] * gr[a];
        }
    }
    let comps = flux
        .iter()
        .map(|f| LoopField::from_values(g, f).map(|l| l.theta_average()))
        .collect::<Result<Vec<_>>>()?;
    Ok(VectorField::from_components(comps))
}

/// Circulation ∫ p/ρ dx of the base-frame fields sampled at phase offsets
/// θ_j = 2πj/n_samples, i.e. of φ̃(x, θ_j + S(x)/ε).
///
/// The shifted fields carry x-wavenumbers up to n|∇S|/ε, so the quadrature
/// runs on a spatial grid refined until those are resolved. In two
/// dimensions each entry is the x-cycle circulation averaged over the
/// transverse coordinate.
pub fn circulation_family(state: &ExtendedState, n_samples: usize) -> Vec<f64> {
    let g = *state.grid();
    let fine = quadrature_grid(state);
    let resample = |f: &LoopField| f.resample(&fine).expect("same n_theta");
    let phase = state.phase.resample(&fine).expect("same dimension");
    let rho = resample(&state.rho).phase_shift(&phase, 1.0 / state.eps);
    let p = resample(state.p.comp(0)).phase_shift(&phase, 1.0 / state.eps);
    let transverse = if g.dim() == 2 { g.length(1) } else { 1.0 };
    (0..n_samples)
        .map(|j| {
            let th = 2.0 * PI * j as f64 / n_samples as f64;
            let u = p.eval_theta(th).zip_map(&rho.eval_theta(th), |a, b| a / b);
            u.integral() / transverse
        })
        .collect()
}

/// Spatial grid with four points per wavelength of the fastest base-frame
/// mode of `state`.
fn quadrature_grid(state: &ExtendedState) -> TorusGrid {
    let g = *state.grid();
    let gs = state.phase.gradient();
    let n: Vec<usize> = (0..g.dim())
        .map(|a| {
            let k_max = gs.comp(a).max_abs();
            let modes = g.n_x()[a] as f64 / 2.0 + (g.n_theta() / 2) as f64 * k_max / state.eps * g.length(a) / (2.0 * PI);
            ((4.0 * modes).ceil() as usize).next_power_of_two().max(g.n_x()[a])
        })
        .collect();
    TorusGrid::new(g.lengths(), &n, g.n_theta()).expect("refined grid is valid")
}

/// Extended state on the leading-order slow manifold over `mean` with
/// density fluctuation `rho_hat` and zero mean label displacement.
pub fn init_slow_manifold(
    mean: &MeanWaveState,
    rho_hat: &LoopField,
    params: &IsothermalParams,
    eps: f64,
) -> Result<ExtendedState> {
    init_slow_manifold_with_labels(mean, &VectorField::zeros(*mean.rho.grid()), rho_hat, params, eps)
}

/// As [`init_slow_manifold`], with mean labels h̄ = x + `mean_disp`.
///
/// ρ̃ = ρ̄ + ερ̂, p̃ = p̄ + εp̂*, χ̃ = χ̄ + ε²χ̂*, h̃ = h̄∘(x + ε²α̂*), with the
/// composition evaluated by spectral interpolation of the displacement.
pub fn init_slow_manifold_with_labels(
    mean: &MeanWaveState,
    mean_disp: &VectorField,
    rho_hat: &LoopField,
    params: &IsothermalParams,
    eps: f64,
) -> Result<ExtendedState> {
    let g = *mean.rho.grid();
    g.same_as(rho_hat.grid())?;
    g.same_as(mean_disp.grid())?;
    rho_hat.theta_antiderivative()?;
    let slow = SlowFields::from_mean(mean.rho.clone(), mean.p.clone(), mean.chi.clone(), mean_disp.clone(), mean.phase.clone());
    let fast = slaving_leading(&slow, rho_hat, params)?;
    let eps2 = eps * eps;

    let rho = LoopField::from_scalar(&mean.rho).axpy(eps, rho_hat);
    let p = VectorLoopField::from_components(
        (0..g.dim())
            .map(|a| LoopField::from_scalar(mean.p.comp(a)).axpy(eps, fast.p.comp(a)))
            .collect(),
    );
    let chi = LoopField::from_scalar(&mean.chi).axpy(eps2, &fast.chi);
    let h = compose_labels(mean_disp, &fast.alpha, eps2)?;
    ExtendedState::new(rho, p, h, chi, mean.phase.clone(), eps, mean.t)
}

/// Displacement of x ↦ h̄(x + s·α̂) where h̄ = id + `mean_disp`.
pub(crate) fn compose_labels(mean_disp: &VectorField, alpha: &VectorLoopField, s: f64) -> Result<VectorLoopField> {
    let g = *mean_disp.grid();
    let d = g.dim();
    let nt = g.n_theta();
    let alpha = comps_values(alpha);
    let trivial = mean_disp.comps().iter().all(|c| c.max_abs() == 0.0);
    let interps: Vec<_> = mean_disp.comps().iter().map(|c| c.interpolant()).collect();
    let mut out = vec![vec![0.0; g.n_space() * nt]; d];
    for q in 0..g.n_space() * nt {
        let x = g.point(q / nt);
        let mut y = x;
        for a in 0..d {
            y[a] += s * alpha[a][q];
        }
        for a in 0..d {
            let shift = s * alpha[a][q];
            out[a][q] = if trivial { shift } else { shift + interps[a].eval(y) };
        }
    }
    let comps = out.iter().map(|v| LoopField::from_values(g, v)).collect::<Result<Vec<_>>>()?;
    Ok(VectorLoopField::from_components(comps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::isothermal_hamiltonian;
    use crate::lbep::rhs_base;

    fn iso(c: f64) -> crate::hamiltonian::Isothermal {
        isothermal_hamiltonian(IsothermalParams::new(c, 1.0).unwrap())
    }

    #[test]
    fn theta_independent_rates_match_base() {
        let g = TorusGrid::line(2.0 * PI, 32, 8).unwrap();
        let rho = ScalarField::from_fn(g, |x| 1.0 + 0.2 * x[0].sin());
        let p = VectorField::new(vec![ScalarField::from_fn(g, |x| 0.3 * (2.0 * x[0]).cos())]).unwrap();
        let h = VectorField::new(vec![ScalarField::from_fn(g, |x| 0.05 * x[0].cos())]).unwrap();
        let chi = ScalarField::from_fn(g, |x| x[0].sin());
        let base = BaseState::new(rho, p, h, chi, 0.0).unwrap();
        let ext = ExtendedState::from_base(&base, PhaseField::zero(g), 0.1).unwrap();
        let ham = iso(1.1);
        let rb = rhs_base(&base, &ham).unwrap();
        let re = rhs_extended(&ext, &ham, &AcousticEikonal { c_s: 1.1 }).unwrap();
        assert!((&re.rho.theta_average() - &rb.rho).max_abs() < 1e-13);
        assert!((&re.p.comp(0).theta_average() - rb.p.comp(0)).max_abs() < 1e-13);
        assert!((&re.h.comp(0).theta_average() - rb.h.comp(0)).max_abs() < 1e-13);
        assert!((&re.chi.theta_average() - &rb.chi).max_abs() < 1e-13);
        assert!(re.phase.max_abs() == 0.0 && re.rho.max_fluctuation() == 0.0);
    }

    #[test]
    fn eikonal_on_rest_background() {
        let g = TorusGrid::line(2.0 * PI, 16, 8).unwrap();
        let base = BaseState::at_rest(g, 1.0).unwrap();
        let ext = ExtendedState::from_base(&base, PhaseField::linear(g, &[3]).unwrap(), 0.1).unwrap();
        let r = rhs_extended(&ext, &iso(1.0), &AcousticEikonal { c_s: 1.0 }).unwrap();
        assert!(r.phase.values().iter().all(|&s| (s + 3.0).abs() < 1e-13));
    }

    #[test]
    fn vanishing_gradient_only_with_fluctuations() {
        let g = TorusGrid::line(2.0 * PI, 16, 8).unwrap();
        let mut ext = ExtendedState::from_base(&BaseState::at_rest(g, 1.0).unwrap(), PhaseField::zero(g), 0.1).unwrap();
        let closure = AcousticEikonal { c_s: 1.0 };
        assert!(rhs_extended(&ext, &iso(1.0), &closure).is_ok());
        ext.rho = ext.rho.add(&LoopField::from_fn(g, |_, t| 0.1 * t.cos()));
        assert!(matches!(rhs_extended(&ext, &iso(1.0), &closure), Err(Error::VanishingPhaseGradient { .. })));
        assert!(rhs_extended(&ext, &iso(1.0), &FrozenPhase).is_ok());
    }

    #[test]
    fn reconstruct_single_harmonic() {
        let g = TorusGrid::line(2.0 * PI, 32, 16).unwrap();
        let eps = 0.25;
        let mut ext = ExtendedState::from_base(&BaseState::at_rest(g, 1.0).unwrap(), PhaseField::linear(g, &[1]).unwrap(), eps).unwrap();
        ext.rho = LoopField::from_fn(g, |_, t| 1.0 + 0.5 * t.cos());
        // S = x and ε = 1/4, so θ = 4x.
        let b = reconstruct(&ext);
        for i in 0..32 {
            let x = g.point(i)[0];
            assert!((b.rho.values()[i] - (1.0 + 0.5 * (4.0 * x).cos())).abs() < 1e-13);
        }
    }

    #[test]
    fn wave_action_vanishes_without_theta_dependence() {
        let g = TorusGrid::line(2.0 * PI, 16, 8).unwrap();
        let ext = ExtendedState::from_base(&BaseState::at_rest(g, 1.0).unwrap(), PhaseField::linear(g, &[1]).unwrap(), 0.1).unwrap();
        assert_eq!(specific_wave_action(&ext).unwrap().rms(), 0.0);
    }
}
