//! Reduced tier: isothermal mean flow coupled to a single acoustic wave train
//! through its wave-action density I.
//!
//! ```text
//! ∂ₜρ̄ = −∇·p̄
//! ∂ₜp̄ = −∇·(p̄⊗p̄/ρ̄ + ε² c I ∇S⊗∇S/|∇S| + c²ρ̄ 𝕀)
//! ∂ₜI = −∇·((p̄/ρ̄ + c ∇S/|∇S|) I)
//! ∂ₜS = −(p̄/ρ̄)·∇S − c|∇S|
//! ∂ₜχ̄ = −(p̄/ρ̄)·∇χ̄ − |p̄/ρ̄|²/2 + c² ln(ρ̄/ρ₀) + c²
//! ```
//! All fluxes are in conservation form and truncated by the 2/3 rule before
//! differentiation, so mass, momentum and total action are conserved to
//! round-off.

use crate::error::{Error, Result};
use crate::extension::{check_grad_s, eikonal_rate};
use crate::hamiltonian::IsothermalParams;
use crate::lbep::check_density;
use crate::rk4::{self, combine_slices, Evolvable, Tangent};
use crate::slow_manifold::FastSlowSplit;
use crate::torus_field::{LoopField, PhaseField, ScalarField, TorusGrid, VectorField};

/// Largest admissible negative wave action, relative to max |I|.
pub const ACTION_NEGATIVE_TOL: f64 = 1e-6;

/// Mean fields (ρ̄, p̄, χ̄), wave action I and phase S.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanWaveState {
    pub rho: ScalarField,
    pub p: VectorField,
    pub chi: ScalarField,
    pub action: ScalarField,
    pub phase: PhaseField,
    pub eps: f64,
    pub t: f64,
}

/// Time derivatives of a [`MeanWaveState`]; `phase` is ∂ₜS.
#[derive(Clone, Debug, PartialEq)]
pub struct MeanWaveRates {
    pub rho: ScalarField,
    pub p: VectorField,
    pub chi: ScalarField,
    pub action: ScalarField,
    pub phase: ScalarField,
}

impl MeanWaveState {
    pub fn new(
        rho: ScalarField,
        p: VectorField,
        chi: ScalarField,
        action: ScalarField,
        phase: PhaseField,
        eps: f64,
        t: f64,
    ) -> Result<Self> {
        let g = *rho.grid();
        g.same_as(p.grid())?;
        g.same_as(chi.grid())?;
        g.same_as(action.grid())?;
        g.same_as(phase.grid())?;
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
        }
        let state = MeanWaveState { rho, p, chi, action, phase, eps, t };
        state.check_invariants()?;
        Ok(state)
    }

    /// Uniform density `rho0` at rest with no waves and phase S = winding·x.
    pub fn at_rest(grid: TorusGrid, rho0: f64, winding: &[i64], eps: f64) -> Result<Self> {
        MeanWaveState::new(
            ScalarField::constant(grid, rho0),
            VectorField::zeros(grid),
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
            PhaseField::linear(grid, winding)?,
            eps,
            0.0,
        )
    }

    pub fn grid(&self) -> &TorusGrid {
        self.rho.grid()
    }

    /// ρ̄ above the floor, I ≥ 0, |∇S| above the floor, all values finite.
    pub fn check_invariants(&self) -> Result<()> {
        let finite = |name: &str, v: &[f64]| match v.iter().position(|x| !x.is_finite()) {
            Some(index) => Err(Error::NonFinite { field: name.into(), index }),
            None => Ok(()),
        };
        finite("rho", self.rho.values())?;
        for c in self.p.comps() {
            finite("p", c.values())?;
        }
        finite("chi", self.chi.values())?;
        finite("action", self.action.values())?;
        finite("phase", self.phase.periodic().values())?;
        check_density(self.rho.values())?;
        let (min, index) = self.action.min_with_index();
        // truncated spectra ring slightly below zero in the tails of a packet
        let tol = ACTION_NEGATIVE_TOL * self.action.max_abs().max(f64::MIN_POSITIVE);
        if min < -tol {
            return Err(Error::InvalidParameter(format!("wave action {min:e} < 0 at index {index}")));
        }
        check_grad_s(&self.phase)
    }

    /// Velocity p̄/ρ̄.
    pub fn velocity(&self) -> VectorField {
        self.p.map_comps(|c| c.zip_map(&self.rho, |p, r| p / r))
    }

    /// Group velocity p̄/ρ̄ + c ∇S/|∇S|.
    pub fn group_velocity(&self, params: &IsothermalParams) -> VectorField {
        let gs = self.phase.gradient();
        let k = gs.norm();
        let u = self.velocity();
        u.zip_comps(&gs, |uc, gc| uc + &gc.zip_map(&k, |a, b| params.c_s * a / b))
    }
}

impl Tangent for MeanWaveRates {
    fn combine(k: [&Self; 4], w: [f64; 4]) -> Self {
        let g = *k[0].rho.grid();
        let sc = |f: [&ScalarField; 4]| {
            ScalarField::from_vec_unchecked(g, combine_slices([f[0].values(), f[1].values(), f[2].values(), f[3].values()], w))
        };
        MeanWaveRates {
            rho: sc([&k[0].rho, &k[1].rho, &k[2].rho, &k[3].rho]),
            p: VectorField::from_components(
                (0..g.dim()).map(|a| sc([k[0].p.comp(a), k[1].p.comp(a), k[2].p.comp(a), k[3].p.comp(a)])).collect(),
            ),
            chi: sc([&k[0].chi, &k[1].chi, &k[2].chi, &k[3].chi]),
            action: sc([&k[0].action, &k[1].action, &k[2].action, &k[3].action]),
            phase: sc([&k[0].phase, &k[1].phase, &k[2].phase, &k[3].phase]),
        }
    }
}

impl Evolvable for MeanWaveState {
    type Rates = MeanWaveRates;
    fn displaced(&self, dt: f64, k: &MeanWaveRates) -> Self {
        let s = |a: &ScalarField, b: &ScalarField| a.zip_map(b, |x, y| x + dt * y);
        MeanWaveState {
            rho: s(&self.rho, &k.rho),
            p: self.p.zip_comps(&k.p, |a, b| s(a, b)),
            chi: s(&self.chi, &k.chi),
            action: s(&self.action, &k.action),
            phase: self.phase.with_periodic(s(self.phase.periodic(), &k.phase)),
            eps: self.eps,
            t: self.t + dt,
        }
    }
}

fn field(g: TorusGrid, v: Vec<f64>) -> ScalarField {
    ScalarField::from_vec_unchecked(g, v)
}

/// −Σᵢ ∂ᵢ fluxᵢ with each flux truncated before differentiation.
fn neg_divergence(g: TorusGrid, fluxes: Vec<Vec<f64>>) -> ScalarField {
    let mut acc = vec![0.0; g.n_space()];
    for (a, f) in fluxes.into_iter().enumerate() {
        let df = field(g, f).deriv_dealiased(a);
        acc.iter_mut().zip(df.values()).for_each(|(s, x)| *s -= x);
    }
    field(g, acc)
}

/// Time derivatives of the reduced system.
pub fn rhs_reduced(state: &MeanWaveState, params: &IsothermalParams) -> Result<MeanWaveRates> {
    let g = *state.grid();
    let d = g.dim();
    let n = g.n_space();
    let c = params.c_s;
    check_density(state.rho.values())?;
    check_grad_s(&state.phase)?;
    let rho = state.rho.values();
    let action = state.action.values();
    let gs = state.phase.gradient();
    let u: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let p = state.p.at(i);
            [p[0] / rho[i], p[1] / rho[i]]
        })
        .collect();
    let k: Vec<f64> = (0..n).map(|i| gs.at(i)[0].hypot(gs.at(i)[1])).collect();
    let eps2 = state.eps * state.eps;

    let drho = neg_divergence(g, (0..d).map(|a| state.p.comp(a).values().to_vec()).collect());

    let dp = (0..d)
        .map(|j| {
            let pj = state.p.comp(j).values();
            let fluxes = (0..d)
                .map(|a| {
                    (0..n)
                        .map(|i| {
                            let kk = gs.at(i);
                            let mut f = u[i][a] * pj[i] + eps2 * c * action[i] * kk[a] * kk[j] / k[i];
                            if a == j {
                                f += c * c * rho[i];
                            }
                            f
                        })
                        .collect()
                })
                .collect();
            neg_divergence(g, fluxes)
        })
        .collect();

    let daction = neg_divergence(
        g,
        (0..d)
            .map(|a| (0..n).map(|i| (u[i][a] + c * gs.at(i)[a] / k[i]) * action[i]).collect())
            .collect(),
    );

    let grad_chi = state.chi.gradient();
    let c2 = c * c;
    let dchi = (0..n)
        .map(|i| {
            let gc = grad_chi.at(i);
            let uu = u[i][0] * u[i][0] + u[i][1] * u[i][1];
            -(u[i][0] * gc[0] + u[i][1] * gc[1]) - 0.5 * uu + c2 * (rho[i] / params.rho_ref).ln() + c2
        })
        .collect();

    Ok(MeanWaveRates {
        rho: drho,
        p: VectorField::from_components(dp),
        chi: field(g, dchi).dealiased(),
        action: daction,
        phase: eikonal_rate(&state.rho, &state.p, &state.phase, c),
    })
}

/// Stop before the phase folds: the periodic part of ∇S may not outgrow the
/// winding gradient.
fn check_pre_caustic(phase: &PhaseField) -> Result<()> {
    let lin = phase.linear_gradient();
    let lin = lin[0].hypot(lin[1]);
    let (max, index) = phase.periodic().gradient().norm().max_with_index();
    if max > lin {
        return Err(Error::StepRejected(format!(
            "periodic phase gradient {max:e} exceeds winding gradient {lin:e} at index {index}"
        )));
    }
    Ok(())
}

/// One RK4 step, followed by the invariant checks and the pre-caustic guard.
pub fn step_reduced(state: &MeanWaveState, params: &IsothermalParams, dt: f64) -> Result<MeanWaveState> {
    let next = rk4::rk4(state, dt, |s| rhs_reduced(s, params))?;
    next.check_invariants()
        .map_err(|e| Error::StepRejected(format!("t = {}: {e}", next.t)))?;
    check_pre_caustic(&next.phase)?;
    Ok(next)
}

/// cfl · min Δx / (max|p̄/ρ̄| + c).
pub fn cfl_reduced(state: &MeanWaveState, params: &IsothermalParams, cfl: f64) -> f64 {
    let umax = state.velocity().norm().max_abs();
    cfl * state.grid().min_spacing() / (umax + params.c_s)
}

/// I = ⨍ (c/|∇S|) ρ̂²/ρ̄ dθ.
pub fn wave_action_from_fluctuations(
    rho_bar: &ScalarField,
    rho_hat: &LoopField,
    phase: &PhaseField,
    params: &IsothermalParams,
) -> Result<ScalarField> {
    check_grad_s(phase)?;
    check_density(rho_bar.values())?;
    let sq = rho_hat.mean_product(rho_hat);
    let k = phase.gradient_norm();
    let coef = k.zip_map(rho_bar, |k, r| params.c_s / (k * r));
    Ok(&sq * &coef)
}

/// Symmetric d×d tensor field, row-major.
pub type TensorField = Vec<ScalarField>;

/// Comparison of the θ-averaged fluctuation momentum flux with its closed
/// form on the slow manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct ReynoldsCheck {
    /// ⨍ (p̂⊗p̂/ρ̄ − ρ̂(p̂⊗p̄ + p̄⊗p̂)/ρ̄² + ρ̂² p̄⊗p̄/ρ̄³) dθ
    pub quadrature: TensorField,
    /// c I ∇S⊗∇S/|∇S|
    pub closed_form: TensorField,
    /// ‖quadrature − closed_form‖_F / ‖closed_form‖_F (absolute when the
    /// closed form vanishes).
    pub discrepancy: f64,
}

pub fn reynolds_stress_check(split: &FastSlowSplit, params: &IsothermalParams) -> Result<ReynoldsCheck> {
    let slow = &split.slow;
    let g = *slow.grid();
    let d = g.dim();
    let rho_bar = &slow.rho_bar;
    let inv = rho_bar.map(|r| 1.0 / r);
    let inv2 = &inv * &inv;
    let inv3 = &inv2 * &inv;
    let p_hat = &split.fast.p;
    let rho_hat = &split.rho_hat;
    let rr = rho_hat.mean_product(rho_hat);
    let action = wave_action_from_fluctuations(rho_bar, rho_hat, &slow.phase, params)?;
    let gs = slow.phase.gradient();
    let k = gs.norm();
    let mut quadrature = Vec::with_capacity(d * d);
    let mut closed_form = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let (pa, pb) = (slow.p_bar.comp(a), slow.p_bar.comp(b));
            let t = &(&(&p_hat.comp(a).mean_product(p_hat.comp(b)) * &inv)
                - &(&(&(&rho_hat.mean_product(p_hat.comp(b)) * pa) + &(&rho_hat.mean_product(p_hat.comp(a)) * pb)) * &inv2))
                + &(&(&(&rr * pa) * pb) * &inv3);
            quadrature.push(t);
            let cf = (&(&action * gs.comp(a)) * gs.comp(b)).zip_map(&k, |v, k| params.c_s * v / k);
            closed_form.push(cf);
        }
    }
    let frob = |t: &TensorField| t.iter().map(|f| f.values().iter().map(|v| v * v).sum::<f64>()).sum::<f64>().sqrt();
    let diff: TensorField = quadrature.iter().zip(&closed_form).map(|(a, b)| a - b).collect();
    let norm = frob(&closed_form);
    let discrepancy = if norm > 0.0 { frob(&diff) / norm } else { frob(&diff) };
    Ok(ReynoldsCheck { quadrature, closed_form, discrepancy })
}

pub fn mass(state: &MeanWaveState) -> f64 {
    state.rho.integral()
}

pub fn momentum(state: &MeanWaveState) -> Vec<f64> {
    state.p.integral()
}

pub fn total_action(state: &MeanWaveState) -> f64 {
    state.action.integral()
}

fn circulation_of(state: &MeanWaveState, weight: f64) -> Vec<f64> {
    let g = *state.grid();
    let gs = state.phase.gradient();
    let eps2 = state.eps * state.eps;
    (0..g.dim())
        .map(|a| {
            let ia = state.action.zip_map(gs.comp(a), |i, k| weight * eps2 * i * k);
            let one_form = (state.p.comp(a) - &ia).zip_map(&state.rho, |v, r| v / r);
            let other = if g.dim() == 2 { g.length(1 - a) } else { 1.0 };
            one_form.integral() / other
        })
        .collect()
}

/// ∮ (p̄ − ε² I ∇S)/ρ̄ · dx per cycle; the wave-corrected Kelvin invariant in
/// one dimension (two-dimensional entries are averages over straight cycles).
pub fn mean_circulation(state: &MeanWaveState) -> Vec<f64> {
    circulation_of(state, 1.0)
}

/// ∮ p̄/ρ̄ · dx without the pseudomomentum correction; not conserved when
/// waves are present.
pub fn mean_circulation_uncorrected(state: &MeanWaveState) -> Vec<f64> {
    circulation_of(state, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(c: f64) -> IsothermalParams {
        IsothermalParams::new(c, 1.0).unwrap()
    }

    #[test]
    fn wave_free_rest_rates() {
        let g = TorusGrid::line(2.0 * PI, 16, 8).unwrap();
        let s = MeanWaveState::at_rest(g, 1.0, &[3], 0.1).unwrap();
        let r = rhs_reduced(&s, &params(2.0)).unwrap();
        assert!(r.rho.max_abs() < 1e-14 && r.p.comp(0).max_abs() < 1e-12 && r.action.max_abs() == 0.0);
        assert!(r.phase.values().iter().all(|v| (v + 6.0).abs() < 1e-12));
        assert!(r.chi.values().iter().all(|v| (v - 4.0).abs() < 1e-12));
    }

    #[test]
    fn uniform_wave_train_is_steady() {
        let g = TorusGrid::line(2.0 * PI, 16, 8).unwrap();
        let mut s = MeanWaveState::at_rest(g, 1.0, &[2], 0.1).unwrap();
        s.action = ScalarField::constant(g, 0.7);
        let r = rhs_reduced(&s, &params(1.0)).unwrap();
        assert!(r.action.max_abs() < 1e-13 && r.p.comp(0).max_abs() < 1e-13);
    }

    #[test]
    fn action_of_cosine() {
        let g = TorusGrid::line(2.0 * PI, 8, 16).unwrap();
        let phase = PhaseField::linear(g, &[3]).unwrap();
        let rho_hat = LoopField::from_fn(g, |_, t| 0.4 * t.cos());
        let i = wave_action_from_fluctuations(&ScalarField::constant(g, 1.0), &rho_hat, &phase, &params(1.0)).unwrap();
        assert!(i.values().iter().all(|v| (v - 0.16 / 6.0).abs() < 1e-15));
    }

    #[test]
    fn uniform_flow_circulation() {
        let g = TorusGrid::line(3.0, 16, 8).unwrap();
        let mut s = MeanWaveState::at_rest(g, 2.0, &[1], 0.1).unwrap();
        s.p = VectorField::new(vec![ScalarField::constant(g, 2.0 * 0.5)]).unwrap();
        assert!((mean_circulation(&s)[0] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn caustic_guard() {
        let g = TorusGrid::line(2.0 * PI, 16, 8).unwrap();
        let steep = PhaseField::new(&[1], ScalarField::from_fn(g, |x| 2.0 * x[0].sin())).unwrap();
        assert!(matches!(check_pre_caustic(&steep), Err(Error::StepRejected(_))));
        assert!(check_pre_caustic(&PhaseField::linear(g, &[1]).unwrap()).is_ok());
    }
}
