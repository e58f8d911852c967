//! Base tier: momentum-form barotropic fluid equations on the torus with a
//! passively advected back-to-labels map `h` and Lagrange multiplier `χ`.
//!
//! ```text
//! ∂ₜρ = −∇·(ρv)
//! ∂ₜp = −∇·(v⊗p + ∂H/∂∇ρ ⊗ ∇ρ) − ∇(ρ ∂H/∂ρ − ρ ∇·∂H/∂∇ρ + p·v − H)
//! ∂ₜh = −v·∇h
//! ∂ₜχ = −v·∇χ + ∂H/∂ρ − ∇·∂H/∂∇ρ
//! ```
//! with v = ∂H/∂p. Fluxes are formed at collocation points and truncated by
//! the 2/3 rule before differentiation.

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::rk4::{self, combine_slices, Evolvable, Tangent};
use crate::torus_field::{ScalarField, TorusGrid, VectorField};

/// Densities at or below this value abort the computation.
pub const RHO_FLOOR: f64 = 1e-10;
/// Default Courant number.
pub const DEFAULT_CFL: f64 = 0.4;

/// Dependent variables of the base tier. `h` is stored as the displacement
/// from the identity map.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseState {
    pub rho: ScalarField,
    pub p: VectorField,
    pub h: VectorField,
    pub chi: ScalarField,
    pub t: f64,
}

/// Time derivatives of a [`BaseState`].
#[derive(Clone, Debug, PartialEq)]
pub struct BaseRates {
    pub rho: ScalarField,
    pub p: VectorField,
    pub h: VectorField,
    pub chi: ScalarField,
}

pub(crate) fn check_density(rho: &[f64]) -> Result<()> {
    let (min, index) = rho
        .iter()
        .enumerate()
        .fold((f64::INFINITY, 0), |acc, (i, &v)| if !(v >= acc.0) { (v, i) } else { acc });
    if !(min > RHO_FLOOR) {
        return Err(Error::NonPositiveDensity { min, index });
    }
    Ok(())
}

/// det(I + ∇d) at each point for a displacement field `d`.
pub(crate) fn label_jacobian_det(disp: &VectorField) -> ScalarField {
    let g = *disp.grid();
    let grads: Vec<VectorField> = disp.comps().iter().map(|c| c.gradient()).collect();
    let n = g.n_space();
    let vals = (0..n)
        .map(|i| {
            if g.dim() == 1 {
                1.0 + grads[0].comp(0).values()[i]
            } else {
                // (∇h)_{ia} = δ_ia + ∂_i d_a
                let j = |i_ax: usize, a: usize| {
                    (if i_ax == a { 1.0 } else { 0.0 }) + grads[a].comp(i_ax).values()[i]
                };
                j(0, 0) * j(1, 1) - j(0, 1) * j(1, 0)
            }
        })
        .collect();
    ScalarField::from_vec_unchecked(g, vals)
}

impl BaseState {
    pub fn new(rho: ScalarField, p: VectorField, h: VectorField, chi: ScalarField, t: f64) -> Result<Self> {
        let g = *rho.grid();
        g.same_as(p.grid())?;
        g.same_as(h.grid())?;
        g.same_as(chi.grid())?;
        let s = BaseState { rho, p, h, chi, t };
        s.check_invariants()?;
        Ok(s)
    }

    /// Uniform density `rho0`, zero momentum, identity labels, χ = 0.
    pub fn at_rest(grid: TorusGrid, rho0: f64) -> Result<Self> {
        Self::new(
            ScalarField::constant(grid, rho0),
            VectorField::zeros(grid),
            VectorField::zeros(grid),
            ScalarField::zeros(grid),
            0.0,
        )
    }

    pub fn grid(&self) -> &TorusGrid {
        self.rho.grid()
    }

    /// Density floor, finiteness and orientation of the label map.
    pub fn check_invariants(&self) -> Result<()> {
        check_density(self.rho.values())?;
        let fields = [("p", &self.p), ("h", &self.h)];
        for (name, f) in fields {
            for c in f.comps() {
                if let Some(i) = c.values().iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite { field: name.into(), index: i });
                }
            }
        }
        if let Some(i) = self.chi.values().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { field: "chi".into(), index: i });
        }
        let (det, index) = label_jacobian_det(&self.h).min_with_index();
        if !(det > 0.0) {
            return Err(Error::SingularLabelMap { det, index });
        }
        Ok(())
    }

    /// Velocity v = ∂H/∂p at every point.
    pub fn velocity(&self, ham: &dyn HamiltonianSpec) -> VectorField {
        let g = *self.grid();
        let grad = self.rho.gradient();
        let rho = self.rho.values();
        let vals: Vec<[f64; 2]> = (0..g.n_space())
            .map(|i| ham.d_p(self.p.at(i), rho[i], grad.at(i)))
            .collect();
        VectorField::from_components(
            (0..g.dim())
                .map(|a| ScalarField::from_vec_unchecked(g, vals.iter().map(|v| v[a]).collect()))
                .collect(),
        )
    }
}

impl Tangent for BaseRates {
    fn combine(k: [&Self; 4], w: [f64; 4]) -> Self {
        let g = *k[0].rho.grid();
        let sc = |f: [&ScalarField; 4]| {
            ScalarField::from_vec_unchecked(g, combine_slices([f[0].values(), f[1].values(), f[2].values(), f[3].values()], w))
        };
        let vc = |f: [&VectorField; 4]| {
            VectorField::from_components((0..g.dim()).map(|a| sc([f[0].comp(a), f[1].comp(a), f[2].comp(a), f[3].comp(a)])).collect())
        };
        BaseRates {
            rho: sc([&k[0].rho, &k[1].rho, &k[2].rho, &k[3].rho]),
            p: vc([&k[0].p, &k[1].p, &k[2].p, &k[3].p]),
            h: vc([&k[0].h, &k[1].h, &k[2].h, &k[3].h]),
            chi: sc([&k[0].chi, &k[1].chi, &k[2].chi, &k[3].chi]),
        }
    }
}

impl Evolvable for BaseState {
    type Rates = BaseRates;
    fn displaced(&self, dt: f64, k: &BaseRates) -> Self {
        let s = |a: &ScalarField, b: &ScalarField| a.zip_map(b, |x, y| x + dt * y);
        let v = |a: &VectorField, b: &VectorField| a.zip_comps(b, |x, y| s(x, y));
        BaseState {
            rho: s(&self.rho, &k.rho),
            p: v(&self.p, &k.p),
            h: v(&self.h, &k.h),
            chi: s(&self.chi, &k.chi),
            t: self.t + dt,
        }
    }
}

fn field(g: TorusGrid, v: Vec<f64>) -> ScalarField {
    ScalarField::from_vec_unchecked(g, v)
}

/// Time derivatives of all four fields.
pub fn rhs_base(state: &BaseState, ham: &dyn HamiltonianSpec) -> Result<BaseRates> {
    let g = *state.grid();
    let d = g.dim();
    let n = g.n_space();
    let rho = state.rho.values();
    check_density(rho)?;
    let grad_rho = state.rho.gradient();

    let mut v = vec![[0.0; 2]; n];
    let mut h_rho = vec![0.0; n];
    let mut gr = vec![[0.0; 2]; n];
    let mut energy = vec![0.0; n];
    for i in 0..n {
        let (p, gi) = (state.p.at(i), grad_rho.at(i));
        v[i] = ham.d_p(p, rho[i], gi);
        h_rho[i] = ham.d_rho(p, rho[i], gi);
        gr[i] = ham.d_grad_rho(p, rho[i], gi);
        energy[i] = ham.eval(p, rho[i], gi);
    }
    let uses_grad = ham.depends_on_grad_rho();
    let div_g = if uses_grad {
        let mut acc = vec![0.0; n];
        for a in 0..d {
            let da = field(g, gr.iter().map(|x| x[a]).collect()).deriv_dealiased(a);
            acc.iter_mut().zip(da.values()).for_each(|(s, x)| *s += x);
        }
        acc
    } else {
        vec![0.0; n]
    };

    // continuity
    let mut drho = vec![0.0; n];
    for a in 0..d {
        let flux = field(g, (0..n).map(|i| rho[i] * v[i][a]).collect());
        drho.iter_mut().zip(flux.deriv_dealiased(a).values()).for_each(|(s, x)| *s -= x);
    }

    // momentum: ∂ₜp_j = −∂_i F_ij with F_ij = v_i p_j + G_i ∂_jρ + δ_ij Π
    let pressure: Vec<f64> = (0..n)
        .map(|i| {
            let p = state.p.at(i);
            rho[i] * h_rho[i] - rho[i] * div_g[i] + p[0] * v[i][0] + p[1] * v[i][1] - energy[i]
        })
        .collect();
    let mut dp = Vec::with_capacity(d);
    for j in 0..d {
        let pj = state.p.comp(j).values();
        let gj = grad_rho.comp(j).values();
        let mut acc = vec![0.0; n];
        for i_ax in 0..d {
            let flux: Vec<f64> = (0..n)
                .map(|i| {
                    let mut f = v[i][i_ax] * pj[i] + if i_ax == j { pressure[i] } else { 0.0 };
                    if uses_grad {
                        f += gr[i][i_ax] * gj[i];
                    }
                    f
                })
                .collect();
            let df = field(g, flux).deriv_dealiased(i_ax);
            acc.iter_mut().zip(df.values()).for_each(|(s, x)| *s -= x);
        }
        dp.push(field(g, acc));
    }

    // labels: ∂ₜd_a = −v_a − v_i ∂_i d_a
    let mut dh = Vec::with_capacity(d);
    for a in 0..d {
        let grad_da = state.h.comp(a).gradient();
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let gi = grad_da.at(i);
                -v[i][a] - (v[i][0] * gi[0] + v[i][1] * gi[1])
            })
            .collect();
        dh.push(field(g, vals).dealiased());
    }

    // multiplier
    let grad_chi = state.chi.gradient();
    let dchi: Vec<f64> = (0..n)
        .map(|i| {
            let gc = grad_chi.at(i);
            -(v[i][0] * gc[0] + v[i][1] * gc[1]) + h_rho[i] - div_g[i]
        })
        .collect();

    Ok(BaseRates {
        rho: field(g, drho),
        p: VectorField::from_components(dp),
        h: VectorField::from_components(dh),
        chi: field(g, dchi).dealiased(),
    })
}

/// One RK4 step; the result is checked against the state invariants.
pub fn step_rk4(state: &BaseState, ham: &dyn HamiltonianSpec, dt: f64) -> Result<BaseState> {
    let next = rk4::rk4(state, dt, |s| rhs_base(s, ham))?;
    next.check_invariants()
        .map_err(|e| Error::StepRejected(format!("t = {}: {e}", next.t)))?;
    Ok(next)
}

/// cfl · min Δx / (max|v| + c_wave).
pub fn cfl_limit(state: &BaseState, ham: &dyn HamiltonianSpec, cfl: f64) -> f64 {
    let g = state.grid();
    let vmax = state.velocity(ham).norm().max_abs();
    let rho_max = state.rho.max_abs();
    cfl * g.min_spacing() / (vmax + ham.wave_speed(rho_max, g.max_wavenumber()))
}

pub fn mass(state: &BaseState) -> f64 {
    state.rho.integral()
}

pub fn momentum(state: &BaseState) -> Vec<f64> {
    state.p.integral()
}

pub fn energy(state: &BaseState, ham: &dyn HamiltonianSpec) -> f64 {
    let g = *state.grid();
    let grad = state.rho.gradient();
    let rho = state.rho.values();
    (0..g.n_space())
        .map(|i| ham.eval(state.p.at(i), rho[i], grad.at(i)))
        .sum::<f64>()
        * g.cell_volume()
}

/// Circulation of p/ρ per homology cycle.
///
/// In one dimension this is ∫_Q p/ρ dx over the full circle, a Kelvin
/// invariant. In two dimensions the entry for axis `a` is the average over
/// all straight cycles parallel to that axis, a diagnostic rather than an
/// invariant (those loops are not material).
pub fn circulation_base(state: &BaseState) -> Vec<f64> {
    let g = *state.grid();
    (0..g.dim())
        .map(|a| {
            let u = state.p.comp(a).zip_map(&state.rho, |p, r| p / r);
            let other = if g.dim() == 2 { g.length(1 - a) } else { 1.0 };
            u.integral() / other
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{isothermal_hamiltonian, IsothermalParams};
    use std::f64::consts::PI;

    fn ham(c: f64) -> crate::hamiltonian::Isothermal {
        isothermal_hamiltonian(IsothermalParams::new(c, 1.0).unwrap())
    }

    #[test]
    fn rest_state_rates() {
        let g = TorusGrid::line(2.0 * PI, 16, 8).unwrap();
        let s = BaseState::at_rest(g, 1.0).unwrap();
        let r = rhs_base(&s, &ham(1.3)).unwrap();
        assert!(r.rho.max_abs() < 1e-15 && r.p.comp(0).max_abs() < 1e-15 && r.h.comp(0).max_abs() < 1e-15);
        assert!(r.chi.values().iter().all(|&x| (x - 1.69).abs() < 1e-13));
    }

    #[test]
    fn pressure_gradient_drives_momentum() {
        let g = TorusGrid::line(2.0 * PI, 32, 8).unwrap();
        let rho = ScalarField::from_fn(g, |x| 1.0 + 0.1 * (2.0 * x[0]).sin());
        let s = BaseState::new(rho.clone(), VectorField::zeros(g), VectorField::zeros(g), ScalarField::zeros(g), 0.0).unwrap();
        let r = rhs_base(&s, &ham(0.7)).unwrap();
        let expect = rho.deriv(0).unwrap().scale(-0.49);
        assert!((r.p.comp(0) - &expect).max_abs() < 1e-13);
    }

    #[test]
    fn density_floor_is_an_error() {
        let g = TorusGrid::line(1.0, 16, 8).unwrap();
        let rho = ScalarField::from_fn(g, |x| if x[0] == 0.5 { 0.0 } else { 1.0 });
        let s = BaseState { rho, p: VectorField::zeros(g), h: VectorField::zeros(g), chi: ScalarField::zeros(g), t: 0.0 };
        assert!(matches!(rhs_base(&s, &ham(1.0)), Err(Error::NonPositiveDensity { index: 8, .. })));
    }

    #[test]
    fn rest_state_step_drifts_chi_only() {
        let g = TorusGrid::line(1.0, 16, 8).unwrap();
        let s = BaseState::at_rest(g, 1.0).unwrap();
        let n = step_rk4(&s, &ham(2.0), 0.01).unwrap();
        assert!((n.chi.values()[3] - 0.04).abs() < 1e-15);
        assert_eq!(n.rho, s.rho);
    }

    #[test]
    fn circulation_of_uniform_flow() {
        let g = TorusGrid::line(3.0, 16, 8).unwrap();
        let rho = ScalarField::from_fn(g, |x| 1.0 + 0.2 * (2.0 * PI * x[0] / 3.0).cos());
        let p = VectorField::new(vec![rho.scale(0.4)]).unwrap();
        let s = BaseState::new(rho, p, VectorField::zeros(g), ScalarField::zeros(g), 0.0).unwrap();
        assert!((circulation_base(&s)[0] - 1.2).abs() < 1e-14);
    }
}
