//! Fast–slow structure of the extended isothermal system near a
//! small-amplitude acoustic wave train.
//!
//! Slow variables are the θ-means (h̄, p̄, ρ̄, χ̄), the phase S and the
//! combination λ̂ = ρ̂ + p̂·∇S/(c|∇S| − u·∇S); fast variables are the
//! fluctuations y = (α̂, p̂, χ̂). The leading fast vector field is A(x)[y] + C(x)
//! and A has the closed-form inverse implemented by [`invert_a`].
//!
//! Notation used below: u = p̄/ρ̄, K = |∇S|, e = ∇S/K, s = e·u,
//! w = (I − e⊗e)u/(c − s), b = u + ∇χ̄ + q e/(c − s), q = u·∇χ̄ + |u|² + c².

use crate::error::{Error, Result};
use crate::extension::{check_grad_s, rhs_extended, ExtendedState, PhaseClosure};
use crate::hamiltonian::{HamiltonianSpec, IsothermalParams};
use crate::rk4::Evolvable;
use crate::torus_field::{LoopField, PhaseField, ScalarField, TorusGrid, VectorField, VectorLoopField};

/// Resonance floor on c|∇S| − u·∇S relative to c|∇S|.
pub const DENOM_FLOOR_FACTOR: f64 = 1e-6;

/// Slow block: θ-means, phase and λ̂. `h_bar` is the mean label displacement.
#[derive(Clone, Debug, PartialEq)]
pub struct SlowFields {
    pub rho_bar: ScalarField,
    pub p_bar: VectorField,
    pub chi_bar: ScalarField,
    pub h_bar: VectorField,
    pub lambda_hat: LoopField,
    pub phase: PhaseField,
}

impl SlowFields {
    /// Mean fields with λ̂ = 0.
    pub fn from_mean(rho_bar: ScalarField, p_bar: VectorField, chi_bar: ScalarField, h_bar: VectorField, phase: PhaseField) -> Self {
        let g = *rho_bar.grid();
        SlowFields {
            rho_bar,
            p_bar,
            chi_bar,
            h_bar,
            lambda_hat: LoopField::zeros(g),
            phase,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        self.rho_bar.grid()
    }
}

/// Fast block y = (α̂, p̂, χ̂).
#[derive(Clone, Debug, PartialEq)]
pub struct FastFields {
    pub alpha: VectorLoopField,
    pub p: VectorLoopField,
    pub chi: LoopField,
}

impl FastFields {
    pub fn zeros(grid: TorusGrid) -> Self {
        FastFields {
            alpha: VectorLoopField::zeros(grid),
            p: VectorLoopField::zeros(grid),
            chi: LoopField::zeros(grid),
        }
    }

    fn zip(&self, other: &FastFields, f: impl Fn(&LoopField, &LoopField) -> LoopField) -> FastFields {
        FastFields {
            alpha: self.alpha.zip(&other.alpha, &f),
            p: self.p.zip(&other.p, &f),
            chi: f(&self.chi, &other.chi),
        }
    }

    pub fn add(&self, other: &FastFields) -> FastFields {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &FastFields) -> FastFields {
        self.zip(other, |a, b| a.sub(b))
    }

    pub fn scale(&self, c: f64) -> FastFields {
        FastFields {
            alpha: self.alpha.scale(c),
            p: self.p.scale(c),
            chi: self.chi.scale(c),
        }
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: f64, other: &FastFields) -> FastFields {
        self.zip(other, |a, b| a.axpy(c, b))
    }

    fn parts(&self) -> impl Iterator<Item = &LoopField> {
        self.alpha.comps().iter().chain(self.p.comps()).chain(std::iter::once(&self.chi))
    }

    /// Root-mean-square over all components and the (x, θ) grid.
    pub fn rms(&self) -> f64 {
        let parts: Vec<f64> = self.parts().map(|f| f.rms().powi(2)).collect();
        (parts.iter().sum::<f64>() / parts.len() as f64).sqrt()
    }

    /// Largest θ-mean magnitude over all components.
    pub fn max_theta_mean(&self) -> f64 {
        self.parts().map(|f| f.theta_average().max_abs()).fold(0.0, f64::max)
    }
}

/// Mean/fluctuation decomposition of an extended state.
#[derive(Clone, Debug, PartialEq)]
pub struct FastSlowSplit {
    pub slow: SlowFields,
    pub fast: FastFields,
    pub rho_hat: LoopField,
    pub eps: f64,
}

/// Pointwise background coefficients shared by A, C and the slaving maps.
struct Background {
    c: f64,
    k: ScalarField,
    ck: ScalarField,
    inv_rho: ScalarField,
    e: Vec<ScalarField>,
    u: Vec<ScalarField>,
    /// 1/(c − s)
    inv_gap: ScalarField,
    w: Vec<ScalarField>,
    b: Vec<ScalarField>,
    q: ScalarField,
    grad_s: Vec<ScalarField>,
    grad_chi: Vec<ScalarField>,
}

impl Background {
    fn new(slow: &SlowFields, params: &IsothermalParams) -> Result<Self> {
        let g = *slow.grid();
        let d = g.dim();
        let c = params.c_s;
        crate::lbep::check_density(slow.rho_bar.values())?;
        check_grad_s(&slow.phase)?;
        let grad_s = slow.phase.gradient();
        let k = grad_s.norm();
        let e: Vec<ScalarField> = grad_s.comps().iter().map(|gc| gc.zip_map(&k, |a, b| a / b)).collect();
        let inv_rho = slow.rho_bar.map(|r| 1.0 / r);
        let u: Vec<ScalarField> = slow.p_bar.comps().iter().map(|pc| pc * &inv_rho).collect();
        let dot = |a: &[ScalarField], b: &[ScalarField]| {
            (1..d).fold(&a[0] * &b[0], |acc, i| &acc + &(&a[i] * &b[i]))
        };
        let s = dot(&e, &u);
        let n = g.n_space();
        let (gap_min, index) = (0..n)
            .map(|i| (((c - s.values()[i]) / c).abs(), i))
            .fold((f64::INFINITY, 0), |acc, x| if x.0 < acc.0 { x } else { acc });
        if !(gap_min > DENOM_FLOOR_FACTOR) {
            return Err(Error::ResonantDenominator { min: (c - s.values()[index]) * k.values()[index], index });
        }
        let inv_gap = s.map(|s| 1.0 / (c - s));
        let w: Vec<ScalarField> = (0..d).map(|a| &(&u[a] - &(&e[a] * &s)) * &inv_gap).collect();
        let grad_chi = slow.chi_bar.gradient().comps().to_vec();
        let q = {
            let uu = dot(&u, &u);
            let ug = dot(&u, &grad_chi);
            (&uu + &ug).map(|v| v + c * c)
        };
        let b: Vec<ScalarField> = (0..d).map(|a| &(&u[a] + &grad_chi[a]) + &(&(&q * &inv_gap) * &e[a])).collect();
        Ok(Background {
            c,
            ck: k.scale(c),
            k,
            inv_rho,
            e,
            u,
            inv_gap,
            w,
            b,
            q,
            grad_s: grad_s.comps().to_vec(),
            grad_chi,
        })
    }

    fn dim(&self) -> usize {
        self.e.len()
    }

    /// Σₐ cₐ fₐ for x-dependent coefficients.
    fn contract(&self, coef: &[ScalarField], f: &VectorLoopField) -> LoopField {
        (1..self.dim()).fold(f.comp(0).mul_scalar(&coef[0]), |acc, a| acc.add(&f.comp(a).mul_scalar(&coef[a])))
    }

    /// 𝕋·v = v − ½e(e·v) + ½w(e·v).
    fn t_tensor(&self, v: &VectorLoopField) -> VectorLoopField {
        let ev = self.contract(&self.e, v);
        VectorLoopField::from_components(
            (0..self.dim())
                .map(|a| v.comp(a).add(&ev.mul_scalar(&(&self.w[a] - &self.e[a]).scale(0.5))))
                .collect(),
        )
    }
}

fn antiderivative(f: &VectorLoopField) -> Result<VectorLoopField> {
    Ok(VectorLoopField::from_components(
        f.comps().iter().map(|c| c.theta_antiderivative()).collect::<Result<Vec<_>>>()?,
    ))
}

/// Leading fast operator A(x)[y].
pub fn apply_a(slow: &SlowFields, y: &FastFields, params: &IsothermalParams) -> Result<FastFields> {
    let bg = Background::new(slow, params)?;
    Ok(apply_with(&bg, y))
}

fn apply_with(bg: &Background, y: &FastFields) -> FastFields {
    let d = bg.dim();
    let ep = bg.contract(&bg.e, &y.p);
    let coupling = &bg.inv_gap * &bg.inv_rho;
    let alpha = (0..d)
        .map(|a| {
            y.alpha.comp(a).d_theta().mul_scalar(&bg.ck)
                .sub(&y.p.comp(a).mul_scalar(&bg.inv_rho))
                .sub(&ep.mul_scalar(&(&bg.u[a] * &coupling)))
        })
        .collect();
    let dp = y.p.map(|c| c.d_theta());
    let edp = bg.contract(&bg.e, &dp);
    let p = (0..d)
        .map(|a| {
            dp.comp(a)
                .add(&edp.mul_scalar(&(&bg.e[a] - &bg.w[a])))
                .mul_scalar(&bg.ck)
        })
        .collect();
    let b_over_rho: Vec<ScalarField> = bg.b.iter().map(|b| b * &bg.inv_rho).collect();
    let chi = y.chi.d_theta().mul_scalar(&bg.ck).sub(&bg.contract(&b_over_rho, &y.p));
    FastFields {
        alpha: VectorLoopField::from_components(alpha),
        p: VectorLoopField::from_components(p),
        chi,
    }
}

/// Closed-form solution of A(x)[y] = dy; every component of `dy` must have
/// zero θ-mean.
pub fn invert_a(slow: &SlowFields, dy: &FastFields, params: &IsothermalParams) -> Result<FastFields> {
    let bg = Background::new(slow, params)?;
    invert_with(&bg, dy)
}

fn invert_with(bg: &Background, dy: &FastFields) -> Result<FastFields> {
    let d = bg.dim();
    let inv_ck = bg.ck.map(|v| 1.0 / v);
    let inv_ck2 = &inv_ck * &inv_ck;
    let ip = antiderivative(&dy.p)?;
    let p = bg.t_tensor(&ip).map(|c| c.mul_scalar(&inv_ck));
    let second = antiderivative(&antiderivative(&dy.p.map(|c| c.mul_scalar(&bg.inv_rho)))?)?;
    let tq = bg.t_tensor(&second);
    let etq = bg.contract(&bg.e, &tq);
    let ia = antiderivative(&dy.alpha)?;
    let alpha = (0..d)
        .map(|a| {
            ia.comp(a).mul_scalar(&inv_ck).add(
                &tq.comp(a)
                    .add(&etq.mul_scalar(&(&bg.u[a] * &bg.inv_gap)))
                    .mul_scalar(&inv_ck2),
            )
        })
        .collect();
    let chi = dy
        .chi
        .theta_antiderivative()?
        .mul_scalar(&inv_ck)
        .add(&bg.contract(&bg.b, &tq).mul_scalar(&inv_ck2));
    Ok(FastFields {
        alpha: VectorLoopField::from_components(alpha),
        p,
        chi,
    })
}

/// The y-independent part C(x) of the leading fast vector field.
pub fn forcing_c(slow: &SlowFields, params: &IsothermalParams) -> Result<FastFields> {
    let bg = Background::new(slow, params)?;
    let d = bg.dim();
    let lam = &slow.lambda_hat;
    let lam_rho = lam.mul_scalar(&bg.inv_rho);
    let dlam = lam.d_theta();
    let us: ScalarField = (1..d).fold(&bg.u[0] * &bg.grad_s[0], |acc, a| &acc + &(&bg.u[a] * &bg.grad_s[a]));
    Ok(FastFields {
        alpha: VectorLoopField::from_components((0..d).map(|a| lam_rho.mul_scalar(&bg.u[a])).collect()),
        p: VectorLoopField::from_components(
            (0..d)
                .map(|a| {
                    let coef = &bg.grad_s[a].scale(bg.c * bg.c) - &(&bg.u[a] * &us);
                    dlam.mul_scalar(&coef).scale(-1.0)
                })
                .collect(),
        ),
        chi: lam_rho.mul_scalar(&bg.q),
    })
}

/// Leading fast vector field A(x)[y] + C(x).
pub fn fast_field_leading(slow: &SlowFields, y: &FastFields, params: &IsothermalParams) -> Result<FastFields> {
    Ok(apply_a(slow, y, params)?.add(&forcing_c(slow, params)?))
}

/// Leading slaving functions in terms of the density fluctuation:
/// α̂ = (e/K) I[ρ̂/ρ̄], p̂ = uρ̂ + cρ̂e, χ̂ = K⁻¹(e·∇χ̄ + u·e − c) I[ρ̂/ρ̄].
pub fn slaving_leading(slow: &SlowFields, rho_hat: &LoopField, params: &IsothermalParams) -> Result<FastFields> {
    let bg = Background::new(slow, params)?;
    slaving_with(&bg, rho_hat)
}

fn slaving_with(bg: &Background, rho_hat: &LoopField) -> Result<FastFields> {
    let d = bg.dim();
    let integ = rho_hat.mul_scalar(&bg.inv_rho).theta_antiderivative()?;
    let inv_k = bg.k.map(|v| 1.0 / v);
    let alpha = (0..d).map(|a| integ.mul_scalar(&(&bg.e[a] * &inv_k))).collect();
    let p = (0..d)
        .map(|a| rho_hat.mul_scalar(&(&bg.u[a] + &bg.e[a].scale(bg.c))))
        .collect();
    let coef = {
        let mut acc = ScalarField::constant(*bg.k.grid(), -bg.c);
        for a in 0..d {
            acc = &acc + &(&bg.e[a] * &(&bg.grad_chi[a] + &bg.u[a]));
        }
        &acc * &inv_k
    };
    Ok(FastFields {
        alpha: VectorLoopField::from_components(alpha),
        p: VectorLoopField::from_components(p),
        chi: integ.mul_scalar(&coef),
    })
}

/// Leading slaving functions in terms of λ̂ (the slow variable).
///
/// On the slow manifold ρ̂ = ½(1 − s/c)λ̂, which turns this into
/// [`slaving_leading`].
pub fn slaving_leading_lambda(slow: &SlowFields, params: &IsothermalParams) -> Result<FastFields> {
    let bg = Background::new(slow, params)?;
    let c = bg.c;
    let factor = bg.inv_gap.map(|g| 0.5 / (g * c));
    slaving_with(&bg, &slow.lambda_hat.mul_scalar(&factor))
}

/// λ̂ = ρ̂ + p̂·∇S/(cK − u·∇S).
pub fn lambda_hat(slow_means: &SlowFields, rho_hat: &LoopField, p_hat: &VectorLoopField, params: &IsothermalParams) -> Result<LoopField> {
    let bg = Background::new(slow_means, params)?;
    let inv = &bg.inv_gap * &bg.k.map(|k| 1.0 / k);
    let coef: Vec<ScalarField> = bg.grad_s.iter().map(|gs| gs * &inv).collect();
    Ok(rho_hat.add(&bg.contract(&coef, p_hat)))
}

/// Newton solve of y + d̄(y) = target, starting from `y`.
fn invert_mean_map(interps: &[crate::torus_field::SpectralInterpolant], target: [f64; 2], mut y: [f64; 2], d: usize) -> [f64; 2] {
    for _ in 0..50 {
        let mut f = [0.0; 2];
        let mut jac = [[0.0; 2]; 2];
        for a in 0..d {
            let (v, gr) = interps[a].eval_with_gradient(y);
            f[a] = y[a] + v - target[a];
            for b in 0..d {
                jac[a][b] = if a == b { 1.0 } else { 0.0 } + gr[b];
            }
        }
        let step = if d == 1 {
            [f[0] / jac[0][0], 0.0]
        } else {
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            [
                (jac[1][1] * f[0] - jac[0][1] * f[1]) / det,
                (jac[0][0] * f[1] - jac[1][0] * f[0]) / det,
            ]
        };
        y[0] -= step[0];
        y[1] -= step[1];
        if step[0].abs() + step[1].abs() < 1e-15 * (1.0 + y[0].abs() + y[1].abs()) {
            break;
        }
    }
    y
}

/// Split label displacements h̃ − x into a mean displacement d̄ and a
/// zero-θ-mean α̂ with x + d̃ = (id + d̄)(x + ε²α̂).
pub fn split_labels(h: &VectorLoopField, eps: f64) -> Result<(VectorField, VectorLoopField)> {
    let g = *h.grid();
    let d = g.dim();
    let nt = g.n_theta();
    let ns = g.n_space();
    let eps2 = eps * eps;
    let disp: Vec<Vec<f64>> = h.comps().iter().map(|c| c.values()).collect();
    let scale = g.lengths().iter().cloned().fold(0.0, f64::max);
    let mut mean = h.theta_average();
    let mut shift = vec![vec![0.0; ns * nt]; d];
    for _ in 0..60 {
        let trivial = mean.comps().iter().all(|c| c.max_abs() == 0.0);
        let interps: Vec<_> = mean.comps().iter().map(|c| c.interpolant()).collect();
        for q in 0..ns * nt {
            let x = g.point(q / nt);
            let mut target = x;
            for a in 0..d {
                target[a] += disp[a][q];
            }
            let y = if trivial {
                target
            } else {
                let mut guess = x;
                for a in 0..d {
                    guess[a] += shift[a][q];
                }
                invert_mean_map(&interps, target, guess, d)
            };
            for a in 0..d {
                shift[a][q] = y[a] - x[a];
            }
        }
        // θ-mean of the shift must vanish; absorb it into the mean map.
        let bias: Vec<ScalarField> = (0..d)
            .map(|a| {
                ScalarField::from_vec_unchecked(
                    g,
                    (0..ns).map(|p| shift[a][p * nt..(p + 1) * nt].iter().sum::<f64>() / nt as f64).collect(),
                )
            })
            .collect();
        let worst = bias.iter().map(|b| b.max_abs()).fold(0.0, f64::max);
        if worst <= 1e-15 * scale {
            break;
        }
        let old: Vec<_> = mean.comps().iter().map(|c| c.interpolant()).collect();
        let comps = (0..d)
            .map(|a| {
                ScalarField::from_vec_unchecked(
                    g,
                    (0..ns)
                        .map(|p| {
                            let x = g.point(p);
                            let mut z = x;
                            for (b, bb) in bias.iter().enumerate() {
                                z[b] += bb.values()[p];
                            }
                            bias[a].values()[p] + old[a].eval(z)
                        })
                        .collect(),
                )
            })
            .collect();
        mean = VectorField::from_components(comps);
    }
    let alpha = shift
        .iter()
        .map(|s| LoopField::from_values(g, &s.iter().map(|v| v / eps2).collect::<Vec<_>>()).map(|f| f.fluctuation()))
        .collect::<Result<Vec<_>>>()?;
    Ok((mean, VectorLoopField::from_components(alpha)))
}

/// Decompose an extended state into slow and fast blocks.
pub fn split_state(ext: &ExtendedState, params: &IsothermalParams) -> Result<FastSlowSplit> {
    let eps = ext.eps;
    let rho_bar = ext.rho.theta_average();
    let rho_hat = ext.rho.fluctuation().scale(1.0 / eps);
    let p_bar = ext.p.theta_average();
    let p_hat = ext.p.map(|c| c.fluctuation().scale(1.0 / eps));
    let chi_bar = ext.chi.theta_average();
    let chi_hat = ext.chi.fluctuation().scale(1.0 / (eps * eps));
    let (h_bar, alpha) = split_labels(&ext.h, eps)?;
    let mut slow = SlowFields::from_mean(rho_bar, p_bar, chi_bar, h_bar, ext.phase.clone());
    slow.lambda_hat = lambda_hat(&slow, &rho_hat, &p_hat, params)?;
    Ok(FastSlowSplit {
        slow,
        fast: FastFields { alpha, p: p_hat, chi: chi_hat },
        rho_hat,
        eps,
    })
}

/// Largest pointwise residuals of the leading-order fluctuation equations
/// (continuity, momentum) for the slaved p̂ and the eikonal ∂ₜS:
///
/// ```text
/// ∂ₜS ∂θρ̂ + ∇S·∂θp̂ = 0
/// [(∂ₜS + u·∇S)I + u⊗∇S]·∂θp̂ − ((∇S·u)u − c²∇S)∂θρ̂ = 0
/// ```
pub fn eigen_residuals(slow: &SlowFields, rho_hat: &LoopField, params: &IsothermalParams) -> Result<(f64, f64)> {
    let bg = Background::new(slow, params)?;
    let d = bg.dim();
    let c = bg.c;
    let y = slaving_with(&bg, rho_hat)?;
    let us: ScalarField = (1..d).fold(&bg.u[0] * &bg.grad_s[0], |acc, a| &acc + &(&bg.u[a] * &bg.grad_s[a]));
    let sigma = &(-&us) - &bg.ck;
    let drho = rho_hat.d_theta();
    let dp = y.p.map(|f| f.d_theta());
    let gs_dp = bg.contract(&bg.grad_s, &dp);
    let cont = drho.mul_scalar(&sigma).add(&gs_dp);
    let omega = &sigma + &us;
    let mut mom = 0.0f64;
    for a in 0..d {
        let r = dp
            .comp(a)
            .mul_scalar(&omega)
            .add(&gs_dp.mul_scalar(&bg.u[a]))
            .sub(&drho.mul_scalar(&(&(&us * &bg.u[a]) - &bg.grad_s[a].scale(c * c))));
        mom = mom.max(max_abs_values(&r));
    }
    Ok((max_abs_values(&cont), mom))
}

fn max_abs_values(f: &LoopField) -> f64 {
    f.values().iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Finite-difference tendencies of an extended state along its own flow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tendencies {
    /// ε‖d/dt (y₀*(x) − y)‖: the invariance-equation residual.
    pub invariance: f64,
    /// ε‖dy/dt‖.
    pub fast: f64,
    /// ‖dλ̂/dt‖.
    pub lambda: f64,
}

/// Central differences of the split along Z ± δ·Ż, where Ż is the extended
/// right-hand side.
pub fn tendencies(
    ext: &ExtendedState,
    ham: &dyn HamiltonianSpec,
    closure: &dyn PhaseClosure,
    params: &IsothermalParams,
    fd_step: f64,
) -> Result<Tendencies> {
    let rates = rhs_extended(ext, ham, closure)?;
    let probe = |z: &ExtendedState| -> Result<(FastFields, FastFields, LoopField)> {
        let split = split_state(z, params)?;
        let slaved = slaving_leading_lambda(&split.slow, params)?;
        Ok((slaved.sub(&split.fast), split.fast, split.slow.lambda_hat))
    };
    let (dp, fp, lp) = probe(&ext.displaced(fd_step, &rates))?;
    let (dm, fm, lm) = probe(&ext.displaced(-fd_step, &rates))?;
    let inv = 0.5 / fd_step;
    Ok(Tendencies {
        invariance: ext.eps * dp.sub(&dm).scale(inv).rms(),
        fast: ext.eps * fp.sub(&fm).scale(inv).rms(),
        lambda: lp.sub(&lm).scale(inv).rms(),
    })
}

/// ε‖d/dt (y₀*(x(Z)) − y(Z))‖ at the state Z; O(ε) on the slow manifold.
pub fn invariance_residual(
    ext: &ExtendedState,
    ham: &dyn HamiltonianSpec,
    closure: &dyn PhaseClosure,
    params: &IsothermalParams,
    fd_step: f64,
) -> Result<f64> {
    Ok(tendencies(ext, ham, closure, params, fd_step)?.invariance)
}
