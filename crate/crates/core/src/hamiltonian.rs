//! Hamiltonian densities H(p, ρ, ∇ρ) for barotropic fluids.
//!
//! Vectors are passed as `[f64; 2]`; in one dimension the second entry is
//! zero and never influences the result.

use crate::error::{Error, Result};

/// Two-entry vector used for momentum densities and gradients.
pub type Vector = [f64; 2];

#[inline]
fn dot(a: Vector, b: Vector) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Pluggable Hamiltonian density and its partial derivatives.
///
/// Every method requires ρ > 0; implementations need not check it.
pub trait HamiltonianSpec: Send + Sync {
    fn eval(&self, p: Vector, rho: f64, grad_rho: Vector) -> f64;
    /// ∂H/∂p (the fluid velocity).
    fn d_p(&self, p: Vector, rho: f64, grad_rho: Vector) -> Vector;
    /// ∂H/∂ρ.
    fn d_rho(&self, p: Vector, rho: f64, grad_rho: Vector) -> f64;
    /// ∂H/∂∇ρ.
    fn d_grad_rho(&self, p: Vector, rho: f64, grad_rho: Vector) -> Vector;
    /// Whether ∂H/∂∇ρ can be nonzero; solvers skip those terms otherwise.
    fn depends_on_grad_rho(&self) -> bool {
        true
    }
    /// Upper bound on the signal speed relative to the flow, used for CFL.
    fn wave_speed(&self, rho_max: f64, k_max: f64) -> f64;
}

/// Parameters of the isothermal density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsothermalParams {
    pub c_s: f64,
    pub rho_ref: f64,
}

impl IsothermalParams {
    pub fn new(c_s: f64, rho_ref: f64) -> Result<Self> {
        if !(c_s.is_finite() && c_s > 0.0) {
            return Err(Error::InvalidParameter(format!("c_s = {c_s} must be positive")));
        }
        if !(rho_ref.is_finite() && rho_ref > 0.0) {
            return Err(Error::InvalidParameter(format!("rho_ref = {rho_ref} must be positive")));
        }
        Ok(IsothermalParams { c_s, rho_ref })
    }
}

/// H = |p|²/(2ρ) + c_s² ρ ln(ρ/ρ₀).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Isothermal {
    pub params: IsothermalParams,
}

pub fn isothermal_hamiltonian(params: IsothermalParams) -> Isothermal {
    Isothermal { params }
}

impl HamiltonianSpec for Isothermal {
    fn eval(&self, p: Vector, rho: f64, _: Vector) -> f64 {
        let c2 = self.params.c_s * self.params.c_s;
        dot(p, p) / (2.0 * rho) + c2 * rho * (rho / self.params.rho_ref).ln()
    }

    fn d_p(&self, p: Vector, rho: f64, _: Vector) -> Vector {
        [p[0] / rho, p[1] / rho]
    }

    fn d_rho(&self, p: Vector, rho: f64, _: Vector) -> f64 {
        let c2 = self.params.c_s * self.params.c_s;
        -dot(p, p) / (2.0 * rho * rho) + c2 * ((rho / self.params.rho_ref).ln() + 1.0)
    }

    fn d_grad_rho(&self, _: Vector, _: f64, _: Vector) -> Vector {
        [0.0, 0.0]
    }

    fn depends_on_grad_rho(&self) -> bool {
        false
    }

    fn wave_speed(&self, _: f64, _: f64) -> f64 {
        self.params.c_s
    }
}

/// Isothermal density plus a capillary term κ|∇ρ|²/2.
///
/// Exercises the ∂H/∂∇ρ paths of the solvers; linear waves obey
/// ω² = c_s²k² + κρk⁴.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Capillary {
    pub base: Isothermal,
    pub kappa: f64,
}

impl HamiltonianSpec for Capillary {
    fn eval(&self, p: Vector, rho: f64, g: Vector) -> f64 {
        self.base.eval(p, rho, g) + 0.5 * self.kappa * dot(g, g)
    }

    fn d_p(&self, p: Vector, rho: f64, g: Vector) -> Vector {
        self.base.d_p(p, rho, g)
    }

    fn d_rho(&self, p: Vector, rho: f64, g: Vector) -> f64 {
        self.base.d_rho(p, rho, g)
    }

    fn d_grad_rho(&self, _: Vector, _: f64, g: Vector) -> Vector {
        [self.kappa * g[0], self.kappa * g[1]]
    }

    fn wave_speed(&self, rho_max: f64, k_max: f64) -> f64 {
        let c = self.base.params.c_s;
        (c * c + self.kappa.abs() * rho_max * k_max * k_max).sqrt()
    }
}

/// v = ∂H/∂p, guarded against non-positive density.
pub fn legendre_velocity(spec: &dyn HamiltonianSpec, p: Vector, rho: f64, grad_rho: Vector) -> Result<Vector> {
    if rho.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::NonPositiveDensity { min: rho, index: 0 });
    }
    Ok(spec.d_p(p, rho, grad_rho))
}

/// Largest relative mismatch between the analytic partial derivatives and
/// centered finite differences of `eval` with step `h`.
pub fn derivative_mismatch(spec: &dyn HamiltonianSpec, p: Vector, rho: f64, grad_rho: Vector, h: f64) -> f64 {
    let rel = |fd: f64, exact: f64| (fd - exact).abs() / exact.abs().max(1.0);
    let mut worst = 0.0f64;
    let dp = spec.d_p(p, rho, grad_rho);
    let dg = spec.d_grad_rho(p, rho, grad_rho);
    for a in 0..2 {
        let (mut pp, mut pm) = (p, p);
        pp[a] += h;
        pm[a] -= h;
        let fd = (spec.eval(pp, rho, grad_rho) - spec.eval(pm, rho, grad_rho)) / (2.0 * h);
        worst = worst.max(rel(fd, dp[a]));
        let (mut gp, mut gm) = (grad_rho, grad_rho);
        gp[a] += h;
        gm[a] -= h;
        let fd = (spec.eval(p, rho, gp) - spec.eval(p, rho, gm)) / (2.0 * h);
        worst = worst.max(rel(fd, dg[a]));
    }
    let fd = (spec.eval(p, rho + h, grad_rho) - spec.eval(p, rho - h, grad_rho)) / (2.0 * h);
    worst.max(rel(fd, spec.d_rho(p, rho, grad_rho)))
}
