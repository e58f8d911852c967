mod common;

use common::*;
use std::f64::consts::PI;
use wkbflow_core::hamiltonian::{isothermal_hamiltonian, Capillary, Isothermal, IsothermalParams};
use wkbflow_core::lbep::*;
use wkbflow_core::torus_field::{ScalarField, TorusGrid, VectorField};

fn iso(c: f64) -> Isothermal {
    isothermal_hamiltonian(IsothermalParams::new(c, 1.0).unwrap())
}

/// Small-amplitude travelling wave ρ' = a cos kx on uniform flow u0, moving
/// with velocity u0 + sign·c.
fn travelling(n_x: usize, k: usize, u0: f64, c: f64, sign: f64) -> BaseState {
    let g = TorusGrid::line(2.0 * PI, n_x, 8).unwrap();
    let a = 1e-4;
    let rho = ScalarField::from_fn(g, |x| 1.0 + a * (k as f64 * x[0]).cos());
    let p = ScalarField::from_fn(g, |x| u0 + (u0 + sign * c) * a * (k as f64 * x[0]).cos());
    BaseState::new(rho, VectorField::new(vec![p]).unwrap(), VectorField::zeros(g), ScalarField::zeros(g), 0.0).unwrap()
}

/// Angular frequency of mode k, from the unwrapped phase of its Fourier
/// coefficient over `periods` nominal periods.
fn measured_frequency(mut s: BaseState, ham: &Isothermal, k: usize, omega_guess: f64, periods: f64) -> f64 {
    let t_end = periods * 2.0 * PI / omega_guess.abs();
    let n = (t_end / cfl_limit(&s, ham, 0.4)).ceil() as usize;
    let dt = t_end / n as f64;
    let angle = |s: &BaseState| s.rho.coefficients()[k].arg();
    let mut prev = angle(&s);
    let mut total = 0.0;
    for _ in 0..n {
        s = step_rk4(&s, ham, dt).unwrap();
        let a = angle(&s);
        let mut d = a - prev;
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        total += d;
        prev = a;
    }
    // coefficient of e^{ikx} evolves as e^{−iωt}
    -total / t_end
}

#[test]
fn acoustic_dispersion() {
    let (c, k) = (1.3, 3);
    let ham = iso(c);
    let omega = measured_frequency(travelling(128, k, 0.0, c, 1.0), &ham, k, c * k as f64, 10.0);
    assert!((omega - c * k as f64).abs() < 0.01 * c * k as f64, "{omega}");
}

#[test]
fn doppler_shifted_dispersion() {
    let (c, k, u0) = (1.0, 2, 0.4);
    let ham = iso(c);
    for sign in [1.0, -1.0] {
        let expect = (u0 + sign * c) * k as f64;
        let omega = measured_frequency(travelling(128, k, u0, c, sign), &ham, k, expect, 10.0);
        assert!((omega - expect).abs() < 0.01 * expect.abs(), "{omega} vs {expect}");
    }
}

fn random_state(g: TorusGrid, seed: u64) -> BaseState {
    let mut r = rng(seed);
    let rho = smooth(g, &mut r, 0.2).map(|v| 1.0 + v);
    let p = VectorField::new((0..g.dim()).map(|_| smooth(g, &mut r, 0.2).map(|v| v + 0.3)).collect()).unwrap();
    BaseState::new(rho, p, VectorField::zeros(g), ScalarField::zeros(g), 0.0).unwrap()
}

#[test]
fn conservation_over_a_thousand_steps() {
    let ham = iso(1.0);
    for g in [grid_1d(), grid_2d()] {
        let mut s = random_state(g, 1);
        let (m0, p0) = (mass(&s), momentum(&s));
        let dt = 1e-3;
        for _ in 0..1000 {
            s = step_rk4(&s, &ham, dt).unwrap();
        }
        assert!((mass(&s) - m0).abs() < 1e-10 * m0);
        for (a, b) in momentum(&s).iter().zip(&p0) {
            assert!((a - b).abs() < 1e-10 * b.abs(), "{a} {b}");
        }
    }
}

#[test]
fn energy_drift_is_small_and_converges() {
    let ham = iso(1.0);
    let g = TorusGrid::line(2.0 * PI, 64, 8).unwrap();
    let s0 = random_state(g, 2);
    let e0 = energy(&s0, &ham);
    let drift = |steps: usize| {
        let dt = 1.0 / steps as f64;
        let mut s = s0.clone();
        for _ in 0..steps {
            s = step_rk4(&s, &ham, dt).unwrap();
        }
        ((energy(&s, &ham) - e0) / e0).abs()
    };
    let (coarse, fine) = (drift(100), drift(200));
    assert!(fine < 1e-8, "{fine:e}");
    // fourth-order convergence, with room for round-off
    assert!(fine < coarse / 8.0 || fine < 1e-12, "{coarse:e} {fine:e}");
}

#[test]
fn kelvin_circulation_is_invariant() {
    let ham = iso(1.0);
    let g = TorusGrid::line(2.0 * PI, 64, 8).unwrap();
    let mut s = random_state(g, 3);
    let c0 = circulation_base(&s)[0];
    for _ in 0..500 {
        s = step_rk4(&s, &ham, 2e-3).unwrap();
    }
    assert!((circulation_base(&s)[0] - c0).abs() < 1e-10 * c0.abs());
}

#[test]
fn momentum_rate_integrates_to_zero() {
    let ham = iso(1.5);
    for g in [grid_1d(), grid_2d()] {
        let r = rhs_base(&random_state(g, 4), &ham).unwrap();
        for c in r.p.comps() {
            assert!(c.integral().abs() < 1e-11);
        }
    }
}

#[test]
fn density_and_momentum_ignore_passive_fields() {
    let ham = iso(1.0);
    let g = grid_2d();
    let s = random_state(g, 5);
    let mut t = s.clone();
    let mut r = rng(6);
    t.h = VectorField::new(vec![smooth(g, &mut r, 0.1), smooth(g, &mut r, 0.1)]).unwrap();
    t.chi = smooth(g, &mut r, 1.0);
    let (a, b) = (rhs_base(&s, &ham).unwrap(), rhs_base(&t, &ham).unwrap());
    assert_eq!(a.rho, b.rho);
    assert_eq!(a.p, b.p);
}

#[test]
fn capillary_energy_is_conserved() {
    let base = iso(1.0);
    let ham = Capillary { base, kappa: 0.01 };
    let g = TorusGrid::line(2.0 * PI, 64, 8).unwrap();
    let mut s = random_state(g, 7);
    let e0 = energy(&s, &ham);
    let dt = 0.5 * cfl_limit(&s, &ham, 0.4);
    let n = (0.5 / dt).ceil() as usize;
    for _ in 0..n {
        s = step_rk4(&s, &ham, 0.5 / n as f64).unwrap();
    }
    assert!(((energy(&s, &ham) - e0) / e0).abs() < 1e-7);
}

#[test]
fn folded_labels_are_rejected() {
    let g = grid_1d();
    let h = VectorField::new(vec![ScalarField::from_fn(g, |x| 2.0 * x[0].sin())]).unwrap();
    let r = BaseState::new(ScalarField::constant(g, 1.0), VectorField::zeros(g), h, ScalarField::zeros(g), 0.0);
    assert!(matches!(r, Err(wkbflow_core::Error::SingularLabelMap { .. })));
}
