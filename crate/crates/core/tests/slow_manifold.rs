mod common;

use common::*;
use std::f64::consts::PI;
use wkbflow_core::extension::init_slow_manifold;
use wkbflow_core::hamiltonian::IsothermalParams;
use wkbflow_core::slow_manifold::*;
use wkbflow_core::torus_field::{LoopField, ScalarField, TorusGrid, VectorField, VectorLoopField};
use wkbflow_core::wave_mean_flow::MeanWaveState;
use wkbflow_core::Error;

fn params(c: f64) -> IsothermalParams {
    IsothermalParams::new(c, 1.0).unwrap()
}

fn grids() -> [TorusGrid; 2] {
    [grid_1d(), grid_2d()]
}

#[test]
fn inverse_round_trips_with_mean_flow() {
    for (seed, g) in grids().into_iter().enumerate() {
        let mut r = rng(seed as u64 + 10);
        let pr = params(1.3);
        let slow = random_slow(g, &mut r, pr.c_s, true);
        let y = random_fast(g, &mut r);
        let ay = apply_a(&slow, &y, &pr).unwrap();
        assert!(ay.max_theta_mean() < 1e-12);
        let back = invert_a(&slow, &ay, &pr).unwrap();
        let e1 = back.sub(&y).rms() / y.rms();
        let dy = random_fast(g, &mut r);
        let fwd = apply_a(&slow, &invert_a(&slow, &dy, &pr).unwrap(), &pr).unwrap();
        let e2 = fwd.sub(&dy).rms() / dy.rms();
        assert!(e1 < 1e-10 && e2 < 1e-10, "d = {}: {e1:e} {e2:e}", g.dim());
    }
}

#[test]
fn apply_a_is_linear() {
    let g = grid_2d();
    let mut r = rng(3);
    let pr = params(1.0);
    let slow = random_slow(g, &mut r, 1.0, true);
    let (y1, y2) = (random_fast(g, &mut r), random_fast(g, &mut r));
    let lhs = apply_a(&slow, &y1.scale(0.7).axpy(-1.9, &y2), &pr).unwrap();
    let rhs = apply_a(&slow, &y1, &pr).unwrap().scale(0.7).axpy(-1.9, &apply_a(&slow, &y2, &pr).unwrap());
    assert!(lhs.sub(&rhs).rms() < 1e-12 * rhs.rms());
    assert_eq!(apply_a(&slow, &FastFields::zeros(g), &pr).unwrap().rms(), 0.0);
}

#[test]
fn momentum_inverse_at_rest_matches_direct_solve() {
    // Without mean flow the momentum block is cK (𝕀 + e⊗e)∂θ, solved
    // directly by splitting into parallel and perpendicular parts.
    let g = grid_2d();
    let mut r = rng(4);
    let pr = params(0.8);
    let slow = random_slow(g, &mut r, pr.c_s, false);
    let dp = zero_mean_vector(g, &mut r);
    let mut dy = FastFields::zeros(g);
    dy.p = dp.clone();
    let got = invert_a(&slow, &dy, &pr).unwrap();
    let gs = slow.phase.gradient();
    let k = gs.norm();
    let e: Vec<ScalarField> = gs.comps().iter().map(|c| c.zip_map(&k, |a, b| a / b)).collect();
    let ck = k.scale(pr.c_s).map(|v| 1.0 / v);
    let ip: Vec<LoopField> = dp.comps().iter().map(|c| c.theta_antiderivative().unwrap()).collect();
    let par = ip[0].mul_scalar(&e[0]).add(&ip[1].mul_scalar(&e[1]));
    for a in 0..2 {
        let expect = ip[a].sub(&par.mul_scalar(&e[a]).scale(0.5)).mul_scalar(&ck);
        assert!(got.p.comp(a).sub(&expect).rms() < 1e-13);
    }
}

#[test]
fn invert_rejects_nonzero_mean() {
    let g = grid_1d();
    let mut r = rng(5);
    let slow = random_slow(g, &mut r, 1.0, true);
    let mut dy = FastFields::zeros(g);
    dy.chi = LoopField::from_fn(g, |_, t| 1.0 + t.cos());
    assert!(matches!(invert_a(&slow, &dy, &params(1.0)), Err(Error::MeanNotZero { .. })));
}

#[test]
fn lambda_slaving_solves_leading_fast_equation() {
    for (seed, g) in grids().into_iter().enumerate() {
        let mut r = rng(20 + seed as u64);
        let pr = params(1.1);
        let mut slow = random_slow(g, &mut r, pr.c_s, true);
        slow.lambda_hat = zero_mean_loop(g, &mut r);
        let y = slaving_leading_lambda(&slow, &pr).unwrap();
        let c = forcing_c(&slow, &pr).unwrap();
        let res = fast_field_leading(&slow, &y, &pr).unwrap();
        assert!(res.rms() < 1e-12 * c.rms(), "d = {}: {:e}", g.dim(), res.rms() / c.rms());
    }
}

#[test]
fn slaving_forms_agree() {
    let g = grid_2d();
    let mut r = rng(6);
    let pr = params(1.0);
    let mut slow = random_slow(g, &mut r, 1.0, true);
    let rho_hat = zero_mean_loop(g, &mut r);
    let y = slaving_leading(&slow, &rho_hat, &pr).unwrap();
    slow.lambda_hat = lambda_hat(&slow, &rho_hat, &y.p, &pr).unwrap();
    let z = slaving_leading_lambda(&slow, &pr).unwrap();
    assert!(z.sub(&y).rms() < 1e-13 * y.rms());
    assert!(y.max_theta_mean() < 1e-13);
}

#[test]
fn eigen_relations_hold_on_random_backgrounds() {
    for (seed, g) in grids().into_iter().enumerate() {
        let mut r = rng(30 + seed as u64);
        let slow = random_slow(g, &mut r, 1.4, true);
        let rho_hat = zero_mean_loop(g, &mut r);
        let (cont, mom) = eigen_residuals(&slow, &rho_hat, &params(1.4)).unwrap();
        assert!(cont < 1e-11 && mom < 1e-11, "{cont:e} {mom:e}");
    }
}

#[test]
fn resonant_background_is_rejected() {
    let g = grid_1d();
    let k = 3.0;
    let slow = SlowFields::from_mean(
        ScalarField::constant(g, 1.0),
        VectorField::new(vec![ScalarField::constant(g, 1.0)]).unwrap(),
        ScalarField::zeros(g),
        VectorField::zeros(g),
        wkbflow_core::torus_field::PhaseField::linear(g, &[k as i64]).unwrap(),
    );
    let rho_hat = LoopField::from_fn(g, |_, t| t.cos());
    let p_hat = VectorLoopField::new(vec![rho_hat.clone()]).unwrap();
    assert!(matches!(lambda_hat(&slow, &rho_hat, &p_hat, &params(1.0)), Err(Error::ResonantDenominator { .. })));
}

fn mean_state(g: TorusGrid, eps: f64) -> MeanWaveState {
    let mut r = rng(40);
    let slow = random_slow(g, &mut r, 1.0, true);
    MeanWaveState::new(
        slow.rho_bar,
        slow.p_bar,
        slow.chi_bar,
        ScalarField::zeros(g),
        slow.phase,
        eps,
        0.0,
    )
    .unwrap()
}

#[test]
fn split_recovers_initial_fluctuations() {
    for g in grids() {
        let eps = 1.0 / 16.0;
        let mean = mean_state(g, eps);
        let mut r = rng(41);
        let rho_hat = zero_mean_loop(g, &mut r).scale(0.3);
        let pr = params(1.0);
        let ext = init_slow_manifold(&mean, &rho_hat, &pr, eps).unwrap();
        let split = split_state(&ext, &pr).unwrap();
        assert!(split.rho_hat.sub(&rho_hat).rms() < 1e-12);
        assert!((&split.slow.rho_bar - &mean.rho).max_abs() < 1e-12);
        let slaved = slaving_leading(&split.slow, &rho_hat, &pr).unwrap();
        assert!(split.fast.p.zip(&slaved.p, |a, b| a.sub(b)).max_fluctuation() < 1e-12);
        assert!(split.fast.alpha.zip(&slaved.alpha, |a, b| a.sub(b)).max_fluctuation() < 1e-9);
        assert!(split.slow.h_bar.comps().iter().all(|c| c.max_abs() < 1e-12));
    }
}

#[test]
fn theta_independent_state_has_no_fast_part() {
    let g = grid_1d();
    let mean = mean_state(g, 0.1);
    let ext = init_slow_manifold(&mean, &LoopField::zeros(g), &params(1.0), 0.1).unwrap();
    let split = split_state(&ext, &params(1.0)).unwrap();
    assert_eq!(split.fast.rms(), 0.0);
    assert_eq!(split.slow.lambda_hat.rms(), 0.0);
}

#[test]
fn rest_lambda_specialisation() {
    let g = grid_1d();
    let k = 2.0;
    let slow = SlowFields::from_mean(
        ScalarField::constant(g, 1.0),
        VectorField::zeros(g),
        ScalarField::zeros(g),
        VectorField::zeros(g),
        wkbflow_core::torus_field::PhaseField::linear(g, &[k as i64]).unwrap(),
    );
    let rho_hat = LoopField::from_fn(g, |x, t| x[0].sin() * (2.0 * t).cos());
    let p_hat = VectorLoopField::new(vec![LoopField::from_fn(g, |_, t| (t - PI / 3.0).sin())]).unwrap();
    let c = 1.7;
    let l = lambda_hat(&slow, &rho_hat, &p_hat, &params(c)).unwrap();
    assert!(l.sub(&rho_hat.axpy(1.0 / c, p_hat.comp(0))).rms() < 1e-15);
}
