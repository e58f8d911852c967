mod common;

use common::*;
use proptest::prelude::*;
use std::f64::consts::PI;
use wkbflow_core::hamiltonian::{derivative_mismatch, isothermal_hamiltonian, Capillary, HamiltonianSpec, IsothermalParams};
use wkbflow_core::slow_manifold::{apply_a, slaving_leading};
use wkbflow_core::snapshot::{Snapshot, SnapshotField};
use wkbflow_core::torus_field::{grad_s, LoopField, PhaseField, TorusGrid};

fn cfg() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn antiderivative_inverts_theta_derivative(seed in any::<u64>(), two_d in any::<bool>()) {
        let g = if two_d { grid_2d() } else { grid_1d() };
        let f = zero_mean_loop(g, &mut rng(seed));
        let back = f.theta_antiderivative().unwrap().d_theta();
        prop_assert!(back.sub(&f).rms() < 1e-12 * f.rms());
        let shifted = f.add(&LoopField::from_scalar(&smooth(g, &mut rng(seed ^ 1), 1.0)));
        let again = shifted.d_theta().theta_antiderivative().unwrap();
        prop_assert!(again.sub(&shifted.fluctuation()).rms() < 1e-12 * f.rms());
        prop_assert!(f.theta_antiderivative().unwrap().theta_average().max_abs() < 1e-14);
    }

    #[test]
    fn phase_shift_round_trips_and_keeps_means(seed in any::<u64>(), scale in -20.0f64..20.0) {
        let g = grid_2d();
        let mut r = rng(seed);
        let f = zero_mean_loop(g, &mut r).add(&LoopField::from_scalar(&smooth(g, &mut r, 1.0)));
        let s = PhaseField::new(&[1, -2], smooth(g, &mut r, 0.5)).unwrap();
        let there = f.phase_shift(&s, scale);
        let back = there.phase_shift(&s, -scale);
        prop_assert!(back.sub(&f).rms() < 1e-12 * f.rms());
        prop_assert!((&there.theta_average() - &f.theta_average()).max_abs() < 1e-14);
        prop_assert!((there.rms() - f.rms()).abs() < 1e-12 * f.rms());
    }

    #[test]
    fn shifted_gradient_obeys_chain_rule(seed in any::<u64>(), w in 1i64..3, m in 1usize..3) {
        // band-limited case: S = w x and ε = 1/m, so every shifted field is
        // resolved on the grid
        let g = TorusGrid::line(2.0 * PI, 64, 8).unwrap();
        let eps = 1.0 / m as f64;
        let f = zero_mean_loop(g, &mut rng(seed));
        let s = PhaseField::linear(g, &[w]).unwrap();
        let lhs = f.phase_shift(&s, 1.0 / eps).deriv(0).unwrap();
        let rhs = grad_s(&f, &s, eps).comp(0).phase_shift(&s, 1.0 / eps);
        prop_assert!(lhs.sub(&rhs).rms() < 1e-10 * rhs.rms());
    }

    #[test]
    fn dealiasing_is_idempotent(seed in any::<u64>()) {
        let g = grid_2d();
        let f = zero_mean_loop(g, &mut rng(seed)).dealiased();
        prop_assert!(f.dealiased().sub(&f).rms() <= 1e-15 * f.rms());
    }

    #[test]
    fn hamiltonian_derivatives_match_finite_differences(
        p0 in -2.0f64..2.0, p1 in -2.0f64..2.0, rho in 0.2f64..3.0,
        g0 in -1.0f64..1.0, g1 in -1.0f64..1.0, c in 0.3f64..3.0, kappa in 0.0f64..0.5,
    ) {
        let base = isothermal_hamiltonian(IsothermalParams::new(c, 1.3).unwrap());
        let cap = Capillary { base, kappa };
        for spec in [&base as &dyn HamiltonianSpec, &cap] {
            prop_assert!(derivative_mismatch(spec, [p0, p1], rho, [g0, g1], 1e-6) < 1e-6);
        }
        // Legendre identity H = v·p − L with L = ρ|v|²/2 − c²ρ ln(ρ/ρ₀)
        let v = base.d_p([p0, p1], rho, [0.0; 2]);
        let lag = 0.5 * rho * (v[0] * v[0] + v[1] * v[1]) - c * c * rho * (rho / 1.3).ln();
        let h = base.eval([p0, p1], rho, [0.0; 2]);
        prop_assert!((h - (v[0] * p0 + v[1] * p1 - lag)).abs() < 1e-12 * (1.0 + h.abs()));
        // convex in p with curvature 1/ρ
        let d = 1e-3;
        let second = base.eval([p0 + d, p1], rho, [0.0; 2]) - 2.0 * h + base.eval([p0 - d, p1], rho, [0.0; 2]);
        prop_assert!(second > 0.0);
        prop_assert!((second / (d * d) - 1.0 / rho).abs() < 1e-5 / rho);
    }

    #[test]
    fn fast_operator_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let g = grid_1d();
        let mut r = rng(seed);
        let pr = IsothermalParams::new(1.0, 1.0).unwrap();
        let slow = random_slow(g, &mut r, 1.0, true);
        let (y1, y2) = (random_fast(g, &mut r), random_fast(g, &mut r));
        let lhs = apply_a(&slow, &y1.scale(a).axpy(b, &y2), &pr).unwrap();
        let rhs = apply_a(&slow, &y1, &pr).unwrap().scale(a).axpy(b, &apply_a(&slow, &y2, &pr).unwrap());
        prop_assert!(lhs.sub(&rhs).rms() <= 1e-12 * (1.0 + rhs.rms()));
    }

    #[test]
    fn slaved_fields_have_zero_mean(seed in any::<u64>()) {
        let g = grid_2d();
        let mut r = rng(seed);
        let pr = IsothermalParams::new(1.2, 1.0).unwrap();
        let slow = random_slow(g, &mut r, 1.2, true);
        let y = slaving_leading(&slow, &zero_mean_loop(g, &mut r), &pr).unwrap();
        prop_assert!(y.max_theta_mean() < 1e-13);
    }

    #[test]
    fn snapshots_round_trip(seed in any::<u64>(), t in -1e3f64..1e3) {
        let g = grid_2d();
        let mut r = rng(seed);
        let mut snap = Snapshot::new(g, t);
        snap.push("s", SnapshotField::Scalar(smooth(g, &mut r, 2.0)));
        snap.push("l", SnapshotField::Loop(zero_mean_loop(g, &mut r)));
        snap.push("S", SnapshotField::Phase(PhaseField::new(&[3, -1], smooth(g, &mut r, 1.0)).unwrap()));
        let mut buf = Vec::new();
        snap.write_to(&mut buf).unwrap();
        let back = Snapshot::read_from(buf.as_slice()).unwrap();
        prop_assert_eq!(back.get("s"), snap.get("s"));
        prop_assert_eq!(back.get("S"), snap.get("S"));
        match (back.get("l"), snap.get("l")) {
            (Some(SnapshotField::Loop(a)), Some(SnapshotField::Loop(b))) => prop_assert!(a.sub(b).rms() < 1e-14 * b.rms()),
            _ => prop_assert!(false),
        }
    }
}
