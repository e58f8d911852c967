#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use wkbflow_core::slow_manifold::{FastFields, SlowFields};
use wkbflow_core::torus_field::{LoopField, PhaseField, ScalarField, TorusGrid, VectorField, VectorLoopField};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn grid_1d() -> TorusGrid {
    TorusGrid::line(2.0 * PI, 32, 16).unwrap()
}

pub fn grid_2d() -> TorusGrid {
    TorusGrid::new(&[2.0 * PI, 4.0], &[16, 12], 16).unwrap()
}

/// Random trigonometric polynomial in x with modes |m| ≤ 2, scaled so that
/// its sup-norm is at most `amp`.
pub fn smooth(g: TorusGrid, r: &mut impl Rng, amp: f64) -> ScalarField {
    let mut terms = Vec::new();
    let m1 = if g.dim() == 2 { 2 } else { 0 };
    for m0 in -2i32..=2 {
        for m1 in -m1..=m1 {
            if m0 == 0 && m1 == 0 {
                continue;
            }
            terms.push((m0 as f64, m1 as f64, r.gen_range(-1.0f64..1.0), r.gen_range(0.0..2.0 * PI)));
        }
    }
    let norm: f64 = terms.iter().map(|t| t.2.abs()).sum();
    let (l0, l1) = (g.length(0), g.length(1));
    ScalarField::from_fn(g, |x| {
        terms
            .iter()
            .map(|&(a, b, c, ph)| c * (2.0 * PI * (a * x[0] / l0 + b * x[1] / l1) + ph).cos())
            .sum::<f64>()
            * amp
            / norm
    })
}

/// Zero-θ-mean loop field with harmonics 1..=3 and smooth x-dependence.
pub fn zero_mean_loop(g: TorusGrid, r: &mut impl Rng) -> LoopField {
    let coefs: Vec<(ScalarField, ScalarField)> = (0..3)
        .map(|_| {
            let a = smooth(g, r, 1.0).map(|v| v + 0.5);
            let b = smooth(g, r, 1.0);
            (a, b)
        })
        .collect();
    let nt = g.n_theta();
    let mut vals = vec![0.0; g.n_space() * nt];
    for (q, v) in vals.iter_mut().enumerate() {
        let (p, j) = (q / nt, q % nt);
        let th = 2.0 * PI * j as f64 / nt as f64;
        for (n, (a, b)) in coefs.iter().enumerate() {
            let n = (n + 1) as f64;
            *v += a.values()[p] * (n * th).cos() + b.values()[p] * (n * th).sin();
        }
    }
    LoopField::from_values(g, &vals).unwrap()
}

pub fn zero_mean_vector(g: TorusGrid, r: &mut impl Rng) -> VectorLoopField {
    VectorLoopField::new((0..g.dim()).map(|_| zero_mean_loop(g, r)).collect()).unwrap()
}

pub fn random_fast(g: TorusGrid, r: &mut impl Rng) -> FastFields {
    FastFields {
        alpha: zero_mean_vector(g, r),
        p: zero_mean_vector(g, r),
        chi: zero_mean_loop(g, r),
    }
}

pub fn winding(g: TorusGrid) -> Vec<i64> {
    if g.dim() == 1 {
        vec![3]
    } else {
        vec![2, 1]
    }
}

/// Random smooth background with subsonic flow (|u| ≤ 0.3c), ρ̄ ∈ [0.8, 1.2]
/// and a phase whose periodic part is a small perturbation of the winding.
pub fn random_slow(g: TorusGrid, r: &mut impl Rng, c: f64, with_flow: bool) -> SlowFields {
    let rho = smooth(g, r, 0.2).map(|v| 1.0 + v);
    let flow = if with_flow { 0.3 * c / (g.dim() as f64).sqrt() } else { 0.0 };
    let p = VectorField::new((0..g.dim()).map(|_| &smooth(g, r, flow) * &rho).collect()).unwrap();
    let chi = smooth(g, r, 0.5);
    let h = VectorField::zeros(g);
    let phase = PhaseField::new(&winding(g), smooth(g, r, 0.1)).unwrap();
    SlowFields::from_mean(rho, p, chi, h, phase)
}

pub fn rel(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        num
    } else {
        num / den
    }
}
