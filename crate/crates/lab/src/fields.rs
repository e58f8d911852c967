//! Seeded random smooth fields for the check suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use wkbflow_core::slow_manifold::{FastFields, SlowFields};
use wkbflow_core::torus_field::{LoopField, PhaseField, ScalarField, TorusGrid, VectorField, VectorLoopField};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Trigonometric polynomial with modes |m| ≤ 2 per axis and sup-norm ≤ `amp`.
pub fn smooth(g: TorusGrid, r: &mut impl Rng, amp: f64) -> ScalarField {
    let m1_max = if g.dim() == 2 { 2 } else { 0 };
    let mut terms = Vec::new();
    for m0 in -2i32..=2 {
        for m1 in -m1_max..=m1_max {
            if (m0, m1) != (0, 0) {
                terms.push((m0 as f64, m1 as f64, r.gen_range(-1.0f64..1.0), r.gen_range(0.0..2.0 * PI)));
            }
        }
    }
    let norm: f64 = terms.iter().map(|t| t.2.abs()).sum();
    let l = [g.length(0), if g.dim() == 2 { g.length(1) } else { 1.0 }];
    ScalarField::from_fn(g, |x| {
        let s: f64 = terms.iter().map(|&(a, b, c, ph)| c * (2.0 * PI * (a * x[0] / l[0] + b * x[1] / l[1]) + ph).cos()).sum();
        s * amp / norm
    })
}

/// Zero-mean loop field with θ-harmonics 1..=3 and smooth coefficients.
pub fn zero_mean_loop(g: TorusGrid, r: &mut impl Rng) -> LoopField {
    let coefs: Vec<(ScalarField, ScalarField)> = (0..3).map(|_| (smooth(g, r, 1.0).map(|v| v + 0.5), smooth(g, r, 1.0))).collect();
    let nt = g.n_theta();
    let vals: Vec<f64> = (0..g.n_space() * nt)
        .map(|q| {
            let (p, j) = (q / nt, q % nt);
            let th = 2.0 * PI * j as f64 / nt as f64;
            coefs
                .iter()
                .enumerate()
                .map(|(n, (a, b))| {
                    let n = (n + 1) as f64;
                    a.values()[p] * (n * th).cos() + b.values()[p] * (n * th).sin()
                })
                .sum()
        })
        .collect();
    LoopField::from_values(g, &vals).expect("matching length")
}

pub fn random_fast(g: TorusGrid, r: &mut impl Rng) -> FastFields {
    let alpha = VectorLoopField::new((0..g.dim()).map(|_| zero_mean_loop(g, r)).collect()).expect("same grid");
    let p = VectorLoopField::new((0..g.dim()).map(|_| zero_mean_loop(g, r)).collect()).expect("same grid");
    FastFields { alpha, p, chi: zero_mean_loop(g, r) }
}

/// Smooth subsonic background (|u| ≤ 0.3c when `with_flow`) with a phase of
/// winding [3] or [2, 1] plus a small periodic perturbation.
pub fn random_slow(g: TorusGrid, r: &mut impl Rng, c: f64, with_flow: bool) -> SlowFields {
    let rho = smooth(g, r, 0.2).map(|v| 1.0 + v);
    let flow = if with_flow { 0.3 * c / (g.dim() as f64).sqrt() } else { 0.0 };
    let p = VectorField::new((0..g.dim()).map(|_| &smooth(g, r, flow) * &rho).collect()).expect("same grid");
    let chi = smooth(g, r, 0.5);
    let winding: &[i64] = if g.dim() == 1 { &[3] } else { &[2, 1] };
    let phase = PhaseField::new(winding, smooth(g, r, 0.1)).expect("valid phase");
    SlowFields::from_mean(rho, p, chi, VectorField::zeros(g), phase)
}

pub fn grid_1d() -> TorusGrid {
    TorusGrid::line(2.0 * PI, 32, 16).expect("valid grid")
}

pub fn grid_2d() -> TorusGrid {
    TorusGrid::new(&[2.0 * PI, 4.0], &[16, 12], 16).expect("valid grid")
}
