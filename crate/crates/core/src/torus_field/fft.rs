//! Thin FFT plumbing over `rustfft`: per-thread planners, multi-axis
//! transforms of row-major spatial arrays, and spectral multipliers.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::TorusGrid;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Signed mode number for FFT bin `j` of an `n`-point transform.
/// The Nyquist bin maps to `-n/2`.
#[inline]
pub(crate) fn signed_mode(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Largest |mode| kept by the 2/3 rule: quadratic products of kept modes
/// never alias back onto kept modes.
#[inline]
pub(crate) fn dealias_cutoff(n: usize) -> i64 {
    ((n - 1) / 3) as i64
}

/// Unnormalized in-place transform over all spatial axes.
pub(crate) fn transform_space(grid: &TorusGrid, data: &mut [Complex64], inverse: bool) {
    let [n0, n1] = grid.shape();
    debug_assert_eq!(data.len(), n0 * n1);
    if n1 > 1 {
        let fft = plan(n1, inverse);
        for row in data.chunks_exact_mut(n1) {
            fft.process(row);
        }
    }
    if n0 > 1 {
        let fft = plan(n0, inverse);
        if n1 == 1 {
            fft.process(data);
        } else {
            let mut col = vec![Complex64::new(0.0, 0.0); n0];
            for j in 0..n1 {
                for i in 0..n0 {
                    col[i] = data[i * n1 + j];
                }
                fft.process(&mut col);
                for i in 0..n0 {
                    data[i * n1 + j] = col[i];
                }
            }
        }
    }
}

/// Apply a Fourier multiplier `mult(modes)` to a complex spatial array in place.
pub(crate) fn apply_multiplier<F>(grid: &TorusGrid, data: &mut [Complex64], mult: F)
where
    F: Fn([i64; 2]) -> Complex64,
{
    let [n0, n1] = grid.shape();
    transform_space(grid, data, false);
    let norm = 1.0 / (n0 * n1) as f64;
    for i in 0..n0 {
        let m0 = signed_mode(i, n0);
        for j in 0..n1 {
            let m1 = signed_mode(j, n1);
            data[i * n1 + j] *= mult([m0, m1]) * norm;
        }
    }
    transform_space(grid, data, true);
}

/// Multiplier for ∂/∂x_axis, optionally combined with the 2/3 truncation.
pub(crate) fn derivative_multiplier(
    grid: &TorusGrid,
    axis: usize,
    dealias: bool,
) -> impl Fn([i64; 2]) -> Complex64 {
    let shape = grid.shape();
    let kappa = 2.0 * std::f64::consts::PI / grid.length(axis);
    let nyq = (shape[axis] / 2) as i64;
    let cut = [dealias_cutoff(shape[0]), dealias_cutoff(shape[1].max(1))];
    let dim = grid.dim();
    move |m: [i64; 2]| {
        if dealias && (m[0].abs() > cut[0] || (dim == 2 && m[1].abs() > cut[1])) {
            return Complex64::new(0.0, 0.0);
        }
        let ma = m[axis];
        if ma == -nyq {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, kappa * ma as f64)
        }
    }
}

/// Multiplier for the 2/3 truncation alone.
pub(crate) fn truncation_multiplier(grid: &TorusGrid) -> impl Fn([i64; 2]) -> Complex64 {
    let shape = grid.shape();
    let cut = [dealias_cutoff(shape[0]), dealias_cutoff(shape[1].max(1))];
    let dim = grid.dim();
    move |m: [i64; 2]| {
        if m[0].abs() > cut[0] || (dim == 2 && m[1].abs() > cut[1]) {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        }
    }
}
