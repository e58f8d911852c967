//! Local phase averaging of base-tier fields.
//!
//! A triangular window of total width W = m·λ is the convolution of two boxes
//! of width W/2, so its Fourier multiplier is sinc²(kW/4). With m = 2 it
//! vanishes at every harmonic of the carrier wavelength λ.

use wkbflow_core::torus_field::ScalarField;

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Separable triangular window; `wavelengths[a]` is the carrier wavelength
/// along axis a (`None` leaves that axis unfiltered).
#[derive(Clone, Debug, PartialEq)]
pub struct TriangularWindow {
    pub widths: [Option<f64>; 2],
}

impl TriangularWindow {
    pub fn new(wavelengths: &[Option<f64>], periods: f64) -> Self {
        let mut widths = [None; 2];
        for (w, l) in widths.iter_mut().zip(wavelengths) {
            *w = l.map(|l| periods * l);
        }
        TriangularWindow { widths }
    }

    /// Window matched to a phase with the given winding and scale ε on a
    /// torus with side lengths `lengths`: λₐ = εLₐ/|wₐ|.
    pub fn for_winding(winding: &[i64], lengths: &[f64], eps: f64, periods: f64) -> Self {
        let lambda: Vec<Option<f64>> = winding
            .iter()
            .zip(lengths)
            .map(|(&w, &l)| (w != 0).then(|| eps * l / w.unsigned_abs() as f64))
            .collect();
        Self::new(&lambda, periods)
    }

    pub fn multiplier(&self, k: [f64; 2]) -> f64 {
        self.widths
            .iter()
            .zip(k)
            .map(|(w, k)| w.map_or(1.0, |w| sinc(0.25 * k * w).powi(2)))
            .product()
    }

    pub fn apply(&self, f: &ScalarField) -> ScalarField {
        f.filtered(|k| self.multiplier(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use wkbflow_core::torus_field::TorusGrid;

    #[test]
    fn removes_carrier_and_keeps_constants() {
        let g = TorusGrid::line(2.0 * PI, 256, 8).unwrap();
        let eps = 1.0 / 16.0;
        let win = TriangularWindow::for_winding(&[2], &[2.0 * PI], eps, 2.0);
        let f = ScalarField::from_fn(g, |x| 1.5 + 0.3 * (2.0 * x[0] / eps).cos() + 0.1 * (4.0 * x[0] / eps).sin());
        let avg = win.apply(&f);
        assert!(avg.values().iter().all(|v| (v - 1.5).abs() < 1e-13));
    }

    #[test]
    fn slow_modes_are_nearly_untouched() {
        let win = TriangularWindow::for_winding(&[1, 0], &[2.0 * PI, 3.0], 0.01, 2.0);
        assert!((win.multiplier([1.0, 5.0]) - 1.0).abs() < 1e-3);
        assert_eq!(win.multiplier([0.0, 7.0]), 1.0);
    }
}
