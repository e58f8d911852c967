use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::fft::{self, signed_mode};
use super::TorusGrid;
use crate::error::{Error, Result};

/// Real samples of a function on the spatial torus.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl ScalarField {
    /// Wrap collocation values; rejects wrong lengths and non-finite samples.
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_space() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} points",
                values.len(),
                grid.n_space()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                field: "scalar field".into(),
                index: i,
            });
        }
        Ok(ScalarField { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: TorusGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_space());
        ScalarField { grid, values }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        ScalarField {
            grid,
            values: vec![c; grid.n_space()],
        }
    }

    /// Sample `f(x)` at every collocation point.
    pub fn from_fn(grid: TorusGrid, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.n_space()).map(|i| f(grid.point(i))).collect();
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// Spectral quadrature ∫_Q f dx (exact for resolved harmonics).
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Minimum value and its flat index.
    pub fn min_with_index(&self) -> (f64, usize) {
        self.values
            .iter()
            .enumerate()
            .fold((f64::INFINITY, 0), |acc, (i, &v)| if v < acc.0 { (v, i) } else { acc })
    }

    /// Maximum value and its flat index.
    pub fn max_with_index(&self) -> (f64, usize) {
        self.values
            .iter()
            .enumerate()
            .fold((f64::NEG_INFINITY, 0), |acc, (i, &v)| if v > acc.0 { (v, i) } else { acc })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Root-mean-square over collocation points.
    pub fn rms(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    /// ∂f/∂x_axis by Fourier differentiation.
    pub fn deriv(&self, axis: usize) -> Result<ScalarField> {
        self.grid.check_axis(axis)?;
        Ok(self.spectral(fft::derivative_multiplier(&self.grid, axis, false)))
    }

    /// Derivative with the 2/3 truncation applied (used for nonlinear fluxes).
    pub(crate) fn deriv_dealiased(&self, axis: usize) -> ScalarField {
        self.spectral(fft::derivative_multiplier(&self.grid, axis, true))
    }

    /// Projection onto the modes kept by the 2/3 rule.
    pub fn dealiased(&self) -> ScalarField {
        self.spectral(fft::truncation_multiplier(&self.grid))
    }

    /// Spectral gradient (one component per axis).
    pub fn gradient(&self) -> VectorField {
        VectorField::from_components(
            (0..self.grid.dim())
                .map(|a| self.spectral(fft::derivative_multiplier(&self.grid, a, false)))
                .collect(),
        )
    }

    /// Applies a real, even Fourier multiplier given as a function of the
    /// angular wavenumber vector (second entry zero in one dimension).
    pub fn filtered(&self, mult: impl Fn([f64; 2]) -> f64) -> ScalarField {
        let g = self.grid;
        let kappa: Vec<f64> = (0..2).map(|a| if a < g.dim() { 2.0 * std::f64::consts::PI / g.length(a) } else { 0.0 }).collect();
        self.spectral(|m| Complex64::new(mult([kappa[0] * m[0] as f64, kappa[1] * m[1] as f64]), 0.0))
    }

    fn spectral(&self, mult: impl Fn([i64; 2]) -> Complex64) -> ScalarField {
        let mut buf: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::apply_multiplier(&self.grid, &mut buf, mult);
        ScalarField {
            grid: self.grid,
            values: buf.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Normalized Fourier coefficients in FFT order.
    pub fn coefficients(&self) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::transform_space(&self.grid, &mut buf, false);
        let norm = 1.0 / self.grid.n_space() as f64;
        buf.iter_mut().for_each(|c| *c *= norm);
        buf
    }

    /// Trigonometric interpolant usable at arbitrary points.
    pub fn interpolant(&self) -> SpectralInterpolant {
        SpectralInterpolant {
            grid: self.grid,
            coeffs: self.coefficients(),
        }
    }

    /// Resample onto another grid with the same lengths by zero-padding or
    /// truncating the spectrum.
    pub fn resample(&self, target: &TorusGrid) -> Result<ScalarField> {
        if target.lengths() != self.grid.lengths() {
            return Err(Error::ShapeMismatch("resample requires equal lengths".into()));
        }
        let src = self.coefficients();
        let [s0, s1] = self.grid.shape();
        let [t0, t1] = target.shape();
        let mut dst = vec![Complex64::new(0.0, 0.0); t0 * t1];
        // Source Nyquist modes are dropped; modes that do not fit strictly
        // below the target Nyquist are truncated.
        let slot = |m: i64, s: usize, t: usize| -> Option<usize> {
            if s == 1 {
                return Some(0);
            }
            if m == -(s as i64) / 2 || 2 * m.unsigned_abs() as usize >= t {
                return None;
            }
            Some(m.rem_euclid(t as i64) as usize)
        };
        for i in 0..s0 {
            let Some(ti) = slot(signed_mode(i, s0), s0, t0) else { continue };
            for j in 0..s1 {
                let Some(tj) = slot(signed_mode(j, s1), s1, t1) else { continue };
                dst[ti * t1 + tj] = src[i * s1 + j];
            }
        }
        fft::transform_space(target, &mut dst, true);
        ScalarField::new(*target, dst.into_iter().map(|c| c.re).collect())
    }
}

/// Free-function form of [`ScalarField::deriv`].
pub fn spectral_deriv(f: &ScalarField, axis: usize) -> Result<ScalarField> {
    f.deriv(axis)
}

macro_rules! pointwise_op {
    ($tr:ident, $m:ident, $op:tt) => {
        impl $tr<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $m(self, rhs: &ScalarField) -> ScalarField {
                self.zip_map(rhs, |a, b| a $op b)
            }
        }
    };
}
pointwise_op!(Add, add, +);
pointwise_op!(Sub, sub, -);
pointwise_op!(Mul, mul, *);

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, c: f64) -> ScalarField {
        self.scale(c)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scale(-1.0)
    }
}

/// One scalar field per spatial axis.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    comps: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(comps: Vec<ScalarField>) -> Result<Self> {
        let Some(first) = comps.first() else {
            return Err(Error::ShapeMismatch("vector field without components".into()));
        };
        let grid = *first.grid();
        if comps.len() != grid.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} components on a {}-dimensional grid",
                comps.len(),
                grid.dim()
            )));
        }
        for c in &comps {
            grid.same_as(c.grid())?;
        }
        Ok(VectorField { comps })
    }

    pub(crate) fn from_components(comps: Vec<ScalarField>) -> Self {
        debug_assert_eq!(comps.len(), comps[0].grid().dim());
        VectorField { comps }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        VectorField {
            comps: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    /// Sample a vector-valued function (unused trailing entries ignored).
    pub fn from_fn(grid: TorusGrid, f: impl Fn([f64; 2]) -> [f64; 2]) -> Self {
        let vals: Vec<[f64; 2]> = (0..grid.n_space()).map(|i| f(grid.point(i))).collect();
        VectorField {
            comps: (0..grid.dim())
                .map(|a| ScalarField::from_vec_unchecked(grid, vals.iter().map(|v| v[a]).collect()))
                .collect(),
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        self.comps[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comp(&self, axis: usize) -> &ScalarField {
        &self.comps[axis]
    }

    pub fn comps(&self) -> &[ScalarField] {
        &self.comps
    }

    /// Value at a flat index, padded to two entries.
    #[inline]
    pub fn at(&self, index: usize) -> [f64; 2] {
        let mut v = [0.0; 2];
        for (a, c) in self.comps.iter().enumerate() {
            v[a] = c.values[index];
        }
        v
    }

    pub fn map_comps(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        VectorField {
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn zip_comps(&self, other: &VectorField, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Self {
        VectorField {
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_comps(|f| f.scale(c))
    }

    /// Pointwise Euclidean norm.
    pub fn norm(&self) -> ScalarField {
        let g = *self.grid();
        ScalarField::from_vec_unchecked(
            g,
            (0..g.n_space())
                .map(|i| self.comps.iter().map(|c| c.values[i].powi(2)).sum::<f64>().sqrt())
                .collect(),
        )
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &VectorField) -> ScalarField {
        let g = *self.grid();
        ScalarField::from_vec_unchecked(
            g,
            (0..g.n_space())
                .map(|i| {
                    self.comps
                        .iter()
                        .zip(&other.comps)
                        .map(|(a, b)| a.values[i] * b.values[i])
                        .sum()
                })
                .collect(),
        )
    }

    /// Spectral divergence.
    pub fn divergence(&self) -> ScalarField {
        let mut acc = self.comps[0].deriv(0).expect("axis 0 always exists");
        for a in 1..self.dim() {
            acc = &acc + &self.comps[a].deriv(a).expect("axis within dim");
        }
        acc
    }

    /// Per-component integrals.
    pub fn integral(&self) -> Vec<f64> {
        self.comps.iter().map(|c| c.integral()).collect()
    }
}

/// Trigonometric interpolant of a sampled field.
///
/// The Nyquist mode of each axis is represented by a cosine so the
/// interpolant is real and reproduces the samples exactly.
#[derive(Clone, Debug)]
pub struct SpectralInterpolant {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralInterpolant {
    fn basis(&self, axis: usize, y: f64, out: &mut Vec<Complex64>, dout: &mut Vec<Complex64>) {
        let n = self.grid.shape()[axis];
        out.clear();
        dout.clear();
        if n == 1 {
            out.push(Complex64::new(1.0, 0.0));
            dout.push(Complex64::new(0.0, 0.0));
            return;
        }
        let kappa = 2.0 * std::f64::consts::PI / self.grid.length(axis);
        let step = Complex64::from_polar(1.0, kappa * y);
        let mut pos = Complex64::new(1.0, 0.0);
        let mut pos_vals = Vec::with_capacity(n / 2 + 1);
        for _ in 0..=n / 2 {
            pos_vals.push(pos);
            pos *= step;
        }
        for j in 0..n {
            let m = signed_mode(j, n);
            let (b, db) = if m == -(n as i64) / 2 {
                let c = pos_vals[n / 2];
                let k = kappa * (n / 2) as f64;
                (Complex64::new(c.re, 0.0), Complex64::new(-k * c.im, 0.0))
            } else if m >= 0 {
                let b = pos_vals[m as usize];
                (b, b * Complex64::new(0.0, kappa * m as f64))
            } else {
                let b = pos_vals[(-m) as usize].conj();
                (b, b * Complex64::new(0.0, kappa * m as f64))
            };
            out.push(b);
            dout.push(db);
        }
    }

    /// Value and gradient (padded to two entries) at an arbitrary point.
    pub fn eval_with_gradient(&self, y: [f64; 2]) -> (f64, [f64; 2]) {
        let [n0, n1] = self.grid.shape();
        let (mut b0, mut d0, mut b1, mut d1) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        self.basis(0, y[0], &mut b0, &mut d0);
        self.basis(1, y[1], &mut b1, &mut d1);
        let mut v = Complex64::new(0.0, 0.0);
        let mut g0 = Complex64::new(0.0, 0.0);
        let mut g1 = Complex64::new(0.0, 0.0);
        for i in 0..n0 {
            let mut row = Complex64::new(0.0, 0.0);
            let mut row_d = Complex64::new(0.0, 0.0);
            for j in 0..n1 {
                let c = self.coeffs[i * n1 + j];
                row += c * b1[j];
                row_d += c * d1[j];
            }
            v += row * b0[i];
            g0 += row * d0[i];
            g1 += row_d * b0[i];
        }
        (v.re, [g0.re, g1.re])
    }

    pub fn eval(&self, y: [f64; 2]) -> f64 {
        self.eval_with_gradient(y).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn derivative_of_constant_vanishes() {
        let g = TorusGrid::line(3.0, 16, 8).unwrap();
        let d = ScalarField::constant(g, 2.5).deriv(0).unwrap();
        assert!(d.max_abs() < 1e-14);
    }

    #[test]
    fn filter_scales_each_mode_by_its_multiplier() {
        let g = TorusGrid::new(&[2.0 * PI, PI], &[16, 16], 8).unwrap();
        let f = ScalarField::from_fn(g, |x| 1.0 + x[0].cos() + (2.0 * x[1]).sin());
        let out = f.filtered(|k| (-(k[0] * k[0] + k[1] * k[1])).exp());
        let want = ScalarField::from_fn(g, |x| 1.0 + (-1.0f64).exp() * x[0].cos() + (-4.0f64).exp() * (2.0 * x[1]).sin());
        assert!((&out - &want).max_abs() < 1e-13);
    }

    #[test]
    fn derivative_of_sine() {
        let l = 2.7;
        let g = TorusGrid::line(l, 32, 8).unwrap();
        let f = ScalarField::from_fn(g, |x| (2.0 * PI * x[0] / l).sin());
        let d = f.deriv(0).unwrap();
        let exact = ScalarField::from_fn(g, |x| 2.0 * PI / l * (2.0 * PI * x[0] / l).cos());
        assert!((&d - &exact).max_abs() < 1e-12);
        assert!(f.deriv(1).is_err());
    }

    #[test]
    fn mixed_partials_commute() {
        let g = TorusGrid::new(&[2.0, 3.0], &[16, 24], 8).unwrap();
        let f = ScalarField::from_fn(g, |x| (PI * x[0]).sin() * (2.0 * PI * x[1] / 3.0).cos() + (PI * (x[0] + 2.0 * x[1] / 3.0)).sin());
        let a = f.deriv(0).unwrap().deriv(1).unwrap();
        let b = f.deriv(1).unwrap().deriv(0).unwrap();
        assert!((&a - &b).max_abs() < 1e-11);
    }

    #[test]
    fn interpolant_reproduces_samples_and_derivative() {
        let g = TorusGrid::new(&[2.0, 3.0], &[8, 10], 8).unwrap();
        let f = ScalarField::from_fn(g, |x| (PI * x[0]).cos() + 0.3 * (2.0 * PI * x[1] / 3.0).sin() * (PI * x[0]).sin());
        let it = f.interpolant();
        for i in [0, 7, 33, 79] {
            assert!((it.eval(g.point(i)) - f.values()[i]).abs() < 1e-13);
        }
        let y = [0.37, 1.21];
        let (v, gr) = it.eval_with_gradient(y);
        let exact = (PI * y[0]).cos() + 0.3 * (2.0 * PI * y[1] / 3.0).sin() * (PI * y[0]).sin();
        assert!((v - exact).abs() < 1e-12);
        let dx = -PI * (PI * y[0]).sin() + 0.3 * (2.0 * PI * y[1] / 3.0).sin() * PI * (PI * y[0]).cos();
        let dy = 0.3 * (2.0 * PI / 3.0) * (2.0 * PI * y[1] / 3.0).cos() * (PI * y[0]).sin();
        assert!((gr[0] - dx).abs() < 1e-11 && (gr[1] - dy).abs() < 1e-11);
    }

    #[test]
    fn resample_preserves_band_limited_data() {
        let g = TorusGrid::line(1.0, 16, 8).unwrap();
        let h = TorusGrid::line(1.0, 40, 8).unwrap();
        let f = ScalarField::from_fn(g, |x| (2.0 * PI * 3.0 * x[0]).sin() + 0.5);
        let up = f.resample(&h).unwrap();
        let exact = ScalarField::from_fn(h, |x| (2.0 * PI * 3.0 * x[0]).sin() + 0.5);
        assert!((&up - &exact).max_abs() < 1e-13);
        let down = up.resample(&g).unwrap();
        assert!((&down - &f).max_abs() < 1e-13);
    }
}
