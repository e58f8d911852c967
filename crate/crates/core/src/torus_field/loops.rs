use num_complex::Complex64;

use super::fft::{self, dealias_cutoff};
use super::{PhaseField, ScalarField, TorusGrid};
use crate::error::{Error, Result};

/// Absolute tolerance on the θ-mean accepted by the antiderivative.
pub const TOL_MEAN: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A real field on Q × S¹ stored as θ-harmonics n = 0..=n_theta/2 per
/// spatial point (negative harmonics are the complex conjugates).
///
/// Harmonic 0 is real and the Nyquist harmonic is kept at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct LoopField {
    grid: TorusGrid,
    harm: Vec<Complex64>,
}

impl LoopField {
    pub fn zeros(grid: TorusGrid) -> Self {
        LoopField {
            grid,
            harm: vec![ZERO; grid.n_space() * grid.n_harmonics()],
        }
    }

    /// θ-independent loop field equal to `f`.
    pub fn from_scalar(f: &ScalarField) -> Self {
        let grid = *f.grid();
        let nh = grid.n_harmonics();
        let mut out = Self::zeros(grid);
        for (p, &v) in f.values().iter().enumerate() {
            out.harm[p * nh] = Complex64::new(v, 0.0);
        }
        out
    }

    /// Harmonics in the layout `[space][n]`, n = 0..=n_theta/2.
    pub fn from_harmonics(grid: TorusGrid, mut harm: Vec<Complex64>) -> Result<Self> {
        let nh = grid.n_harmonics();
        if harm.len() != grid.n_space() * nh {
            return Err(Error::ShapeMismatch(format!(
                "{} harmonics for {} points x {nh}",
                harm.len(),
                grid.n_space()
            )));
        }
        if let Some(i) = harm.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite {
                field: "loop field".into(),
                index: i / nh,
            });
        }
        for row in harm.chunks_exact_mut(nh) {
            row[0].im = 0.0;
            row[nh - 1] = ZERO;
        }
        Ok(LoopField { grid, harm })
    }

    /// From collocation values laid out `[space][θ]`.
    pub fn from_values(grid: TorusGrid, values: &[f64]) -> Result<Self> {
        let nt = grid.n_theta();
        if values.len() != grid.n_space() * nt {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} points x {nt}",
                values.len(),
                grid.n_space()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                field: "loop field".into(),
                index: i / nt,
            });
        }
        Ok(Self::from_values_truncated(grid, values, usize::MAX))
    }

    /// Forward θ-transform keeping harmonics |n| ≤ `keep` (Nyquist always dropped).
    pub(crate) fn from_values_truncated(grid: TorusGrid, values: &[f64], keep: usize) -> Self {
        let nt = grid.n_theta();
        let nh = grid.n_harmonics();
        let plan = fft::plan(nt, false);
        let norm = 1.0 / nt as f64;
        let mut harm = vec![ZERO; grid.n_space() * nh];
        let mut buf = vec![ZERO; nt];
        for (p, chunk) in values.chunks_exact(nt).enumerate() {
            for (b, &v) in buf.iter_mut().zip(chunk) {
                *b = Complex64::new(v, 0.0);
            }
            plan.process(&mut buf);
            let row = &mut harm[p * nh..(p + 1) * nh];
            for n in 0..nh - 1 {
                if n <= keep {
                    row[n] = buf[n] * norm;
                }
            }
            row[0].im = 0.0;
        }
        LoopField { grid, harm }
    }

    /// Forward transform with the 2/3 truncation in θ.
    pub(crate) fn from_values_dealiased(grid: TorusGrid, values: &[f64]) -> Self {
        Self::from_values_truncated(grid, values, dealias_cutoff(grid.n_theta()) as usize)
    }

    /// Sample `f(x, θ)` on the collocation grid.
    pub fn from_fn(grid: TorusGrid, f: impl Fn([f64; 2], f64) -> f64) -> Self {
        let thetas = grid.theta_nodes();
        let mut vals = Vec::with_capacity(grid.n_space() * grid.n_theta());
        for p in 0..grid.n_space() {
            let x = grid.point(p);
            vals.extend(thetas.iter().map(|&t| f(x, t)));
        }
        Self::from_values_truncated(grid, &vals, usize::MAX)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn harmonics(&self) -> &[Complex64] {
        &self.harm
    }

    /// Harmonic `n` (0 ≤ n ≤ n_theta/2) at spatial index `p`.
    pub fn harmonic(&self, p: usize, n: usize) -> Complex64 {
        self.harm[p * self.grid.n_harmonics() + n]
    }

    /// Collocation values laid out `[space][θ]`.
    pub fn values(&self) -> Vec<f64> {
        let nt = self.grid.n_theta();
        let nh = self.grid.n_harmonics();
        let plan = fft::plan(nt, true);
        let mut out = Vec::with_capacity(self.grid.n_space() * nt);
        let mut buf = vec![ZERO; nt];
        for row in self.harm.chunks_exact(nh) {
            buf.iter_mut().for_each(|b| *b = ZERO);
            buf[0] = row[0];
            for n in 1..nh - 1 {
                buf[n] = row[n];
                buf[nt - n] = row[n].conj();
            }
            plan.process(&mut buf);
            out.extend(buf.iter().map(|c| c.re));
        }
        out
    }

    fn map_harm(&self, f: impl Fn(usize, usize, Complex64) -> Complex64) -> Self {
        let nh = self.grid.n_harmonics();
        LoopField {
            grid: self.grid,
            harm: self
                .harm
                .iter()
                .enumerate()
                .map(|(i, &c)| f(i / nh, i % nh, c))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_harm(|_, _, h| h * c)
    }

    pub fn add(&self, other: &LoopField) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        LoopField {
            grid: self.grid,
            harm: self.harm.iter().zip(&other.harm).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &LoopField) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        LoopField {
            grid: self.grid,
            harm: self.harm.iter().zip(&other.harm).map(|(a, b)| a - b).collect(),
        }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &LoopField) -> Self {
        LoopField {
            grid: self.grid,
            harm: self.harm.iter().zip(&other.harm).map(|(a, b)| a + b * c).collect(),
        }
    }

    /// Σ wᵢ kᵢ over four fields on the same grid.
    pub(crate) fn combine4(k: [&LoopField; 4], w: [f64; 4]) -> LoopField {
        LoopField {
            grid: k[0].grid,
            harm: (0..k[0].harm.len())
                .map(|i| k[0].harm[i] * w[0] + k[1].harm[i] * w[1] + k[2].harm[i] * w[2] + k[3].harm[i] * w[3])
                .collect(),
        }
    }

    /// Multiply by a θ-independent field (exact in harmonic space).
    pub fn mul_scalar(&self, f: &ScalarField) -> Self {
        let v = f.values();
        self.map_harm(|p, _, h| h * v[p])
    }

    /// Harmonic 0, i.e. the θ-average.
    pub fn theta_average(&self) -> ScalarField {
        let nh = self.grid.n_harmonics();
        ScalarField::from_vec_unchecked(self.grid, self.harm.chunks_exact(nh).map(|r| r[0].re).collect())
    }

    /// Copy with harmonic 0 removed.
    pub fn fluctuation(&self) -> Self {
        self.map_harm(|_, n, h| if n == 0 { ZERO } else { h })
    }

    /// ∂θ.
    pub fn d_theta(&self) -> Self {
        self.map_harm(|_, n, h| h * Complex64::new(0.0, n as f64))
    }

    /// Zero-mean θ-antiderivative; fails if the θ-mean exceeds [`TOL_MEAN`].
    pub fn theta_antiderivative(&self) -> Result<Self> {
        let (max_abs, index) = self
            .theta_average()
            .values()
            .iter()
            .enumerate()
            .fold((0.0f64, 0), |acc, (i, v)| if v.abs() > acc.0 { (v.abs(), i) } else { acc });
        if max_abs > TOL_MEAN {
            return Err(Error::MeanNotZero { max_abs, index });
        }
        Ok(self.antiderivative_of_fluctuation())
    }

    /// Antiderivative of the fluctuating part, ignoring any θ-mean.
    pub fn antiderivative_of_fluctuation(&self) -> Self {
        self.map_harm(|_, n, h| {
            if n == 0 {
                ZERO
            } else {
                h / Complex64::new(0.0, n as f64)
            }
        })
    }

    /// f(x, θ + scale·S(x)): harmonic n times exp(i n scale S(x)).
    pub fn phase_shift(&self, phase: &PhaseField, scale: f64) -> Self {
        let s = phase.values();
        let sv = s.values();
        let nh = self.grid.n_harmonics();
        let mut out = self.clone();
        for (p, row) in out.harm.chunks_exact_mut(nh).enumerate() {
            let step = Complex64::from_polar(1.0, scale * sv[p]);
            let mut rot = step;
            for h in row.iter_mut().skip(1) {
                *h *= rot;
                rot *= step;
            }
        }
        out
    }

    /// Evaluate at a fixed phase angle.
    pub fn eval_theta(&self, theta: f64) -> ScalarField {
        let nh = self.grid.n_harmonics();
        let step = Complex64::from_polar(1.0, theta);
        ScalarField::from_vec_unchecked(
            self.grid,
            self.harm
                .chunks_exact(nh)
                .map(|row| {
                    let mut acc = 0.0;
                    let mut rot = step;
                    for h in &row[1..nh - 1] {
                        acc += (h * rot).re;
                        rot *= step;
                    }
                    row[0].re + 2.0 * acc
                })
                .collect(),
        )
    }

    /// θ-mean of the product of two loop fields (exact, by Parseval).
    pub fn mean_product(&self, other: &LoopField) -> ScalarField {
        let nh = self.grid.n_harmonics();
        ScalarField::from_vec_unchecked(
            self.grid,
            self.harm
                .chunks_exact(nh)
                .zip(other.harm.chunks_exact(nh))
                .map(|(a, b)| {
                    let tail: f64 = a[1..].iter().zip(&b[1..]).map(|(x, y)| (x * y.conj()).re).sum();
                    a[0].re * b[0].re + 2.0 * tail
                })
                .collect(),
        )
    }

    /// Spatial derivative of every harmonic.
    pub fn deriv(&self, axis: usize) -> Result<Self> {
        self.grid.check_axis(axis)?;
        Ok(self.spatial(|g| fft::derivative_multiplier(g, axis, false)))
    }

    /// 2/3 truncation in x and θ.
    pub fn dealiased(&self) -> Self {
        let cut = dealias_cutoff(self.grid.n_theta()) as usize;
        self.spatial(fft::truncation_multiplier)
            .map_harm(|_, n, h| if n > cut { ZERO } else { h })
    }

    fn spatial<M, F>(&self, make: M) -> Self
    where
        M: Fn(&TorusGrid) -> F,
        F: Fn([i64; 2]) -> Complex64,
    {
        let nh = self.grid.n_harmonics();
        let ns = self.grid.n_space();
        let mult = make(&self.grid);
        let mut out = self.clone();
        let mut col = vec![ZERO; ns];
        for n in 0..nh - 1 {
            if self.harm.iter().skip(n).step_by(nh).all(|c| *c == ZERO) {
                continue;
            }
            for p in 0..ns {
                col[p] = self.harm[p * nh + n];
            }
            fft::apply_multiplier(&self.grid, &mut col, &mult);
            for p in 0..ns {
                out.harm[p * nh + n] = col[p];
            }
            if n == 0 {
                for p in 0..ns {
                    out.harm[p * nh].im = 0.0;
                }
            }
        }
        out
    }

    /// Largest |harmonic| over n ≥ 1.
    pub fn max_fluctuation(&self) -> f64 {
        let nh = self.grid.n_harmonics();
        self.harm
            .chunks_exact(nh)
            .flat_map(|r| r[1..].iter())
            .fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Root-mean-square over the (x, θ) grid.
    pub fn rms(&self) -> f64 {
        self.mean_product(self).mean().max(0.0).sqrt()
    }

    /// Resample the spatial dependence onto another grid (same n_theta).
    pub fn resample(&self, target: &TorusGrid) -> Result<Self> {
        if target.n_theta() != self.grid.n_theta() {
            return Err(Error::ShapeMismatch("resample keeps n_theta fixed".into()));
        }
        let nh = self.grid.n_harmonics();
        let mut out = LoopField::zeros(*target);
        for n in 0..nh - 1 {
            let take = |f: fn(&Complex64) -> f64| {
                ScalarField::from_vec_unchecked(self.grid, self.harm.iter().skip(n).step_by(nh).map(f).collect())
            };
            let re = take(|c| c.re).resample(target)?;
            let im = take(|c| c.im).resample(target)?;
            for p in 0..target.n_space() {
                out.harm[p * nh + n] = Complex64::new(re.values()[p], im.values()[p]);
            }
        }
        Ok(out)
    }
}

/// One loop field per spatial axis.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorLoopField {
    comps: Vec<LoopField>,
}

impl VectorLoopField {
    pub fn new(comps: Vec<LoopField>) -> Result<Self> {
        let Some(first) = comps.first() else {
            return Err(Error::ShapeMismatch("vector loop field without components".into()));
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
        Ok(VectorLoopField { comps })
    }

    pub(crate) fn from_components(comps: Vec<LoopField>) -> Self {
        VectorLoopField { comps }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        VectorLoopField {
            comps: (0..grid.dim()).map(|_| LoopField::zeros(grid)).collect(),
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        self.comps[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comp(&self, axis: usize) -> &LoopField {
        &self.comps[axis]
    }

    pub fn comps(&self) -> &[LoopField] {
        &self.comps
    }

    pub fn map(&self, f: impl Fn(&LoopField) -> LoopField) -> Self {
        VectorLoopField {
            comps: self.comps.iter().map(f).collect(),
        }
    }

    pub fn zip(&self, other: &VectorLoopField, f: impl Fn(&LoopField, &LoopField) -> LoopField) -> Self {
        VectorLoopField {
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn theta_average(&self) -> super::VectorField {
        super::VectorField::from_components(self.comps.iter().map(|c| c.theta_average()).collect())
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|f| f.scale(c))
    }

    pub fn max_fluctuation(&self) -> f64 {
        self.comps.iter().map(|c| c.max_fluctuation()).fold(0.0, f64::max)
    }
}

/// Free-function form of [`LoopField::theta_average`].
pub fn theta_average(f: &LoopField) -> ScalarField {
    f.theta_average()
}

/// Free-function form of [`LoopField::theta_antiderivative`].
pub fn theta_antiderivative(f: &LoopField) -> Result<LoopField> {
    f.theta_antiderivative()
}

/// Free-function form of [`LoopField::phase_shift`].
pub fn phase_shift(f: &LoopField, phase: &PhaseField, scale: f64) -> LoopField {
    f.phase_shift(phase, scale)
}

/// ∇^{S/ε} f = ∇f + (∇S/ε) ∂θ f, one component per axis.
pub fn grad_s(f: &LoopField, phase: &PhaseField, eps: f64) -> VectorLoopField {
    let grad = phase.gradient();
    let dth = f.d_theta();
    VectorLoopField::from_components(
        (0..f.grid().dim())
            .map(|a| {
                f.deriv(a)
                    .expect("axis within dim")
                    .add(&dth.mul_scalar(&grad.comp(a).scale(1.0 / eps)))
            })
            .collect(),
    )
}
