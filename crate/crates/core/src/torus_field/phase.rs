use std::f64::consts::PI;

use super::{ScalarField, TorusGrid, VectorField};
use crate::error::{Error, Result};

/// Circle-valued phase S = Σ 2π wᵢ xᵢ/Lᵢ + periodic part.
///
/// Keeping the integer winding separate means ∇S never differentiates a
/// sawtooth representative.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseField {
    winding: [i64; 2],
    periodic: ScalarField,
}

impl PhaseField {
    pub fn new(winding: &[i64], periodic: ScalarField) -> Result<Self> {
        let g = *periodic.grid();
        if winding.len() != g.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} winding numbers on a {}-dimensional grid",
                winding.len(),
                g.dim()
            )));
        }
        let mut w = [0; 2];
        w[..winding.len()].copy_from_slice(winding);
        Ok(PhaseField {
            winding: w,
            periodic,
        })
    }

    /// Pure winding, zero periodic part.
    pub fn linear(grid: TorusGrid, winding: &[i64]) -> Result<Self> {
        Self::new(winding, ScalarField::zeros(grid))
    }

    pub fn zero(grid: TorusGrid) -> Self {
        PhaseField {
            winding: [0; 2],
            periodic: ScalarField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        self.periodic.grid()
    }

    pub fn winding(&self) -> &[i64] {
        &self.winding[..self.grid().dim()]
    }

    pub fn periodic(&self) -> &ScalarField {
        &self.periodic
    }

    pub fn with_periodic(&self, periodic: ScalarField) -> Self {
        PhaseField {
            winding: self.winding,
            periodic,
        }
    }

    /// Constant gradient of the winding part.
    pub fn linear_gradient(&self) -> [f64; 2] {
        let g = self.grid();
        let mut k = [0.0; 2];
        for (a, slot) in k.iter_mut().enumerate().take(g.dim()) {
            *slot = 2.0 * PI * self.winding[a] as f64 / g.length(a);
        }
        k
    }

    /// Unwrapped representative of S at the collocation points.
    pub fn values(&self) -> ScalarField {
        let g = *self.grid();
        let k = self.linear_gradient();
        let p = self.periodic.values();
        ScalarField::from_vec_unchecked(
            g,
            (0..g.n_space())
                .map(|i| {
                    let x = g.point(i);
                    k[0] * x[0] + k[1] * x[1] + p[i]
                })
                .collect(),
        )
    }

    /// ∇S: exact winding part plus spectral gradient of the periodic part.
    pub fn gradient(&self) -> VectorField {
        let k = self.linear_gradient();
        let gp = self.periodic.gradient();
        VectorField::from_components(
            gp.comps()
                .iter()
                .enumerate()
                .map(|(a, c)| c.map(|v| v + k[a]))
                .collect(),
        )
    }

    /// |∇S| pointwise.
    pub fn gradient_norm(&self) -> ScalarField {
        self.gradient().norm()
    }

    /// Smallest |∇S| and where it occurs.
    pub fn min_gradient_norm(&self) -> (f64, usize) {
        self.gradient_norm().min_with_index()
    }

    /// S + ψ for a periodic ψ (winding unchanged).
    pub fn shifted(&self, psi: &ScalarField) -> Self {
        self.with_periodic(&self.periodic + psi)
    }

    pub fn resample(&self, target: &TorusGrid) -> Result<Self> {
        Ok(PhaseField {
            winding: self.winding,
            periodic: self.periodic.resample(target)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_is_exact_for_winding() {
        let g = TorusGrid::new(&[2.0, 3.0], &[8, 8], 8).unwrap();
        let s = PhaseField::linear(g, &[2, -1]).unwrap();
        let grad = s.gradient();
        assert!(grad.comp(0).values().iter().all(|&v| (v - 2.0 * PI).abs() < 1e-14));
        assert!(grad.comp(1).values().iter().all(|&v| (v + 2.0 * PI / 3.0).abs() < 1e-14));
    }

    #[test]
    fn periodic_part_adds_to_gradient() {
        let g = TorusGrid::line(2.0 * PI, 16, 8).unwrap();
        let s = PhaseField::new(&[1], ScalarField::from_fn(g, |x| 0.1 * x[0].sin())).unwrap();
        let grad = s.gradient();
        for i in 0..16 {
            let x = g.point(i)[0];
            assert!((grad.comp(0).values()[i] - (1.0 + 0.1 * x.cos())).abs() < 1e-13);
        }
    }
}
