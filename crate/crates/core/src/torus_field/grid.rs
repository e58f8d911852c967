use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Uniform collocation grid on the spatial torus (d = 1 or 2) together with
/// the sample count of the phase circle.
///
/// Spatial arrays are row-major with the last axis contiguous. For d = 1 the
/// unused second axis has one sample and unit length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusGrid {
    dim: usize,
    lengths: [f64; 2],
    n_x: [usize; 2],
    n_theta: usize,
}

fn check_count(n: usize, what: &str) -> Result<()> {
    if n < 8 || n % 2 != 0 {
        return Err(Error::InvalidGrid(format!(
            "{what} = {n} must be even and at least 8"
        )));
    }
    Ok(())
}

impl TorusGrid {
    /// Build a grid from per-axis lengths and sample counts.
    pub fn new(lengths: &[f64], n_x: &[usize], n_theta: usize) -> Result<Self> {
        let dim = lengths.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=2")));
        }
        if n_x.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "{} sample counts given for {dim} axes",
                n_x.len()
            )));
        }
        for (a, &l) in lengths.iter().enumerate() {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("length of axis {a} is {l}")));
            }
        }
        for (a, &n) in n_x.iter().enumerate() {
            check_count(n, &format!("n_x[{a}]"))?;
        }
        check_count(n_theta, "n_theta")?;
        let mut g = TorusGrid {
            dim,
            lengths: [1.0, 1.0],
            n_x: [1, 1],
            n_theta,
        };
        for a in 0..dim {
            g.lengths[a] = lengths[a];
            g.n_x[a] = n_x[a];
        }
        Ok(g)
    }

    /// One-dimensional grid.
    pub fn line(length: f64, n_x: usize, n_theta: usize) -> Result<Self> {
        Self::new(&[length], &[n_x], n_theta)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn length(&self, axis: usize) -> f64 {
        self.lengths[axis]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths[..self.dim]
    }

    pub fn n_x(&self) -> &[usize] {
        &self.n_x[..self.dim]
    }

    /// Padded shape `[n0, n1]` (n1 = 1 in one dimension).
    pub fn shape(&self) -> [usize; 2] {
        self.n_x
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    /// Stored θ-harmonics per spatial point (n = 0..=n_theta/2).
    pub fn n_harmonics(&self) -> usize {
        self.n_theta / 2 + 1
    }

    /// Number of spatial collocation points.
    pub fn n_space(&self) -> usize {
        self.n_x[0] * self.n_x[1]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.n_x[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim)
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn theta_spacing(&self) -> f64 {
        2.0 * PI / self.n_theta as f64
    }

    /// Quadrature weight of one spatial cell.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing(a)).product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths().iter().product()
    }

    /// Coordinates of the flat spatial index (unused axis reported as 0).
    pub fn point(&self, index: usize) -> [f64; 2] {
        let n1 = self.n_x[1];
        let (i, j) = (index / n1, index % n1);
        let mut x = [i as f64 * self.spacing(0), 0.0];
        if self.dim == 2 {
            x[1] = j as f64 * self.spacing(1);
        }
        x
    }

    /// Phase-angle collocation nodes θ_m = 2πm/n_theta.
    pub fn theta_nodes(&self) -> Vec<f64> {
        (0..self.n_theta)
            .map(|m| m as f64 * self.theta_spacing())
            .collect()
    }

    /// Largest resolved angular wavenumber over all axes.
    pub fn max_wavenumber(&self) -> f64 {
        (0..self.dim)
            .map(|a| PI * self.n_x[a] as f64 / self.lengths[a])
            .fold(0.0, f64::max)
    }

    /// Same spatial discretization with a different phase resolution.
    pub fn with_n_theta(&self, n_theta: usize) -> Result<Self> {
        check_count(n_theta, "n_theta")?;
        Ok(TorusGrid { n_theta, ..*self })
    }

    pub(crate) fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.dim {
            Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim,
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn same_as(&self, other: &TorusGrid) -> Result<()> {
        if self != other {
            Err(Error::ShapeMismatch(format!("{self:?} vs {other:?}")))
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_and_small_counts() {
        assert!(TorusGrid::line(1.0, 7, 8).is_err());
        assert!(TorusGrid::line(1.0, 6, 8).is_err());
        assert!(TorusGrid::line(1.0, 16, 9).is_err());
        assert!(TorusGrid::line(0.0, 16, 8).is_err());
        assert!(TorusGrid::new(&[1.0, 1.0, 1.0], &[8, 8, 8], 8).is_err());
        assert!(TorusGrid::new(&[1.0, 2.0], &[8], 8).is_err());
    }

    #[test]
    fn geometry() {
        let g = TorusGrid::new(&[2.0, 4.0], &[8, 16], 8).unwrap();
        assert_eq!(g.n_space(), 128);
        assert_eq!(g.point(17), [0.25, 0.25]);
        assert!((g.cell_volume() * g.n_space() as f64 - 8.0).abs() < 1e-14);
        assert_eq!(g.n_harmonics(), 5);
    }
}
