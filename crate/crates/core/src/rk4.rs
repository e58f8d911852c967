//! Classical four-stage Runge–Kutta shared by all solver tiers.

use crate::error::Result;

/// Time derivative of a state; supports fixed-weight linear combination.
pub trait Tangent: Sized {
    fn combine(k: [&Self; 4], w: [f64; 4]) -> Self;
}

/// A state that can be displaced along a tangent (time advances by `dt`).
pub trait Evolvable: Clone {
    type Rates: Tangent;
    fn displaced(&self, dt: f64, k: &Self::Rates) -> Self;
}

pub fn rk4<S, F>(y: &S, dt: f64, mut rhs: F) -> Result<S>
where
    S: Evolvable,
    F: FnMut(&S) -> Result<S::Rates>,
{
    let k1 = rhs(y)?;
    let k2 = rhs(&y.displaced(0.5 * dt, &k1))?;
    let k3 = rhs(&y.displaced(0.5 * dt, &k2))?;
    let k4 = rhs(&y.displaced(dt, &k3))?;
    let k = S::Rates::combine([&k1, &k2, &k3, &k4], [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0]);
    Ok(y.displaced(dt, &k))
}

/// Weighted sum of four equally sized slices.
pub(crate) fn combine_slices(k: [&[f64]; 4], w: [f64; 4]) -> Vec<f64> {
    (0..k[0].len())
        .map(|i| w[0] * k[0][i] + w[1] * k[1][i] + w[2] * k[2][i] + w[3] * k[3][i])
        .collect()
}
