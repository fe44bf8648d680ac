//! Discrete function-space norms on a [`Grid1D`].
//!
//! `l1` and `l2` use trapezoid weights; the `Y` norm is the sup norm plus the
//! discrete total variation `sum |f_{i+1} - f_i|`, which stands in for `||f'||_{L^1}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::grid::Grid1D;
use crate::state::SpinorSlice;

/// Anything with a modulus that can be differenced.
pub trait Magnitude: Copy {
    fn magnitude(self) -> f64;
    fn magnitude_of_difference(self, other: Self) -> f64;
}

impl Magnitude for f64 {
    #[inline]
    fn magnitude(self) -> f64 {
        self.abs()
    }
    #[inline]
    fn magnitude_of_difference(self, other: Self) -> f64 {
        (self - other).abs()
    }
}

impl Magnitude for Complex64 {
    #[inline]
    fn magnitude(self) -> f64 {
        self.norm()
    }
    #[inline]
    fn magnitude_of_difference(self, other: Self) -> f64 {
        (self - other).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    /// `linf + total variation`.
    pub y: f64,
}

/// Trapezoid-weighted sum `dx * sum' a_i`.
#[inline]
pub(crate) fn trapezoid(values: impl ExactSizeIterator<Item = f64>, dx: f64) -> f64 {
    let n = values.len();
    let mut acc = 0.0;
    for (i, a) in values.enumerate() {
        let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        acc += w * a;
    }
    acc * dx
}

pub fn total_variation<T: Magnitude>(field: &[T]) -> f64 {
    field
        .windows(2)
        .map(|w| w[1].magnitude_of_difference(w[0]))
        .sum()
}

pub fn norms<T: Magnitude>(field: &[T], grid: &Grid1D) -> Result<NormReport> {
    grid.check_len(field.len())?;
    let dx = grid.dx();
    let l1 = trapezoid(field.iter().map(|f| f.magnitude()), dx);
    let l2 = trapezoid(field.iter().map(|f| f.magnitude().powi(2)), dx).sqrt();
    let linf = field.iter().map(|f| f.magnitude()).fold(0.0, f64::max);
    let tv = total_variation(field);
    Ok(NormReport {
        l1,
        l2,
        linf,
        y: linf + tv,
    })
}

/// `int |psi|^2 dx = int (|u|^2 + |v|^2) dx`.
pub fn charge(psi: &SpinorSlice, grid: &Grid1D) -> Result<f64> {
    grid.check_len(psi.u.len())?;
    grid.check_len(psi.v.len())?;
    Ok(trapezoid(
        psi.u
            .iter()
            .zip(&psi.v)
            .map(|(u, v)| u.norm_sqr() + v.norm_sqr()),
        grid.dx(),
    ))
}

/// Discrete `L^2` norm of a spinor slice.
pub fn spinor_l2(psi: &SpinorSlice, grid: &Grid1D) -> Result<f64> {
    charge(psi, grid).map(f64::sqrt)
}

/// Discrete `L^2` distance between two spinor slices.
pub fn spinor_l2_distance(a: &SpinorSlice, b: &SpinorSlice, grid: &Grid1D) -> Result<f64> {
    spinor_l2(&a.difference(b), grid)
}
