//! Field containers: spinor slices, potential states and Cauchy data.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// The spinor `psi = (u, v)` on one time slice, one complex pair per node.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorSlice {
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub time: f64,
}

impl SpinorSlice {
    pub fn zeros(grid: &Grid1D, time: f64) -> Self {
        let zero = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self {
            u: zero.clone(),
            v: zero,
            time,
        }
    }

    /// Samples `(u, v) = f(x)` at every node.
    pub fn from_fn<F>(grid: &Grid1D, time: f64, f: F) -> Self
    where
        F: Fn(f64) -> (Complex64, Complex64),
    {
        let (u, v) = grid.nodes().map(f).unzip();
        Self { u, v, time }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Pointwise density `|u|^2 + |v|^2`.
    pub fn density(&self) -> Vec<f64> {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(u, v)| u.norm_sqr() + v.norm_sqr())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.u
            .iter()
            .chain(&self.v)
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn validate(&self, grid: &Grid1D) -> Result<()> {
        grid.check_len(self.u.len())?;
        grid.check_len(self.v.len())?;
        if !self.is_finite() {
            return Err(Error::InvalidArgument(
                "spinor has non-finite entries".into(),
            ));
        }
        Ok(())
    }

    /// `self - other`, nodewise.
    pub fn difference(&self, other: &Self) -> Self {
        Self {
            u: self.u.iter().zip(&other.u).map(|(a, b)| a - b).collect(),
            v: self.v.iter().zip(&other.v).map(|(a, b)| a - b).collect(),
            time: self.time,
        }
    }

    /// Spatial reflection `x -> -x` on a symmetric grid (node `i` to node `n - i`).
    pub fn reflected(&self) -> Self {
        let mut u = self.u.clone();
        let mut v = self.v.clone();
        u.reverse();
        v.reverse();
        Self {
            u,
            v,
            time: self.time,
        }
    }
}

/// Potentials `V_j` and their time derivatives on one time slice.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialState {
    /// `values[j][i]` is `V_j` at node `i`.
    pub values: Vec<Vec<f64>>,
    /// `rates[j][i]` is `dV_j/dt` at node `i`.
    pub rates: Vec<Vec<f64>>,
    pub time: f64,
}

impl PotentialState {
    pub fn zeros(n_components: usize, grid: &Grid1D, time: f64) -> Self {
        Self {
            values: vec![vec![0.0; grid.len()]; n_components],
            rates: vec![vec![0.0; grid.len()]; n_components],
            time,
        }
    }

    pub fn n_components(&self) -> usize {
        self.values.len()
    }

    pub fn validate(&self, n_components: usize, grid: &Grid1D) -> Result<()> {
        if self.values.len() != n_components || self.rates.len() != n_components {
            return Err(Error::LengthMismatch {
                expected: n_components,
                got: self.values.len().min(self.rates.len()),
            });
        }
        for arr in self.values.iter().chain(&self.rates) {
            grid.check_len(arr.len())?;
            if arr.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(
                    "potential has non-finite entries".into(),
                ));
            }
        }
        Ok(())
    }

    /// Nodewise average of the values of two states; rates are averaged too.
    pub fn midpoint(a: &Self, b: &Self) -> Self {
        let avg = |x: &Vec<Vec<f64>>, y: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            x.iter()
                .zip(y)
                .map(|(p, q)| p.iter().zip(q).map(|(s, t)| 0.5 * (s + t)).collect())
                .collect()
        };
        Self {
            values: avg(&a.values, &b.values),
            rates: avg(&a.rates, &b.rates),
            time: 0.5 * (a.time + b.time),
        }
    }

    /// Spatial reflection on a symmetric grid. Time derivatives flip sign because the
    /// reflection also reverses time.
    pub fn reflected(&self) -> Self {
        let rev = |x: &Vec<f64>| x.iter().rev().copied().collect::<Vec<f64>>();
        Self {
            values: self.values.iter().map(rev).collect(),
            rates: self
                .rates
                .iter()
                .map(|r| r.iter().rev().map(|x| -x).collect())
                .collect(),
            time: self.time,
        }
    }
}

/// Initial data `(psi_0, v, w)` for the generic system.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyData {
    pub psi0: SpinorSlice,
    /// `V_j(0, x)`.
    pub v: Vec<Vec<f64>>,
    /// `dV_j/dt(0, x)`.
    pub w: Vec<Vec<f64>>,
    /// Free-form tag describing the analytic origin, e.g. `eps-family(0.01)`.
    pub descriptor: Option<String>,
}

impl CauchyData {
    pub fn new(psi0: SpinorSlice, v: Vec<Vec<f64>>, w: Vec<Vec<f64>>) -> Self {
        Self {
            psi0,
            v,
            w,
            descriptor: None,
        }
    }

    /// Spinor data with vanishing potential data (`v = w = 0`).
    pub fn zero_potential(psi0: SpinorSlice, n_components: usize) -> Self {
        let n = psi0.len();
        Self {
            psi0,
            v: vec![vec![0.0; n]; n_components],
            w: vec![vec![0.0; n]; n_components],
            descriptor: Some("zero-potential".into()),
        }
    }

    pub fn with_descriptor(mut self, tag: impl Into<String>) -> Self {
        self.descriptor = Some(tag.into());
        self
    }

    pub fn n_components(&self) -> usize {
        self.v.len()
    }

    pub fn validate(&self, n_components: usize, grid: &Grid1D) -> Result<()> {
        self.psi0.validate(grid)?;
        if self.v.len() != n_components || self.w.len() != n_components {
            return Err(Error::LengthMismatch {
                expected: n_components,
                got: self.v.len().min(self.w.len()),
            });
        }
        for arr in self.v.iter().chain(&self.w) {
            grid.check_len(arr.len())?;
            if arr.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidArgument(
                    "potential data have non-finite entries".into(),
                ));
            }
        }
        Ok(())
    }

    /// The initial potential state `(v, w)` at `t = 0`.
    pub fn initial_potential(&self) -> PotentialState {
        PotentialState {
            values: self.v.clone(),
            rates: self.w.clone(),
            time: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn reflection_is_an_involution() {
        let g = make_grid(-1.0, 1.0, 8).unwrap();
        let s = SpinorSlice::from_fn(&g, 0.0, |x| {
            (Complex64::new(x, 1.0), Complex64::new(x * x, -x))
        });
        assert_eq!(s.reflected().reflected(), s);
        assert_eq!(s.reflected().u[0], s.u[8]);
    }

    #[test]
    fn validation_catches_mismatch() {
        let g = make_grid(-1.0, 1.0, 8).unwrap();
        let g2 = make_grid(-1.0, 1.0, 10).unwrap();
        let data = CauchyData::zero_potential(SpinorSlice::zeros(&g, 0.0), 2);
        assert!(data.validate(2, &g).is_ok());
        assert!(data.validate(1, &g).is_err());
        assert!(data.validate(2, &g2).is_err());
        let mut bad = SpinorSlice::zeros(&g, 0.0);
        bad.u[3] = Complex64::new(f64::NAN, 0.0);
        assert!(bad.validate(&g).is_err());
    }
}
