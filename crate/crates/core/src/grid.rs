//! Uniform spatial lattice with the time step locked to the mesh width.

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative slack used when deciding whether a time or position is on the lattice.
const LATTICE_SNAP: f64 = 1e-9;

/// Uniform grid on `[x_min, x_max]` with `n_cells + 1` nodes and `dt == dx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_cells: usize,
    dx: f64,
}

/// Builds a [`Grid1D`], rejecting empty intervals and fewer than two cells.
pub fn make_grid(x_min: f64, x_max: f64, n_cells: usize) -> Result<Grid1D> {
    Grid1D::new(x_min, x_max, n_cells)
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "bounds must be finite (got [{x_min}, {x_max}])"
            )));
        }
        if x_min >= x_max {
            return Err(Error::InvalidGrid(format!(
                "x_min < x_max required (got x_min = {x_min}, x_max = {x_max})"
            )));
        }
        if n_cells < 2 {
            return Err(Error::InvalidGrid(format!(
                "n_cells >= 2 required (got {n_cells})"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_cells,
            dx: (x_max - x_min) / n_cells as f64,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Number of nodes, `n_cells + 1`.
    pub fn len(&self) -> usize {
        self.n_cells + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Time step; identical to `dx` (CFL number one).
    pub fn dt(&self) -> f64 {
        self.dx
    }

    /// Position of node `i`.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.x(i))
    }

    /// Number of time steps needed to reach `t`, which must be a multiple of `dt`.
    pub fn steps_for(&self, t: f64) -> Result<usize> {
        let dt = self.dt();
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::OffLattice { t, dt });
        }
        let k = (t / dt).round();
        if (k * dt - t).abs() > LATTICE_SNAP * t.max(1.0) {
            return Err(Error::OffLattice { t, dt });
        }
        Ok(k as usize)
    }

    /// Index of the node located at `x`, if `x` is (up to rounding) a node.
    pub fn node_of(&self, x: f64) -> Option<usize> {
        let s = (x - self.x_min) / self.dx;
        let i = s.round();
        if i < 0.0 || i > self.n_cells as f64 {
            return None;
        }
        if (s - i).abs() > LATTICE_SNAP * s.abs().max(1.0) {
            return None;
        }
        Some(i as usize)
    }

    /// Nodes whose backward cone of height `steps * dt` stays inside the grid.
    pub fn determinacy_nodes(&self, steps: usize) -> Option<RangeInclusive<usize>> {
        if 2 * steps > self.n_cells {
            return None;
        }
        Some(steps..=self.n_cells - steps)
    }

    /// Whether the node-for-node spatial reflection `x -> -x` maps the grid to itself.
    pub fn is_symmetric(&self) -> bool {
        (self.x_min + self.x_max).abs() <= LATTICE_SNAP * self.dx
    }

    /// The same interval refined by an integer factor.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::new(self.x_min, self.x_max, self.n_cells * factor)
    }

    pub fn check_len(&self, len: usize) -> Result<()> {
        if len != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: len,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_spacing_grid() {
        let g = make_grid(-2.0, 2.0, 4).unwrap();
        assert_eq!(g.dx(), 1.0);
        let nodes: Vec<f64> = g.nodes().collect();
        assert_eq!(nodes, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn dt_equals_dx() {
        let g = make_grid(0.0, 1.0, 2).unwrap();
        assert_eq!(g.dx(), 0.5);
        assert_eq!(g.dt(), 0.5);
    }

    #[test]
    fn rejects_bad_bounds_and_cells() {
        assert!(matches!(
            make_grid(1.0, -1.0, 10),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            make_grid(0.0, 0.0, 10),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(make_grid(0.0, 1.0, 1), Err(Error::InvalidGrid(_))));
        assert!(make_grid(f64::NAN, 1.0, 4).is_err());
    }

    #[test]
    fn steps_and_nodes() {
        let g = make_grid(-2.0, 2.0, 400).unwrap();
        assert_eq!(g.steps_for(0.5).unwrap(), 50);
        assert!(g.steps_for(0.505).is_err());
        assert!(g.steps_for(-0.01).is_err());
        assert_eq!(g.node_of(0.0), Some(200));
        assert_eq!(g.node_of(0.005), None);
        assert_eq!(g.node_of(3.0), None);
        assert_eq!(g.determinacy_nodes(10), Some(10..=390));
        assert_eq!(g.determinacy_nodes(201), None);
        assert!(g.is_symmetric());
    }
}
