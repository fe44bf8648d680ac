//! Backward light-cone quadratures for
//!
//! ```text
//! (d_t^2 - d_x^2 + m^2) u = F,   (u, d_t u)(0) = (f, g).
//! ```
//!
//! Because `dt == dx`, every cone edge passes through lattice nodes. At output level
//! `k` the cone slice at source level `l` spans the `2 (k - l) + 1` nodes centred on
//! the output node, always an even number of intervals, so plain composite Simpson
//! applies across each slice. The outer time integral uses [`simpson_weights`].

use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::bessel::{j0_unchecked, j1_over_x_unchecked};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::norms::{norms, trapezoid};
use crate::profile::SharedProfile;
use crate::quadrature::simpson_weights;

/// Right-hand side `F(s, y)` of the wave/Klein-Gordon equation, sampled on lattice
/// points `(level * dt, x_node)`.
pub trait SourceSampler: Sync {
    fn value(&self, level: usize, node: usize) -> f64;

    /// Exact `int F(s, y) dy` between nodes `lo` and `hi` at one level, for sources
    /// known in closed form. Used in place of Simpson when the kernel is trivial
    /// (`m = 0`).
    fn slice_integral(&self, _level: usize, _lo: usize, _hi: usize) -> Option<f64> {
        None
    }

    fn is_zero(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroSource;

impl SourceSampler for ZeroSource {
    fn value(&self, _level: usize, _node: usize) -> f64 {
        0.0
    }
    fn slice_integral(&self, _level: usize, _lo: usize, _hi: usize) -> Option<f64> {
        Some(0.0)
    }
    fn is_zero(&self) -> bool {
        true
    }
}

/// A source given as a function of `(s, y)`.
pub struct FnSource<F> {
    grid: Grid1D,
    f: F,
}

impl<F: Fn(f64, f64) -> f64 + Sync> FnSource<F> {
    pub fn new(grid: &Grid1D, f: F) -> Self {
        Self { grid: *grid, f }
    }
}

impl<F: Fn(f64, f64) -> f64 + Sync> SourceSampler for FnSource<F> {
    fn value(&self, level: usize, node: usize) -> f64 {
        (self.f)(level as f64 * self.grid.dt(), self.grid.x(node))
    }
}

/// A source stored as one array per time level.
pub struct HistorySource<'a> {
    levels: &'a [Vec<f64>],
}

impl<'a> HistorySource<'a> {
    pub fn new(levels: &'a [Vec<f64>]) -> Self {
        Self { levels }
    }
}

impl SourceSampler for HistorySource<'_> {
    fn value(&self, level: usize, node: usize) -> f64 {
        self.levels[level][node]
    }
}

/// `a |f(y - s)|^2 + b |g(y + s)|^2`: the densities of a freely transported spinor
/// with profiles `(f, g)`, such as the massless Maxwell-Dirac sources.
///
/// Slice integrals are exact through the profiles' density antiderivatives, which
/// keeps the cone integral accurate for singular profiles however small their
/// regularisation is.
pub struct TransportedDensity {
    grid: Grid1D,
    f: SharedProfile,
    g: SharedProfile,
    a: f64,
    b: f64,
}

impl TransportedDensity {
    pub fn new(grid: &Grid1D, f: SharedProfile, g: SharedProfile, a: f64, b: f64) -> Self {
        Self {
            grid: *grid,
            f,
            g,
            a,
            b,
        }
    }
}

impl SourceSampler for TransportedDensity {
    fn value(&self, level: usize, node: usize) -> f64 {
        let s = level as f64 * self.grid.dt();
        let y = self.grid.x(node);
        self.a * self.f.value(y - s).powi(2) + self.b * self.g.value(y + s).powi(2)
    }

    fn slice_integral(&self, level: usize, lo: usize, hi: usize) -> Option<f64> {
        let s = level as f64 * self.grid.dt();
        let (y0, y1) = (self.grid.x(lo), self.grid.x(hi));
        let fu = self.f.density_integral(y1 - s) - self.f.density_integral(y0 - s);
        let gv = self.g.density_integral(y1 + s) - self.g.density_integral(y0 + s);
        Some(self.a * fu + self.b * gv)
    }
}

/// Composite Simpson weight (without the `h / 3` factor) of offset `o` in a window of
/// `2 d` intervals.
#[inline]
fn simpson_unit(o: usize, two_d: usize) -> f64 {
    if o == 0 || o == two_d {
        1.0
    } else if o % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

fn check_cone(grid: &Grid1D, k: usize, t: f64, nodes: &RangeInclusive<usize>) -> Result<()> {
    if nodes.is_empty() {
        return Ok(());
    }
    let (lo, hi) = (*nodes.start(), *nodes.end());
    if lo < k {
        return Err(Error::ConeLeavesGrid { node: lo, t });
    }
    if hi + k > grid.n_cells() {
        return Err(Error::ConeLeavesGrid { node: hi, t });
    }
    Ok(())
}

/// `K[d][j] = kernel(m h sqrt(d^2 - j^2))` for `0 <= j <= d <= k`, stored row-major.
struct KernelTable {
    rows: Vec<Vec<f64>>,
}

impl KernelTable {
    fn new(k: usize, m: f64, h: f64, kernel: fn(f64) -> f64) -> Self {
        let rows = (0..=k)
            .into_par_iter()
            .map(|d| {
                (0..=d)
                    .map(|j| {
                        let r2 = (d * d - j * j) as f64;
                        kernel(m.abs() * h * r2.sqrt())
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    #[inline]
    fn get(&self, d: usize, j: usize) -> f64 {
        self.rows[d][j]
    }
}

/// Klein-Gordon solution `u(t, x_i)` at the requested nodes.
///
/// Fails with [`Error::ConeLeavesGrid`] if the backward cone of any requested node
/// leaves the grid; [`Grid1D::determinacy_nodes`] gives the admissible range.
pub fn kg_solve(
    f: &[f64],
    g: &[f64],
    source: &dyn SourceSampler,
    m: f64,
    grid: &Grid1D,
    t: f64,
    nodes: RangeInclusive<usize>,
) -> Result<Vec<f64>> {
    grid.check_len(f.len())?;
    grid.check_len(g.len())?;
    if !m.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "mass must be finite (got {m})"
        )));
    }
    let k = grid.steps_for(t)?;
    check_cone(grid, k, t, &nodes)?;
    let h = grid.dx();
    let massive = m != 0.0;
    let j0 = KernelTable::new(k, m, h, j0_unchecked);
    let j1x = massive.then(|| KernelTable::new(k, m, h, j1_over_x_unchecked));
    let outer = simpson_weights(k);
    let with_source = !source.is_zero();

    let out = nodes
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|i| {
            let mut u = 0.5 * (f[i + k] + f[i - k]);
            if k == 0 {
                return u;
            }
            let lo = i - k;
            let (mut sf, mut sg) = (0.0, 0.0);
            for o in 0..=2 * k {
                let y = lo + o;
                let w = simpson_unit(o, 2 * k);
                let j = y.abs_diff(i);
                sg += w * j0.get(k, j) * g[y];
                if let Some(t1) = &j1x {
                    sf += w * t1.get(k, j) * f[y];
                }
            }
            u += 0.5 * sg * h / 3.0;
            if massive {
                u -= 0.5 * m * m * t * sf * h / 3.0;
            }
            if with_source {
                let mut acc = 0.0;
                for (l, wl) in outer.iter().enumerate().take(k) {
                    let d = k - l;
                    let exact = if massive {
                        None
                    } else {
                        source.slice_integral(l, i - d, i + d)
                    };
                    let slice = exact.unwrap_or_else(|| {
                        let mut s = 0.0;
                        for o in 0..=2 * d {
                            let y = i - d + o;
                            s += simpson_unit(o, 2 * d)
                                * j0.get(d, y.abs_diff(i))
                                * source.value(l, y);
                        }
                        s * h / 3.0
                    });
                    acc += wl * slice;
                }
                u += 0.5 * acc * h;
            }
            u
        })
        .collect();
    Ok(out)
}

/// Prefix sums split by node parity, for O(1) Simpson sums over any window.
struct ParityPrefix {
    even: Vec<f64>,
    odd: Vec<f64>,
}

impl ParityPrefix {
    fn new(a: &[f64]) -> Self {
        let mut even = Vec::with_capacity(a.len() + 1);
        let mut odd = Vec::with_capacity(a.len() + 1);
        let (mut e, mut o) = (0.0, 0.0);
        even.push(0.0);
        odd.push(0.0);
        for (y, v) in a.iter().enumerate() {
            if y % 2 == 0 {
                e += v;
            } else {
                o += v;
            }
            even.push(e);
            odd.push(o);
        }
        Self { even, odd }
    }

    /// Simpson sum over nodes `lo..=hi` (`hi - lo` even), times `3 / h`.
    #[inline]
    fn simpson(&self, a: &[f64], lo: usize, hi: usize) -> f64 {
        let (same, opp) = if lo.is_multiple_of(2) {
            (&self.even, &self.odd)
        } else {
            (&self.odd, &self.even)
        };
        let s = same[hi + 1] - same[lo];
        let o = opp[hi + 1] - opp[lo];
        4.0 * o + 2.0 * s - a[lo] - a[hi]
    }
}

/// d'Alembert solution of the wave equation (`m = 0`) at the requested nodes.
///
/// Uses the same quadrature as [`kg_solve`] but no Bessel kernels, with slice sums
/// taken from parity prefix sums, so each output node costs `O(k)`.
pub fn dalembert_solve(
    f: &[f64],
    g: &[f64],
    source: &dyn SourceSampler,
    grid: &Grid1D,
    t: f64,
    nodes: RangeInclusive<usize>,
) -> Result<Vec<f64>> {
    grid.check_len(f.len())?;
    grid.check_len(g.len())?;
    let k = grid.steps_for(t)?;
    check_cone(grid, k, t, &nodes)?;
    let h = grid.dx();
    let g_prefix = ParityPrefix::new(g);
    let outer = simpson_weights(k);
    let with_source = !source.is_zero();
    let span = if nodes.is_empty() {
        0..=0
    } else {
        nodes.start() - k..=nodes.end() + k
    };
    // Sampled levels are only needed where no exact slice integral is available.
    let levels: Vec<Option<(Vec<f64>, ParityPrefix)>> = if with_source && !nodes.is_empty() {
        (0..k)
            .into_par_iter()
            .map(|l| {
                let probe = source.slice_integral(l, *span.start(), *span.start());
                if probe.is_some() {
                    return None;
                }
                let mut row = vec![0.0; grid.len()];
                for y in span.clone() {
                    row[y] = source.value(l, y);
                }
                let p = ParityPrefix::new(&row);
                Some((row, p))
            })
            .collect()
    } else {
        Vec::new()
    };

    let out = nodes
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|i| {
            let mut u = 0.5 * (f[i + k] + f[i - k]);
            if k == 0 {
                return u;
            }
            u += 0.5 * g_prefix.simpson(g, i - k, i + k) * h / 3.0;
            if with_source {
                let mut acc = 0.0;
                for (l, wl) in outer.iter().enumerate().take(k) {
                    let d = k - l;
                    let slice = match &levels[l] {
                        Some((row, p)) => p.simpson(row, i - d, i + d) * h / 3.0,
                        None => source
                            .slice_integral(l, i - d, i + d)
                            .expect("closed-form source lost its slice integral"),
                    };
                    acc += wl * slice;
                }
                u += 0.5 * acc * h;
            }
            u
        })
        .collect();
    Ok(out)
}

/// `int_0^t ||F(s)||_{L^1} ds` over the full grid.
fn source_l1_integral(source: &dyn SourceSampler, grid: &Grid1D, k: usize) -> f64 {
    if k == 0 || source.is_zero() {
        return 0.0;
    }
    let per_level: Vec<f64> = (0..=k)
        .into_par_iter()
        .map(|l| trapezoid((0..grid.len()).map(|y| source.value(l, y).abs()), grid.dx()))
        .collect();
    simpson_weights(k)
        .iter()
        .zip(&per_level)
        .map(|(w, v)| w * v)
        .sum::<f64>()
        * grid.dt()
}

/// `C (1 + m^2 t^2) ||f||_inf + C ||g||_1 + C int_0^t ||F||_1 - ||u(t)||_inf`, with the
/// sup taken over the nodes whose cone stays inside the grid.
#[allow(clippy::too_many_arguments)]
pub fn kg_bound_margin(
    f: &[f64],
    g: &[f64],
    source: &dyn SourceSampler,
    m: f64,
    grid: &Grid1D,
    t: f64,
    c: f64,
) -> Result<f64> {
    let k = grid.steps_for(t)?;
    let nodes = grid
        .determinacy_nodes(k)
        .ok_or(Error::ConeLeavesGrid { node: 0, t })?;
    let u = kg_solve(f, g, source, m, grid, t, nodes)?;
    let lhs = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let rhs = c * (1.0 + m * m * t * t) * norms(f, grid)?.linf
        + c * norms(g, grid)?.l1
        + c * source_l1_integral(source, grid, k);
    Ok(rhs - lhs)
}

/// `3 (||f||_Y + ||g||_1 + int_0^t ||F||_1) - (||u(t)||_Y + ||d_t u(t)||_1)` for the wave
/// equation. `d_t u` is the centred difference of the solutions at `t +- dt`, and the
/// left side is restricted to nodes whose cone at `t + dt` stays inside the grid.
pub fn wave_estimate_margin(
    f: &[f64],
    g: &[f64],
    source: &dyn SourceSampler,
    grid: &Grid1D,
    t: f64,
) -> Result<f64> {
    let k = grid.steps_for(t)?;
    if k == 0 {
        return Err(Error::InvalidArgument(
            "the wave estimate needs t >= dt for the time difference".into(),
        ));
    }
    let h = grid.dt();
    let nodes = grid
        .determinacy_nodes(k + 1)
        .ok_or(Error::ConeLeavesGrid { node: 0, t })?;
    let at = |kk: usize| dalembert_solve(f, g, source, grid, kk as f64 * h, nodes.clone());
    let (prev, now, next) = (at(k - 1)?, at(k)?, at(k + 1)?);
    let sup = now.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let tv: f64 = now.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let dtu = trapezoid(
        next.iter()
            .zip(&prev)
            .map(|(a, b)| ((a - b) / (2.0 * h)).abs()),
        h,
    );
    let fn_ = norms(f, grid)?;
    let rhs = 3.0 * (fn_.y + norms(g, grid)?.l1 + source_l1_integral(source, grid, k));
    Ok(rhs - (sup + tv + dtu))
}
