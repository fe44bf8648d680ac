//! Eps-family sweeps: pairings of `A_-` against a bump test function, the
//! logarithmic divergence fit, and the massive-case lower bounds on `|u|^2`.
//!
//! Both sweep paths use the identity `-A_-(t,x) = iint_{cone(t,x)} |u|^2`, valid for
//! MD with vanishing potential data (`box A_- = -2|u|^2`). The massless path pairs
//! the closed-form `A_-` directly. The massive path moves the cone integral onto
//! the test function,
//!
//! ```text
//! P = iint |u(s,y)|^2 W(s,y) ds dy,   W(s,y) = iint_{t - s >= |x - y|} theta(t,x) dt dx,
//! ```
//!
//! and integrates the singular factor `1 / (eps + |y - s|)` of `|u|^2` exactly
//! against the piecewise-linear interpolant of the lattice ratio `|u|^2 / |f|^2`
//! times `W`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::lattice::{LatticeStepper, SolutionTrace};
use crate::oracle::MasslessSolution;
use crate::profile::{EpsFamily, Profile, SharedProfile};
use crate::quadrature::{gauss_legendre, simpson_weights};
use crate::state::{CauchyData, SpinorSlice};
use crate::system::SystemSpec;

/// Intervals per side used for the reference slope and bump mass.
const REFERENCE_CELLS: usize = 512;

/// Floor on the intervals per side of a pairing.
const MIN_PAIRING_CELLS: usize = 256;

/// Bump `exp(-1/(1 - r^2))` on the disc of radius `radius` around `(center_t, center_x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center_t: f64,
    pub center_x: f64,
    pub radius: f64,
}

impl TestFunction {
    /// Rejects supports that leave `{t > |x|} ∩ {t + |x| <= 1}`.
    pub fn new(center_t: f64, center_x: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !center_t.is_finite() || !center_x.is_finite() || !radius.is_finite()
        {
            return Err(Error::InvalidArgument(format!(
                "test function needs finite center and positive radius (got ({center_t}, {center_x}), {radius})"
            )));
        }
        if !(center_t - radius > center_x.abs() + radius) {
            return Err(Error::InvalidArgument(format!(
                "test function support must lie in t > |x| (t0 - r0 = {} <= |x0| + r0 = {})",
                center_t - radius,
                center_x.abs() + radius
            )));
        }
        if center_t + radius + center_x.abs() + radius > 1.0 {
            return Err(Error::InvalidArgument(format!(
                "test function support must lie in t + |x| <= 1 (got {})",
                center_t + 2.0 * radius + center_x.abs()
            )));
        }
        Ok(Self {
            center_t,
            center_x,
            radius,
        })
    }

    /// Center `(0.5, 0)`, radius `0.2`.
    pub fn default_massless() -> Self {
        Self::new(0.5, 0.0, 0.2).expect("static test function")
    }

    /// Center `(0.08, 0)`, radius `0.03`, inside `t < 1/8`.
    pub fn default_massive() -> Self {
        Self::new(0.08, 0.0, 0.03).expect("static test function")
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        let r2 = ((t - self.center_t).powi(2) + (x - self.center_x).powi(2)) / self.radius.powi(2);
        if r2 < 1.0 {
            (-1.0 / (1.0 - r2)).exp()
        } else {
            0.0
        }
    }

    /// `(t_lo, t_hi, x_lo, x_hi)`.
    pub fn support_box(&self) -> (f64, f64, f64, f64) {
        (
            self.center_t - self.radius,
            self.center_t + self.radius,
            self.center_x - self.radius,
            self.center_x + self.radius,
        )
    }

    /// Tensor Simpson rule for `iint g theta` over the support box with `cells`
    /// intervals per side (`cells` even).
    pub fn integrate<G>(&self, g: G, cells: usize) -> f64
    where
        G: Fn(f64, f64) -> f64 + Sync,
    {
        let cells = cells.max(2).next_multiple_of(2);
        let (t_lo, _, x_lo, _) = self.support_box();
        let h = 2.0 * self.radius / cells as f64;
        let w = simpson_weights(cells);
        (0..=cells)
            .into_par_iter()
            .map(|a| {
                let t = t_lo + a as f64 * h;
                let row: f64 = (0..=cells)
                    .map(|b| {
                        let x = x_lo + b as f64 * h;
                        let th = self.value(t, x);
                        if th == 0.0 {
                            0.0
                        } else {
                            w[b] * th * g(t, x)
                        }
                    })
                    .sum();
                w[a] * row
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum::<f64>()
            * h
            * h
    }

    pub fn mass(&self) -> f64 {
        self.integrate(|_, _| 1.0, REFERENCE_CELLS)
    }

    /// `iint ((t + x) / 2) theta`.
    pub fn reference_slope(&self) -> f64 {
        self.integrate(|t, x| 0.5 * (t + x), REFERENCE_CELLS)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairingResult {
    pub eps: f64,
    /// `-iint A_- theta`.
    pub pairing: f64,
    pub quadrature_error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square deviation of the pairings from the fitted line.
    pub residual: f64,
    pub reference_slope: f64,
    pub pairings: Vec<PairingResult>,
}

impl FitReport {
    /// Whether `P` increases strictly as `eps` decreases.
    pub fn is_monotone(&self) -> bool {
        let mut p = self.pairings.clone();
        p.sort_by(|a, b| b.eps.total_cmp(&a.eps));
        p.windows(2).all(|w| w[1].pairing > w[0].pairing)
    }
}

/// Sampled eps-family `f = g = chi_[-1,1] (eps + |x|)^(-1/2)` with two vanishing
/// potentials.
pub fn eps_data(eps: f64, grid: &Grid1D) -> Result<CauchyData> {
    let p = EpsFamily::new(eps)?;
    let psi = SpinorSlice::from_fn(grid, 0.0, |x| {
        let f = p.value(x);
        (Complex64::new(f, 0.0), Complex64::new(f, 0.0))
    });
    Ok(CauchyData::zero_potential(psi, 2).with_descriptor(p.describe()))
}

/// `-iint A_- theta` by tensor Simpson with spacing at most `grid.dx()`, and the
/// Richardson estimate `|P_h - P_2h| / 15`.
pub fn pairing<A>(
    eps: f64,
    a_minus: A,
    theta: &TestFunction,
    grid: &Grid1D,
) -> Result<PairingResult>
where
    A: Fn(f64, f64) -> f64 + Sync,
{
    let (t_lo, _, x_lo, x_hi) = theta.support_box();
    if x_lo < grid.x_min() || x_hi > grid.x_max() {
        return Err(Error::OutOfRegion {
            t: t_lo,
            x: if x_lo < grid.x_min() { x_lo } else { x_hi },
            reason: "test function support is not covered by the grid".into(),
        });
    }
    let cells = ((2.0 * theta.radius / grid.dx()).ceil() as usize)
        .max(MIN_PAIRING_CELLS)
        .next_multiple_of(4);
    let fine = theta.integrate(|t, x| -a_minus(t, x), cells);
    let coarse = theta.integrate(|t, x| -a_minus(t, x), cells / 2);
    Ok(PairingResult {
        eps,
        pairing: fine,
        quadrature_error_estimate: (fine - coarse).abs() / 15.0,
    })
}

/// Closed-form path, `M = 0`.
pub fn massless_pairing(eps: f64, theta: &TestFunction, grid: &Grid1D) -> Result<PairingResult> {
    let sol = MasslessSolution::eps_family(eps)?;
    pairing(eps, |t, x| sol.a_minus(t, x), theta, grid)
}

/// Cumulative `int_{x_lo}^{x} theta(t, .)` at the nodes `lo..=hi`, with 4-point
/// Gauss-Legendre per cell.
fn cumulative_slice(theta: &TestFunction, t: f64, grid: &Grid1D, lo: usize, hi: usize) -> Vec<f64> {
    let (gx, gw) = gauss_legendre(4);
    let h = grid.dx();
    let mut out = Vec::with_capacity(hi - lo + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for i in lo..hi {
        let a = grid.x(i);
        let cell: f64 = gx
            .iter()
            .zip(&gw)
            .map(|(z, w)| w * theta.value(t, a + 0.5 * h * (z + 1.0)))
            .sum();
        acc += 0.5 * h * cell;
        out.push(acc);
    }
    out
}

/// `(int 1/(eps+|z|), int z/(eps+|z|))` over `[a, b]`.
fn log_moments(a: f64, b: f64, eps: f64) -> (f64, f64) {
    if a >= 0.0 {
        let i0 = ((b - a) / (eps + a)).ln_1p();
        (i0, (b - a) - eps * i0)
    } else if b <= 0.0 {
        let i0 = ((b - a) / (eps - b)).ln_1p();
        (i0, -((b - a) - eps * i0))
    } else {
        let (l0, l1) = log_moments(a, 0.0, eps);
        let (r0, r1) = log_moments(0.0, b, eps);
        (l0 + r0, l1 + r1)
    }
}

/// `int_{z_l}^{z_l + h} L(z) / (eps + |z|) dz` with `L` linear from `q_l` to `q_r`.
fn product_cell(z_l: f64, h: f64, q_l: f64, q_r: f64, eps: f64) -> f64 {
    let (i0, i1) = log_moments(z_l, z_l + h, eps);
    q_l * i0 + (q_r - q_l) / h * (i1 - z_l * i0)
}

/// Lattice path for massive MD via the adjoint weight (see the module docs).
pub fn massive_pairing(
    eps: f64,
    spec: &SystemSpec,
    theta: &TestFunction,
    grid: &Grid1D,
) -> Result<PairingResult> {
    if !spec.is_maxwell_dirac() {
        return Err(Error::InvalidArgument(
            "pairings of A_- need the MD preset".into(),
        ));
    }
    let profile = EpsFamily::new(eps)?;
    let h = grid.dx();
    let (_, t_hi, x_lo, x_hi) = theta.support_box();
    let levels = (t_hi / h).ceil() as usize;
    let t_end = levels as f64 * h;
    // W(s, .) is supported in |y - x0| <= r0 + t_hi - s; the lattice values there
    // must not see the grid edges before t_end.
    let (y_lo, y_hi) = (x_lo - t_end - h, x_hi + t_end + h);
    if y_lo - t_end < grid.x_min() || y_hi + t_end > grid.x_max() {
        return Err(Error::OutOfRegion {
            t: t_end,
            x: if y_lo - t_end < grid.x_min() {
                y_lo
            } else {
                y_hi
            },
            reason: "grid too small for the adjoint pairing".into(),
        });
    }
    let node = |x: f64| ((x - grid.x_min()) / h).floor() as usize;
    let (i_lo, i_hi) = (node(y_lo), node(y_hi) + 1);
    let (s_lo, s_hi) = (node(x_lo), node(x_hi) + 1);
    let width = i_hi - i_lo + 1;

    // Cumulative slice integrals of theta on the levels where it lives.
    let cum: Vec<Vec<f64>> = (0..=levels)
        .into_par_iter()
        .map(|b| cumulative_slice(theta, b as f64 * h, grid, s_lo, s_hi))
        .collect();
    let cum_at = |b: usize, i: isize| -> f64 {
        let row = &cum[b];
        if i <= s_lo as isize {
            0.0
        } else if i >= s_hi as isize {
            row[row.len() - 1]
        } else {
            row[i as usize - s_lo]
        }
    };
    // W on levels a = 0..=levels over nodes i_lo..=i_hi; trapezoid in t with the
    // vanishing endpoint terms dropped.
    let weight: Vec<Vec<f64>> = (0..=levels)
        .into_par_iter()
        .map(|a| {
            (i_lo..=i_hi)
                .map(|i| {
                    let mut acc = 0.0;
                    for (b, _) in cum.iter().enumerate().skip(a + 1) {
                        let d = (b - a) as isize;
                        acc += cum_at(b, i as isize + d) - cum_at(b, i as isize - d);
                    }
                    acc * h
                })
                .collect()
        })
        .collect();

    let data = eps_data(eps, grid)?;
    let mut stepper = LatticeStepper::new(&data, spec, grid)?;
    let mut fine = 0.0;
    let mut coarse = 0.0;
    for a in 0..=levels {
        if a > 0 {
            stepper.step()?;
        }
        let psi = stepper.psi();
        let s = a as f64 * h;
        let mut q = vec![0.0; width];
        for (k, i) in (i_lo..=i_hi).enumerate() {
            let z = grid.x(i - a);
            let f2 = profile.value(z).powi(2);
            if f2 == 0.0 {
                return Err(Error::OutOfRegion {
                    t: s,
                    x: grid.x(i),
                    reason: "adjoint weight reaches the cutoff of the data".into(),
                });
            }
            q[k] = psi.u[i].norm_sqr() / f2 * weight[a][k];
        }
        let z0 = grid.x(i_lo - a);
        let level_fine: f64 = (0..width - 1)
            .map(|k| product_cell(z0 + k as f64 * h, h, q[k], q[k + 1], eps))
            .sum();
        let wt = if a == 0 || a == levels { 0.5 } else { 1.0 };
        fine += wt * h * level_fine;
        if a % 2 == 0 {
            let off = (i_lo % 2 == 1) as usize;
            let level_coarse: f64 = (off..width - 2)
                .step_by(2)
                .map(|k| product_cell(z0 + k as f64 * h, 2.0 * h, q[k], q[k + 2], eps))
                .sum();
            let wt = if a == 0 || a + 1 >= levels { 0.5 } else { 1.0 };
            coarse += wt * 2.0 * h * level_coarse;
        }
    }
    Ok(PairingResult {
        eps,
        pairing: fine,
        quadrature_error_estimate: (fine - coarse).abs() / 3.0,
    })
}

/// Least-squares line through `(x_k, y_k)`: `(slope, intercept, rms residual)`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

/// Pairs every `eps` (in parallel) and fits `P` against `-log eps`. `M = 0` uses
/// the closed form, otherwise the lattice.
pub fn sweep_and_fit(
    eps_list: &[f64],
    spec: &SystemSpec,
    theta: &TestFunction,
    grid: &Grid1D,
) -> Result<FitReport> {
    if eps_list.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 eps values (got {})",
            eps_list.len()
        )));
    }
    if eps_list.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidArgument("eps values must be positive".into()));
    }
    let monotone =
        eps_list.windows(2).all(|w| w[1] < w[0]) || eps_list.windows(2).all(|w| w[1] > w[0]);
    if !monotone {
        return Err(Error::InvalidArgument(
            "eps values must be strictly monotone".into(),
        ));
    }
    if !spec.is_maxwell_dirac() {
        return Err(Error::InvalidArgument(
            "eps sweeps need the MD preset".into(),
        ));
    }
    let pairings = eps_list
        .par_iter()
        .map(|&eps| {
            let r = if spec.dirac_mass() == 0.0 {
                massless_pairing(eps, theta, grid)
            } else {
                massive_pairing(eps, spec, theta, grid)
            };
            r.map_err(|e| Error::SweepEntry {
                eps,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = eps_list.iter().map(|e| -e.ln()).collect();
    let y: Vec<f64> = pairings.iter().map(|p| p.pairing).collect();
    let (slope, intercept, residual) = least_squares(&x, &y);
    Ok(FitReport {
        slope,
        intercept,
        residual,
        reference_slope: theta.reference_slope(),
        pairings,
    })
}

/// Outcome of the streaming massive-bound run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassiveBounds {
    /// Minimum of `|u|^2 (eps + x - t)` over lattice points with
    /// `0 < t < 1/(8|M|)`, `t < x < 1 - t`.
    pub key_bound_min: f64,
    /// Maximum of `B_rho(t) (eps + rho) / 4` over the sampled `(rho, t)`, `t < 1/(2|M|)`.
    pub gronwall_worst: f64,
    pub gronwall_samples: usize,
}

fn check_md(spec: &SystemSpec) -> Result<()> {
    if !spec.is_maxwell_dirac() {
        return Err(Error::InvalidArgument("needs the MD preset".into()));
    }
    Ok(())
}

/// Evolves the eps-family for MD with Dirac mass `m` and measures both bounds in
/// one pass. `rhos` are the sampled distances for `B_rho`.
pub fn massive_bounds(
    m: f64,
    eps: f64,
    spec: &SystemSpec,
    grid: &Grid1D,
    rhos: &[f64],
) -> Result<MassiveBounds> {
    check_md(spec)?;
    if !m.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "mass must be finite (got {m})"
        )));
    }
    if grid.x_min() > 0.0 || grid.x_max() < 1.0 {
        return Err(Error::InvalidArgument("the grid must cover [0, 1]".into()));
    }
    let spec = spec.with_dirac_mass(m);
    let profile = EpsFamily::new(eps)?;
    let h = grid.dx();
    let key_end = if m == 0.0 {
        0.5
    } else {
        (0.125 / m.abs()).min(0.5)
    };
    let gron_end = if m == 0.0 {
        0.5
    } else {
        (0.5 / m.abs()).min(0.5)
    };
    let data = eps_data(eps, grid)?;
    let mut stepper = LatticeStepper::new(&data, &spec, grid)?;
    let mut key_min = f64::INFINITY;
    let mut worst = 0.0f64;
    let mut samples = 0;
    let mut k = 0usize;
    loop {
        let t = k as f64 * h;
        if t >= key_end.max(gron_end) {
            break;
        }
        let psi = stepper.psi();
        if k > 0 && t < key_end {
            for i in 0..grid.len() {
                let x = grid.x(i);
                if x - t >= 0.5 * h && x < 1.0 - t && i >= k {
                    let z = grid.x(i - k);
                    key_min = key_min.min(psi.u[i].norm_sqr() * (eps + z));
                }
            }
        }
        if t < gron_end {
            for &rho in rhos {
                let mut sup = None::<f64>;
                for i in 0..grid.len() {
                    let x = grid.x(i);
                    if x >= t + rho && x <= 1.0 - t {
                        let d = psi.u[i].norm_sqr() + psi.v[i].norm_sqr();
                        sup = Some(sup.map_or(d, |s| s.max(d)));
                    }
                }
                if let Some(b) = sup {
                    worst = worst.max(b * (eps + rho) / 4.0);
                    samples += 1;
                }
            }
        }
        stepper.step()?;
        k += 1;
    }
    let _ = profile;
    Ok(MassiveBounds {
        key_bound_min: key_min,
        gronwall_worst: worst,
        gronwall_samples: samples,
    })
}

/// Minimum of `|u|^2 (eps + x - t)` over the KeyBound region.
pub fn key_bound_report(m: f64, eps: f64, spec: &SystemSpec, grid: &Grid1D) -> Result<f64> {
    Ok(massive_bounds(m, eps, spec, grid, &[])?.key_bound_min)
}

/// Maximum residual over the determinacy region of
///
/// ```text
/// |u(t,x)|^2 = |u(0,x-t)|^2 - 2M int_0^t Im(u conj v)(s, x-t+s) ds
/// |v(t,x)|^2 = |v(0,x+t)|^2 + 2M int_0^t Im(u conj v)(s, x+t-s) ds
/// ```
///
/// with trapezoid integrals along the stored characteristics.
pub fn moduli_identities_check(trace: &SolutionTrace, spec: &SystemSpec) -> Result<f64> {
    check_md(spec)?;
    if trace.stride != 1 {
        return Err(Error::InvalidArgument(
            "moduli identities need every time level (stride 1)".into(),
        ));
    }
    let grid = &trace.grid;
    let h = grid.dt();
    let m = spec.dirac_mass();
    let cross: Vec<Vec<f64>> = trace
        .slices
        .iter()
        .map(|s| {
            s.psi
                .u
                .iter()
                .zip(&s.psi.v)
                .map(|(u, v)| (u * v.conj()).im)
                .collect()
        })
        .collect();
    let n = grid.n_cells();
    let levels = trace.slices.len();
    let worst = (1..levels)
        .into_par_iter()
        .map(|k| {
            let mut worst = 0.0f64;
            let Some(range) = grid.determinacy_nodes(k) else {
                return 0.0;
            };
            let psi = &trace.slices[k].psi;
            let psi0 = &trace.slices[0].psi;
            for i in range {
                let mut int_u = 0.0;
                let mut int_v = 0.0;
                for s in 0..=k {
                    let w = if s == 0 || s == k { 0.5 } else { 1.0 };
                    int_u += w * cross[s][i - k + s];
                    int_v += w * cross[s][i + k - s];
                }
                let ru = psi.u[i].norm_sqr() - (psi0.u[i - k].norm_sqr() - 2.0 * m * h * int_u);
                let rv = psi.v[i].norm_sqr() - (psi0.v[i + k].norm_sqr() + 2.0 * m * h * int_v);
                debug_assert!(i + k <= n);
                worst = worst.max(ru.abs()).max(rv.abs());
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// The eps-family as a shared profile, for callers building oracles.
pub fn eps_profile(eps: f64) -> Result<SharedProfile> {
    Ok(Arc::new(EpsFamily::new(eps)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::lattice::evolve;
    use crate::norms::charge;

    #[test]
    fn test_function_region_checks() {
        assert!(TestFunction::new(0.5, 0.0, 0.2).is_ok());
        assert!(TestFunction::new(0.3, 0.0, 0.2).is_err());
        assert!(TestFunction::new(0.8, 0.0, 0.2).is_err());
        assert!(TestFunction::new(0.5, 0.1, 0.0).is_err());
        let th = TestFunction::default_massive();
        assert!(th.center_t + th.radius < 0.125);
        assert_eq!(th.value(0.08, 0.0), (-1.0f64).exp());
        assert_eq!(th.value(0.08, 0.03), 0.0);
    }

    #[test]
    fn eps_data_values() {
        let g = make_grid(-2.0, 2.0, 400).unwrap();
        let d = eps_data(0.01, &g).unwrap();
        let i0 = g.node_of(0.0).unwrap();
        assert!((d.psi0.u[i0].re - 10.0).abs() < 1e-13);
        assert_eq!(d.psi0.u[g.node_of(1.5).unwrap()].re, 0.0);
        assert!(d.v.iter().chain(&d.w).flatten().all(|&x| x == 0.0));
        assert!(eps_data(0.0, &g).is_err());
        let q = charge(&d.psi0, &g).unwrap();
        assert!(q > 0.0);
    }

    #[test]
    fn zero_and_constant_fields() {
        let g = make_grid(-1.0, 1.0, 200).unwrap();
        let th = TestFunction::default_massless();
        let p = pairing(0.1, |_, _| 0.0, &th, &g).unwrap();
        assert_eq!(p.pairing, 0.0);
        let p = pairing(0.1, |_, _| -1.0, &th, &g).unwrap();
        assert!((p.pairing - th.mass()).abs() < 1e-8);
        let narrow = make_grid(-0.1, 0.1, 20).unwrap();
        assert!(pairing(0.1, |_, _| 0.0, &th, &narrow).is_err());
    }

    #[test]
    fn log_moments_match_quadrature() {
        let eps = 1e-3;
        for (a, b) in [(0.0, 0.01), (0.02, 0.025), (-0.03, -0.01), (-0.004, 0.006)] {
            let (i0, i1) = log_moments(a, b, eps);
            let q0 = crate::quadrature::integrate(|z| 1.0 / (eps + z.abs()), a, b, &[0.0], 1e-15);
            let q1 = crate::quadrature::integrate(|z| z / (eps + z.abs()), a, b, &[0.0], 1e-15);
            assert!((i0 - q0).abs() < 1e-12 * q0.abs().max(1.0));
            assert!((i1 - q1).abs() < 1e-12);
        }
    }

    #[test]
    fn massless_key_bound_is_one() {
        let g = make_grid(-1.0, 2.0, 600).unwrap();
        let spec = SystemSpec::maxwell_dirac(0.0);
        let r = massive_bounds(0.0, 0.01, &spec, &g, &[0.05, 0.2]).unwrap();
        assert!((r.key_bound_min - 1.0).abs() < 1e-12, "{}", r.key_bound_min);
        assert!(r.gronwall_worst <= 0.5 + 1e-12);
    }

    #[test]
    fn moduli_identities_massless_and_sign() {
        let g = make_grid(-2.0, 2.0, 200).unwrap();
        let psi = SpinorSlice::from_fn(&g, 0.0, |x| {
            (
                Complex64::new((-8.0 * x * x).exp(), 0.0),
                Complex64::new(0.0, (-8.0 * (x - 0.2).powi(2)).exp()),
            )
        });
        let data = CauchyData::zero_potential(psi, 2);
        let spec = SystemSpec::maxwell_dirac(0.0);
        let tr = evolve(&data, &spec, &g, 0.5, 1).unwrap();
        assert!(moduli_identities_check(&tr, &spec).unwrap() < 1e-13);
        let spec = SystemSpec::maxwell_dirac(1.0);
        let tr = evolve(&data, &spec, &g, 0.5, 1).unwrap();
        let good = moduli_identities_check(&tr, &spec).unwrap();
        let flipped = moduli_identities_check(&tr, &spec.with_dirac_mass(-1.0)).unwrap();
        assert!(good < 0.1 * flipped, "{good} vs {flipped}");
    }
}
