//! Read-only checks over stored traces: charge drift, gauge and Gauss
//! constraints, the energy inequality, potential norm growth and scaling.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::lattice::{evolve, SolutionTrace};
use crate::norms::{charge, norms, spinor_l2_distance, trapezoid};
use crate::oracle::MasslessSolution;
use crate::profile::{Profile, Scaled, SharedProfile};
use crate::state::{CauchyData, SpinorSlice};
use crate::system::SystemSpec;

/// Minimum number of samples for a growth fit.
pub const MIN_GROWTH_SAMPLES: usize = 10;
/// Growth exponent allowed with a massless boson.
pub const MASSLESS_GROWTH_LIMIT: f64 = 1.2;
/// Growth exponent allowed with a massive boson.
pub const MASSIVE_GROWTH_LIMIT: f64 = 4.3;
/// Slack on the energy inequality.
pub const ENERGY_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub charge_drift_rel: f64,
    /// Per stored time; empty for non-MD systems.
    pub gauge_residual_norms: Vec<f64>,
    pub gauss_residual_norms: Vec<f64>,
    pub energy_margin_min: f64,
    /// `(t, sum_j ||V_j||_Y + ||dV_j/dt||_1)`.
    pub norm_growth_samples: Vec<(f64, f64)>,
    pub norm_growth_exponent: Option<f64>,
    pub scaling_mismatch: Option<f64>,
}

/// `max_t |Q(t) - Q(0)| / Q(0)`, or the absolute drift when `Q(0) = 0`.
pub fn charge_drift(trace: &SolutionTrace) -> Result<f64> {
    let grid = &trace.grid;
    let Some(first) = trace.slices.first() else {
        return Err(Error::InvalidArgument("empty trace".into()));
    };
    let q0 = charge(&first.psi, grid)?;
    let mut worst = 0.0f64;
    for s in &trace.slices {
        worst = worst.max((charge(&s.psi, grid)? - q0).abs());
    }
    Ok(if q0 > 0.0 { worst / q0 } else { worst })
}

/// Electric field at `t = 0`, `E_0(x) = -Q/2 + int_{x_min}^x |psi_0|^2`, by the
/// cumulative trapezoid rule.
pub fn initial_electric_field(psi0: &SpinorSlice, grid: &Grid1D) -> Result<Vec<f64>> {
    let rho = psi0.density();
    grid.check_len(rho.len())?;
    let h = grid.dx();
    let mut e = Vec::with_capacity(rho.len());
    let mut acc = 0.0;
    e.push(0.0);
    for w in rho.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        e.push(acc);
    }
    let half = 0.5 * acc;
    Ok(e.into_iter().map(|x| x - half).collect())
}

/// MD data satisfying both constraints: `A = 0`, `dA_0/dt = 0`, `dA_1/dt = -E_0`.
pub fn compatible_md_data(psi0: SpinorSlice, grid: &Grid1D) -> Result<CauchyData> {
    let e0 = initial_electric_field(&psi0, grid)?;
    let n = grid.len();
    let data = CauchyData::new(
        psi0,
        vec![vec![0.0; n]; 2],
        vec![vec![0.0; n], e0.iter().map(|e| -e).collect()],
    );
    Ok(data.with_descriptor("constraint-compatible"))
}

fn centered_derivative(f: &[f64], i: usize, h: f64) -> f64 {
    (f[i + 1] - f[i - 1]) / (2.0 * h)
}

/// Per stored slice, the `L^1` norms over the domain of determinacy (shrunk by two
/// nodes for the differences) of `dA_0/dt - dA_1/dx` and `dE/dx - |psi|^2`, with
/// `E = dA_0/dx - dA_1/dt`.
pub fn constraint_residuals(
    trace: &SolutionTrace,
    spec: &SystemSpec,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !spec.is_maxwell_dirac() {
        return Err(Error::InvalidArgument(
            "constraint residuals are defined for the MD preset only".into(),
        ));
    }
    let grid = &trace.grid;
    let h = grid.dx();
    let mut gauge = Vec::with_capacity(trace.slices.len());
    let mut gauss = Vec::with_capacity(trace.slices.len());
    for (k, s) in trace.slices.iter().enumerate() {
        let steps = k * trace.stride + 2;
        let Some(range) = grid.determinacy_nodes(steps) else {
            break;
        };
        let (a0, a1) = (&s.potentials.values[0], &s.potentials.values[1]);
        let (r0, r1) = (&s.potentials.rates[0], &s.potentials.rates[1]);
        let rho = s.psi.density();
        let e: Vec<f64> = (0..grid.len())
            .map(|i| {
                if i == 0 || i == grid.n_cells() {
                    0.0
                } else {
                    centered_derivative(a0, i, h) - r1[i]
                }
            })
            .collect();
        let (mut lg, mut gl) = (0.0, 0.0);
        for i in range {
            lg += (r0[i] - centered_derivative(a1, i, h)).abs();
            gl += (centered_derivative(&e, i, h) - rho[i]).abs();
        }
        gauge.push(lg * h);
        gauss.push(gl * h);
    }
    Ok((gauge, gauss))
}

/// `min_n (||psi(0)|| + int_0^{t_n} ||F|| - ||psi(t_n)||)` over every step, with
/// `F = sum_j V_j B_j psi` from the trace and the trapezoid rule in time.
pub fn energy_margin(trace: &SolutionTrace) -> Result<f64> {
    let n = trace.rhs_l2.len();
    if n == 0 || trace.psi_l2.len() != n {
        return Err(Error::InvalidArgument(
            "trace does not carry the per-step source norms".into(),
        ));
    }
    let h = trace.grid.dt();
    let base = trace.psi_l2[0];
    let mut integral = 0.0;
    let mut margin = f64::INFINITY;
    for k in 0..n {
        if k > 0 {
            integral += 0.5 * h * (trace.rhs_l2[k - 1] + trace.rhs_l2[k]);
        }
        margin = margin.min(base + integral - trace.psi_l2[k]);
    }
    Ok(margin)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormGrowth {
    pub samples: Vec<(f64, f64)>,
    /// Slope of `log N` against `log(1 + t)`; `None` when `N` vanishes (flat).
    pub exponent: Option<f64>,
    pub limit: f64,
    pub pass: bool,
}

/// `sum_j ||V_j(t)||_Y + ||dV_j/dt(t)||_1` per stored slice and its fitted power
/// of `1 + t`. The limit is 1.2 for a massless boson and 4.3 otherwise.
pub fn norm_growth(trace: &SolutionTrace, spec: &SystemSpec) -> Result<NormGrowth> {
    if trace.slices.len() < MIN_GROWTH_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "norm growth needs at least {MIN_GROWTH_SAMPLES} stored slices (got {})",
            trace.slices.len()
        )));
    }
    let grid = &trace.grid;
    let mut samples = Vec::with_capacity(trace.slices.len());
    for s in &trace.slices {
        let mut total = 0.0;
        for (v, r) in s.potentials.values.iter().zip(&s.potentials.rates) {
            total += norms(v, grid)?.y + norms(r, grid)?.l1;
        }
        samples.push((s.psi.time, total));
    }
    let limit = if spec.boson_mass() == 0.0 {
        MASSLESS_GROWTH_LIMIT
    } else {
        MASSIVE_GROWTH_LIMIT
    };
    let exponent = if samples.iter().all(|&(_, n)| n == 0.0) {
        None
    } else if samples.iter().any(|&(_, n)| !(n > 0.0)) {
        return Err(Error::InvalidArgument(
            "norm vanishes at some but not all times; the growth fit needs nonzero potentials"
                .into(),
        ));
    } else {
        let x: Vec<f64> = samples.iter().map(|&(t, _)| t.ln_1p()).collect();
        let y: Vec<f64> = samples.iter().map(|&(_, n)| n.ln()).collect();
        Some(crate::illposed::least_squares(&x, &y).0)
    };
    Ok(NormGrowth {
        pass: exponent.is_none_or(|p| p <= limit),
        samples,
        exponent,
        limit,
    })
}

fn sup_relative(pairs: impl Iterator<Item = (Complex64, Complex64)>) -> f64 {
    let (mut diff, mut size) = (0.0f64, 0.0f64);
    for (a, b) in pairs {
        diff = diff.max((a - b).norm());
        size = size.max(b.norm());
    }
    if size > 0.0 {
        diff / size
    } else {
        diff
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "scaling factor must be positive (got {lambda})"
        )));
    }
    Ok(())
}

/// Closed-form check at time `t` over the grid nodes: the solution for the scaled
/// data against `lambda^{3/2} psi(lambda t, lambda x)` and `lambda A(lambda t, lambda x)`.
pub fn scaling_check_oracle(
    lambda: f64,
    f: SharedProfile,
    g: SharedProfile,
    grid: &Grid1D,
    t: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    let sol = MasslessSolution::new(f.clone(), g.clone());
    let scaled = MasslessSolution::new(
        std::sync::Arc::new(Scaled::new(f, lambda)?),
        std::sync::Arc::new(Scaled::new(g, lambda)?),
    );
    let k = lambda.powf(1.5);
    let pairs: Vec<_> = grid
        .nodes()
        .map(|x| (scaled.spinor(t, x), sol.spinor(lambda * t, lambda * x)))
        .collect();
    let spin_u = sup_relative(pairs.iter().map(|&((u, _), (u0, _))| (u, u0 * k)));
    let spin_v = sup_relative(pairs.iter().map(|&((_, v), (_, v0))| (v, v0 * k)));
    let pot = |which: fn(&MasslessSolution, f64, f64) -> f64| {
        sup_relative(grid.nodes().map(|x| {
            (
                Complex64::new(which(&scaled, t, x), 0.0),
                Complex64::new(lambda * which(&sol, lambda * t, lambda * x), 0.0),
            )
        }))
    };
    let ap = pot(MasslessSolution::a_plus);
    let am = pot(MasslessSolution::a_minus);
    Ok(spin_u.max(spin_v).max(ap).max(am))
}

/// Lattice check for massless MD with vanishing potential data: evolves `(f, g)`
/// to `t_end` and the scaled data to `t_end / lambda` on the same grid, then
/// compares at the nodes `x` for which `lambda x` is a node inside the domain of
/// determinacy. `lambda` must map these nodes to nodes and `t_end / lambda` must
/// be a lattice time.
pub fn scaling_check_lattice(
    lambda: f64,
    f: &dyn Profile,
    g: &dyn Profile,
    grid: &Grid1D,
    t_end: f64,
) -> Result<f64> {
    check_lambda(lambda)?;
    let spec = SystemSpec::maxwell_dirac(0.0);
    let steps = grid.steps_for(t_end)?;
    let short = grid.steps_for(t_end / lambda)?;
    let sample = |lam: f64| {
        let k = lam.powf(1.5);
        SpinorSlice::from_fn(grid, 0.0, |x| {
            (
                Complex64::new(k * f.value(lam * x), 0.0),
                Complex64::new(k * g.value(lam * x), 0.0),
            )
        })
    };
    let base = evolve(
        &CauchyData::zero_potential(sample(1.0), 2),
        &spec,
        grid,
        t_end,
        steps.max(1),
    )?;
    let scaled = evolve(
        &CauchyData::zero_potential(sample(lambda), 2),
        &spec,
        grid,
        t_end / lambda,
        short.max(1),
    )?;
    let (a, b) = (&base.last().psi, &scaled.last().psi);
    let Some(range) = grid.determinacy_nodes(steps) else {
        return Err(Error::InsufficientPadding { t: t_end });
    };
    let k = lambda.powf(1.5);
    let mut pairs = Vec::new();
    for i in 0..grid.len() {
        let y = lambda * grid.x(i);
        if y < grid.x_min() || y > grid.x_max() {
            continue;
        }
        let Some(j) = grid.node_of(y) else {
            return Err(Error::InvalidArgument(format!(
                "lambda = {lambda} does not map the node {} to a node",
                grid.x(i)
            )));
        };
        if range.contains(&j) {
            pairs.push((b.u[i], a.u[j] * k));
            pairs.push((b.v[i], a.v[j] * k));
        }
    }
    if pairs.is_empty() {
        return Err(Error::InsufficientPadding { t: t_end });
    }
    Ok(sup_relative(pairs.into_iter()))
}

/// `(delta, sup_t ||psi_delta(t) - psi(t)||_{L^2})` for data `psi_0 + delta phi`.
pub fn continuity_check(
    data: &CauchyData,
    spec: &SystemSpec,
    grid: &Grid1D,
    t_end: f64,
    phi: &SpinorSlice,
    deltas: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let base = evolve(data, spec, grid, t_end, 1)?;
    deltas
        .iter()
        .map(|&d| {
            let mut perturbed = data.clone();
            for (a, b) in perturbed.psi0.u.iter_mut().zip(&phi.u) {
                *a += b * d;
            }
            for (a, b) in perturbed.psi0.v.iter_mut().zip(&phi.v) {
                *a += b * d;
            }
            let tr = evolve(&perturbed, spec, grid, t_end, 1)?;
            let mut dist = 0.0f64;
            for (x, y) in tr.slices.iter().zip(&base.slices) {
                dist = dist.max(spinor_l2_distance(&x.psi, &y.psi, grid)?);
            }
            Ok((d, dist))
        })
        .collect()
}

/// Runs every trace diagnostic that applies to `spec`.
pub fn diagnose(trace: &SolutionTrace, spec: &SystemSpec) -> Result<DiagnosticsReport> {
    let (gauge, gauss) = if spec.is_maxwell_dirac() {
        constraint_residuals(trace, spec)?
    } else {
        (Vec::new(), Vec::new())
    };
    let (samples, exponent) = if trace.slices.len() >= MIN_GROWTH_SAMPLES {
        match norm_growth(trace, spec) {
            Ok(g) => (g.samples, g.exponent),
            Err(_) => (Vec::new(), None),
        }
    } else {
        (Vec::new(), None)
    };
    Ok(DiagnosticsReport {
        charge_drift_rel: charge_drift(trace)?,
        gauge_residual_norms: gauge,
        gauss_residual_norms: gauss,
        energy_margin_min: energy_margin(trace)?,
        norm_growth_samples: samples,
        norm_growth_exponent: exponent,
        scaling_mismatch: None,
    })
}

/// Trapezoid charge of a sampled density `|psi|^2`.
pub fn charge_of_density(density: &[f64], grid: &Grid1D) -> Result<f64> {
    grid.check_len(density.len())?;
    Ok(trapezoid(density.iter().copied(), grid.dx()))
}
