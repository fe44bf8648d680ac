//! Picard iteration for the non-local Dirac equation obtained by solving the wave
//! equations for the potentials:
//!
//! ```text
//! (-i d_t - i alpha d_x + M beta) psi = sum_j V_j[psi] B_j psi
//! ```
//!
//! `V_j[psi]` is the Klein-Gordon solution with data `(v_j, w_j)` and source
//! `psi^* C_j psi`, evaluated by the cone quadratures. Each linear solve integrates
//! the Duhamel formula along characteristics with the trapezoid rule.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cone::{dalembert_solve, kg_solve, HistorySource};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::lattice::{coupling_term, sources, unitary_exp};
use crate::norms::{norms, spinor_l2, spinor_l2_distance};
use crate::profile::smooth_bump;
use crate::state::{CauchyData, PotentialState, SpinorSlice};
use crate::system::{beta, SystemSpec};

/// Calibrated constant for [`existence_time`]; see [`calibrate_existence_constant`].
pub const DEFAULT_C_CAL: f64 = 8.0;

/// Candidates tried by the calibration, in increasing order.
pub const C_CAL_CANDIDATES: [f64; 7] = [0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];

/// Contraction ratio the calibrated existence time must achieve.
pub const TARGET_RATIO: f64 = 0.5;

/// Charge outside the domain of determinacy, relative to the total, that is still
/// treated as zero.
const PADDING_LEAK: f64 = 1e-24;

/// Consecutive increases of the iterate distance treated as divergence.
const DIVERGENCE_RUN: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationReport {
    pub iterates_kept: usize,
    /// `sup_t ||psi^(k+1)(t) - psi^(k)(t)||_{L^2}` for `k = 0, 1, ...`.
    pub successive_distances: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
    pub converged: bool,
    pub t_used: f64,
    /// `sup_t` distance between the final iterate and its image under the Picard map.
    pub residual: f64,
    /// Minimum over iterations and time levels of
    /// `||psi_0|| + int ||F|| - ||psi(t)||` for each linear solve.
    pub energy_margin_min: f64,
}

#[derive(Debug, Clone)]
pub struct PicardSolution {
    /// `psi` at every time level `0..=n_steps`.
    pub history: Vec<SpinorSlice>,
    /// `V_j[psi]` at every level, `potentials[n][j][i]`; zero outside the domain of
    /// determinacy of level `n`.
    pub potentials: Vec<Vec<Vec<f64>>>,
    pub report: IterationReport,
}

/// `||psi_0||_{L^2} + sum_j (||v_j||_inf + ||w_j||_1)`.
pub fn data_norm(data: &CauchyData, grid: &Grid1D) -> Result<f64> {
    let mut r = spinor_l2(&data.psi0, grid)?;
    for (v, w) in data.v.iter().zip(&data.w) {
        r += norms(v, grid)?.linf + norms(w, grid)?.l1;
    }
    Ok(r)
}

/// `T(R) = min(1, c_cal / (1 + R + R^2))`.
pub fn existence_time(r: f64, c_cal: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "data norm must be positive (got {r})"
        )));
    }
    if !(c_cal > 0.0) || !c_cal.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "c_cal must be positive (got {c_cal})"
        )));
    }
    Ok((c_cal / (1.0 + r + r * r)).min(1.0))
}

fn check_padding(psi: &SpinorSlice, grid: &Grid1D, level: usize, total: f64) -> Result<()> {
    let t = psi.time;
    let Some(inner) = grid.determinacy_nodes(level) else {
        return Err(Error::InsufficientPadding { t });
    };
    let h = grid.dx();
    let leak: f64 = psi
        .u
        .iter()
        .zip(&psi.v)
        .enumerate()
        .filter(|(i, _)| !inner.contains(i))
        .map(|(_, (u, v))| u.norm_sqr() + v.norm_sqr())
        .sum::<f64>()
        * h;
    if leak > PADDING_LEAK * total.max(f64::MIN_POSITIVE) {
        return Err(Error::InsufficientPadding { t });
    }
    Ok(())
}

/// `V_j[psi]` at every level `0..=n_steps` for the given spinor history.
fn potential_history(
    history: &[SpinorSlice],
    data: &CauchyData,
    spec: &SystemSpec,
    grid: &Grid1D,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let total = spinor_l2(&history[0], grid)?.powi(2);
    for (n, psi) in history.iter().enumerate() {
        check_padding(psi, grid, n, total)?;
    }
    let src: Vec<Vec<Vec<f64>>> = history.iter().map(|p| sources(p, spec)).collect();
    // per component: source levels [level][node]
    let per_j: Vec<Vec<Vec<f64>>> = (0..spec.n_potentials())
        .map(|j| src.iter().map(|s| s[j].clone()).collect())
        .collect();
    let h = grid.dt();
    let m = spec.boson_mass();
    (0..history.len())
        .into_par_iter()
        .map(|n| {
            let nodes = grid
                .determinacy_nodes(n)
                .ok_or(Error::InsufficientPadding { t: n as f64 * h })?;
            let t = n as f64 * h;
            let mut level = Vec::with_capacity(spec.n_potentials());
            for (j, levels) in per_j.iter().enumerate() {
                let source = HistorySource::new(&levels[..=n]);
                let vals = if m == 0.0 {
                    dalembert_solve(&data.v[j], &data.w[j], &source, grid, t, nodes.clone())?
                } else {
                    kg_solve(&data.v[j], &data.w[j], &source, m, grid, t, nodes.clone())?
                };
                let mut full = vec![0.0; grid.len()];
                full[nodes.clone()].copy_from_slice(&vals);
                level.push(full);
            }
            Ok(level)
        })
        .collect()
}

/// `V_j[psi](t)` with rates from a backward difference in time (second order when
/// two earlier levels exist). Values are zero outside the domain of determinacy.
pub fn apply_v(
    psi_history: &[SpinorSlice],
    data: &CauchyData,
    spec: &SystemSpec,
    grid: &Grid1D,
    t: f64,
) -> Result<PotentialState> {
    data.validate(spec.n_potentials(), grid)?;
    let k = grid.steps_for(t)?;
    if psi_history.len() <= k {
        return Err(Error::InvalidArgument(format!(
            "history covers {} levels, need {}",
            psi_history.len(),
            k + 1
        )));
    }
    let first = k.saturating_sub(2);
    let pots = potential_history(&psi_history[..=k], data, spec, grid)?;
    let h = grid.dt();
    let rates = (0..spec.n_potentials())
        .map(|j| match k - first {
            0 => data.w[j].clone(),
            1 => (0..grid.len())
                .map(|i| (pots[k][j][i] - pots[k - 1][j][i]) / h)
                .collect(),
            _ => (0..grid.len())
                .map(|i| {
                    (3.0 * pots[k][j][i] - 4.0 * pots[k - 1][j][i] + pots[k - 2][j][i]) / (2.0 * h)
                })
                .collect(),
        })
        .collect();
    Ok(PotentialState {
        values: pots[k].clone(),
        rates,
        time: t,
    })
}

fn axpy(a: Complex64, x: &SpinorSlice, y: &SpinorSlice) -> SpinorSlice {
    SpinorSlice {
        u: x.u.iter().zip(&y.u).map(|(x, y)| a * x + y).collect(),
        v: x.v.iter().zip(&y.v).map(|(x, y)| a * x + y).collect(),
        time: y.time,
    }
}

/// Free propagator over one step: mass half-rotation, shift, mass half-rotation.
fn free_step(psi: &SpinorSlice, spec: &SystemSpec, grid: &Grid1D) -> SpinorSlice {
    let h = grid.dt();
    let r = unitary_exp(&(-beta() * Complex64::new(spec.dirac_mass(), 0.0)), 0.5 * h);
    let rot = |p: &mut SpinorSlice| {
        for i in 0..p.u.len() {
            let (u, v) = (p.u[i], p.v[i]);
            p.u[i] = r[(0, 0)] * u + r[(0, 1)] * v;
            p.v[i] = r[(1, 0)] * u + r[(1, 1)] * v;
        }
    };
    let mut out = psi.clone();
    rot(&mut out);
    let zero = Complex64::new(0.0, 0.0);
    out.u.rotate_right(1);
    out.u[0] = zero;
    out.v.rotate_left(1);
    let last = out.v.len() - 1;
    out.v[last] = zero;
    rot(&mut out);
    out.time = psi.time + h;
    out
}

/// Solves `(d_t + alpha d_x) psi = -i M beta psi + i F` from `psi_0` with
/// `psi^{n+1} = U (psi^n + h/2 i F^n) + h/2 i F^{n+1}`. Returns the history and the
/// minimum energy margin.
fn linear_solve(
    psi0: &SpinorSlice,
    forcing: &[SpinorSlice],
    spec: &SystemSpec,
    grid: &Grid1D,
) -> Result<(Vec<SpinorSlice>, f64)> {
    let half = Complex64::new(0.0, 0.5 * grid.dt());
    let mut out = Vec::with_capacity(forcing.len());
    out.push(psi0.clone());
    let norm0 = spinor_l2(psi0, grid)?;
    let mut f_int = 0.0;
    let mut f_prev = spinor_l2(&forcing[0], grid)?;
    let mut margin = f64::INFINITY;
    for n in 0..forcing.len() - 1 {
        let kicked = axpy(half, &forcing[n], &out[n]);
        let moved = free_step(&kicked, spec, grid);
        let next = axpy(half, &forcing[n + 1], &moved);
        if !next.is_finite() {
            return Err(Error::NumericalBlowup { step: n + 1 });
        }
        let f_next = spinor_l2(&forcing[n + 1], grid)?;
        f_int += 0.5 * grid.dt() * (f_prev + f_next);
        f_prev = f_next;
        margin = margin.min(norm0 + f_int - spinor_l2(&next, grid)?);
        out.push(next);
    }
    Ok((out, margin))
}

fn picard_map(
    history: &[SpinorSlice],
    data: &CauchyData,
    spec: &SystemSpec,
    grid: &Grid1D,
) -> Result<(Vec<SpinorSlice>, Vec<Vec<Vec<f64>>>, f64)> {
    let pots = potential_history(history, data, spec, grid)?;
    let forcing: Vec<SpinorSlice> = history
        .iter()
        .zip(&pots)
        .map(|(psi, v)| coupling_term(psi, v, spec))
        .collect();
    let (next, margin) = linear_solve(&data.psi0, &forcing, spec, grid)?;
    Ok((next, pots, margin))
}

fn sup_distance(a: &[SpinorSlice], b: &[SpinorSlice], grid: &Grid1D) -> Result<f64> {
    let mut d = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        d = d.max(spinor_l2_distance(x, y, grid)?);
    }
    Ok(d)
}

/// Free Dirac evolution of `psi_0` over `n_steps` levels.
pub fn free_evolution(
    psi0: &SpinorSlice,
    spec: &SystemSpec,
    grid: &Grid1D,
    n_steps: usize,
) -> Vec<SpinorSlice> {
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(psi0.clone());
    for n in 0..n_steps {
        let next = free_step(&out[n], spec, grid);
        out.push(next);
    }
    out
}

/// Picard iteration on `[0, t_end]` starting from the free evolution.
///
/// Stops when the sup-in-time `L^2` distance between consecutive iterates drops
/// below `tol` or after `max_iter` iterations; [`Error::Diverged`] is returned when
/// the distance grows three times in a row.
pub fn picard_iterate(
    data: &CauchyData,
    spec: &SystemSpec,
    grid: &Grid1D,
    t_end: f64,
    max_iter: usize,
    tol: f64,
) -> Result<PicardSolution> {
    data.validate(spec.n_potentials(), grid)?;
    if !(tol > 0.0) || max_iter == 0 {
        return Err(Error::InvalidArgument(
            "need tol > 0 and at least one iteration".into(),
        ));
    }
    let n_steps = grid.steps_for(t_end)?;
    let r = data_norm(data, grid)?;
    if r > 0.0 && t_end > existence_time(r, DEFAULT_C_CAL)? {
        log::warn!(
            "T = {t_end} exceeds the calibrated existence time {} for R = {r}",
            existence_time(r, DEFAULT_C_CAL)?
        );
    }
    let mut current = free_evolution(&data.psi0, spec, grid, n_steps);
    let mut distances: Vec<f64> = Vec::new();
    let mut energy_margin = f64::INFINITY;
    let mut increases = 0;
    let mut converged = false;
    for k in 0..max_iter {
        let (next, _, margin) = picard_map(&current, data, spec, grid)?;
        energy_margin = energy_margin.min(margin);
        let d = sup_distance(&next, &current, grid)?;
        if let Some(&last) = distances.last() {
            increases = if d > last { increases + 1 } else { 0 };
        }
        distances.push(d);
        current = next;
        log::debug!("picard iteration {k}: distance {d:e}");
        if d < tol {
            converged = true;
            break;
        }
        if increases >= DIVERGENCE_RUN {
            return Err(Error::Diverged {
                iteration: k + 1,
                distances,
            });
        }
    }
    let (image, final_pots, margin) = picard_map(&current, data, spec, grid)?;
    energy_margin = energy_margin.min(margin);
    let residual = sup_distance(&image, &current, grid)?;
    let ratios = distances
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .collect();
    Ok(PicardSolution {
        history: current,
        potentials: final_pots,
        report: IterationReport {
            iterates_kept: distances.len() + 1,
            successive_distances: distances,
            contraction_ratios: ratios,
            converged,
            t_used: n_steps as f64 * grid.dt(),
            residual,
            energy_margin_min: energy_margin,
        },
    })
}

/// One entry of a calibration battery.
#[derive(Debug, Clone)]
pub struct CalibrationCase {
    pub data: CauchyData,
    pub spec: SystemSpec,
    pub grid: Grid1D,
}

/// Battery used to fix [`DEFAULT_C_CAL`]: bump data with `R` between about 3 and 8
/// for MD (massive and massless, with and without potential data) and DKG, on
/// `[-3, 3]` with 300 cells.
pub fn reference_battery() -> Vec<CalibrationCase> {
    let grid = Grid1D::new(-3.0, 3.0, 300).expect("static grid");
    let case = |a: f64, pot: f64, spec: SystemSpec| {
        let psi = SpinorSlice::from_fn(&grid, 0.0, |x| {
            (
                Complex64::new(a * smooth_bump(x, -0.2, 0.5), 0.0),
                Complex64::new(0.0, a * smooth_bump(x, 0.2, 0.4)),
            )
        });
        let n = spec.n_potentials();
        let mut data = CauchyData::zero_potential(psi, n);
        for j in 0..n {
            data.v[j] = grid
                .nodes()
                .map(|x| pot * smooth_bump(x, 0.1, 0.6))
                .collect();
            data.w[j] = grid
                .nodes()
                .map(|x| 0.5 * pot * smooth_bump(x, -0.1, 0.5))
                .collect();
        }
        CalibrationCase { data, spec, grid }
    };
    vec![
        case(3.0, 0.0, SystemSpec::maxwell_dirac(1.0)),
        case(2.0, 1.0, SystemSpec::maxwell_dirac(0.0)),
        case(3.0, 0.5, SystemSpec::dirac_klein_gordon(1.0, 1.0)),
        case(6.0, 1.0, SystemSpec::maxwell_dirac(0.0)),
    ]
}

/// Largest candidate `c` for which every battery case, run to the lattice time
/// nearest below `T(R)`, shows contraction ratios at most `target`. Returns `None`
/// if even the smallest candidate fails.
pub fn calibrate_existence_constant(
    battery: &[CalibrationCase],
    candidates: &[f64],
    target: f64,
    max_iter: usize,
    tol: f64,
) -> Result<Option<f64>> {
    let mut best = None;
    for &c in candidates {
        let mut ok = true;
        for case in battery {
            let r = data_norm(&case.data, &case.grid)?;
            let t = existence_time(r, c)?;
            let steps = (t / case.grid.dt()).floor();
            let t = steps * case.grid.dt();
            let sol = picard_iterate(&case.data, &case.spec, &case.grid, t, max_iter, tol);
            let worst = match sol {
                Ok(s) => s
                    .report
                    .contraction_ratios
                    .iter()
                    .fold(0.0f64, |a, &b| a.max(b)),
                Err(Error::Diverged { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            if worst > target {
                ok = false;
                break;
            }
        }
        if !ok {
            break;
        }
        best = Some(c);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn existence_time_is_positive_and_monotone() {
        let ts: Vec<f64> = [1.0, 2.0, 4.0]
            .iter()
            .map(|&r| existence_time(r, DEFAULT_C_CAL).unwrap())
            .collect();
        assert!(ts[0] >= ts[1] && ts[1] >= ts[2]);
        for k in 0..=12 {
            let r = 10f64.powi(k - 6);
            assert!(existence_time(r, DEFAULT_C_CAL).unwrap() > 0.0);
        }
        assert!(existence_time(0.0, 1.0).is_err());
        assert!(existence_time(1.0, -1.0).is_err());
    }

    #[test]
    fn zero_data_converges_at_once() {
        let g = make_grid(-1.0, 1.0, 40).unwrap();
        let spec = SystemSpec::maxwell_dirac(1.0);
        let data = CauchyData::zero_potential(SpinorSlice::zeros(&g, 0.0), 2);
        let sol = picard_iterate(&data, &spec, &g, 0.25, 10, 1e-12).unwrap();
        assert!(sol.report.converged);
        assert_eq!(sol.report.successive_distances, vec![0.0]);
        assert!(sol
            .history
            .iter()
            .all(|p| p.u.iter().all(|z| z.norm() == 0.0)));
    }

    #[test]
    fn zero_spinor_gives_free_klein_gordon_potentials() {
        let g = make_grid(-2.0, 2.0, 80).unwrap();
        let spec = SystemSpec::dirac_klein_gordon(0.5, 1.0);
        let mut data = CauchyData::zero_potential(SpinorSlice::zeros(&g, 0.0), 1);
        data.v[0] = g.nodes().map(|x| (-4.0 * x * x).exp()).collect();
        data.w[0] = g.nodes().map(|x| x * (-4.0 * x * x).exp()).collect();
        let history = free_evolution(&data.psi0, &spec, &g, 10);
        let t = 10.0 * g.dt();
        let got = apply_v(&history, &data, &spec, &g, t).unwrap();
        let nodes = g.determinacy_nodes(10).unwrap();
        let free = kg_solve(
            &data.v[0],
            &data.w[0],
            &crate::cone::ZeroSource,
            1.0,
            &g,
            t,
            nodes.clone(),
        )
        .unwrap();
        for (i, f) in nodes.zip(&free) {
            assert_eq!(got.values[0][i], *f);
        }
    }

    #[test]
    fn leaking_history_is_rejected() {
        let g = make_grid(-1.0, 1.0, 20).unwrap();
        let spec = SystemSpec::maxwell_dirac(0.0);
        let psi0 = SpinorSlice::from_fn(&g, 0.0, |_| {
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        });
        let data = CauchyData::zero_potential(psi0, 2);
        let err = picard_iterate(&data, &spec, &g, 0.2, 5, 1e-10).unwrap_err();
        assert!(matches!(err, Error::InsufficientPadding { .. }), "{err:?}");
    }
}
