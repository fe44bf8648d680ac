//! Orchestration of one configured experiment and its artifacts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use charge_class::diagnostics::{
    charge_drift, compatible_md_data, constraint_residuals, continuity_check, energy_margin,
    norm_growth, ENERGY_SLACK, MIN_GROWTH_SAMPLES,
};
use charge_class::illposed::{massive_bounds, sweep_and_fit};
use charge_class::lattice::{evolve, SolutionTrace, TraceSlice};
use charge_class::norms::{spinor_l2, spinor_l2_distance};
use charge_class::oracle::MasslessSolution;
use charge_class::picard::{data_norm, existence_time, picard_iterate};
use charge_class::profile::{sample_spinor, smooth_bump, EpsFamily, Gaussian, SharedProfile, Zero};
use charge_class::system::Preset;
use charge_class::{charge, CauchyData, Grid1D, PotentialState, SpinorSlice, SystemSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Command, DataFamily, RunConfig};
use crate::error::CliError;
use crate::fields::{emit_fields, fmt_f64};

pub const CHARGE_DRIFT_LIMIT: f64 = 1e-11;
pub const ENERGY_MARGIN_LIMIT: f64 = -ENERGY_SLACK;
pub const SLOPE_FRACTION: f64 = 0.95;
pub const KEY_BOUND_LIMIT: f64 = 0.45;
pub const GRONWALL_LIMIT: f64 = 1.0;
pub const CONTRACTION_LIMIT: f64 = 0.9;
pub const RESIDUAL_FACTOR: f64 = 10.0;
/// Picard versus lattice: `0.1 dx + 10 tol`.
pub const AGREEMENT_DX_FACTOR: f64 = 0.1;
pub const CONSTRAINT_ORDER_MIN: f64 = 1.0;
pub const ROUGH_ORDER_MIN: f64 = 1.0;
pub const SMOOTH_ORDER_MIN: f64 = 1.9;
pub const CONTINUITY_K: f64 = 4.0;
/// Largest sampled `rho` for the Gronwall envelope.
pub const RHO_MAX: f64 = 0.9;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `"<="` or `">="`.
    pub relation: &'static str,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: "<=",
            limit,
            pass: value <= limit,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: ">=",
            limit,
            pass: value >= limit,
        }
    }
}

/// Contents of `diagnostics.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub command: Command,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub values: BTreeMap<String, Value>,
}

#[derive(Default)]
struct Report {
    checks: Vec<Check>,
    values: BTreeMap<String, Value>,
}

impl Report {
    fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn value(&mut self, key: &str, v: impl Serialize) {
        self.values.insert(
            key.to_string(),
            serde_json::to_value(v).expect("plain data serializes"),
        );
    }
}

/// Runs the resolved configuration, writing all artifacts into `cfg.out_dir`.
/// Returns the summary; failed checks become [`CliError::Acceptance`] after every file
/// has been written.
pub fn run(cfg: &RunConfig) -> Result<Summary, CliError> {
    let command = cfg.command()?;
    let out = cfg.out_dir.clone();
    std::fs::create_dir_all(&out).map_err(|e| {
        CliError::Config(format!(
            "output directory {} is not writable: {e}",
            out.display()
        ))
    })?;
    write_json(&out.join("manifest.json"), &manifest(cfg, command))?;
    let grid = cfg.grid()?;
    let spec = cfg.spec();
    let mut report = Report::default();
    match command {
        Command::Simulate => simulate(cfg, &grid, &spec, &out, &mut report)?,
        Command::Picard => picard(cfg, &grid, &spec, &out, &mut report)?,
        Command::IllposedSweep => illposed_sweep(cfg, &grid, &spec, &out, &mut report)?,
        Command::Keybound => keybound(cfg, &grid, &spec, &out, &mut report)?,
        Command::Diagnostics => diagnostics(cfg, &grid, &spec, &mut report)?,
        Command::Convergence => convergence(cfg, &out, &mut report)?,
    }
    let summary = Summary {
        command,
        pass: report.checks.iter().all(|c| c.pass),
        checks: report.checks,
        values: report.values,
    };
    write_json(&out.join("diagnostics.json"), &summary)?;
    if !summary.pass {
        let failed: Vec<&str> = summary
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        return Err(CliError::Acceptance(failed.join(", ")));
    }
    Ok(summary)
}

fn manifest(cfg: &RunConfig, command: Command) -> Value {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "program": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix": timestamp,
        "command": command,
        "config": cfg,
    })
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(v).expect("plain data serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    w.write_record(header).map_err(|e| CliError::csv(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn analytic_profiles(cfg: &RunConfig) -> Result<Option<(SharedProfile, SharedProfile)>, CliError> {
    let (a, c, w) = (cfg.data_amplitude, cfg.data_center, cfg.data_width);
    Ok(match cfg.data {
        DataFamily::Zero => Some((Arc::new(Zero), Arc::new(Zero))),
        DataFamily::EpsFamily => {
            let p: SharedProfile = Arc::new(EpsFamily::new(cfg.data_eps)?);
            Some((p.clone(), p))
        }
        DataFamily::Gaussian => Some((
            Arc::new(Gaussian::new(a, c, w)?),
            Arc::new(Gaussian::new(a, -c, w)?),
        )),
        DataFamily::Bump | DataFamily::RandomBumps => None,
    })
}

fn spinor_data(cfg: &RunConfig, grid: &Grid1D) -> Result<SpinorSlice, CliError> {
    if let Some((f, g)) = analytic_profiles(cfg)? {
        return Ok(sample_spinor(f.as_ref(), g.as_ref(), grid));
    }
    let (a, c, w) = (cfg.data_amplitude, cfg.data_center, cfg.data_width);
    Ok(match cfg.data {
        DataFamily::Bump => SpinorSlice::from_fn(grid, 0.0, |x| {
            (
                Complex64::new(a * smooth_bump(x, c, w), 0.0),
                Complex64::new(0.0, a * smooth_bump(x, -c, w)),
            )
        }),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut draw = || -> Vec<(Complex64, f64, f64)> {
                (0..3)
                    .map(|_| {
                        let amp =
                            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                        let centre = c + w * rng.gen_range(-1.0..1.0);
                        let half = w * rng.gen_range(0.3..1.0);
                        (amp * a, centre, half)
                    })
                    .collect()
            };
            let (bu, bv) = (draw(), draw());
            let sum = |b: &[(Complex64, f64, f64)], x: f64| {
                b.iter()
                    .map(|(z, cc, h)| z * smooth_bump(x, *cc, *h))
                    .sum::<Complex64>()
            };
            SpinorSlice::from_fn(grid, 0.0, |x| (sum(&bu, x), sum(&bv, x)))
        }
    })
}

/// Initial data for `cfg` on `grid`.
pub fn build_data(
    cfg: &RunConfig,
    grid: &Grid1D,
    spec: &SystemSpec,
) -> Result<CauchyData, CliError> {
    let psi = spinor_data(cfg, grid)?;
    if cfg.compatible {
        return Ok(
            compatible_md_data(psi, grid)?.with_descriptor(format!("{:?}+compatible", cfg.data))
        );
    }
    let mut d = CauchyData::zero_potential(psi, spec.n_potentials())
        .with_descriptor(format!("{:?}", cfg.data));
    if cfg.potential_amplitude != 0.0 {
        for v in &mut d.v {
            *v = grid
                .nodes()
                .map(|x| {
                    cfg.potential_amplitude * smooth_bump(x, cfg.data_center, 2.0 * cfg.data_width)
                })
                .collect();
        }
    }
    Ok(d)
}

/// The closed-form solution when the configuration is massless MD with vanishing
/// potential data and an analytic family.
pub fn oracle_for(cfg: &RunConfig) -> Result<Option<MasslessSolution>, CliError> {
    if cfg.preset != Preset::MaxwellDirac
        || cfg.dirac_mass != 0.0
        || cfg.potential_amplitude != 0.0
        || cfg.compatible
    {
        return Ok(None);
    }
    Ok(analytic_profiles(cfg)?.map(|(f, g)| MasslessSolution::new(f, g)))
}

fn charge_series(trace: &SolutionTrace, grid: &Grid1D) -> Result<Vec<(f64, f64)>, CliError> {
    trace
        .slices
        .iter()
        .map(|s| Ok((s.psi.time, charge(&s.psi, grid)?)))
        .collect()
}

fn common_trace_checks(
    trace: &SolutionTrace,
    grid: &Grid1D,
    r: &mut Report,
) -> Result<(), CliError> {
    r.check(Check::at_most(
        "charge_drift",
        charge_drift(trace)?,
        CHARGE_DRIFT_LIMIT,
    ));
    r.check(Check::at_least(
        "energy_margin",
        energy_margin(trace)?,
        ENERGY_MARGIN_LIMIT,
    ));
    r.value("charge_series", charge_series(trace, grid)?);
    Ok(())
}

fn simulate(
    cfg: &RunConfig,
    grid: &Grid1D,
    spec: &SystemSpec,
    out: &Path,
    r: &mut Report,
) -> Result<(), CliError> {
    let data = build_data(cfg, grid, spec)?;
    let trace = evolve(&data, spec, grid, cfg.horizon, cfg.stride)?;
    emit_fields(&trace, grid, &out.join("fields.csv"))?;
    common_trace_checks(&trace, grid, r)?;
    r.value("n_steps", trace.n_steps());
    Ok(())
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn diagnostics(
    cfg: &RunConfig,
    grid: &Grid1D,
    spec: &SystemSpec,
    r: &mut Report,
) -> Result<(), CliError> {
    let data = build_data(cfg, grid, spec)?;
    let trace = evolve(&data, spec, grid, cfg.horizon, cfg.stride)?;
    common_trace_checks(&trace, grid, r)?;
    if trace.slices.len() >= MIN_GROWTH_SAMPLES {
        // The fit needs N(0) > 0; vanishing potential data leave it undefined.
        match norm_growth(&trace, spec) {
            Ok(g) => {
                r.value("norm_growth_samples", &g.samples);
                if let Some(e) = g.exponent {
                    r.check(Check::at_most("norm_growth_exponent", e, g.limit));
                }
            }
            Err(charge_class::Error::InvalidArgument(why)) => r.value("norm_growth_skipped", why),
            Err(e) => return Err(e.into()),
        }
    }
    if spec.is_maxwell_dirac() && cfg.compatible {
        let fine_grid = grid.refined(2)?;
        let fine_data = build_data(cfg, &fine_grid, spec)?;
        let fine = evolve(&fine_data, spec, &fine_grid, cfg.horizon, 2 * cfg.stride)?;
        let (ga, gs) = constraint_residuals(&trace, spec)?;
        let (fa, fs) = constraint_residuals(&fine, spec)?;
        let (ga, gs, fa, fs) = (max_of(&ga), max_of(&gs), max_of(&fa), max_of(&fs));
        r.value("gauge_residual", [ga, fa]);
        r.value("gauss_residual", [gs, fs]);
        let order = |c: f64, f: f64| {
            if f > 0.0 {
                (c / f).log2()
            } else {
                f64::INFINITY
            }
        };
        if ga > 0.0 {
            r.check(Check::at_least(
                "gauge_residual_order",
                order(ga, fa),
                CONSTRAINT_ORDER_MIN,
            ));
        }
        if gs > 0.0 {
            r.check(Check::at_least(
                "gauss_residual_order",
                order(gs, fs),
                CONSTRAINT_ORDER_MIN,
            ));
        }
    }
    if !cfg.deltas.is_empty() {
        let phi = SpinorSlice::from_fn(grid, 0.0, |x| {
            (
                Complex64::new(0.0, smooth_bump(x, cfg.data_center, cfg.data_width)),
                Complex64::new(smooth_bump(x, cfg.data_center, 0.5 * cfg.data_width), 0.0),
            )
        });
        let n = spinor_l2(&phi, grid)?;
        if n > 0.0 {
            let phi = SpinorSlice {
                u: phi.u.iter().map(|z| z / n).collect(),
                v: phi.v.iter().map(|z| z / n).collect(),
                time: 0.0,
            };
            let c = continuity_check(&data, spec, grid, cfg.horizon, &phi, &cfg.deltas)?;
            let k = c.iter().map(|(d, dist)| dist / d).fold(0.0, f64::max);
            r.value("continuity", &c);
            r.check(Check::at_most("continuity_ratio", k, CONTINUITY_K));
        }
    }
    Ok(())
}

/// Time derivative of the stored potential levels: the data `w` at the first level,
/// centred differences inside, a second-order backward difference at the last.
fn level_rates(levels: &[Vec<Vec<f64>>], w0: &[Vec<f64>], h: f64) -> Vec<Vec<Vec<f64>>> {
    let n = levels.len();
    (0..n)
        .map(|k| {
            (0..w0.len())
                .map(|j| {
                    (0..w0[j].len())
                        .map(|i| {
                            if k == 0 {
                                w0[j][i]
                            } else if k + 1 < n {
                                (levels[k + 1][j][i] - levels[k - 1][j][i]) / (2.0 * h)
                            } else if k >= 2 {
                                (3.0 * levels[k][j][i] - 4.0 * levels[k - 1][j][i]
                                    + levels[k - 2][j][i])
                                    / (2.0 * h)
                            } else {
                                (levels[k][j][i] - levels[k - 1][j][i]) / h
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn picard(
    cfg: &RunConfig,
    grid: &Grid1D,
    spec: &SystemSpec,
    out: &Path,
    r: &mut Report,
) -> Result<(), CliError> {
    let data = build_data(cfg, grid, spec)?;
    let rnorm = data_norm(&data, grid)?;
    let t_exist = if rnorm > 0.0 {
        existence_time(rnorm, cfg.c_cal)?
    } else {
        1.0
    };
    let h = grid.dt();
    let steps = (cfg.horizon.min(t_exist) / h + 1e-9).floor();
    if steps < 1.0 {
        return Err(CliError::Config(format!(
            "existence time {t_exist} and horizon {} leave no full time step of size {h}",
            cfg.horizon
        )));
    }
    let t = steps * h;
    r.value("data_norm", rnorm);
    r.value("existence_time", t_exist);
    r.value("t_used", t);
    let sol = picard_iterate(&data, spec, grid, t, cfg.picard_max_iter, cfg.picard_tol)?;
    let rep = &sol.report;
    let rates = level_rates(&sol.potentials, &data.w, h);
    let trace = SolutionTrace {
        grid: *grid,
        stride: cfg.stride,
        slices: sol
            .history
            .iter()
            .zip(&sol.potentials)
            .zip(&rates)
            .enumerate()
            .filter(|(k, _)| k % cfg.stride == 0)
            .map(|(_, ((psi, v), w))| TraceSlice {
                psi: psi.clone(),
                potentials: PotentialState {
                    values: v.clone(),
                    rates: w.clone(),
                    time: psi.time,
                },
            })
            .collect(),
        rhs_l2: Vec::new(),
        psi_l2: Vec::new(),
    };
    emit_fields(&trace, grid, &out.join("fields.csv"))?;
    let rows: Vec<Vec<String>> = rep
        .successive_distances
        .iter()
        .enumerate()
        .map(|(k, d)| {
            let ratio = k
                .checked_sub(1)
                .and_then(|p| rep.contraction_ratios.get(p))
                .map(|x| fmt_f64(*x))
                .unwrap_or_default();
            vec![k.to_string(), fmt_f64(*d), ratio]
        })
        .collect();
    write_csv(
        &out.join("iterations.csv"),
        &["iteration", "distance", "ratio"],
        &rows,
    )?;

    let lattice = evolve(&data, spec, grid, t, 1)?;
    let gap = sol
        .history
        .iter()
        .zip(&lattice.slices)
        .map(|(p, s)| spinor_l2_distance(p, &s.psi, grid))
        .collect::<Result<Vec<_>, _>>()?;
    let max_ratio = max_of(&rep.contraction_ratios);
    r.value("converged", rep.converged);
    r.value("iterations", rep.successive_distances.len());
    r.value("max_contraction_ratio", max_ratio);
    r.check(Check::at_most(
        "residual",
        rep.residual,
        RESIDUAL_FACTOR * cfg.picard_tol,
    ));
    if rnorm <= 1.0 {
        r.check(Check::at_most(
            "contraction_ratio",
            max_ratio,
            CONTRACTION_LIMIT,
        ));
    }
    r.check(Check::at_most(
        "lattice_agreement",
        max_of(&gap),
        AGREEMENT_DX_FACTOR * grid.dx() + RESIDUAL_FACTOR * cfg.picard_tol,
    ));
    r.check(Check::at_least(
        "energy_margin",
        rep.energy_margin_min,
        ENERGY_MARGIN_LIMIT,
    ));
    r.check(Check::at_least(
        "lattice_energy_margin",
        energy_margin(&lattice)?,
        ENERGY_MARGIN_LIMIT,
    ));
    Ok(())
}

fn require_md(cfg: &RunConfig, what: &str) -> Result<(), CliError> {
    if cfg.preset != Preset::MaxwellDirac {
        return Err(CliError::Config(format!("{what} needs preset MD")));
    }
    Ok(())
}

fn illposed_sweep(
    cfg: &RunConfig,
    grid: &Grid1D,
    spec: &SystemSpec,
    out: &Path,
    r: &mut Report,
) -> Result<(), CliError> {
    require_md(cfg, "illposed-sweep")?;
    let e = &cfg.eps_list;
    let monotone = e.windows(2).all(|w| w[1] < w[0]) || e.windows(2).all(|w| w[1] > w[0]);
    if e.len() < 4 || !monotone {
        return Err(CliError::Config(
            "eps_list needs at least 4 strictly monotone entries".into(),
        ));
    }
    let theta = cfg.theta()?;
    let fit = sweep_and_fit(e, spec, &theta, grid)?;
    let rows: Vec<Vec<String>> = fit
        .pairings
        .iter()
        .map(|p| {
            vec![
                fmt_f64(p.eps),
                fmt_f64(p.pairing),
                fmt_f64(p.quadrature_error_estimate),
            ]
        })
        .collect();
    write_csv(
        &out.join("pairing.csv"),
        &["eps", "pairing", "err_estimate"],
        &rows,
    )?;
    write_json(
        &out.join("fit.json"),
        &json!({
            "slope": fit.slope,
            "intercept": fit.intercept,
            "residual": fit.residual,
            "S0": fit.reference_slope,
        }),
    )?;
    r.check(Check::at_least(
        "slope",
        fit.slope,
        SLOPE_FRACTION * fit.reference_slope,
    ));
    let mut sorted = fit.pairings.clone();
    sorted.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    let violations = sorted
        .windows(2)
        .filter(|w| !(w[1].pairing > w[0].pairing))
        .count();
    r.check(Check::at_most(
        "monotonicity_violations",
        violations as f64,
        0.0,
    ));
    r.value("fit_residual", fit.residual);
    Ok(())
}

fn keybound(
    cfg: &RunConfig,
    grid: &Grid1D,
    spec: &SystemSpec,
    out: &Path,
    r: &mut Report,
) -> Result<(), CliError> {
    require_md(cfg, "keybound")?;
    if cfg.dirac_mass == 0.0 {
        return Err(CliError::Config(
            "keybound needs a nonzero dirac_mass".into(),
        ));
    }
    if grid.x_min() > 0.0 || grid.x_max() < 1.0 {
        return Err(CliError::Config(
            "keybound needs a grid covering [0, 1]".into(),
        ));
    }
    let k = cfg.rho_samples;
    let rhos: Vec<f64> = (0..k)
        .map(|i| RHO_MAX * (i as f64 + 0.5) / k as f64)
        .collect();
    let results = cfg
        .eps_list
        .par_iter()
        .map(|&eps| massive_bounds(cfg.dirac_mass, eps, spec, grid, &rhos).map(|b| (eps, b)))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<String>> = results
        .iter()
        .map(|(eps, b)| {
            vec![
                fmt_f64(*eps),
                fmt_f64(b.key_bound_min),
                fmt_f64(b.gronwall_worst),
                b.gronwall_samples.to_string(),
            ]
        })
        .collect();
    write_csv(
        &out.join("keybound.csv"),
        &["eps", "key_bound_min", "gronwall_worst", "gronwall_samples"],
        &rows,
    )?;
    for (eps, b) in &results {
        r.check(Check::at_least(
            format!("key_bound_min[eps={eps:e}]"),
            b.key_bound_min,
            KEY_BOUND_LIMIT,
        ));
        r.check(Check::at_most(
            format!("gronwall_worst[eps={eps:e}]"),
            b.gronwall_worst,
            GRONWALL_LIMIT,
        ));
    }
    r.value("rhos", &rhos);
    Ok(())
}

fn convergence(cfg: &RunConfig, out: &Path, r: &mut Report) -> Result<(), CliError> {
    let sol = oracle_for(cfg)?.ok_or_else(|| {
        CliError::Config(
            "convergence needs massless MD (dirac_mass = 0), vanishing potential data and \
             data = zero, eps-family or gaussian"
                .into(),
        )
    })?;
    let spec = cfg.spec();
    let levels = [cfg.n_cells, 2 * cfg.n_cells, 4 * cfg.n_cells];
    let runs = levels
        .par_iter()
        .map(|&n| -> Result<(usize, f64, f64, f64), CliError> {
            let mut c = cfg.clone();
            c.n_cells = n;
            let grid = c.grid()?;
            let data = build_data(&c, &grid, &spec)?;
            let trace = evolve(
                &data,
                &spec,
                &grid,
                cfg.horizon,
                grid.steps_for(cfg.horizon)?.max(1),
            )?;
            let psi = &trace.last().psi;
            let t = psi.time;
            let mut acc = 0.0;
            for (i, x) in grid.nodes().enumerate() {
                let (u, v) = sol.spinor(t, x);
                acc += (psi.u[i] - u).norm_sqr() + (psi.v[i] - v).norm_sqr();
            }
            Ok((
                n,
                grid.dx(),
                (acc * grid.dx()).sqrt(),
                energy_margin(&trace)?,
            ))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let min_order = match cfg.data {
        DataFamily::Gaussian => SMOOTH_ORDER_MIN,
        _ => ROUGH_ORDER_MIN,
    };
    let mut rows = Vec::new();
    for (k, &(n, dx, err, margin)) in runs.iter().enumerate() {
        let order = k.checked_sub(1).map(|p| (runs[p].2 / err).log2());
        rows.push(vec![
            n.to_string(),
            fmt_f64(dx),
            fmt_f64(err),
            order.map(fmt_f64).unwrap_or_default(),
        ]);
        r.check(Check::at_least(
            format!("energy_margin[n={n}]"),
            margin,
            ENERGY_MARGIN_LIMIT,
        ));
        if let Some(p) = order {
            if runs[k - 1].2 > 0.0 {
                r.check(Check::at_least(format!("order[n={n}]"), p, min_order));
            }
        }
    }
    write_csv(
        &out.join("convergence.csv"),
        &["n_cells", "dx", "l2_error", "order"],
        &rows,
    )?;
    Ok(())
}

/// Output directory used when neither the config nor the command line names one.
pub fn default_out_dir() -> PathBuf {
    RunConfig::default().out_dir
}
