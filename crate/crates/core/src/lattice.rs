//! Characteristic-lattice evolution of the coupled Dirac / wave system.
//!
//! The spinor step is a Strang splitting: half a step of the pointwise unitary
//! `exp(i dt/2 H)`, an exact shift (`u` one node right, `v` one node left), and
//! another half rotation. Potentials use the CFL-one leapfrog, which is exact for
//! free massless waves. Outside the grid all fields are taken to be zero.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::norms::trapezoid;
use crate::state::{CauchyData, PotentialState, SpinorSlice};
use crate::system::{CMat2, SystemSpec};

/// `exp(i tau H)` for hermitian `H`, through `H = a0 I + a . sigma`.
#[inline]
pub fn unitary_exp(h: &CMat2, tau: f64) -> CMat2 {
    let a0 = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
    let a3 = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
    let a1 = h[(0, 1)].re;
    let a2 = -h[(0, 1)].im;
    let norm = (a1 * a1 + a2 * a2 + a3 * a3).sqrt();
    let phi = tau * norm;
    let (sin_phi, cos_phi) = phi.sin_cos();
    // sin(tau |a|) / |a|, continuous at |a| = 0
    let s = if phi.abs() < 1e-8 {
        tau * (1.0 - phi * phi / 6.0)
    } else {
        sin_phi / norm
    };
    let i = Complex64::i();
    let phase = Complex64::from_polar(1.0, tau * a0);
    let m00 = Complex64::new(cos_phi, 0.0) + i * s * a3;
    let m11 = Complex64::new(cos_phi, 0.0) - i * s * a3;
    // sigma1 a1 + sigma2 a2 has off-diagonals a1 - i a2 and a1 + i a2
    let m01 = i * s * Complex64::new(a1, -a2);
    let m10 = i * s * Complex64::new(a1, a2);
    CMat2::new(phase * m00, phase * m01, phase * m10, phase * m11)
}

#[inline]
fn apply(m: &CMat2, u: Complex64, v: Complex64) -> (Complex64, Complex64) {
    (m[(0, 0)] * u + m[(0, 1)] * v, m[(1, 0)] * u + m[(1, 1)] * v)
}

fn rotate(psi: &mut SpinorSlice, v_mid: &[Vec<f64>], spec: &SystemSpec, tau: f64) {
    for i in 0..psi.u.len() {
        let h = spec.generator(v_mid.iter().map(|vj| vj[i]));
        let r = unitary_exp(&h, tau);
        let (u, v) = apply(&r, psi.u[i], psi.v[i]);
        psi.u[i] = u;
        psi.v[i] = v;
    }
}

/// Shifts `u` one node right and `v` one node left; values leaving the grid are lost
/// and zeros enter.
fn transport(psi: &mut SpinorSlice) {
    let zero = Complex64::new(0.0, 0.0);
    psi.u.rotate_right(1);
    psi.u[0] = zero;
    psi.v.rotate_left(1);
    let last = psi.v.len() - 1;
    psi.v[last] = zero;
}

fn check_potentials(v: &[Vec<f64>], spec: &SystemSpec, grid: &Grid1D) -> Result<()> {
    if v.len() != spec.n_potentials() {
        return Err(Error::LengthMismatch {
            expected: spec.n_potentials(),
            got: v.len(),
        });
    }
    v.iter().try_for_each(|vj| grid.check_len(vj.len()))
}

/// One spinor step of length `dt` with the potentials `v_mid` frozen over the step.
pub fn dirac_step(
    psi: &SpinorSlice,
    v_mid: &PotentialState,
    spec: &SystemSpec,
    grid: &Grid1D,
) -> Result<SpinorSlice> {
    psi.validate(grid)?;
    check_potentials(&v_mid.values, spec, grid)?;
    Ok(dirac_step_values(psi, &v_mid.values, spec, grid))
}

fn dirac_step_values(
    psi: &SpinorSlice,
    v_mid: &[Vec<f64>],
    spec: &SystemSpec,
    grid: &Grid1D,
) -> SpinorSlice {
    let tau = 0.5 * grid.dt();
    let mut out = psi.clone();
    rotate(&mut out, v_mid, spec, tau);
    transport(&mut out);
    rotate(&mut out, v_mid, spec, tau);
    out.time = psi.time + grid.dt();
    out
}

/// `psi^* C_j psi` at every node, for each `j`.
pub fn sources(psi: &SpinorSlice, spec: &SystemSpec) -> Vec<Vec<f64>> {
    (0..spec.n_potentials())
        .map(|j| {
            psi.u
                .iter()
                .zip(&psi.v)
                .map(|(u, v)| spec.source_density(*u, *v, j))
                .collect()
        })
        .collect()
}

/// `sum_j V_j B_j psi` at every node.
pub fn coupling_term(psi: &SpinorSlice, v: &[Vec<f64>], spec: &SystemSpec) -> SpinorSlice {
    let mut out = psi.clone();
    for i in 0..psi.len() {
        let mut m = CMat2::zeros();
        for (vj, bj) in v.iter().zip(spec.b()) {
            m += bj * Complex64::new(vj[i], 0.0);
        }
        let (a, b) = apply(&m, psi.u[i], psi.v[i]);
        out.u[i] = a;
        out.v[i] = b;
    }
    out
}

fn leapfrog(prev: &[f64], curr: &[f64], src: &[f64], m2: f64, h: f64) -> Vec<f64> {
    let n = curr.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { curr[i - 1] } else { 0.0 };
            let right = if i + 1 < n { curr[i + 1] } else { 0.0 };
            left + right - prev[i] + h * h * (src[i] - m2 * curr[i])
        })
        .collect()
}

/// Leapfrog step `V^{n+1} = V^n_{i-1} + V^n_{i+1} - V^{n-1}_i + dt^2 (S^n_i - m^2 V^n_i)`.
///
/// The returned rates are the one-sided second-order difference
/// `(3 V^{n+1} - 4 V^n + V^{n-1}) / (2 dt)`; [`evolve`] stores the centred difference
/// instead once the following level is known.
pub fn wave_step(
    v_prev: &PotentialState,
    v_curr: &PotentialState,
    source: &[Vec<f64>],
    spec: &SystemSpec,
    grid: &Grid1D,
) -> Result<PotentialState> {
    check_potentials(&v_prev.values, spec, grid)?;
    check_potentials(&v_curr.values, spec, grid)?;
    check_potentials(source, spec, grid)?;
    let h = grid.dt();
    let m2 = spec.boson_mass().powi(2);
    let values: Vec<Vec<f64>> = (0..spec.n_potentials())
        .map(|j| leapfrog(&v_prev.values[j], &v_curr.values[j], &source[j], m2, h))
        .collect();
    let rates = values
        .iter()
        .zip(&v_curr.values)
        .zip(&v_prev.values)
        .map(|((n, c), p)| {
            n.iter()
                .zip(c)
                .zip(p)
                .map(|((n, c), p)| (3.0 * n - 4.0 * c + p) / (2.0 * h))
                .collect()
        })
        .collect();
    Ok(PotentialState {
        values,
        rates,
        time: v_curr.time + h,
    })
}

/// Second-order start `V^1 = v + dt w + dt^2/2 (Lap_h v - m^2 v + S^0)`.
pub fn first_slice(data: &CauchyData, spec: &SystemSpec, grid: &Grid1D) -> Result<PotentialState> {
    data.validate(spec.n_potentials(), grid)?;
    let h = grid.dt();
    let m2 = spec.boson_mass().powi(2);
    let s0 = sources(&data.psi0, spec);
    let n = grid.len();
    let mut values = Vec::with_capacity(data.v.len());
    let mut rates = Vec::with_capacity(data.v.len());
    for ((v, w), s) in data.v.iter().zip(&data.w).zip(&s0) {
        let accel: Vec<f64> = (0..n)
            .map(|i| {
                let left = if i > 0 { v[i - 1] } else { 0.0 };
                let right = if i + 1 < n { v[i + 1] } else { 0.0 };
                (left - 2.0 * v[i] + right) / (h * h) - m2 * v[i] + s[i]
            })
            .collect();
        values.push(
            (0..n)
                .map(|i| v[i] + h * w[i] + 0.5 * h * h * accel[i])
                .collect(),
        );
        rates.push((0..n).map(|i| w[i] + h * accel[i]).collect());
    }
    Ok(PotentialState {
        values,
        rates,
        time: data.psi0.time + h,
    })
}

/// One stored time slice.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSlice {
    pub psi: SpinorSlice,
    pub potentials: PotentialState,
}

/// Stored evolution: every `stride`-th slice plus per-step scalar diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTrace {
    pub grid: Grid1D,
    pub stride: usize,
    pub slices: Vec<TraceSlice>,
    /// `||sum_j V_j B_j psi||_{L^2}` at every step `0..=n_steps`, not only stored ones.
    pub rhs_l2: Vec<f64>,
    /// `||psi||_{L^2}` at every step.
    pub psi_l2: Vec<f64>,
}

impl SolutionTrace {
    pub fn times(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.psi.time).collect()
    }

    pub fn n_steps(&self) -> usize {
        self.rhs_l2.len().saturating_sub(1)
    }

    pub fn last(&self) -> &TraceSlice {
        self.slices
            .last()
            .expect("a trace always holds its initial slice")
    }
}

/// Summary of one step for [`LatticeStepper`] observers.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StepInfo {
    pub step: usize,
    pub time: f64,
    pub rhs_l2: f64,
    pub psi_l2: f64,
}

/// Incremental evolver holding `psi^n`, `V^n` and `V^{n+1}`.
#[derive(Debug, Clone)]
pub struct LatticeStepper {
    spec: SystemSpec,
    grid: Grid1D,
    step: usize,
    psi: SpinorSlice,
    v_curr: Vec<Vec<f64>>,
    v_next: Vec<Vec<f64>>,
    rates: Vec<Vec<f64>>,
}

impl LatticeStepper {
    pub fn new(data: &CauchyData, spec: &SystemSpec, grid: &Grid1D) -> Result<Self> {
        let v1 = first_slice(data, spec, grid)?;
        Ok(Self {
            spec: spec.clone(),
            grid: *grid,
            step: 0,
            psi: data.psi0.clone(),
            v_curr: data.v.clone(),
            v_next: v1.values,
            rates: data.w.clone(),
        })
    }

    /// Resumes from the spinor and two consecutive potential levels. The current
    /// rates are estimated by the forward difference until the first step.
    pub fn from_levels(
        psi: SpinorSlice,
        v_curr: Vec<Vec<f64>>,
        v_next: Vec<Vec<f64>>,
        spec: &SystemSpec,
        grid: &Grid1D,
    ) -> Result<Self> {
        psi.validate(grid)?;
        check_potentials(&v_curr, spec, grid)?;
        check_potentials(&v_next, spec, grid)?;
        let h = grid.dt();
        let rates = v_next
            .iter()
            .zip(&v_curr)
            .map(|(n, c)| n.iter().zip(c).map(|(n, c)| (n - c) / h).collect())
            .collect();
        Ok(Self {
            spec: spec.clone(),
            grid: *grid,
            step: 0,
            psi,
            v_curr,
            v_next,
            rates,
        })
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn psi(&self) -> &SpinorSlice {
        &self.psi
    }

    /// `V^n` with its rates.
    pub fn potentials(&self) -> PotentialState {
        PotentialState {
            values: self.v_curr.clone(),
            rates: self.rates.clone(),
            time: self.psi.time,
        }
    }

    pub fn next_values(&self) -> &[Vec<f64>] {
        &self.v_next
    }

    /// `||sum_j V_j B_j psi||_{L^2}` at the current level.
    pub fn rhs_l2(&self) -> f64 {
        let f = coupling_term(&self.psi, &self.v_curr, &self.spec);
        trapezoid(
            f.u.iter()
                .zip(&f.v)
                .map(|(a, b)| a.norm_sqr() + b.norm_sqr()),
            self.grid.dx(),
        )
        .sqrt()
    }

    pub fn psi_l2(&self) -> f64 {
        trapezoid(
            self.psi
                .u
                .iter()
                .zip(&self.psi.v)
                .map(|(a, b)| a.norm_sqr() + b.norm_sqr()),
            self.grid.dx(),
        )
        .sqrt()
    }

    /// Advances one step of length `dt`.
    pub fn step(&mut self) -> Result<()> {
        let mid: Vec<Vec<f64>> = self
            .v_curr
            .iter()
            .zip(&self.v_next)
            .map(|(a, b)| a.iter().zip(b).map(|(a, b)| 0.5 * (a + b)).collect())
            .collect();
        let psi = dirac_step_values(&self.psi, &mid, &self.spec, &self.grid);
        if !psi.is_finite() {
            return Err(Error::NumericalBlowup {
                step: self.step + 1,
            });
        }
        let src = sources(&psi, &self.spec);
        let h = self.grid.dt();
        let m2 = self.spec.boson_mass().powi(2);
        let after: Vec<Vec<f64>> = (0..self.spec.n_potentials())
            .map(|j| leapfrog(&self.v_curr[j], &self.v_next[j], &src[j], m2, h))
            .collect();
        if after.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NumericalBlowup {
                step: self.step + 1,
            });
        }
        self.rates = after
            .iter()
            .zip(&self.v_curr)
            .map(|(a, c)| a.iter().zip(c).map(|(a, c)| (a - c) / (2.0 * h)).collect())
            .collect();
        self.v_curr = std::mem::replace(&mut self.v_next, after);
        self.psi = psi;
        self.step += 1;
        Ok(())
    }

    pub fn info(&self) -> StepInfo {
        StepInfo {
            step: self.step,
            time: self.psi.time,
            rhs_l2: self.rhs_l2(),
            psi_l2: self.psi_l2(),
        }
    }

    fn slice(&self) -> TraceSlice {
        TraceSlice {
            psi: self.psi.clone(),
            potentials: self.potentials(),
        }
    }
}

/// Evolves `data` to time `t_end` (a multiple of `dt`), storing every `stride`-th
/// slice. The initial slice is always stored.
pub fn evolve(
    data: &CauchyData,
    spec: &SystemSpec,
    grid: &Grid1D,
    t_end: f64,
    stride: usize,
) -> Result<SolutionTrace> {
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be at least 1".into()));
    }
    let n_steps = grid.steps_for(t_end)?;
    let mut stepper = LatticeStepper::new(data, spec, grid)?;
    let mut trace = SolutionTrace {
        grid: *grid,
        stride,
        slices: vec![stepper.slice()],
        rhs_l2: vec![stepper.rhs_l2()],
        psi_l2: vec![stepper.psi_l2()],
    };
    for n in 1..=n_steps {
        stepper.step()?;
        trace.rhs_l2.push(stepper.rhs_l2());
        trace.psi_l2.push(stepper.psi_l2());
        if n % stride == 0 {
            trace.slices.push(stepper.slice());
        }
    }
    log::debug!("evolved {n_steps} steps on {} nodes", grid.len());
    Ok(trace)
}
