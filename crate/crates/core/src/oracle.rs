//! Closed-form massless Maxwell-Dirac solution with vanishing potential data.
//!
//! With `M = 0` the moduli are transported, `|u(t,x)| = |f(x-t)|` and
//! `|v(t,x)| = |g(x+t)|`, so the light-cone potentials reduce to
//!
//! ```text
//! A_+(t,x) = -t F_g(x+t) + (G_g(x+t) - G_g(x-t)) / 2
//! A_-(t,x) =  t F_f(x-t) - (G_f(x+t) - G_f(x-t)) / 2
//! ```
//!
//! where `F` and `G` are the first and second antiderivatives of the densities
//! (see [`Profile`]). Phases are integrated numerically along the characteristics.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::profile::{EpsFamily, Profile, SharedProfile};
use crate::quadrature::integrate;

/// Absolute tolerance for the phase integrals.
const PHASE_TOL: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct MasslessSolution {
    f: SharedProfile,
    g: SharedProfile,
}

fn check_point(t: f64, x: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() || !x.is_finite() {
        return Err(Error::OutOfRegion {
            t,
            x,
            reason: "need finite x and t >= 0".into(),
        });
    }
    Ok(())
}

impl MasslessSolution {
    pub fn new(f: SharedProfile, g: SharedProfile) -> Self {
        Self { f, g }
    }

    /// `f = g = f_eps`.
    pub fn eps_family(eps: f64) -> Result<Self> {
        let p: SharedProfile = Arc::new(EpsFamily::new(eps)?);
        Ok(Self::new(p.clone(), p))
    }

    pub fn f(&self) -> &dyn Profile {
        self.f.as_ref()
    }

    pub fn g(&self) -> &dyn Profile {
        self.g.as_ref()
    }

    pub fn a_plus(&self, t: f64, x: f64) -> f64 {
        let g = &self.g;
        -t * g.density_integral(x + t)
            + 0.5 * (g.density_double_integral(x + t) - g.density_double_integral(x - t))
    }

    pub fn a_minus(&self, t: f64, x: f64) -> f64 {
        let f = &self.f;
        t * f.density_integral(x - t)
            - 0.5 * (f.density_double_integral(x + t) - f.density_double_integral(x - t))
    }

    /// `(A_0, A_1) = ((A_+ + A_-) / 2, (A_+ - A_-) / 2)`.
    pub fn a0_a1(&self, t: f64, x: f64) -> (f64, f64) {
        let (p, m) = (self.a_plus(t, x), self.a_minus(t, x));
        (0.5 * (p + m), 0.5 * (p - m))
    }

    /// `phi_+(t,x) = int_0^t A_+(s, x - t + s) ds`.
    pub fn phase_plus(&self, t: f64, x: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let z = x - t;
        let bps: Vec<f64> = self.g.breakpoints().iter().map(|b| 0.5 * (b - z)).collect();
        integrate(|s| self.a_plus(s, z + s), 0.0, t, &bps, PHASE_TOL)
    }

    /// `phi_-(t,x) = int_0^t A_-(s, x + t - s) ds`.
    pub fn phase_minus(&self, t: f64, x: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        let w = x + t;
        let bps: Vec<f64> = self.f.breakpoints().iter().map(|b| 0.5 * (w - b)).collect();
        integrate(|s| self.a_minus(s, w - s), 0.0, t, &bps, PHASE_TOL)
    }

    /// `(u, v) = (f(x-t) e^{i phi_+}, g(x+t) e^{i phi_-})`.
    pub fn spinor(&self, t: f64, x: f64) -> (Complex64, Complex64) {
        let u = Complex64::from_polar(self.f.value(x - t), self.phase_plus(t, x));
        let v = Complex64::from_polar(self.g.value(x + t), self.phase_minus(t, x));
        (u, v)
    }
}

pub fn exact_spinor(sol: &MasslessSolution, t: f64, x: f64) -> Result<(Complex64, Complex64)> {
    check_point(t, x)?;
    Ok(sol.spinor(t, x))
}

/// `(A_+, A_-)` at `(t, x)`.
pub fn exact_potentials(sol: &MasslessSolution, t: f64, x: f64) -> Result<(f64, f64)> {
    check_point(t, x)?;
    Ok((sol.a_plus(t, x), sol.a_minus(t, x)))
}

fn check_bound_region(t: f64, x: f64, eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "eps must be positive (got {eps})"
        )));
    }
    if !(t > x.abs()) || !t.is_finite() {
        return Err(Error::OutOfRegion {
            t,
            x,
            reason: "the bound needs t > |x|".into(),
        });
    }
    Ok(())
}

/// Lower bound for `-A_-` of the eps-family in the region `t > |x|`:
/// `((x+t)/2)(-log eps) + (eps+x+t)(log(eps+x+t) - 1)/2 - eps (log eps - 1)/2`.
pub fn lower_bound_aminus(t: f64, x: f64, eps: f64) -> Result<f64> {
    check_bound_region(t, x, eps)?;
    let s = x + t;
    Ok(0.5 * s * (-eps.ln()) + lower_bound_remainder_unchecked(t, x, eps))
}

/// The part of [`lower_bound_aminus`] that stays bounded as `eps -> 0`.
pub fn lower_bound_remainder(t: f64, x: f64, eps: f64) -> Result<f64> {
    check_bound_region(t, x, eps)?;
    Ok(lower_bound_remainder_unchecked(t, x, eps))
}

fn lower_bound_remainder_unchecked(t: f64, x: f64, eps: f64) -> f64 {
    let s = x + t;
    0.5 * (eps + s) * ((eps + s).ln() - 1.0) - 0.5 * eps * (eps.ln() - 1.0)
}
