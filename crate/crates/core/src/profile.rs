//! Analytic spinor-component profiles.
//!
//! Besides point values, every profile supplies the first two antiderivatives of
//! its density `|f|^2` (anchored at the origin). The massless closed-form solution
//! is expressed entirely through these, so they are derived by hand per family and
//! checked against brute-force quadrature in the tests.

use std::fmt::Debug;
use std::sync::Arc;

use num_complex::Complex64;
use statrs::function::erf::erf;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::state::SpinorSlice;

pub trait Profile: Debug + Send + Sync {
    fn value(&self, x: f64) -> f64;

    /// `int_0^z |f(y)|^2 dy`.
    fn density_integral(&self, z: f64) -> f64;

    /// `int_0^w density_integral(z) dz`.
    fn density_double_integral(&self, w: f64) -> f64;

    /// Points where the profile or its density is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn describe(&self) -> String;
}

pub type SharedProfile = Arc<dyn Profile>;

#[derive(Debug, Clone, Copy, Default)]
pub struct Zero;

impl Profile for Zero {
    fn value(&self, _x: f64) -> f64 {
        0.0
    }
    fn density_integral(&self, _z: f64) -> f64 {
        0.0
    }
    fn density_double_integral(&self, _w: f64) -> f64 {
        0.0
    }
    fn describe(&self) -> String {
        "zero".into()
    }
}

/// `chi_[-1,1](x) (eps + |x|)^(-1/2)`.
#[derive(Debug, Clone, Copy)]
pub struct EpsFamily {
    eps: f64,
}

impl EpsFamily {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "eps must be positive and finite (got {eps})"
            )));
        }
        Ok(Self { eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `int_0^a dz / (eps + z)` for `0 <= a <= 1`.
    #[inline]
    fn log_mass(&self, a: f64) -> f64 {
        (a / self.eps).ln_1p()
    }
}

impl Profile for EpsFamily {
    fn value(&self, x: f64) -> f64 {
        if x.abs() <= 1.0 {
            1.0 / (self.eps + x.abs()).sqrt()
        } else {
            0.0
        }
    }

    fn density_integral(&self, z: f64) -> f64 {
        z.signum() * self.log_mass(z.abs().min(1.0))
    }

    fn density_double_integral(&self, w: f64) -> f64 {
        // int_0^a log(1 + z/eps) dz = (eps + a) log(1 + a/eps) - a
        let a = w.abs();
        let inner = |a: f64| (self.eps + a) * self.log_mass(a) - a;
        if a <= 1.0 {
            inner(a)
        } else {
            inner(1.0) + (a - 1.0) * self.log_mass(1.0)
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![-1.0, 0.0, 1.0]
    }

    fn describe(&self) -> String {
        format!("eps-family({})", self.eps)
    }
}

/// `amplitude * exp(-(x - center)^2 / (2 width^2))`.
#[derive(Debug, Clone, Copy)]
pub struct Gaussian {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
}

impl Gaussian {
    pub fn new(amplitude: f64, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !amplitude.is_finite() || !center.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "gaussian needs finite amplitude/center and positive width (got {amplitude}, {center}, {width})"
            )));
        }
        Ok(Self {
            amplitude,
            center,
            width,
        })
    }

    fn prefactor(&self) -> f64 {
        self.amplitude * self.amplitude * self.width * 0.5 * std::f64::consts::PI.sqrt()
    }
}

/// `int erf = u erf(u) + exp(-u^2) / sqrt(pi)`.
fn erf_antiderivative(u: f64) -> f64 {
    u * erf(u) + (-u * u).exp() / std::f64::consts::PI.sqrt()
}

impl Profile for Gaussian {
    fn value(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.width;
        self.amplitude * (-0.5 * s * s).exp()
    }

    fn density_integral(&self, z: f64) -> f64 {
        let u0 = -self.center / self.width;
        let u = (z - self.center) / self.width;
        self.prefactor() * (erf(u) - erf(u0))
    }

    fn density_double_integral(&self, w: f64) -> f64 {
        let u0 = -self.center / self.width;
        let u = (w - self.center) / self.width;
        self.prefactor()
            * (self.width * (erf_antiderivative(u) - erf_antiderivative(u0)) - w * erf(u0))
    }

    fn describe(&self) -> String {
        format!(
            "gaussian(amplitude={}, center={}, width={})",
            self.amplitude, self.center, self.width
        )
    }
}

/// The massless scaling `f -> lambda^(3/2) f(lambda x)`.
#[derive(Debug, Clone)]
pub struct Scaled {
    inner: SharedProfile,
    lambda: f64,
}

impl Scaled {
    pub fn new(inner: SharedProfile, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "scaling factor must be positive (got {lambda})"
            )));
        }
        Ok(Self { inner, lambda })
    }
}

impl Profile for Scaled {
    fn value(&self, x: f64) -> f64 {
        self.lambda.powf(1.5) * self.inner.value(self.lambda * x)
    }

    fn density_integral(&self, z: f64) -> f64 {
        self.lambda * self.lambda * self.inner.density_integral(self.lambda * z)
    }

    fn density_double_integral(&self, w: f64) -> f64 {
        self.lambda * self.inner.density_double_integral(self.lambda * w)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.inner
            .breakpoints()
            .into_iter()
            .map(|b| b / self.lambda)
            .collect()
    }

    fn describe(&self) -> String {
        format!("scaled({}, lambda={})", self.inner.describe(), self.lambda)
    }
}

/// `exp(1 - 1 / (1 - r^2))` with `r = (x - center) / half_width`, zero for `|r| >= 1`.
/// Smooth, compactly supported and equal to one at the centre.
pub fn smooth_bump(x: f64, center: f64, half_width: f64) -> f64 {
    let r = (x - center) / half_width;
    if r.abs() < 1.0 {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    } else {
        0.0
    }
}

/// Samples `psi = (f, g)` on the grid.
pub fn sample_spinor(f: &dyn Profile, g: &dyn Profile, grid: &Grid1D) -> SpinorSlice {
    SpinorSlice::from_fn(grid, 0.0, |x| {
        (
            Complex64::new(f.value(x), 0.0),
            Complex64::new(g.value(x), 0.0),
        )
    })
}
