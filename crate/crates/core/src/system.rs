//! The generic Dirac system
//!
//! ```text
//! (-i d_t - i alpha d_x + M beta) psi = sum_j V_j B_j psi
//! (d_t^2 - d_x^2 + m^2) V_j          = psi^* C_j psi
//! ```
//!
//! with `alpha = gamma^0 gamma^1 = diag(1, -1)` and `beta = gamma^0 = antidiag(1, 1)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMat2 = Matrix2<Complex64>;

const HERMITIAN_TOL: f64 = 1e-14;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity() -> CMat2 {
    CMat2::identity()
}

pub fn gamma0() -> CMat2 {
    CMat2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

pub fn gamma1() -> CMat2 {
    CMat2::new(c(0.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0))
}

/// `alpha = gamma^0 gamma^1 = diag(1, -1)`.
pub fn alpha() -> CMat2 {
    CMat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0))
}

/// `beta = gamma^0`.
pub fn beta() -> CMat2 {
    gamma0()
}

fn hermitian_deviation(m: &CMat2) -> f64 {
    (m - m.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Named special cases of the generic system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    /// Maxwell-Dirac in Lorenz gauge, `V_1 = A_0`, `V_2 = A_1`.
    #[serde(rename = "MD")]
    MaxwellDirac,
    /// Dirac-Klein-Gordon, `V_1 = phi`.
    #[serde(rename = "DKG")]
    DiracKleinGordon,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MD" => Ok(Preset::MaxwellDirac),
            "DKG" => Ok(Preset::DiracKleinGordon),
            _ => Err(Error::UnknownPreset(s.to_string())),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::MaxwellDirac => write!(f, "MD"),
            Preset::DiracKleinGordon => write!(f, "DKG"),
        }
    }
}

/// Matrices and masses of one instance of the generic system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    dirac_mass: f64,
    boson_mass: f64,
    b: Vec<CMat2>,
    c: Vec<CMat2>,
    preset: Option<Preset>,
}

/// Looks up a preset by name (`"MD"` or `"DKG"`).
pub fn system_preset(name: &str, dirac_mass: f64, boson_mass: f64) -> Result<SystemSpec> {
    let preset: Preset = name.parse()?;
    Ok(SystemSpec::preset(preset, dirac_mass, boson_mass))
}

impl SystemSpec {
    /// Builds a system, checking that every `B_j` and `C_j` is hermitian.
    pub fn new(b: Vec<CMat2>, c: Vec<CMat2>, dirac_mass: f64, boson_mass: f64) -> Result<Self> {
        if b.is_empty() || b.len() != c.len() {
            return Err(Error::InvalidArgument(format!(
                "need N >= 1 matrices B_j and C_j of equal count (got {} and {})",
                b.len(),
                c.len()
            )));
        }
        if !dirac_mass.is_finite() || !boson_mass.is_finite() {
            return Err(Error::InvalidArgument("masses must be finite".into()));
        }
        let spec = Self {
            dirac_mass,
            boson_mass,
            b,
            c,
            preset: None,
        };
        spec.check_hermitian()?;
        Ok(spec)
    }

    /// MD uses the Dirac mass only (the photon is massless, so `boson_mass` is ignored).
    pub fn preset(preset: Preset, dirac_mass: f64, boson_mass: f64) -> Self {
        let (b, c, m) = match preset {
            Preset::MaxwellDirac => (vec![identity(), alpha()], vec![-identity(), alpha()], 0.0),
            Preset::DiracKleinGordon => (vec![beta()], vec![beta()], boson_mass),
        };
        Self {
            dirac_mass,
            boson_mass: m,
            b,
            c,
            preset: Some(preset),
        }
    }

    pub fn maxwell_dirac(dirac_mass: f64) -> Self {
        Self::preset(Preset::MaxwellDirac, dirac_mass, 0.0)
    }

    pub fn dirac_klein_gordon(dirac_mass: f64, boson_mass: f64) -> Self {
        Self::preset(Preset::DiracKleinGordon, dirac_mass, boson_mass)
    }

    pub fn n_potentials(&self) -> usize {
        self.b.len()
    }

    pub fn dirac_mass(&self) -> f64 {
        self.dirac_mass
    }

    pub fn boson_mass(&self) -> f64 {
        self.boson_mass
    }

    pub fn b(&self) -> &[CMat2] {
        &self.b
    }

    pub fn c(&self) -> &[CMat2] {
        &self.c
    }

    pub fn preset_kind(&self) -> Option<Preset> {
        self.preset
    }

    pub fn is_maxwell_dirac(&self) -> bool {
        self.preset == Some(Preset::MaxwellDirac)
    }

    pub fn check_hermitian(&self) -> Result<()> {
        for (name, mats) in [("B", &self.b), ("C", &self.c)] {
            for (j, m) in mats.iter().enumerate() {
                let deviation = hermitian_deviation(m);
                if !(deviation <= HERMITIAN_TOL) {
                    return Err(Error::NonHermitian {
                        name: format!("{name}_{}", j + 1),
                        deviation,
                    });
                }
            }
        }
        Ok(())
    }

    /// The system obtained under `(t, x, M, B_j) -> (-t, -x, -M, -B_j)`.
    pub fn reflected(&self) -> Self {
        Self {
            dirac_mass: -self.dirac_mass,
            boson_mass: self.boson_mass,
            b: self.b.iter().map(|m| -m).collect(),
            c: self.c.clone(),
            preset: None,
        }
    }

    pub fn with_dirac_mass(&self, dirac_mass: f64) -> Self {
        Self {
            dirac_mass,
            ..self.clone()
        }
    }

    /// Pointwise hermitian generator `H = sum_j V_j B_j - M beta`; the spinor obeys
    /// `(d_t + alpha d_x) psi = i H psi`.
    #[inline]
    pub fn generator(&self, potentials: impl IntoIterator<Item = f64>) -> CMat2 {
        let mut h = -beta() * Complex64::new(self.dirac_mass, 0.0);
        for (vj, bj) in potentials.into_iter().zip(&self.b) {
            h += bj * Complex64::new(vj, 0.0);
        }
        h
    }

    /// `psi^* C_j psi` at one node, for each `j`.
    #[inline]
    pub fn source_density(&self, u: Complex64, v: Complex64, j: usize) -> f64 {
        quadratic_form(&self.c[j], u, v)
    }
}

/// `psi^* A psi` for hermitian `A`; the imaginary part vanishes identically.
#[inline]
pub fn quadratic_form(a: &CMat2, u: Complex64, v: Complex64) -> f64 {
    let au = a[(0, 0)] * u + a[(0, 1)] * v;
    let av = a[(1, 0)] * u + a[(1, 1)] * v;
    (u.conj() * au + v.conj() * av).re
}
