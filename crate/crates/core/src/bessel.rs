//! Bessel functions `J_0(x)` and `J_1(x)/x` for real `x >= 0`.
//!
//! For `x <= SERIES_LIMIT` the Maclaurin series in `(x/2)^2` is summed in
//! double-double arithmetic: the terms reach `I_0(16) ~ 9e5` in magnitude before the
//! alternating sum settles, so plain `f64` accumulation would lose about ten
//! digits. Beyond the limit the Hankel asymptotic expansion is used; its smallest
//! term at `x = 16` is below `1e-14`.

use crate::error::{Error, Result};

/// Switch point between the series and asymptotic branches.
pub const SERIES_LIMIT: f64 = 16.0;

/// Minimal double-double number (`hi + lo`, `|lo| <= ulp(hi) / 2`).
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    Dd { hi: s, lo: err }
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd {
        hi: s,
        lo: b - (s - a),
    }
}

#[inline]
fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd {
        hi: p,
        lo: a.mul_add(b, -p),
    }
}

impl Dd {
    fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        let t = two_sum(self.lo, o.lo);
        let s = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(s.hi, s.lo + t.lo)
    }

    fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.hi, o.hi);
        quick_two_sum(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }

    fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let p = two_prod(q1, b);
        let s = two_sum(self.hi, -p.hi);
        let rem = s.hi + (s.lo - p.lo + self.lo);
        quick_two_sum(q1, rem / b)
    }

    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// `sum_n (-q)^n / (n! (n + order)!)` with `q = (x/2)^2`, in double-double.
fn series(x: f64, order: u32) -> f64 {
    let half = x * 0.5;
    let q = two_prod(half, half);
    let mut term = Dd::from_f64(if order == 0 { 1.0 } else { 0.5 });
    let mut sum = term;
    let mut n = 1.0f64;
    loop {
        term = term.mul(q).neg().div_f64(n * (n + order as f64));
        sum = sum.add(term);
        if n > half && term.hi.abs() < 1e-20 {
            break;
        }
        n += 1.0;
    }
    sum.to_f64()
}

/// Hankel expansion of `J_nu(x)` for `nu` in {0, 1}.
fn hankel(x: f64, nu: u32) -> f64 {
    let mu = 4.0 * (nu * nu) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let mut k = 1u32;
    loop {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() || next.abs() < 1e-18 {
            break;
        }
        term = next;
        // term_k contributes to P (even k) or Q (odd k) with sign (-1)^(k/2).
        let sign = if (k / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
        if k.is_multiple_of(2) {
            p += sign * term;
        } else {
            q += sign * term;
        }
        k += 1;
    }
    let (s, c) = x.sin_cos();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    // chi = x - nu pi/2 - pi/4
    let (cos_chi, sin_chi) = match nu {
        0 => (r * (c + s), r * (s - c)),
        _ => (r * (s - c), -r * (s + c)),
    };
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

fn check_arg(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "Bessel argument must be finite and nonnegative (got {x})"
        )));
    }
    Ok(())
}

/// `J_0(x)` for finite `x >= 0`.
pub fn j0(x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(j0_unchecked(x))
}

/// `J_1(x) / x` for finite `x >= 0`, equal to `1/2` at the origin.
pub fn j1_over_x(x: f64) -> Result<f64> {
    check_arg(x)?;
    Ok(j1_over_x_unchecked(x))
}

#[inline]
pub(crate) fn j0_unchecked(x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        series(x, 0)
    } else {
        hankel(x, 0)
    }
}

#[inline]
pub(crate) fn j1_over_x_unchecked(x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        series(x, 1)
    } else {
        hankel(x, 1) / x
    }
}

/// Both branches at `x`, for checking continuity at the switch point.
pub fn branch_values(x: f64) -> ((f64, f64), (f64, f64)) {
    (
        (series(x, 0), series(x, 1)),
        (hankel(x, 0), hankel(x, 1) / x),
    )
}
