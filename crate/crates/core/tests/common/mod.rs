//! Independent reference quadratures shared by the integration tests.
#![allow(dead_code)]

/// Adaptive Simpson on `[a, b]` with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn step<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0
            || delta.abs() <= 15.0 * tol
            || delta.abs() <= 1e-15 * (left.abs() + right.abs())
        {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Composite Simpson with `per_panel` intervals on each panel of a geometric
/// splitting of `[a, b]` towards `b` (panel edges at `b - scale * 10^k`), for
/// integrands with a layer of width `scale` at `b`.
pub fn graded_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    scale: f64,
    per_panel: usize,
) -> f64 {
    let mut cuts = vec![b];
    let mut d = scale;
    while d < b - a {
        cuts.push(b - d);
        d *= 10.0;
    }
    cuts.push(a);
    cuts.reverse();
    let n = per_panel + per_panel % 2;
    cuts.windows(2)
        .map(|w| {
            let h = (w[1] - w[0]) / n as f64;
            let mut acc = f(w[0]) + f(w[1]);
            for k in 1..n {
                acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(w[0] + k as f64 * h);
            }
            acc * h / 3.0
        })
        .sum()
}

/// Brute-force area integral of `1/(eps + y - s)` over the wedge
/// `{s >= 0, y >= s, y + s <= x + t}` in the `(s, y)` plane.
pub fn wedge_integral(t: f64, x: f64, eps: f64) -> f64 {
    let w = x + t;
    let inner = |s: f64| {
        let top = w - s;
        if top <= s {
            return 0.0;
        }
        // the layer sits at y = s; integrate in r = top - y so it is at the upper end
        let g = |r: f64| 1.0 / (eps + (top - r) - s);
        graded_simpson(&g, 0.0, top - s, eps, 600)
    };
    graded_simpson(&inner, 0.0, 0.5 * w, 0.5 * eps, 600)
}

/// `int_0^1 exp(-1/(1-r^2)) r dr` by adaptive Simpson, so the bump mass is
/// `2 pi radius^2` times this.
pub fn radial_bump_moment() -> f64 {
    adaptive_simpson(
        &|r: f64| {
            if r < 1.0 {
                (-1.0 / (1.0 - r * r)).exp() * r
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        1e-17,
    )
}
