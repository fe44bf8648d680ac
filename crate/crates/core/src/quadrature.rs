//! Quadrature rules shared by the cone solvers, the oracle and the pairing code.

use std::sync::OnceLock;

/// Composite Newton-Cotes weights for `n_intervals` unit-width intervals.
///
/// Even counts use Simpson's rule; odd counts `>= 3` use Simpson on the leading
/// intervals and the 3/8 rule on the last three; a single interval uses the
/// trapezoid rule. Multiply by the spacing before use.
pub fn simpson_weights(n_intervals: usize) -> Vec<f64> {
    let mut w = vec![0.0; n_intervals + 1];
    match n_intervals {
        0 => {}
        1 => {
            w[0] = 0.5;
            w[1] = 0.5;
        }
        n => {
            let simpson_end = if n % 2 == 0 { n } else { n - 3 };
            for k in (0..simpson_end).step_by(2) {
                w[k] += 1.0 / 3.0;
                w[k + 1] += 4.0 / 3.0;
                w[k + 2] += 1.0 / 3.0;
            }
            if n % 2 == 1 {
                let s = simpson_end;
                w[s] += 3.0 / 8.0;
                w[s + 1] += 9.0 / 8.0;
                w[s + 2] += 9.0 / 8.0;
                w[s + 3] += 3.0 / 8.0;
            }
        }
    }
    w
}

/// Simpson-weighted sum over consecutive nodes `values[lo..=hi]` with spacing `h`.
#[inline]
pub fn simpson_window(values: &[f64], lo: usize, hi: usize, h: f64) -> f64 {
    let n = hi - lo;
    if n == 0 {
        return 0.0;
    }
    if n.is_multiple_of(2) {
        let mut acc = values[lo] + values[hi];
        for (k, v) in values[lo + 1..hi].iter().enumerate() {
            acc += if k % 2 == 0 { 4.0 * v } else { 2.0 * v };
        }
        acc * h / 3.0
    } else {
        let w = simpson_weights(n);
        values[lo..=hi]
            .iter()
            .zip(&w)
            .map(|(v, w)| v * w)
            .sum::<f64>()
            * h
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

fn rule(n: usize) -> &'static Rule {
    static GL16: OnceLock<Rule> = OnceLock::new();
    static GL32: OnceLock<Rule> = OnceLock::new();
    let make = || {
        let (nodes, weights) = gauss_legendre(n);
        Rule { nodes, weights }
    };
    match n {
        16 => GL16.get_or_init(make),
        32 => GL32.get_or_init(make),
        _ => unreachable!("only 16- and 32-point rules are cached"),
    }
}

fn fixed_gl<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let r = rule(n);
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    r.nodes
        .iter()
        .zip(&r.weights)
        .map(|(z, w)| w * f(mid + half * z))
        .sum::<f64>()
        * half
}

fn adaptive_gl<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let mid = 0.5 * (a + b);
    let left = fixed_gl(f, a, mid, 16);
    let right = fixed_gl(f, mid, b, 16);
    if (left + right - whole).abs() <= tol || depth == 0 || (b - a) < 1e-14 {
        return left + right;
    }
    adaptive_gl(f, a, mid, left, 0.5 * tol, depth - 1)
        + adaptive_gl(f, mid, b, right, 0.5 * tol, depth - 1)
}

/// Integrates `f` over `[a, b]`, splitting at `breakpoints` (points where `f` is
/// not smooth) and into panels no longer than `1 / 2` before adaptive bisection
/// with 16-point Gauss-Legendre pairs. `tol` is an absolute target per panel.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breakpoints: &[f64], tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&p| p > lo && p < hi)
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (p, q) = (w[0], w[1]);
        let pieces = ((q - p) / 0.5).ceil().max(1.0) as usize;
        let step = (q - p) / pieces as f64;
        for k in 0..pieces {
            let s = p + k as f64 * step;
            let e = if k + 1 == pieces { q } else { s + step };
            let whole = fixed_gl(&f, s, e, 32);
            total += adaptive_gl(&f, s, e, whole, tol, 40);
        }
    }
    sign * total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_weights_integrate_cubics_exactly() {
        for n in 1..12usize {
            let w = simpson_weights(n);
            let h = 1.0 / n as f64;
            let approx: f64 = w
                .iter()
                .enumerate()
                .map(|(i, w)| w * h * (i as f64 * h).powi(if n == 1 { 1 } else { 3 }))
                .sum();
            let exact = if n == 1 { 0.5 } else { 0.25 };
            assert!((approx - exact).abs() < 1e-14, "n = {n}: {approx}");
        }
        assert!(simpson_weights(0).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn simpson_window_matches_weights() {
        let vals: Vec<f64> = (0..20).map(|i| (i as f64 * 0.3).sin()).collect();
        for (lo, hi) in [(2, 10), (3, 8), (0, 19), (5, 5), (4, 5)] {
            let w = simpson_weights(hi - lo);
            let direct: f64 = vals[lo..=hi].iter().zip(&w).map(|(v, w)| v * w * 0.1).sum();
            assert!((simpson_window(&vals, lo, hi, 0.1) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn gauss_legendre_is_exact_for_high_degree() {
        let (x, w) = gauss_legendre(16);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((i - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_log_singularity() {
        let eps = 1e-6;
        let f = |z: f64| 1.0 / (eps + z.abs());
        let got = integrate(f, -1.0, 1.0, &[0.0], 1e-13);
        let exact = 2.0 * ((eps + 1.0) / eps).ln();
        assert!((got - exact).abs() < 1e-10, "{got} vs {exact}");
        assert!((integrate(f, 1.0, -1.0, &[0.0], 1e-13) + exact).abs() < 1e-10);
    }
}
