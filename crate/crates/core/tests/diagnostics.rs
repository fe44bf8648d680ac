use std::sync::Arc;

use charge_class::diagnostics::*;
use charge_class::lattice::evolve;
use charge_class::profile::{smooth_bump, EpsFamily, Gaussian, SharedProfile};
use charge_class::{make_grid, CauchyData, Grid1D, SpinorSlice, SystemSpec};
use num_complex::Complex64;

fn packet(g: &Grid1D, a: f64) -> SpinorSlice {
    SpinorSlice::from_fn(g, 0.0, |x| {
        (
            Complex64::new(a * smooth_bump(x, -0.2, 0.5), 0.0),
            Complex64::new(0.0, a * smooth_bump(x, 0.2, 0.4)),
        )
    })
}

fn worst(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

#[test]
fn constraints_propagate_and_negative_control_does_not() {
    let spec = SystemSpec::maxwell_dirac(1.0);
    let mut good = Vec::new();
    let mut bad = Vec::new();
    for n in [256, 512, 1024] {
        let g = make_grid(-4.0, 4.0, n).unwrap();
        let d = compatible_md_data(packet(&g, 1.0), &g).unwrap();
        let tr = evolve(&d, &spec, &g, 1.0, n / 32).unwrap();
        let (ga, gs) = constraint_residuals(&tr, &spec).unwrap();
        good.push(worst(&ga).max(worst(&gs)));
        let mut wrong = d.clone();
        wrong.w[0] = g.nodes().map(|x| smooth_bump(x, 0.0, 0.5)).collect();
        let tb = evolve(&wrong, &spec, &g, 1.0, n / 32).unwrap();
        bad.push(worst(&constraint_residuals(&tb, &spec).unwrap().0));
        assert!(energy_margin(&tr).unwrap() >= -ENERGY_SLACK);
    }
    for w in good.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.0, "{good:?}");
    }
    assert!(bad.iter().all(|&b| b > 0.3), "{bad:?}");
}

#[test]
fn scaling_invariance() {
    let f: SharedProfile = Arc::new(Gaussian::new(1.0, -0.1, 0.15).unwrap());
    let g: SharedProfile = Arc::new(Gaussian::new(0.7, 0.2, 0.1).unwrap());
    let grid = make_grid(-2.0, 2.0, 400).unwrap();
    assert!(scaling_check_oracle(2.0, f.clone(), g.clone(), &grid, 0.3).unwrap() <= 1e-10);
    let e: SharedProfile = Arc::new(EpsFamily::new(0.05).unwrap());
    assert!(scaling_check_oracle(2.0, e.clone(), e, &grid, 0.4).unwrap() <= 1e-10);
    let errs: Vec<f64> = [512, 1024, 2048]
        .iter()
        .map(|&n| {
            let grid = make_grid(-4.0, 4.0, n).unwrap();
            scaling_check_lattice(2.0, f.as_ref(), g.as_ref(), &grid, 1.0).unwrap()
        })
        .collect();
    assert!(errs[0] <= 4.0 * 8.0 / 512.0 * 1e-2, "{errs:?}");
    assert!(errs.windows(2).all(|w| w[1] < 0.5 * w[0]), "{errs:?}");
}

#[test]
fn norm_growth_within_envelopes() {
    for spec in [
        SystemSpec::maxwell_dirac(1.0),
        SystemSpec::dirac_klein_gordon(1.0, 1.0),
    ] {
        let g = make_grid(-6.0, 6.0, 1200).unwrap();
        let psi = SpinorSlice::from_fn(&g, 0.0, |x| {
            (
                Complex64::new(smooth_bump(x, -0.2, 0.5), 0.0),
                Complex64::new(0.8 * smooth_bump(x, 0.2, 0.4), 0.0),
            )
        });
        let mut d = CauchyData::zero_potential(psi, spec.n_potentials());
        for j in 0..spec.n_potentials() {
            d.v[j] = g.nodes().map(|x| 0.5 * smooth_bump(x, 0.1, 0.6)).collect();
        }
        let tr = evolve(&d, &spec, &g, 4.0, 20).unwrap();
        let ng = norm_growth(&tr, &spec).unwrap();
        assert!(ng.pass, "{:?} {:?}", spec.preset_kind(), ng.exponent);
        assert!(energy_margin(&tr).unwrap() >= -ENERGY_SLACK);
        let report = diagnose(&tr, &spec).unwrap();
        assert!(report.charge_drift_rel <= 1e-12);
    }
}

#[test]
fn energy_margin_under_strong_potentials() {
    // large static potential data: |F| is large, the margin must stay nonnegative
    let spec = SystemSpec::dirac_klein_gordon(1.0, 0.0);
    let g = make_grid(-4.0, 4.0, 800).unwrap();
    let mut d = CauchyData::zero_potential(packet(&g, 3.0), 1);
    d.v[0] = g.nodes().map(|x| 50.0 * smooth_bump(x, 0.0, 1.0)).collect();
    let tr = evolve(&d, &spec, &g, 1.0, 10).unwrap();
    assert!(energy_margin(&tr).unwrap() >= -ENERGY_SLACK);
}

#[test]
fn continuity_is_lipschitz() {
    let g = make_grid(-3.0, 3.0, 600).unwrap();
    let d = CauchyData::zero_potential(packet(&g, 1.0), 2);
    let phi = SpinorSlice::from_fn(&g, 0.0, |x| {
        (
            Complex64::new(0.0, smooth_bump(x, 0.0, 0.6)),
            Complex64::new(0.0, 0.0),
        )
    });
    let r = continuity_check(
        &d,
        &SystemSpec::maxwell_dirac(1.0),
        &g,
        0.5,
        &phi,
        &[1e-2, 1e-3],
    )
    .unwrap();
    let n = charge_class::norms::spinor_l2(&phi, &g).unwrap();
    for (delta, dist) in r {
        assert!(dist <= 4.0 * delta * n);
    }
}
