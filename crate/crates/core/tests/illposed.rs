mod common;

use charge_class::illposed::*;
use charge_class::lattice::evolve;
use charge_class::oracle::{lower_bound_aminus, lower_bound_remainder, MasslessSolution};
use charge_class::profile::{smooth_bump, EpsFamily, Profile};
use charge_class::{charge, make_grid, CauchyData, SpinorSlice, SystemSpec};
use num_complex::Complex64;
use std::f64::consts::PI;

#[test]
fn bump_mass_and_reference_slope_match_polar_quadrature() {
    let m = common::radial_bump_moment();
    for th in [
        TestFunction::default_massless(),
        TestFunction::default_massive(),
        TestFunction::new(0.45, 0.1, 0.15).unwrap(),
    ] {
        let mass = 2.0 * PI * th.radius.powi(2) * m;
        assert!((th.mass() - mass).abs() < 1e-8 * mass.max(1e-3), "{th:?}");
        // the bump is radial, so the linear weight averages to its centre value
        let s0 = 0.5 * (th.center_t + th.center_x) * mass;
        assert!((th.reference_slope() - s0).abs() < 1e-10, "{th:?}");
        let g = make_grid(-1.0, 1.0, 400).unwrap();
        let p = pairing(0.1, |_, _| -1.0, &th, &g).unwrap();
        assert!((p.pairing - mass).abs() < 1e-8);
    }
}

#[test]
fn eps_family_charge() {
    for eps in [1e-1, 1e-2, 1e-4] {
        let p = EpsFamily::new(eps).unwrap();
        let exact = 4.0 * ((eps + 1.0) / eps).ln();
        let q = 2.0 * (p.density_integral(1.0) - p.density_integral(-1.0));
        assert!((q - exact).abs() < 1e-12 * exact);
    }
    let g = make_grid(-2.0, 2.0, 1 << 16).unwrap();
    let d = eps_data(0.01, &g).unwrap();
    let q = charge(&d.psi0, &g).unwrap();
    assert!((q / (4.0 * 101f64.ln()) - 1.0).abs() < 1e-3, "{q}");
}

#[test]
fn lower_bound_equals_wedge_integral() {
    for (t, x, eps) in [(0.5, 0.0, 1e-2), (0.3, -0.1, 1e-4), (0.6, 0.35, 1e-6)] {
        let lb = lower_bound_aminus(t, x, eps).unwrap();
        let w = common::wedge_integral(t, x, eps);
        assert!((lb - w).abs() < 1e-8, "({t}, {x}, {eps}): {lb} vs {w}");
    }
}

#[test]
fn pairing_dominates_the_integrated_bound() {
    let th = TestFunction::default_massless();
    let g = make_grid(-2.0, 2.0, 2048).unwrap();
    let s0 = th.reference_slope();
    for eps in [1e-2, 1e-4, 1e-6] {
        let p = massless_pairing(eps, &th, &g).unwrap();
        let r = th.integrate(|t, x| lower_bound_remainder(t, x, eps).unwrap(), 256);
        assert!(p.pairing >= -eps.ln() * s0 + r, "{eps}");
    }
}

#[test]
fn massless_sweep_diverges_logarithmically() {
    let th = TestFunction::default_massless();
    let g = make_grid(-2.0, 2.0, 2048).unwrap();
    let eps = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
    let fit = sweep_and_fit(&eps, &SystemSpec::maxwell_dirac(0.0), &th, &g).unwrap();
    let s0 = fit.reference_slope;
    assert!(fit.slope >= 0.95 * s0);
    assert!(fit.is_monotone());
    assert!(fit.pairings[4].pairing > fit.pairings[0].pairing + 3.0 * s0);
    assert!(fit.pairings.iter().all(|p| p.pairing > 0.0));
    assert!(sweep_and_fit(&eps[..3], &SystemSpec::maxwell_dirac(0.0), &th, &g).is_err());
    assert!(sweep_and_fit(&eps, &SystemSpec::dirac_klein_gordon(0.0, 0.0), &th, &g).is_err());
}

#[test]
fn adjoint_pairing_reproduces_closed_form() {
    let th = TestFunction::default_massive();
    let g = make_grid(-2.0, 2.0, 4096).unwrap();
    for eps in [1e-2, 1e-4] {
        let a = massless_pairing(eps, &th, &g).unwrap().pairing;
        let b = massive_pairing(eps, &SystemSpec::maxwell_dirac(0.0), &th, &g).unwrap();
        assert!(
            ((a - b.pairing) / a).abs() < 1e-5,
            "{eps}: {a} vs {}",
            b.pairing
        );
    }
}

#[test]
fn massive_sweep_diverges_with_half_slope_or_more() {
    let th = TestFunction::default_massive();
    let g = make_grid(-2.0, 2.0, 4096).unwrap();
    let fit = sweep_and_fit(
        &[1e-2, 1e-3, 1e-4, 1e-5],
        &SystemSpec::maxwell_dirac(1.0),
        &th,
        &g,
    )
    .unwrap();
    assert!(fit.slope >= 0.5 * fit.reference_slope * 0.95);
    assert!(fit.is_monotone());
}

#[test]
fn moduli_identities_converge() {
    let spec = SystemSpec::maxwell_dirac(1.0);
    let res: Vec<f64> = [200, 400, 800]
        .iter()
        .map(|&n| {
            let g = make_grid(-2.0, 2.0, n).unwrap();
            let psi = SpinorSlice::from_fn(&g, 0.0, |x| {
                (
                    Complex64::new(smooth_bump(x, -0.1, 0.5), 0.0),
                    Complex64::new(0.0, smooth_bump(x, 0.2, 0.4)),
                )
            });
            let mut d = CauchyData::zero_potential(psi, 2);
            d.v[0] = g.nodes().map(|x| 0.5 * smooth_bump(x, 0.0, 0.7)).collect();
            let tr = evolve(&d, &spec, &g, 0.5, 1).unwrap();
            moduli_identities_check(&tr, &spec).unwrap()
        })
        .collect();
    for w in res.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.0, "{res:?}");
    }
}

#[test]
fn massive_bounds_at_moderate_resolution() {
    let g = make_grid(-1.0, 2.0, 3072).unwrap();
    let spec = SystemSpec::maxwell_dirac(1.0);
    let rhos = [0.01, 0.1, 0.3];
    let r = massive_bounds(1.0, 1e-2, &spec, &g, &rhos).unwrap();
    assert!(r.key_bound_min >= 0.45);
    assert!(r.gronwall_worst <= 1.0);
    assert!(r.gronwall_samples > 0);
    assert_eq!(
        key_bound_report(1.0, 1e-2, &spec, &g).unwrap(),
        r.key_bound_min
    );
    let _ = MasslessSolution::eps_family(0.1).unwrap();
}
