use std::path::Path;
use std::process::Command as Process;

use charge_class::lattice::evolve;
use charge_class::profile::smooth_bump;
use charge_class::{charge, make_grid, CauchyData, SpinorSlice, SystemSpec};
use charge_class_cli::fields::fields_header;
use charge_class_cli::{emit_fields, read_fields, RunConfig};
use num_complex::Complex64;

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_charge-class"))
}

fn run_cli(dir: &Path, command: &str, config: &str, extra: &[&str]) -> (i32, String, String) {
    let cfg = dir.join(format!("{command}.json"));
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let o = bin()
        .arg(command)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    (
        o.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&o.stdout).into_owned(),
        String::from_utf8_lossy(&o.stderr).into_owned(),
    )
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn zero_slice_on_three_nodes_gives_three_zero_rows() {
    let dir = tempfile::tempdir().unwrap();
    let g = make_grid(-1.0, 1.0, 2).unwrap();
    let spec = SystemSpec::maxwell_dirac(0.0);
    let d = CauchyData::zero_potential(SpinorSlice::zeros(&g, 0.0), 2);
    let tr = evolve(&d, &spec, &g, 0.0, 1).unwrap();
    let path = dir.path().join("fields.csv");
    emit_fields(&tr, &g, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "t,x,re_u,im_u,re_v,im_v,V1,V2,Vdot1,Vdot2");
    for l in &lines[1..] {
        let vals: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
        assert!(vals[2..].iter().all(|&v| v == 0.0));
    }
}

#[test]
fn column_count_is_six_plus_twice_the_potentials() {
    let dir = tempfile::tempdir().unwrap();
    let g = make_grid(-1.0, 1.0, 4).unwrap();
    for spec in [
        SystemSpec::maxwell_dirac(1.0),
        SystemSpec::dirac_klein_gordon(1.0, 1.0),
    ] {
        let n = spec.n_potentials();
        assert_eq!(fields_header(n).len(), 6 + 2 * n);
        let d = CauchyData::zero_potential(SpinorSlice::zeros(&g, 0.0), n);
        let tr = evolve(&d, &spec, &g, g.dt(), 1).unwrap();
        let path = dir.path().join(format!("f{n}.csv"));
        emit_fields(&tr, &g, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        for l in text.lines() {
            assert_eq!(l.split(',').count(), 6 + 2 * n);
        }
        assert_eq!(text.lines().count(), 1 + 2 * g.len());
    }
}

#[test]
fn round_trip_recovers_the_charge() {
    let dir = tempfile::tempdir().unwrap();
    let g = make_grid(-3.0, 3.0, 600).unwrap();
    let spec = SystemSpec::maxwell_dirac(1.0);
    let psi = SpinorSlice::from_fn(&g, 0.0, |x| {
        (
            Complex64::new(smooth_bump(x, -0.3, 0.7), 0.4 * smooth_bump(x, 0.1, 0.3)),
            Complex64::new(0.0, 0.9 * smooth_bump(x, 0.3, 0.5)),
        )
    });
    let mut d = CauchyData::zero_potential(psi, 2);
    d.v[0] = g.nodes().map(|x| 0.3 * smooth_bump(x, 0.0, 1.0)).collect();
    let tr = evolve(&d, &spec, &g, 1.0, 10).unwrap();
    let path = dir.path().join("fields.csv");
    emit_fields(&tr, &g, &path).unwrap();
    let table = read_fields(&path).unwrap();
    assert_eq!(table.n_potentials, 2);
    assert_eq!(table.slices.len(), tr.slices.len());
    for (parsed, s) in table.slices.iter().zip(&tr.slices) {
        assert_eq!(parsed.psi.time, s.psi.time);
        let q_mem = charge(&s.psi, &g).unwrap();
        let q_csv = charge(&parsed.psi, &g).unwrap();
        assert!((q_mem - q_csv).abs() <= 1e-15, "{q_mem} vs {q_csv}");
        assert_eq!(parsed.values, s.potentials.values);
        assert_eq!(parsed.rates, s.potentials.rates);
        assert_eq!(parsed.x[7], g.x(7));
    }
}

#[test]
fn single_cell_is_a_config_error_naming_the_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run_cli(dir.path(), "simulate", r#"{"n_cells": 1}"#, &[]);
    assert_eq!(code, 2);
    assert!(err.contains("n_cells must be at least 2"), "{err}");
    let (code, _, _) = run_cli(dir.path(), "simulate", "{}", &["--n-cells", "1"]);
    assert_eq!(code, 2);
}

#[test]
fn unknown_keys_and_commands_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run_cli(dir.path(), "simulate", r#"{"ncells": 10}"#, &[]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown field `ncells`"), "{err}");
    let (code, _, _) = run_cli(dir.path(), "evolve", "{}", &[]);
    assert_eq!(code, 2);
    let (code, _, _) = run_cli(dir.path(), "simulate", r#"{"horizon": 0.123}"#, &[]);
    assert_eq!(code, 2);
}

#[test]
fn zero_data_simulation_passes_with_zero_fields() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = run_cli(
        dir.path(),
        "simulate",
        r#"{"data": "zero", "n_cells": 40, "horizon": 0.5, "stride": 1}"#,
        &[],
    );
    assert_eq!(code, 0, "{out}{err}");
    let t = read_fields(&dir.path().join("out/fields.csv")).unwrap();
    assert_eq!(t.slices.len(), 6);
    for s in &t.slices {
        assert!(s.psi.u.iter().chain(&s.psi.v).all(|z| z.norm() == 0.0));
        assert!(s.values.iter().chain(&s.rates).flatten().all(|&v| v == 0.0));
    }
    let diag = read_json(&dir.path().join("out/diagnostics.json"));
    assert_eq!(diag["pass"], true);
    assert!(diag["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["pass"] == true));
}

#[test]
fn massless_sweep_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = run_cli(dir.path(), "illposed-sweep", "{}", &[]);
    assert_eq!(code, 0, "{out}{err}");
    let text = std::fs::read_to_string(dir.path().join("out/pairing.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eps,pairing,err_estimate");
    assert_eq!(lines.len(), 6);
    let fit = read_json(&dir.path().join("out/fit.json"));
    let (slope, s0) = (fit["slope"].as_f64().unwrap(), fit["S0"].as_f64().unwrap());
    assert!(slope >= 0.95 * s0, "{slope} vs {s0}");
    assert!(fit["intercept"].is_f64() && fit["residual"].is_f64());
}

#[test]
fn flags_override_config_and_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run_cli(
        dir.path(),
        "illposed-sweep",
        r#"{"n_cells": 400, "eps_list": [0.1, 0.01]}"#,
        &["--n-cells", "600", "--eps-list", "1e-2,1e-3,1e-4,1e-5"],
    );
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(dir.path().join("out/pairing.csv")).unwrap();
    assert_eq!(text.lines().count(), 5);
    let m = read_json(&dir.path().join("out/manifest.json"));
    assert_eq!(m["config"]["n_cells"], 600);
    assert_eq!(m["config"]["eps_list"].as_array().unwrap().len(), 4);
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    assert!(m["timestamp_unix"].as_u64().unwrap() > 0);
}

#[test]
fn manifest_reproduces_the_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run_cli(
        dir.path(),
        "simulate",
        r#"{"data": "bump", "n_cells": 80}"#,
        &[],
    );
    assert_eq!(code, 0, "{err}");
    let m = read_json(&dir.path().join("out/manifest.json"));
    let echoed: RunConfig = serde_json::from_value(m["config"].clone()).unwrap();
    assert_eq!(echoed.clone().resolve().unwrap(), echoed);
    assert_eq!(echoed.theta_t, Some(0.5));
    assert_eq!(echoed.picard_tol, 1e-12);
}

#[test]
fn identical_configs_give_identical_data_files() {
    let cfg = r#"{"data": "random-bumps", "seed": 11, "preset": "DKG", "dirac_mass": 1,
                 "boson_mass": 1, "potential_amplitude": 0.3, "n_cells": 200,
                 "horizon": 0.5, "stride": 10}"#;
    let files = |dir: &Path, cmd: &str, names: &[&str]| -> Vec<Vec<u8>> {
        let (code, _, err) = run_cli(dir, cmd, cfg, &[]);
        assert_eq!(code, 0, "{err}");
        names
            .iter()
            .map(|n| std::fs::read(dir.join("out").join(n)).unwrap())
            .collect()
    };
    for (cmd, names) in [
        ("simulate", &["fields.csv", "diagnostics.json"][..]),
        (
            "picard",
            &["fields.csv", "iterations.csv", "diagnostics.json"][..],
        ),
        ("diagnostics", &["diagnostics.json"][..]),
    ] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        assert_eq!(
            files(a.path(), cmd, names),
            files(b.path(), cmd, names),
            "{cmd}"
        );
    }
    let sweep = |dir: &Path| {
        let (code, _, err) = run_cli(dir, "illposed-sweep", "{}", &[]);
        assert_eq!(code, 0, "{err}");
        (
            std::fs::read(dir.join("out/pairing.csv")).unwrap(),
            std::fs::read(dir.join("out/fit.json")).unwrap(),
        )
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(sweep(a.path()), sweep(b.path()));
}

#[test]
fn failed_checks_exit_four_after_writing_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run_cli(
        dir.path(),
        "picard",
        r#"{"data": "bump", "data_amplitude": 0.3, "x_min": -3, "x_max": 3,
            "n_cells": 120, "horizon": 1, "picard_max_iter": 1}"#,
        &[],
    );
    assert_eq!(code, 4, "{err}");
    assert!(err.contains("residual"), "{err}");
    let diag = read_json(&dir.path().join("out/diagnostics.json"));
    assert_eq!(diag["pass"], false);
    assert!(dir.path().join("out/fields.csv").exists());
}

#[test]
fn numerical_failures_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    // Data touching the boundary leave the Picard domain of determinacy.
    let (code, _, err) = run_cli(
        dir.path(),
        "picard",
        r#"{"data": "bump", "data_amplitude": 0.3, "data_center": 1.8, "n_cells": 200}"#,
        &[],
    );
    assert_eq!(code, 3, "{err}");
    assert!(err.contains("padding"), "{err}");
}

#[test]
fn remaining_commands_run_on_small_configs() {
    let cases = [
        (
            "keybound",
            r#"{"dirac_mass": 1, "n_cells": 1024, "eps_list": [0.01, 0.001]}"#,
            "keybound.csv",
            3,
        ),
        (
            "convergence",
            r#"{"data": "gaussian", "data_amplitude": 1.2, "data_center": 0.3, "data_width": 0.25, "n_cells": 256}"#,
            "convergence.csv",
            4,
        ),
        (
            "convergence",
            r#"{"data": "eps-family", "data_eps": 0.1, "horizon": 0.5, "n_cells": 1024}"#,
            "convergence.csv",
            4,
        ),
        (
            "diagnostics",
            r#"{"data": "bump", "compatible": true, "dirac_mass": 1, "x_min": -4, "x_max": 4, "n_cells": 256, "horizon": 2, "stride": 8}"#,
            "diagnostics.json",
            0,
        ),
    ];
    for (cmd, cfg, file, rows) in cases {
        let dir = tempfile::tempdir().unwrap();
        let (code, out, err) = run_cli(dir.path(), cmd, cfg, &[]);
        assert_eq!(code, 0, "{cmd}: {out}{err}");
        let text = std::fs::read_to_string(dir.path().join("out").join(file)).unwrap();
        if rows > 0 {
            assert_eq!(text.lines().count(), rows, "{cmd}");
        }
        let diag = read_json(&dir.path().join("out/diagnostics.json"));
        assert_eq!(diag["pass"], true, "{cmd}");
    }
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run_cli(dir.path(), "convergence", r#"{"data": "bump"}"#, &[]);
    assert_eq!(code, 2);
}
