//! `fields.csv`: one row per (stored time, node), t-major.
//!
//! Header `t,x,re_u,im_u,re_v,im_v,V1..VN,Vdot1..VdotN`; every value is printed with
//! 17 significant digits so that parsing recovers the doubles exactly.

use std::path::Path;

use charge_class::lattice::SolutionTrace;
use charge_class::{Grid1D, SpinorSlice};
use num_complex::Complex64;

use crate::error::CliError;

pub fn fields_header(n_potentials: usize) -> Vec<String> {
    let mut h: Vec<String> = ["t", "x", "re_u", "im_u", "re_v", "im_v"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend((1..=n_potentials).map(|j| format!("V{j}")));
    h.extend((1..=n_potentials).map(|j| format!("Vdot{j}")));
    h
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes every stored slice of `trace`.
pub fn emit_fields(trace: &SolutionTrace, grid: &Grid1D, path: &Path) -> Result<(), CliError> {
    let first = trace
        .slices
        .first()
        .ok_or_else(|| CliError::Config("cannot emit an empty trace".into()))?;
    let n_pot = first.potentials.n_components();
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    w.write_record(fields_header(n_pot))
        .map_err(|e| CliError::csv(path, e))?;
    let mut row = Vec::with_capacity(6 + 2 * n_pot);
    for s in &trace.slices {
        grid.check_len(s.psi.len())?;
        let t = fmt_f64(s.psi.time);
        for i in 0..grid.len() {
            row.clear();
            row.push(t.clone());
            row.push(fmt_f64(grid.x(i)));
            for z in [s.psi.u[i], s.psi.v[i]] {
                row.push(fmt_f64(z.re));
                row.push(fmt_f64(z.im));
            }
            for j in 0..n_pot {
                row.push(fmt_f64(s.potentials.values[j][i]));
            }
            for j in 0..n_pot {
                row.push(fmt_f64(s.potentials.rates[j][i]));
            }
            w.write_record(&row).map_err(|e| CliError::csv(path, e))?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// One time level of a parsed `fields.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldsSlice {
    pub x: Vec<f64>,
    pub psi: SpinorSlice,
    pub values: Vec<Vec<f64>>,
    pub rates: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldsTable {
    pub n_potentials: usize,
    pub slices: Vec<FieldsSlice>,
}

/// Parses a file written by [`emit_fields`], checking the header.
pub fn read_fields(path: &Path) -> Result<FieldsTable, CliError> {
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::csv(path, e))?;
    let header: Vec<String> = r
        .headers()
        .map_err(|e| CliError::csv(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < 8 || !header.len().is_multiple_of(2) {
        return Err(bad(format!("unexpected column count {}", header.len())));
    }
    let n_pot = (header.len() - 6) / 2;
    if header != fields_header(n_pot) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let mut slices: Vec<FieldsSlice> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::csv(path, e))?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| bad(format!("bad number `{s}`: {e}")))
            })
            .collect::<Result<_, _>>()?;
        let t = vals[0];
        if slices.last().is_none_or(|s| s.psi.time != t) {
            slices.push(FieldsSlice {
                x: Vec::new(),
                psi: SpinorSlice {
                    u: Vec::new(),
                    v: Vec::new(),
                    time: t,
                },
                values: vec![Vec::new(); n_pot],
                rates: vec![Vec::new(); n_pot],
            });
        }
        let s = slices.last_mut().expect("pushed above");
        s.x.push(vals[1]);
        s.psi.u.push(Complex64::new(vals[2], vals[3]));
        s.psi.v.push(Complex64::new(vals[4], vals[5]));
        for j in 0..n_pot {
            s.values[j].push(vals[6 + j]);
            s.rates[j].push(vals[6 + n_pot + j]);
        }
    }
    Ok(FieldsTable {
        n_potentials: n_pot,
        slices,
    })
}
