//! Plain-text export of an MPC instance in the common LP file layout
//! (objective, constraints, bounds), for cross-checking with external
//! solvers.

use std::fmt::Write;

use super::{MpcConfig, MpcProblem};
use crate::thermal::{Device, N_DEVICES};

fn device_tag(d: Device) -> &'static str {
    match d {
        Device::CoolingCoil => "cc",
        Device::HeatingCoil => "hc",
        Device::ReheatCoil => "rc",
        Device::Radiator => "rad",
    }
}

fn term(out: &mut String, coef: f64, var: &str) {
    if coef == 0.0 {
        return;
    }
    let sign = if coef < 0.0 { '-' } else { '+' };
    let _ = write!(out, " {sign} {:?} {var}", coef.abs());
}

/// Renders the condensed LP with variables `u_<step>_<device>`,
/// `su_<step>` and `sl_<step>`.
pub fn write_lp_file(p: &MpcProblem, cfg: &MpcConfig) -> String {
    let lp = p.to_lp(cfg);
    let n = p.horizon();
    let names: Vec<String> = (0..n)
        .flat_map(|i| Device::ALL.map(move |d| format!("u_{i}_{}", device_tag(d))))
        .chain((0..n).map(|i| format!("su_{i}")))
        .chain((0..n).map(|i| format!("sl_{i}")))
        .collect();

    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ economic MPC, horizon {n}, dt {} s, T0 {:?} K, theta [{:?}, {:?}, {:?}]",
        p.dt, p.t0, p.theta.c_z, p.theta.r_w, p.theta.alpha
    );
    out.push_str("Minimize\n obj:");
    for (c, name) in lp.c.iter().zip(&names) {
        term(&mut out, *c, name);
    }
    out.push_str("\nSubject To\n");

    let mut dense = vec![0.0; 2 * n];
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(names.len());
    for j in 0..names.len() {
        use super::lp::ConstraintMatrix;
        lp.a.column(j, &mut dense);
        cols.push(dense.clone());
    }
    for r in 0..2 * n {
        let label = if r < n {
            format!("upper_{r}")
        } else {
            format!("lower_{}", r - n)
        };
        let _ = write!(out, " {label}:");
        for (j, name) in names.iter().enumerate() {
            term(&mut out, cols[j][r], name);
        }
        let _ = writeln!(out, " <= {:?}", lp.b[r]);
    }
    out.push_str("Bounds\n");
    for (j, name) in names.iter().enumerate() {
        if j < N_DEVICES * n {
            let _ = writeln!(out, " 0 <= {name} <= 1");
        } else {
            let _ = writeln!(out, " {name} >= 0");
        }
    }
    out.push_str("End\n");
    out
}
