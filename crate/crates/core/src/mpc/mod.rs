//! Economic MPC: minimize energy cost plus penalized comfort slack over a
//! receding horizon, subject to the discrete 1R1C dynamics.
//!
//! With the exact discretization the predicted temperature is affine in the
//! controls, so after eliminating states by forward substitution the whole
//! problem is a linear program in `6·n_c` variables (four commands and two
//! slacks per step) with `2·n_c` inequality rows.

pub mod lp;
mod lpfile;

pub use lpfile::write_lp_file;

use chrono::{Duration, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::thermal::{
    comfort_bounds, rc_decay, ComfortSchedule, ControlVector, Disturbance, HvacConfig, RcParams, TempBand,
    ThermalError, ZoneGeometry, N_DEVICES,
};
use lp::{Certificate, ConstraintMatrix, LinearProgram, LpError, SimplexOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpcError {
    #[error("forecast gap: horizon needs {need} steps, forecast covers {have}")]
    ForecastGap { have: usize, need: usize },
    #[error("invalid MPC config: {0}")]
    InvalidConfig(String),
    #[error("invalid MPC problem: {0}")]
    InvalidProblem(String),
    #[error("solver failure: {source}")]
    SolverFailure {
        #[source]
        source: LpError,
    },
    #[error(transparent)]
    Thermal(#[from] ThermalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpcConfig {
    /// Horizon, steps.
    pub n_c: usize,
    /// Penalty on upper-bound slack, currency per K per step.
    pub mu_upper: f64,
    /// Penalty on lower-bound slack, currency per K per step.
    pub mu_lower: f64,
    /// Step, s.
    pub dt: f64,
}

impl Default for MpcConfig {
    fn default() -> Self {
        MpcConfig {
            n_c: 96,
            mu_upper: 1000.0,
            mu_lower: 1000.0,
            dt: 300.0,
        }
    }
}

/// Required ratio of slack penalty to the largest per-step energy cost.
pub const MIN_PENALTY_RATIO: f64 = 10.0;

impl MpcConfig {
    pub fn validate(&self) -> Result<(), MpcError> {
        if self.n_c == 0 {
            return Err(MpcError::InvalidConfig("n_c must be >= 1".into()));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(MpcError::InvalidConfig(format!("dt = {}", self.dt)));
        }
        for (name, mu) in [("mu_upper", self.mu_upper), ("mu_lower", self.mu_lower)] {
            if !(mu.is_finite() && mu > 0.0) {
                return Err(MpcError::InvalidConfig(format!("{name} must be > 0, got {mu}")));
            }
        }
        Ok(())
    }

    /// Checks the penalties dominate the largest stage energy cost the
    /// given prices can produce.
    pub fn check_penalty_ratio(&self, hvac: &HvacConfig, max_price: f64) -> Result<(), MpcError> {
        let full: f64 = hvac.effective_power().iter().map(|p| p.abs()).sum::<f64>() / 1000.0;
        let stage = max_price.max(0.0) * full * self.dt / 3600.0;
        let mu = self.mu_upper.min(self.mu_lower);
        if mu < MIN_PENALTY_RATIO * stage {
            return Err(MpcError::InvalidConfig(format!(
                "slack penalty {mu} is below {MIN_PENALTY_RATIO}x the max stage cost {stage:.4}"
            )));
        }
        Ok(())
    }
}

/// One MPC instance, fully assembled.
#[derive(Debug, Clone, PartialEq)]
pub struct MpcProblem {
    /// Measured zone temperature at the start of the horizon, K.
    pub t0: f64,
    pub theta: RcParams,
    pub hvac: HvacConfig,
    pub geom: ZoneGeometry,
    pub dt: f64,
    /// Disturbances held over each of the `n_c` steps.
    pub forecast: Vec<Disturbance>,
    /// Comfort band on the predicted state after each step.
    pub bounds: Vec<TempBand>,
}

/// Assembles the MPC instance starting at `start`. The bound for step `i`
/// applies to the state reached at `start + (i + 1)·dt`.
pub fn build_problem(
    t0: f64,
    theta: &RcParams,
    forecast: &[Disturbance],
    start: NaiveDateTime,
    schedule: &ComfortSchedule,
    hvac: &HvacConfig,
    geom: &ZoneGeometry,
    cfg: &MpcConfig,
) -> Result<MpcProblem, MpcError> {
    cfg.validate()?;
    theta.validate()?;
    hvac.validate()?;
    if !t0.is_finite() {
        return Err(MpcError::InvalidProblem(format!("initial state {t0}")));
    }
    if forecast.len() < cfg.n_c {
        return Err(MpcError::ForecastGap {
            have: forecast.len(),
            need: cfg.n_c,
        });
    }
    let forecast = forecast[..cfg.n_c].to_vec();
    for e in &forecast {
        e.validate()?;
    }
    let step = Duration::milliseconds((cfg.dt * 1000.0).round() as i64);
    let bounds = (1..=cfg.n_c as i32)
        .map(|i| comfort_bounds(start + step * i, schedule))
        .collect();
    Ok(MpcProblem {
        t0,
        theta: *theta,
        hvac: *hvac,
        geom: *geom,
        dt: cfg.dt,
        forecast,
        bounds,
    })
}

impl MpcProblem {
    pub fn horizon(&self) -> usize {
        self.forecast.len()
    }

    /// Number of LP decision variables.
    pub fn num_variables(&self) -> usize {
        6 * self.horizon()
    }

    /// Decay factor `a` of the one-step map.
    pub fn decay(&self) -> f64 {
        rc_decay(&self.theta, self.dt)
    }

    /// Temperature increment of one step per unit command of each device,
    /// `(1 − a)·r_w·gamma·q_max`, K.
    pub fn input_gains(&self) -> [f64; N_DEVICES] {
        let g = (1.0 - self.decay()) * self.theta.r_w;
        self.hvac.effective_power().map(|p| g * p)
    }

    /// Predicted states with all devices off, `T̂_1 .. T̂_{n_c}`.
    pub fn free_response(&self) -> Vec<f64> {
        let a = self.decay();
        let mut t = self.t0;
        self.forecast
            .iter()
            .map(|e| {
                let q = e.q_int * self.geom.area + self.theta.alpha * e.h_glo;
                t = a * t + (1.0 - a) * (e.t_amb + self.theta.r_w * q);
                t
            })
            .collect()
    }

    /// Predicted states under a control trajectory.
    pub fn predict(&self, u: &[ControlVector]) -> Vec<f64> {
        let a = self.decay();
        let gains = self.input_gains();
        let free = self.free_response();
        let mut acc = 0.0;
        free.iter()
            .zip(u)
            .map(|(f, ui)| {
                let p: f64 = (0..N_DEVICES).map(|d| gains[d] * ui.0[d]).sum();
                acc = a * acc + p;
                f + acc
            })
            .collect()
    }

    /// Energy cost coefficient per unit command for step `i`, currency.
    pub fn energy_costs(&self, i: usize) -> [f64; N_DEVICES] {
        let hours = self.dt / 3600.0;
        let price = self.forecast[i].price;
        self.hvac.effective_power().map(|p| price * p.abs() / 1000.0 * hours)
    }

    /// The condensed LP.
    pub fn to_lp(&self, cfg: &MpcConfig) -> LinearProgram<HorizonMatrix> {
        let n = self.horizon();
        let mut c = vec![0.0; 6 * n];
        for i in 0..n {
            c[4 * i..4 * i + 4].copy_from_slice(&self.energy_costs(i));
            c[4 * n + i] = cfg.mu_upper;
            c[5 * n + i] = cfg.mu_lower;
        }
        let free = self.free_response();
        let mut b = vec![0.0; 2 * n];
        for i in 0..n {
            b[i] = self.bounds[i].t_max - free[i];
            b[n + i] = free[i] - self.bounds[i].t_min;
        }
        let mut upper = vec![1.0; 4 * n];
        upper.extend(std::iter::repeat(f64::INFINITY).take(2 * n));
        LinearProgram {
            c,
            a: HorizonMatrix {
                n,
                decay: self.decay(),
                gains: self.input_gains(),
            },
            b,
            upper,
        }
    }
}

/// Condensed constraint matrix.
///
/// Columns: `u[i][d]` at `4i + d`, upper slack at `4n + i`, lower slack at
/// `5n + i`. Rows: `T̂_{i+1} − s̄_i ≤ T_max` at `i`, `−T̂_{i+1} − s̲_i ≤ −T_min`
/// at `n + i`. The control block is lower-triangular Toeplitz with entries
/// `gains[d]·decay^(i−j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizonMatrix {
    n: usize,
    decay: f64,
    gains: [f64; N_DEVICES],
}

impl ConstraintMatrix for HorizonMatrix {
    fn rows(&self) -> usize {
        2 * self.n
    }

    fn cols(&self) -> usize {
        6 * self.n
    }

    fn column(&self, j: usize, out: &mut [f64]) {
        let n = self.n;
        out.iter_mut().for_each(|o| *o = 0.0);
        if j < 4 * n {
            let (s, d) = (j / 4, j % 4);
            let mut v = self.gains[d];
            for i in s..n {
                out[i] = v;
                out[n + i] = -v;
                v *= self.decay;
            }
        } else {
            // Upper slacks sit on rows 0..n, lower slacks on n..2n.
            out[j - 4 * n] = -1.0;
        }
    }

    fn transpose_mul(&self, y: &[f64], out: &mut [f64]) {
        let n = self.n;
        let mut acc = 0.0;
        for s in (0..n).rev() {
            acc = (y[s] - y[n + s]) + self.decay * acc;
            for d in 0..N_DEVICES {
                out[4 * s + d] = self.gains[d] * acc;
            }
        }
        for i in 0..n {
            out[4 * n + i] = -y[i];
            out[5 * n + i] = -y[n + i];
        }
    }

    fn mul(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            let p: f64 = (0..N_DEVICES).map(|d| self.gains[d] * x[4 * i + d]).sum();
            acc = self.decay * acc + p;
            out[i] = acc - x[4 * n + i];
            out[n + i] = -acc - x[5 * n + i];
        }
    }

    fn singleton(&self, j: usize) -> Option<(usize, f64)> {
        (j >= 4 * self.n).then(|| (j - 4 * self.n, -1.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpcSolution {
    pub u: Vec<ControlVector>,
    pub slack_upper: Vec<f64>,
    pub slack_lower: Vec<f64>,
    /// Predicted `T̂_1 .. T̂_{n_c}`, K.
    pub t_pred: Vec<f64>,
    pub objective: f64,
    pub certificate: Certificate,
    pub iterations: usize,
}

/// Solves the MPC instance to certified LP optimality.
pub fn solve(p: &MpcProblem, cfg: &MpcConfig) -> Result<MpcSolution, MpcError> {
    cfg.validate()?;
    let n = p.horizon();
    if n == 0 || p.bounds.len() != n {
        return Err(MpcError::InvalidProblem(format!(
            "horizon {n} with {} bounds",
            p.bounds.len()
        )));
    }
    let lp = p.to_lp(cfg);
    let sol = lp::solve(&lp, &SimplexOptions::default()).map_err(|source| MpcError::SolverFailure { source })?;
    let u: Vec<ControlVector> = (0..n)
        .map(|i| {
            let mut v = [0.0; N_DEVICES];
            v.copy_from_slice(&sol.x[4 * i..4 * i + 4]);
            ControlVector::saturating(v)
        })
        .collect();
    let slack_upper = sol.x[4 * n..5 * n].iter().map(|s| s.max(0.0)).collect();
    let slack_lower = sol.x[5 * n..6 * n].iter().map(|s| s.max(0.0)).collect();
    let t_pred = p.predict(&u);
    Ok(MpcSolution {
        u,
        slack_upper,
        slack_lower,
        t_pred,
        objective: sol.objective,
        certificate: sol.certificate,
        iterations: sol.iterations,
    })
}

/// First control move of the plan.
pub fn receding_action(sol: &MpcSolution) -> ControlVector {
    sol.u[0]
}

/// First move of a successful solve, or `fallback` when the solver failed.
pub fn action_or_fallback(
    result: &Result<MpcSolution, MpcError>,
    fallback: impl FnOnce() -> ControlVector,
) -> ControlVector {
    match result {
        Ok(sol) => receding_action(sol),
        Err(_) => fallback(),
    }
}
