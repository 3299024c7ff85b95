//! Grey-box identification of the 1R1C parameters.
//!
//! The fit minimizes the weighted sum of squared one-step-ahead prediction
//! errors (teacher forcing: every prediction starts from the measured
//! state) over a box of admissible parameters. The search runs in
//! log-parameter space with a projected Levenberg–Marquardt iteration that
//! freezes variables pinned at a bound whenever the gradient pushes outward.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::thermal::{
    hvac_power, rc_decay, step_rc, ControlVector, Disturbance, HvacConfig, ParamBounds, RcParams, ThermalError,
    ZoneGeometry,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SysIdError {
    #[error("invalid training window: {0}")]
    InvalidWindow(String),
    #[error("invalid identification config: {0}")]
    InvalidConfig(String),
    #[error("warm start {0:?} lies outside the parameter bounds")]
    WarmStartOutOfBounds(RcParams),
    #[error("insufficient excitation: var(T_z) = {var_temp:.3e} K², var(hvac power) = {var_power:.3e} W²")]
    InsufficientExcitation { var_temp: f64, var_power: f64 },
    #[error(transparent)]
    Thermal(#[from] ThermalError),
}

/// One sample of closed-loop data: measured state, applied command and the
/// disturbance held over the following step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t_zone: f64,
    pub u: ControlVector,
    pub e: Disturbance,
}

/// Uniformly spaced, time-ordered training data.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingWindow {
    records: Vec<Record>,
    dt: f64,
}

impl TrainingWindow {
    pub fn new(records: Vec<Record>, dt: f64) -> Result<Self, SysIdError> {
        if records.len() < 2 {
            return Err(SysIdError::InvalidWindow(format!(
                "need at least 2 records, got {}",
                records.len()
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(SysIdError::InvalidWindow(format!("dt = {dt}")));
        }
        if let Some(i) = records.iter().position(|r| !r.t_zone.is_finite()) {
            return Err(SysIdError::InvalidWindow(format!("record {i} has non-finite T_z")));
        }
        Ok(TrainingWindow { records, dt })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SysIdConfig {
    pub bounds: ParamBounds,
    /// Exponential forgetting factor in (0, 1]; 1 weighs all residuals equally.
    pub forgetting: f64,
    pub max_iterations: usize,
    /// Stop when the largest relative parameter change falls below this.
    pub tolerance: f64,
    /// Number of starts: the warm start plus `multistart - 1` log-uniform samples.
    pub multistart: usize,
    /// Excitation floor applied to both var(T_z) and var(hvac power).
    pub excitation_eps: f64,
    pub seed: u64,
}

impl SysIdConfig {
    pub fn new(bounds: ParamBounds) -> Self {
        SysIdConfig {
            bounds,
            forgetting: 1.0,
            max_iterations: 100,
            tolerance: 1e-10,
            multistart: 3,
            excitation_eps: 1e-6,
            seed: 0x5eed,
        }
    }

    pub fn validate(&self) -> Result<(), SysIdError> {
        self.bounds.validate()?;
        if !(self.forgetting > 0.0 && self.forgetting <= 1.0) {
            return Err(SysIdError::InvalidConfig(format!(
                "forgetting factor {} outside (0, 1]",
                self.forgetting
            )));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(SysIdError::InvalidConfig(format!("tolerance {}", self.tolerance)));
        }
        if self.multistart == 0 {
            return Err(SysIdError::InvalidConfig("multistart must be >= 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(SysIdError::InvalidConfig("max_iterations must be >= 1".into()));
        }
        if !(self.excitation_eps.is_finite() && self.excitation_eps >= 0.0) {
            return Err(SysIdError::InvalidConfig(format!(
                "excitation_eps {}",
                self.excitation_eps
            )));
        }
        Ok(())
    }
}

/// One-step-ahead prediction errors `T_{i+1} − f(T_i, u_i, e_i, θ)`, length `n − 1`.
pub fn residuals(
    w: &TrainingWindow,
    theta: &RcParams,
    geom: &ZoneGeometry,
    hvac: &HvacConfig,
) -> Result<Vec<f64>, SysIdError> {
    w.records
        .windows(2)
        .map(|p| {
            let pred = step_rc(p[0].t_zone, &p[0].u, &p[0].e, theta, geom, hvac, w.dt)?;
            Ok(p[1].t_zone - pred)
        })
        .collect()
}

/// Residual weights for `n` residuals ordered oldest first: the newest gets
/// weight 1 and each older one is discounted by `forgetting`.
pub fn weights(n: usize, forgetting: f64) -> Vec<f64> {
    (0..n).map(|i| forgetting.powi((n - 1 - i) as i32)).collect()
}

/// Weighted sum of squared residuals.
pub fn objective(
    w: &TrainingWindow,
    theta: &RcParams,
    geom: &ZoneGeometry,
    hvac: &HvacConfig,
    forgetting: f64,
) -> Result<f64, SysIdError> {
    let eps = residuals(w, theta, geom, hvac)?;
    let xi = weights(eps.len(), forgetting);
    Ok(eps.iter().zip(&xi).map(|(e, x)| x * e * e).sum())
}

/// θ-independent quantities of each residual.
struct Sample {
    t: f64,
    t_next: f64,
    t_amb: f64,
    /// HVAC plus internal gains, W.
    power: f64,
    h_glo: f64,
    sqrt_weight: f64,
}

struct Problem {
    samples: Vec<Sample>,
    dt: f64,
}

impl Problem {
    fn new(w: &TrainingWindow, geom: &ZoneGeometry, hvac: &HvacConfig, forgetting: f64) -> Self {
        let n = w.records.len() - 1;
        let xi = weights(n, forgetting);
        let samples = w
            .records
            .windows(2)
            .zip(xi)
            .map(|(p, x)| Sample {
                t: p[0].t_zone,
                t_next: p[1].t_zone,
                t_amb: p[0].e.t_amb,
                power: hvac_power(&p[0].u, hvac) + p[0].e.q_int * geom.area,
                h_glo: p[0].e.h_glo,
                sqrt_weight: x.sqrt(),
            })
            .collect();
        Problem { samples, dt: w.dt }
    }

    /// Weighted cost and, optionally, the Gauss–Newton pieces `JᵀJ` and
    /// `Jᵀr` with respect to `ln θ`.
    fn evaluate(&self, theta: &RcParams, with_jacobian: bool) -> (f64, [[f64; 3]; 3], [f64; 3]) {
        let a = rc_decay(theta, self.dt);
        let da = a * self.dt / theta.time_constant();
        let mut cost = 0.0;
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for s in &self.samples {
            let q = s.power + theta.alpha * s.h_glo;
            let forced = s.t_amb + theta.r_w * q;
            let pred = a * s.t + (1.0 - a) * forced;
            let r = s.sqrt_weight * (s.t_next - pred);
            cost += r * r;
            if with_jacobian {
                let d = s.t - forced;
                // d(residual)/d(ln c_z, ln r_w, ln alpha)
                let j = [
                    -s.sqrt_weight * d * da,
                    -s.sqrt_weight * (d * da + (1.0 - a) * theta.r_w * q),
                    -s.sqrt_weight * (1.0 - a) * theta.r_w * theta.alpha * s.h_glo,
                ];
                for p in 0..3 {
                    jtr[p] += j[p] * r;
                    for q in 0..=p {
                        jtj[p][q] += j[p] * j[q];
                    }
                }
            }
        }
        for p in 0..3 {
            for q in (p + 1)..3 {
                jtj[p][q] = jtj[q][p];
            }
        }
        (cost, jtj, jtr)
    }
}

/// Gradient of [`objective`] with respect to `ln θ`, in `[c_z, r_w, alpha]`
/// order.
pub fn objective_log_gradient(
    w: &TrainingWindow,
    theta: &RcParams,
    geom: &ZoneGeometry,
    hvac: &HvacConfig,
    forgetting: f64,
) -> [f64; 3] {
    let (_, _, jtr) = Problem::new(w, geom, hvac, forgetting).evaluate(theta, true);
    jtr.map(|g| 2.0 * g)
}

/// Outcome of a successful [`fit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub theta: RcParams,
    pub cost: f64,
    pub warm_cost: f64,
    pub iterations: usize,
}

fn variance(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let (n, sum) = xs.clone().fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    let mean = sum / n as f64;
    xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64
}

/// Identifies θ from `w`, warm-started at `theta_prev`.
///
/// The result is feasible and never has a larger cost than the warm start.
pub fn fit(
    w: &TrainingWindow,
    theta_prev: &RcParams,
    cfg: &SysIdConfig,
    geom: &ZoneGeometry,
    hvac: &HvacConfig,
) -> Result<FitReport, SysIdError> {
    cfg.validate()?;
    theta_prev.validate()?;
    if !cfg.bounds.contains(theta_prev) {
        return Err(SysIdError::WarmStartOutOfBounds(*theta_prev));
    }
    let var_temp = variance(w.records.iter().map(|r| r.t_zone));
    let var_power = variance(w.records.iter().map(|r| hvac_power(&r.u, hvac)));
    if var_temp < cfg.excitation_eps && var_power < cfg.excitation_eps {
        return Err(SysIdError::InsufficientExcitation { var_temp, var_power });
    }

    let problem = Problem::new(w, geom, hvac, cfg.forgetting);
    let lo = cfg.bounds.lower.to_array().map(f64::ln);
    let hi = cfg.bounds.upper.to_array().map(f64::ln);

    let mut starts = vec![theta_prev.to_array().map(f64::ln)];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 1..cfg.multistart {
        starts.push([0, 1, 2].map(|i| rng.gen_range(lo[i]..=hi[i])));
    }

    let warm_cost = problem.evaluate(theta_prev, false).0;
    let mut best = FitReport {
        theta: *theta_prev,
        cost: warm_cost,
        warm_cost,
        iterations: 0,
    };
    for z0 in starts {
        let (theta, cost, iterations) = levenberg_marquardt(&problem, z0, lo, hi, cfg);
        if cost < best.cost {
            best = FitReport {
                theta,
                cost,
                warm_cost,
                iterations,
            };
        }
    }
    Ok(best)
}

fn to_theta(z: [f64; 3], lo: [f64; 3], hi: [f64; 3]) -> RcParams {
    RcParams::from_array([0, 1, 2].map(|i| z[i].clamp(lo[i], hi[i]).exp()))
}

fn levenberg_marquardt(
    problem: &Problem,
    z0: [f64; 3],
    lo: [f64; 3],
    hi: [f64; 3],
    cfg: &SysIdConfig,
) -> (RcParams, f64, usize) {
    let mut z = [0, 1, 2].map(|i| z0[i].clamp(lo[i], hi[i]));
    let mut theta = to_theta(z, lo, hi);
    let (mut cost, mut jtj, mut jtr) = problem.evaluate(&theta, true);
    if !cost.is_finite() {
        return (theta, f64::INFINITY, 0);
    }
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        // Freeze variables at a bound whose descent direction leaves the box.
        let free: Vec<usize> = (0..3)
            .filter(|&i| {
                let at_lo = z[i] <= lo[i] && jtr[i] > 0.0;
                let at_hi = z[i] >= hi[i] && jtr[i] < 0.0;
                !(at_lo || at_hi)
            })
            .collect();
        if free.is_empty() {
            break;
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let Some(delta) = damped_step(&jtj, &jtr, &free, lambda) else {
                lambda *= 10.0;
                continue;
            };
            let mut z_new = z;
            for (k, &i) in free.iter().enumerate() {
                z_new[i] = (z[i] + delta[k]).clamp(lo[i], hi[i]);
            }
            let theta_new = to_theta(z_new, lo, hi);
            let (c_new, jtj_new, jtr_new) = problem.evaluate(&theta_new, true);
            if c_new.is_finite() && c_new < cost {
                let change = (0..3).map(|i| (z_new[i] - z[i]).abs()).fold(0.0, f64::max);
                z = z_new;
                theta = theta_new;
                cost = c_new;
                jtj = jtj_new;
                jtr = jtr_new;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if change < cfg.tolerance {
                    return (theta, cost, iterations);
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    (theta, cost, iterations)
}

/// Solves `(H_ff + λ·diag(H_ff)) δ = −g_f` over the free index set.
fn damped_step(h: &[[f64; 3]; 3], g: &[f64; 3], free: &[usize], lambda: f64) -> Option<Vec<f64>> {
    let n = free.len();
    let mut m: Vec<Vec<f64>> = free
        .iter()
        .map(|&i| {
            let mut row: Vec<f64> = free.iter().map(|&j| h[i][j]).collect();
            row.push(-g[i]);
            row
        })
        .collect();
    for k in 0..n {
        let d = m[k][k];
        m[k][k] = d + lambda * d.max(1e-300);
    }
    // Gaussian elimination with partial pivoting.
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-300 || !m[piv][col].is_finite() {
            return None;
        }
        m.swap(col, piv);
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = ((row + 1)..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (m[row][n] - s) / m[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal::fixtures::{geom, hvac, theta0};
    use proptest::prelude::*;
    use rand::Rng;

    /// Persistently exciting data generated by the 1R1C model itself.
    pub(crate) fn excited_window(theta: &RcParams, n: usize, seed: u64) -> TrainingWindow {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (g, cfg) = (geom(), hvac());
        let mut t = 296.0;
        let mut records = Vec::with_capacity(n);
        for k in 0..n {
            let hour = (k as f64 * 300.0 / 3600.0) % 24.0;
            let t_amb = 293.0 + 6.0 * ((hour - 15.0) / 24.0 * std::f64::consts::TAU).cos();
            let h_glo = (600.0 * ((hour - 5.5) / 16.0 * std::f64::consts::PI).sin()).max(0.0);
            let u = if t > 300.0 {
                ControlVector([rng.gen_range(0.3..1.0), 0.0, 0.0, 0.0])
            } else if t < 292.0 {
                ControlVector([0.0, 0.0, 0.0, rng.gen_range(0.3..1.0)])
            } else {
                ControlVector([rng.gen_range(0.0..0.5), 0.0, 0.0, rng.gen_range(0.0..0.5)])
            };
            let e = Disturbance {
                t_amb,
                h_glo,
                q_int: 10.0,
                price: 0.1,
                occupied: true,
            };
            records.push(Record { t_zone: t, u, e });
            t = step_rc(t, &u, &e, theta, &g, &cfg, 300.0).unwrap();
        }
        TrainingWindow::new(records, 300.0).unwrap()
    }

    #[test]
    fn residuals_vanish_at_generating_theta() {
        let th = theta0();
        let w = excited_window(&th, 50, 1);
        let eps = residuals(&w, &th, &geom(), &hvac()).unwrap();
        assert_eq!(eps.len(), 49);
        assert!(eps.iter().all(|e| e.abs() < 1e-9));
    }

    #[test]
    fn perturbed_resistance_is_visible() {
        let th = theta0();
        let w = excited_window(&th, 50, 2);
        let mut off = th;
        off.r_w *= 1.1;
        let eps = residuals(&w, &off, &geom(), &hvac()).unwrap();
        assert!(eps.iter().any(|e| e.abs() > 1e-6));
    }

    #[test]
    fn weight_law() {
        assert!(weights(10, 1.0).iter().all(|&x| x == 1.0));
        let w = weights(10, 0.9);
        assert_eq!(w[9], 1.0);
        assert!(w.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn window_validation() {
        let r = Record {
            t_zone: 296.0,
            u: ControlVector::zero(),
            e: crate::thermal::fixtures::calm(296.0),
        };
        assert!(TrainingWindow::new(vec![r], 300.0).is_err());
        assert!(TrainingWindow::new(vec![r, r], 0.0).is_err());
    }

    #[test]
    fn constant_window_is_unidentifiable() {
        let r = Record {
            t_zone: 296.0,
            u: ControlVector::zero(),
            e: crate::thermal::fixtures::calm(296.0),
        };
        let w = TrainingWindow::new(vec![r; 100], 300.0).unwrap();
        let th = theta0();
        let cfg = SysIdConfig::new(ParamBounds::around(&th, 0.1, 10.0).unwrap());
        assert!(matches!(
            fit(&w, &th, &cfg, &geom(), &hvac()),
            Err(SysIdError::InsufficientExcitation { .. })
        ));
    }

    #[test]
    fn warm_start_outside_bounds_rejected() {
        let th = theta0();
        let w = excited_window(&th, 100, 3);
        let cfg = SysIdConfig::new(ParamBounds::around(&th, 0.1, 10.0).unwrap());
        let outside = th.scaled(20.0);
        assert!(matches!(
            fit(&w, &outside, &cfg, &geom(), &hvac()),
            Err(SysIdError::WarmStartOutOfBounds(_))
        ));
    }

    #[test]
    fn recovers_interior_theta() {
        let truth = RcParams::new(8.1e6, 0.0123, 3.1).unwrap();
        let w = excited_window(&truth, 7 * 288, 4);
        let th0 = theta0();
        let cfg = SysIdConfig::new(ParamBounds::around(&th0, 0.1, 10.0).unwrap());
        let rep = fit(&w, &th0, &cfg, &geom(), &hvac()).unwrap();
        for (f, t) in rep.theta.to_array().iter().zip(truth.to_array()) {
            assert!(((f - t) / t).abs() < 1e-3, "{:?} vs {:?}", rep.theta, truth);
        }
        assert!(rep.cost <= rep.warm_cost);
    }

    #[test]
    fn active_upper_bound_on_resistance() {
        let th0 = theta0();
        let bounds = ParamBounds::around(&th0, 0.1, 10.0).unwrap();
        let truth = RcParams::new(6.6e6, bounds.upper.r_w * 1.5, 4.2).unwrap();
        let w = excited_window(&truth, 3 * 288, 5);
        let cfg = SysIdConfig::new(bounds);
        let rep = fit(&w, &th0, &cfg, &geom(), &hvac()).unwrap();
        assert!(
            (rep.theta.r_w - bounds.upper.r_w).abs() <= 1e-12 * bounds.upper.r_w,
            "{:?}",
            rep.theta
        );
        // Coarse grid over the box must not beat the fit.
        let (g, h) = (geom(), hvac());
        let lo = bounds.lower.to_array().map(f64::ln);
        let hi = bounds.upper.to_array().map(f64::ln);
        let mut grid_best = (f64::INFINITY, th0);
        let n = 12;
        for i in 0..=n {
            for j in 0..=n {
                for k in 0..=n {
                    let z = [i, j, k];
                    let th = RcParams::from_array(
                        [0, 1, 2].map(|p| (lo[p] + (hi[p] - lo[p]) * z[p] as f64 / n as f64).exp()),
                    );
                    let c = objective(&w, &th, &g, &h, 1.0).unwrap();
                    if c < grid_best.0 {
                        grid_best = (c, th);
                    }
                }
            }
        }
        assert!(rep.cost <= grid_best.0);
        assert!((grid_best.1.r_w - bounds.upper.r_w).abs() <= 1e-9 * bounds.upper.r_w);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let truth = RcParams::new(7.0e6, 0.015, 3.5).unwrap();
        let w = excited_window(&truth, 300, 6);
        let (g, h) = (geom(), hvac());
        let th0 = theta0();
        let bounds = ParamBounds::around(&th0, 0.1, 10.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let lo = bounds.lower.to_array().map(f64::ln);
        let hi = bounds.upper.to_array().map(f64::ln);
        for _ in 0..10 {
            let z: [f64; 3] = [0, 1, 2].map(|i| rng.gen_range(lo[i]..hi[i]));
            let th = RcParams::from_array(z.map(f64::exp));
            let grad = objective_log_gradient(&w, &th, &g, &h, 0.97);
            for p in 0..3 {
                let step = 1e-5;
                let mut zp = z;
                let mut zm = z;
                zp[p] += step;
                zm[p] -= step;
                let fp = objective(&w, &RcParams::from_array(zp.map(f64::exp)), &g, &h, 0.97).unwrap();
                let fm = objective(&w, &RcParams::from_array(zm.map(f64::exp)), &g, &h, 0.97).unwrap();
                let fd = (fp - fm) / (2.0 * step);
                let scale = grad[p].abs().max(fd.abs()).max(1e-12);
                assert!(
                    (grad[p] - fd).abs() / scale < 1e-5,
                    "param {p}: analytic {} vs fd {fd}",
                    grad[p]
                );
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn fit_is_feasible_and_never_worse(
            c in 2e6..2e7f64, r in 0.005..0.05f64, al in 1.0..10.0f64,
            seed in 0u64..1000, forgetting in 0.99..=1.0f64,
        ) {
            let truth = RcParams::new(c, r, al).unwrap();
            let w = excited_window(&truth, 288, seed);
            let th0 = theta0();
            let mut cfg = SysIdConfig::new(ParamBounds::around(&th0, 0.1, 10.0).unwrap());
            cfg.forgetting = forgetting;
            cfg.max_iterations = 30;
            let rep = fit(&w, &th0, &cfg, &geom(), &hvac()).unwrap();
            prop_assert!(cfg.bounds.contains(&rep.theta));
            let warm = objective(&w, &th0, &geom(), &hvac(), forgetting).unwrap();
            let got = objective(&w, &rep.theta, &geom(), &hvac(), forgetting).unwrap();
            prop_assert!(got <= warm);
        }

        #[test]
        fn temperature_shift_leaves_fit_unchanged(shift in -20.0..20.0f64, seed in 0u64..100) {
            let truth = RcParams::new(5.0e6, 0.02, 5.0).unwrap();
            let w = excited_window(&truth, 2 * 288, seed);
            let shifted = TrainingWindow::new(
                w.records().iter().map(|r| Record {
                    t_zone: r.t_zone + shift,
                    e: Disturbance { t_amb: r.e.t_amb + shift, ..r.e },
                    ..*r
                }).collect(),
                w.dt(),
            ).unwrap();
            let th0 = theta0();
            let cfg = SysIdConfig::new(ParamBounds::around(&th0, 0.1, 10.0).unwrap());
            let a = fit(&w, &th0, &cfg, &geom(), &hvac()).unwrap().theta.to_array();
            let b = fit(&shifted, &th0, &cfg, &geom(), &hvac()).unwrap().theta.to_array();
            for i in 0..3 {
                prop_assert!(((a[i] - b[i]) / a[i]).abs() < 1e-6, "{a:?} vs {b:?}");
            }
        }
    }
}
