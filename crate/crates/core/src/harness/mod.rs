//! Closed-loop experiments: plant, forecasts, trigger, identification and
//! controller stepped together, with a per-step trace and summary metrics.

mod report;
pub mod scenario;

use std::path::Path;

use chrono::Duration;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::derive::{bestest_graph, derive_setup, ControllerSetup, DeriveError};
use crate::forecast::ingest::{ingest_price, ingest_weather};
use crate::forecast::{synthetic_store, ForecastError, ForecastService, TimeSeriesStore};
use crate::graph::{Graph, GraphError};
use crate::mpc::{self, build_problem, MpcConfig, MpcError};
use crate::rbc::{rbc_step, RbcError};
use crate::sysid::{self, fit, Record, SysIdConfig, TrainingWindow};
use crate::thermal::{
    celsius_to_kelvin, comfort_bounds, electrical_cost_rate, hvac_power, step_rc, RcParams, ThermalError,
};
use crate::thermal::{PlantConfig, PlantMode, PlantState, ReferencePlant};
use crate::trigger::{TriggerConfig, TriggerError, TriggerState};
pub use report::{compare, Comparison, ControllerSummary};
pub use scenario::{ControllerKind, PlantKind, Scenario, ThetaInit};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("input: {0}")]
    Input(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Derive(#[from] DeriveError),
    #[error("forecast: {0}")]
    Forecast(#[from] ForecastError),
    #[error(transparent)]
    Rbc(#[from] RbcError),
    #[error("step {step}: {source}")]
    Simulation {
        step: usize,
        #[source]
        source: ThermalError,
    },
    #[error("trigger: {0}")]
    Trigger(#[from] TriggerError),
    #[error("output: {0}")]
    Output(String),
    #[error("reports are not comparable: {0}")]
    Incomparable(String),
}

impl HarnessError {
    /// 2 for bad input or configuration, 3 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Simulation { .. } | HarnessError::Trigger(_) | HarnessError::Output(_) => 3,
            _ => 2,
        }
    }
}

/// One row of `trace.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub step: usize,
    pub time: String,
    /// True zone temperature at the start of the step, K.
    pub t_zone: f64,
    /// Measured zone temperature, K.
    pub t_meas: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub u_cc: f64,
    pub u_hc: f64,
    pub u_rc: f64,
    pub u_rad: f64,
    /// Heat delivered to the zone, W.
    pub q_hvac: f64,
    pub t_amb: f64,
    pub h_glo: f64,
    pub q_int: f64,
    pub price: f64,
    pub occupied: bool,
    pub rmse: Option<f64>,
    pub gamma: bool,
    pub si_ran: bool,
    pub c_z: f64,
    pub r_w: f64,
    pub alpha: f64,
    /// Energy cost over the step.
    pub cost: f64,
    /// Comfort violation at the end of the step times the step length, K·h.
    pub violation_kh: f64,
    pub fallback: bool,
    pub lp_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopMetrics {
    pub scenario: String,
    pub fingerprint: String,
    pub controller: ControllerKind,
    pub steps: usize,
    pub dt: f64,
    /// Identification horizon; the "after warmup" figures skip these steps.
    pub warmup_steps: usize,
    pub total_cost: f64,
    pub comfort_violation_kh: f64,
    pub total_cost_after_warmup: f64,
    pub comfort_violation_kh_after_warmup: f64,
    pub max_violation_k: f64,
    /// Electrical energy, kWh.
    pub energy_kwh: f64,
    /// Steps at which identification could run.
    pub si_eligible_steps: usize,
    pub trigger_fires: usize,
    pub si_activations: usize,
    pub si_failures: usize,
    /// `1 − activations / eligible steps`.
    pub si_saved_fraction: f64,
    pub mpc_solves: usize,
    pub mpc_fallbacks: usize,
    pub final_theta: RcParams,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: LoopMetrics,
    pub trace: Vec<TraceRow>,
}

/// Everything resolved from a scenario before the loop starts.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub setup: ControllerSetup,
    pub forecasts: ForecastService,
    pub plant: PlantConfig,
    pub theta_init: RcParams,
    pub steps: usize,
}

fn resolve(base: &Path, p: &Path) -> std::path::PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn open(base: &Path, p: &Path) -> Result<std::fs::File, HarnessError> {
    let path = resolve(base, p);
    std::fs::File::open(&path).map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))
}

/// Loads the graph, derives the controller setup and builds the forecast
/// store and plant. Relative paths resolve against `base`.
pub fn prepare(scn: &Scenario, base: &Path) -> Result<Prepared, HarnessError> {
    scn.validate()?;
    let graph = match &scn.graph {
        Some(p) => {
            let path = resolve(base, p);
            let text =
                std::fs::read_to_string(&path).map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))?;
            Graph::parse(&text)?
        }
        None => bestest_graph(),
    };
    let mut setup = derive_setup(&graph, scn.zone.as_deref())?;
    let o = &scn.overrides;
    setup.hyper.rho = o.rho.unwrap_or(setup.hyper.rho);
    setup.hyper.n_t = o.n_t.unwrap_or(setup.hyper.n_t);
    setup.hyper.n_s = o.n_s.unwrap_or(setup.hyper.n_s);
    setup.hyper.n_c = o.n_c.unwrap_or(setup.hyper.n_c);
    let h = setup.hyper;
    if h.n_c == 0 || h.n_t == 0 || h.n_s < 2 || h.n_t > h.n_s {
        return Err(HarnessError::Scenario(format!(
            "need n_c >= 1 and 1 <= n_t <= n_s, n_s >= 2; got n_c {} n_t {} n_s {}",
            h.n_c, h.n_t, h.n_s
        )));
    }
    if !(h.rho > 0.0) {
        return Err(HarnessError::Scenario(format!("rho {}", h.rho)));
    }
    scn.rbc.validate(&setup.schedule)?;

    let dt = h.dt.round() as i64;
    let steps = (scn.days as i64 * 86_400 / dt) as usize;
    let store = match (&scn.weather.csv, &scn.price.csv) {
        (None, None) => synthetic_store(
            &scn.weather.synthetic,
            &scn.price.synthetic,
            scn.start,
            steps + h.n_c,
            dt,
        )?,
        (w, p) => {
            let full = synthetic_store(
                &scn.weather.synthetic,
                &scn.price.synthetic,
                scn.start,
                steps + h.n_c,
                dt,
            )?;
            let mut s = TimeSeriesStore::new();
            match w {
                Some(path) => {
                    ingest_weather(open(base, path)?, &mut s, dt)?;
                }
                None => copy_series(&full, &mut s, &[crate::forecast::T_AMB, crate::forecast::H_GLO])?,
            }
            match p {
                Some(path) => {
                    ingest_price(open(base, path)?, &mut s, dt)?;
                }
                None => copy_series(&full, &mut s, &[crate::forecast::PRICE])?,
            }
            s
        }
    };
    let forecasts = ForecastService::new(store, scn.occupancy, setup.schedule, dt);

    let mode = match scn.plant.kind {
        PlantKind::R3c2 => PlantMode::R3c2(scn.plant.r3c2),
        PlantKind::Perfect1r1c => PlantMode::Perfect1r1c {
            theta: scn.plant.theta.unwrap_or(setup.theta0),
        },
    };
    let plant = PlantConfig {
        mode,
        geom: setup.geom,
        hvac: setup.hvac,
        noise_sigma: scn.plant.noise_sigma,
    };
    plant.validate().map_err(|e| HarnessError::Scenario(e.to_string()))?;
    let theta_init = match (scn.sysid.initial_theta, mode) {
        (ThetaInit::Plant, PlantMode::Perfect1r1c { theta }) => theta,
        _ => setup.theta0,
    };
    if !setup.bounds.contains(&theta_init) {
        return Err(HarnessError::Scenario(format!(
            "initial parameters {theta_init:?} outside the identification bounds"
        )));
    }
    Ok(Prepared {
        setup,
        forecasts,
        plant,
        theta_init,
        steps,
    })
}

fn copy_series(from: &TimeSeriesStore, to: &mut TimeSeriesStore, ids: &[&str]) -> Result<(), ForecastError> {
    for id in ids {
        let s = from.get(id)?;
        let start = s.start().expect("synthetic series is non-empty");
        to.create(id, &s.unit, s.step_seconds())?;
        let vals = from.read(id, start, s.end().unwrap())?;
        to.write(id, &vals)?;
    }
    Ok(())
}

/// Runs the scenario's controller in closed loop.
pub fn run_closed_loop(scn: &Scenario, base: &Path) -> Result<RunOutput, HarnessError> {
    let prep = prepare(scn, base)?;
    run_prepared(scn, &prep)
}

pub fn run_prepared(scn: &Scenario, prep: &Prepared) -> Result<RunOutput, HarnessError> {
    let setup = &prep.setup;
    let h = setup.hyper;
    let dt = h.dt;
    let step_len = Duration::seconds(dt.round() as i64);
    let t0 = celsius_to_kelvin(scn.plant.initial_temperature_c);
    let mut plant = ReferencePlant::new(prep.plant, PlantState::uniform(t0), scn.seed)
        .map_err(|e| HarnessError::Scenario(e.to_string()))?;
    let mpc_cfg = MpcConfig {
        n_c: h.n_c,
        mu_upper: scn.mpc.mu_upper,
        mu_lower: scn.mpc.mu_lower,
        dt,
    };
    mpc_cfg.validate().map_err(|e| HarnessError::Scenario(e.to_string()))?;
    if let Some(p) = prep.forecasts.max_price() {
        mpc_cfg
            .check_penalty_ratio(&setup.hvac, p)
            .map_err(|e| HarnessError::Scenario(e.to_string()))?;
    }
    let trig_cfg = TriggerConfig::new(h.rho, h.n_t)?;
    let mut trigger = TriggerState::new(trig_cfg);
    let mut si_cfg = SysIdConfig::new(setup.bounds);
    si_cfg.forgetting = scn.sysid.forgetting;
    si_cfg.multistart = scn.sysid.multistart;
    si_cfg.max_iterations = scn.sysid.max_iterations;
    si_cfg.seed = scn.seed ^ 0x5eed;
    si_cfg.validate().map_err(|e| HarnessError::Scenario(e.to_string()))?;

    let mut theta = prep.theta_init;
    let mut records: Vec<Record> = Vec::with_capacity(prep.steps);
    let mut trace = Vec::with_capacity(prep.steps);
    let mut m = LoopMetrics {
        scenario: scn.name.clone(),
        fingerprint: scn.fingerprint(),
        controller: scn.controller,
        steps: prep.steps,
        dt,
        warmup_steps: h.n_s,
        total_cost: 0.0,
        comfort_violation_kh: 0.0,
        total_cost_after_warmup: 0.0,
        comfort_violation_kh_after_warmup: 0.0,
        max_violation_k: 0.0,
        energy_kwh: 0.0,
        si_eligible_steps: 0,
        trigger_fires: 0,
        si_activations: 0,
        si_failures: 0,
        si_saved_fraction: 0.0,
        mpc_solves: 0,
        mpc_fallbacks: 0,
        final_theta: theta,
    };
    let sim_err = |step: usize| move |source: ThermalError| HarnessError::Simulation { step, source };

    for k in 0..prep.steps {
        let t = scn.start + step_len * k as i32;
        let y = plant.measure();
        let t_true = plant.state().t_zone;
        let identifying = scn.controller == ControllerKind::Mpc;
        if let (true, Some(prev)) = (identifying, records.last()) {
            let pred =
                step_rc(prev.t_zone, &prev.u, &prev.e, &theta, &setup.geom, &setup.hvac, dt).map_err(sim_err(k))?;
            trigger.push(y - pred)?;
        }

        let mut rmse = None;
        let mut gamma = false;
        let mut si_ran = false;
        if trigger.is_full() {
            let (r, g) = trigger.decide()?;
            rmse = Some(r);
            gamma = g;
        }
        if identifying && k >= h.n_s {
            m.si_eligible_steps += 1;
            m.trigger_fires += gamma as usize;
            if gamma && scn.sysid.enabled {
                let last = records[k - 1];
                let mut window: Vec<Record> = records[k - h.n_s..k].to_vec();
                window.push(Record {
                    t_zone: y,
                    u: last.u,
                    e: last.e,
                });
                let w = TrainingWindow::new(window, dt).map_err(|e| HarnessError::Scenario(e.to_string()))?;
                match fit(&w, &theta, &si_cfg, &setup.geom, &setup.hvac) {
                    Ok(rep) => {
                        theta = rep.theta;
                        si_ran = true;
                        m.si_activations += 1;
                        let res = sysid::residuals(&w, &theta, &setup.geom, &setup.hvac)
                            .map_err(|e| HarnessError::Scenario(e.to_string()))?;
                        trigger.refill(&res)?;
                    }
                    Err(_) => m.si_failures += 1,
                }
            }
        }

        let band = comfort_bounds(t, &setup.schedule);
        let fallback_action = || rbc_step(y, t, &setup.schedule, &scn.rbc);
        let (u, fallback, lp_iterations) = match scn.controller {
            ControllerKind::Rbc => (fallback_action(), false, 0),
            ControllerKind::Mpc => {
                m.mpc_solves += 1;
                let result = prep
                    .forecasts
                    .get_forecast(t, h.n_c)
                    .map_err(|_| MpcError::ForecastGap { have: 0, need: h.n_c })
                    .and_then(|f| build_problem(y, &theta, &f, t, &setup.schedule, &setup.hvac, &setup.geom, &mpc_cfg))
                    .and_then(|p| mpc::solve(&p, &mpc_cfg));
                let iters = result.as_ref().map_or(0, |s| s.iterations);
                let fell_back = result.is_err();
                m.mpc_fallbacks += fell_back as usize;
                (mpc::action_or_fallback(&result, fallback_action), fell_back, iters)
            }
        };

        let e = prep.forecasts.realized(t)?;
        let next = plant.step(&u, &e, dt).map_err(sim_err(k))?;
        let cost = electrical_cost_rate(&u, &setup.hvac, e.price) * dt / 3600.0;
        let end_band = comfort_bounds(t + step_len, &setup.schedule);
        let viol = end_band.violation(next.t_zone);
        let viol_kh = viol * dt / 3600.0;
        m.total_cost += cost;
        m.comfort_violation_kh += viol_kh;
        m.max_violation_k = m.max_violation_k.max(viol);
        m.energy_kwh += electrical_cost_rate(&u, &setup.hvac, 1.0) * dt / 3600.0;
        if k >= h.n_s {
            m.total_cost_after_warmup += cost;
            m.comfort_violation_kh_after_warmup += viol_kh;
        }

        trace.push(TraceRow {
            step: k,
            time: t.format("%Y-%m-%d %H:%M:%S").to_string(),
            t_zone: t_true,
            t_meas: y,
            t_min: band.t_min,
            t_max: band.t_max,
            u_cc: u.0[0],
            u_hc: u.0[1],
            u_rc: u.0[2],
            u_rad: u.0[3],
            q_hvac: hvac_power(&u, &setup.hvac),
            t_amb: e.t_amb,
            h_glo: e.h_glo,
            q_int: e.q_int,
            price: e.price,
            occupied: e.occupied,
            rmse,
            gamma,
            si_ran,
            c_z: theta.c_z,
            r_w: theta.r_w,
            alpha: theta.alpha,
            cost,
            violation_kh: viol_kh,
            fallback,
            lp_iterations,
        });
        records.push(Record { t_zone: y, u, e });
    }
    m.final_theta = theta;
    m.si_saved_fraction = if m.si_eligible_steps > 0 {
        1.0 - m.si_activations as f64 / m.si_eligible_steps as f64
    } else {
        0.0
    };
    Ok(RunOutput { metrics: m, trace })
}

/// Writes `trace.csv` and `metrics.json` into `dir`.
pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<(), HarnessError> {
    let err = |e: &dyn std::fmt::Display| HarnessError::Output(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(|e| err(&e))?;
    let mut w = csv::Writer::from_path(dir.join("trace.csv")).map_err(|e| err(&e))?;
    for row in &out.trace {
        w.serialize(row).map_err(|e| err(&e))?;
    }
    w.flush().map_err(|e| err(&e))?;
    let json = serde_json::to_string_pretty(&out.metrics).map_err(|e| err(&e))?;
    std::fs::write(dir.join("metrics.json"), json + "\n").map_err(|e| err(&e))?;
    Ok(())
}

pub fn read_metrics(dir: &Path) -> Result<LoopMetrics, HarnessError> {
    let path = if dir.is_dir() {
        dir.join("metrics.json")
    } else {
        dir.to_path_buf()
    };
    let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))
}
