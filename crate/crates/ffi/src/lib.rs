//! C ABI over the `semmpc` controller.
//!
//! Graphs and derived setups are opaque heap handles released with their
//! `_free` function. Every call returns a [`SemmpcStatus`]; on failure the
//! message is kept per thread and read with [`semmpc_last_error`].
//! Panics are caught at the boundary and reported as
//! `SEMMPC_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use semmpc::derive::{self, ControllerSetup};
use semmpc::graph::{parse_query, Graph};
use semmpc::harness::{self, HarnessError, Scenario};
use semmpc::mpc::{self, MpcConfig};
use semmpc::thermal::{self, ControlVector, Disturbance, RcParams, N_DEVICES};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemmpcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Graph or query text did not parse.
    Parse = 3,
    /// The graph lacks or contradicts something the controller needs.
    Derive = 4,
    /// An argument is out of range.
    InvalidArgument = 5,
    Io = 6,
    Simulation = 7,
    Solver = 8,
    Panic = 9,
}

/// Opaque parsed graph.
pub struct SemmpcGraph(Graph);

/// Opaque controller setup derived from a graph.
pub struct SemmpcSetup(ControllerSetup);

/// RC parameters: capacitance J/K, resistance K/W, solar aperture m².
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemmpcTheta {
    pub c_z: f64,
    pub r_w: f64,
    pub alpha: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemmpcHyper {
    /// s
    pub dt: f64,
    pub n_c: usize,
    pub n_t: usize,
    pub n_s: usize,
    /// K
    pub rho: f64,
}

/// One step of exogenous inputs. Temperatures in K.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemmpcDisturbance {
    pub t_amb: f64,
    /// W/m²
    pub h_glo: f64,
    /// W/m²
    pub q_int: f64,
    /// currency per kWh
    pub price: f64,
    pub occupied: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemmpcMetrics {
    pub steps: usize,
    pub total_cost: f64,
    pub comfort_violation_kh: f64,
    pub energy_kwh: f64,
    pub si_eligible_steps: usize,
    pub si_activations: usize,
    pub mpc_fallbacks: usize,
    pub final_theta: SemmpcTheta,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Fail(SemmpcStatus, String);

type Res<T> = Result<T, Fail>;

fn fail(status: SemmpcStatus, e: impl std::fmt::Display) -> Fail {
    Fail(status, e.to_string())
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Res<()>) -> SemmpcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SemmpcStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            SemmpcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Res<&'a str> {
    if p.is_null() {
        return Err(fail(SemmpcStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| fail(SemmpcStatus::InvalidUtf8, format!("{name}: {e}")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> Res<Option<&'a str>> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(Some)
    }
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Res<&'a T> {
    p.as_ref()
        .ok_or_else(|| fail(SemmpcStatus::NullPointer, format!("{name} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Res<&'a mut T> {
    p.as_mut()
        .ok_or_else(|| fail(SemmpcStatus::NullPointer, format!("{name} is null")))
}

unsafe fn controls(p: *const f64) -> Res<ControlVector> {
    if p.is_null() {
        return Err(fail(SemmpcStatus::NullPointer, "u is null"));
    }
    let mut u = [0.0; N_DEVICES];
    u.copy_from_slice(std::slice::from_raw_parts(p, N_DEVICES));
    ControlVector::new(u).map_err(|e| fail(SemmpcStatus::InvalidArgument, e))
}

fn theta_in(t: &SemmpcTheta) -> Res<RcParams> {
    RcParams::new(t.c_z, t.r_w, t.alpha).map_err(|e| fail(SemmpcStatus::InvalidArgument, e))
}

fn theta_out(t: &RcParams) -> SemmpcTheta {
    SemmpcTheta {
        c_z: t.c_z,
        r_w: t.r_w,
        alpha: t.alpha,
    }
}

fn disturbance(d: &SemmpcDisturbance) -> Disturbance {
    Disturbance {
        t_amb: d.t_amb,
        h_glo: d.h_glo,
        q_int: d.q_int,
        price: d.price,
        occupied: d.occupied,
    }
}

fn harness_status(e: &HarnessError) -> SemmpcStatus {
    match e {
        HarnessError::Simulation { .. } | HarnessError::Trigger(_) => SemmpcStatus::Simulation,
        HarnessError::Output(_) | HarnessError::Input(_) => SemmpcStatus::Io,
        HarnessError::Graph(_) => SemmpcStatus::Parse,
        HarnessError::Derive(_) => SemmpcStatus::Derive,
        _ => SemmpcStatus::InvalidArgument,
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn semmpc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn semmpc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a Turtle document.
#[no_mangle]
pub unsafe extern "C" fn semmpc_graph_parse(text: *const c_char, out: *mut *mut SemmpcGraph) -> SemmpcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let g = Graph::parse(str_arg(text, "text")?).map_err(|e| fail(SemmpcStatus::Parse, e))?;
        *out = Box::into_raw(Box::new(SemmpcGraph(g)));
        Ok(())
    })
}

/// Reads and parses a Turtle file.
#[no_mangle]
pub unsafe extern "C" fn semmpc_graph_load(path: *const c_char, out: *mut *mut SemmpcGraph) -> SemmpcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let text = std::fs::read_to_string(path).map_err(|e| fail(SemmpcStatus::Io, format!("{path}: {e}")))?;
        let g = Graph::parse(&text).map_err(|e| fail(SemmpcStatus::Parse, e))?;
        *out = Box::into_raw(Box::new(SemmpcGraph(g)));
        Ok(())
    })
}

/// The bundled office test zone model.
#[no_mangle]
pub unsafe extern "C" fn semmpc_graph_bestest(out: *mut *mut SemmpcGraph) -> SemmpcStatus {
    guard(|| {
        *out_arg(out, "out")? = Box::into_raw(Box::new(SemmpcGraph(derive::bestest_graph())));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn semmpc_graph_free(g: *mut SemmpcGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of distinct triples.
#[no_mangle]
pub unsafe extern "C" fn semmpc_graph_len(g: *const SemmpcGraph, out: *mut usize) -> SemmpcStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(g, "graph")?.0.len();
        Ok(())
    })
}

/// Number of solution rows of a SELECT query. The graph's prefixes are in
/// scope.
#[no_mangle]
pub unsafe extern "C" fn semmpc_graph_query_count(
    g: *const SemmpcGraph,
    query: *const c_char,
    out: *mut usize,
) -> SemmpcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let g = &ref_arg(g, "graph")?.0;
        let q = parse_query(str_arg(query, "query")?, g.prefixes()).map_err(|e| fail(SemmpcStatus::Parse, e))?;
        *out = g.query(&q).map_err(|e| fail(SemmpcStatus::Parse, e))?.len();
        Ok(())
    })
}

/// Derives the controller setup. `zone` may be null when the graph holds a
/// single zone.
#[no_mangle]
pub unsafe extern "C" fn semmpc_setup_derive(
    g: *const SemmpcGraph,
    zone: *const c_char,
    out: *mut *mut SemmpcSetup,
) -> SemmpcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let g = &ref_arg(g, "graph")?.0;
        let s = derive::derive_setup(g, opt_str_arg(zone, "zone")?).map_err(|e| fail(SemmpcStatus::Derive, e))?;
        *out = Box::into_raw(Box::new(SemmpcSetup(s)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn semmpc_setup_free(s: *mut SemmpcSetup) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Initial parameter guess and its box bounds. `lower` and `upper` may be
/// null.
#[no_mangle]
pub unsafe extern "C" fn semmpc_setup_theta0(
    s: *const SemmpcSetup,
    theta0: *mut SemmpcTheta,
    lower: *mut SemmpcTheta,
    upper: *mut SemmpcTheta,
) -> SemmpcStatus {
    guard(|| {
        let s = &ref_arg(s, "setup")?.0;
        *out_arg(theta0, "theta0")? = theta_out(&s.theta0);
        if let Some(l) = lower.as_mut() {
            *l = theta_out(&s.bounds.lower);
        }
        if let Some(u) = upper.as_mut() {
            *u = theta_out(&s.bounds.upper);
        }
        Ok(())
    })
}

/// Nominal powers (W, cooling negative) and efficiencies, four entries each
/// in the order cooling coil, heating coil, reheat coil, radiator.
#[no_mangle]
pub unsafe extern "C" fn semmpc_setup_hvac(s: *const SemmpcSetup, q_max: *mut f64, gamma: *mut f64) -> SemmpcStatus {
    guard(|| {
        let s = &ref_arg(s, "setup")?.0;
        if q_max.is_null() || gamma.is_null() {
            return Err(fail(SemmpcStatus::NullPointer, "q_max and gamma must be non-null"));
        }
        std::slice::from_raw_parts_mut(q_max, N_DEVICES).copy_from_slice(&s.hvac.q_max);
        std::slice::from_raw_parts_mut(gamma, N_DEVICES).copy_from_slice(&s.hvac.gamma);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn semmpc_setup_hyper(s: *const SemmpcSetup, out: *mut SemmpcHyper) -> SemmpcStatus {
    guard(|| {
        let h = ref_arg(s, "setup")?.0.hyper;
        *out_arg(out, "out")? = SemmpcHyper {
            dt: h.dt,
            n_c: h.n_c,
            n_t: h.n_t,
            n_s: h.n_s,
            rho: h.rho,
        };
        Ok(())
    })
}

/// The whole setup as JSON; release with [`semmpc_string_free`].
#[no_mangle]
pub unsafe extern "C" fn semmpc_setup_to_json(s: *const SemmpcSetup, out: *mut *mut c_char) -> SemmpcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let json = serde_json::to_string(&ref_arg(s, "setup")?.0).map_err(|e| fail(SemmpcStatus::Io, e))?;
        *out = CString::new(json).map_err(|e| fail(SemmpcStatus::Io, e))?.into_raw();
        Ok(())
    })
}

/// Net thermal HVAC power for controls `u[4]`, W.
#[no_mangle]
pub unsafe extern "C" fn semmpc_hvac_power(s: *const SemmpcSetup, u: *const f64, out: *mut f64) -> SemmpcStatus {
    guard(|| {
        let s = &ref_arg(s, "setup")?.0;
        *out_arg(out, "out")? = thermal::hvac_power(&controls(u)?, &s.hvac);
        Ok(())
    })
}

/// Advances the 1R1C model by `dt` seconds from `t_zone` (K).
#[no_mangle]
pub unsafe extern "C" fn semmpc_step_rc(
    s: *const SemmpcSetup,
    theta: *const SemmpcTheta,
    t_zone: f64,
    u: *const f64,
    e: *const SemmpcDisturbance,
    dt: f64,
    out: *mut f64,
) -> SemmpcStatus {
    guard(|| {
        let s = &ref_arg(s, "setup")?.0;
        let th = theta_in(ref_arg(theta, "theta")?)?;
        let e = disturbance(ref_arg(e, "disturbance")?);
        *out_arg(out, "out")? = thermal::step_rc(t_zone, &controls(u)?, &e, &th, &s.geom, &s.hvac, dt)
            .map_err(|e| fail(SemmpcStatus::InvalidArgument, e))?;
        Ok(())
    })
}

/// Solves the MPC problem over the `n` forecast steps starting at `start`
/// (seconds since 1970-01-01 00:00 on the building's local clock) and
/// writes the first control vector to `u_out[4]`. `objective` may be null.
#[no_mangle]
pub unsafe extern "C" fn semmpc_mpc_first_action(
    s: *const SemmpcSetup,
    theta: *const SemmpcTheta,
    t_zone: f64,
    start: i64,
    forecast: *const SemmpcDisturbance,
    n: usize,
    mu: f64,
    u_out: *mut f64,
    objective: *mut f64,
) -> SemmpcStatus {
    guard(|| {
        let s = &ref_arg(s, "setup")?.0;
        let th = theta_in(ref_arg(theta, "theta")?)?;
        if forecast.is_null() || u_out.is_null() {
            return Err(fail(SemmpcStatus::NullPointer, "forecast and u_out must be non-null"));
        }
        let f: Vec<Disturbance> = std::slice::from_raw_parts(forecast, n)
            .iter()
            .map(disturbance)
            .collect();
        let start = chrono::DateTime::from_timestamp(start, 0)
            .ok_or_else(|| fail(SemmpcStatus::InvalidArgument, format!("start {start} out of range")))?
            .naive_utc();
        let cfg = MpcConfig {
            n_c: n,
            mu_upper: mu,
            mu_lower: mu,
            dt: s.hyper.dt,
        };
        let p = mpc::build_problem(t_zone, &th, &f, start, &s.schedule, &s.hvac, &s.geom, &cfg)
            .map_err(|e| fail(SemmpcStatus::InvalidArgument, e))?;
        let sol = mpc::solve(&p, &cfg).map_err(|e| fail(SemmpcStatus::Solver, e))?;
        std::slice::from_raw_parts_mut(u_out, N_DEVICES).copy_from_slice(&mpc::receding_action(&sol).0);
        if let Some(o) = objective.as_mut() {
            *o = sol.objective;
        }
        Ok(())
    })
}

/// Runs a closed-loop scenario given as TOML text. Relative paths in the
/// scenario resolve against `base_dir` (null for the working directory).
/// When `out_dir` is non-null, `trace.csv` and `metrics.json` are written
/// there.
#[no_mangle]
pub unsafe extern "C" fn semmpc_run_scenario(
    scenario_toml: *const c_char,
    base_dir: *const c_char,
    out_dir: *const c_char,
    metrics: *mut SemmpcMetrics,
) -> SemmpcStatus {
    guard(|| {
        let m_out = out_arg(metrics, "metrics")?;
        let scn =
            Scenario::from_toml(str_arg(scenario_toml, "scenario_toml")?).map_err(|e| fail(harness_status(&e), e))?;
        let base = PathBuf::from(opt_str_arg(base_dir, "base_dir")?.unwrap_or("."));
        let run = harness::run_closed_loop(&scn, &base).map_err(|e| fail(harness_status(&e), e))?;
        if let Some(dir) = opt_str_arg(out_dir, "out_dir")? {
            harness::write_outputs(&run, dir.as_ref()).map_err(|e| fail(harness_status(&e), e))?;
        }
        let m = &run.metrics;
        *m_out = SemmpcMetrics {
            steps: m.steps,
            total_cost: m.total_cost,
            comfort_violation_kh: m.comfort_violation_kh,
            energy_kwh: m.energy_kwh,
            si_eligible_steps: m.si_eligible_steps,
            si_activations: m.si_activations,
            mpc_fallbacks: m.mpc_fallbacks,
            final_theta: theta_out(&m.final_theta),
        };
        Ok(())
    })
}
