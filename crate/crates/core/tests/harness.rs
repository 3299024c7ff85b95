use std::path::Path;

use semmpc::harness::{read_metrics, run_closed_loop, write_outputs, ControllerKind, Scenario};

const SCENARIOS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios");

fn short(controller: ControllerKind) -> Scenario {
    let mut s = Scenario {
        name: "short".into(),
        days: 3,
        controller,
        ..Scenario::default()
    };
    s.overrides.n_s = Some(288);
    s.overrides.n_t = Some(144);
    s
}

#[test]
fn bundled_scenario_matches_defaults() {
    let s = Scenario::load(&Path::new(SCENARIOS).join("july2018.toml")).unwrap();
    assert_eq!(s, Scenario::default());
}

#[test]
fn quiescence_scenario_loads() {
    let s = Scenario::load(&Path::new(SCENARIOS).join("quiescence.toml")).unwrap();
    assert_eq!(s.plant.noise_sigma, 0.0);
    assert_eq!(s.days, 10);
}

#[test]
fn runs_are_deterministic() {
    let a = run_closed_loop(&short(ControllerKind::Mpc), Path::new(".")).unwrap();
    let b = run_closed_loop(&short(ControllerKind::Mpc), Path::new(".")).unwrap();
    assert_eq!(a.metrics, b.metrics);
    assert_eq!(a.trace.len(), b.trace.len());
    assert!(a
        .trace
        .iter()
        .zip(&b.trace)
        .all(|(x, y)| x.t_zone == y.t_zone && x.u_cc == y.u_cc));
}

#[test]
fn seed_changes_noise() {
    let a = run_closed_loop(&short(ControllerKind::Rbc), Path::new(".")).unwrap();
    let mut s = short(ControllerKind::Rbc);
    s.seed += 1;
    let b = run_closed_loop(&s, Path::new(".")).unwrap();
    assert_ne!(a.metrics.fingerprint, b.metrics.fingerprint);
    assert!(a.trace.iter().zip(&b.trace).any(|(x, y)| x.t_meas != y.t_meas));
}

#[test]
fn rbc_never_identifies() {
    let r = run_closed_loop(&short(ControllerKind::Rbc), Path::new(".")).unwrap();
    assert_eq!(r.metrics.si_eligible_steps, 0);
    assert_eq!(r.metrics.si_activations, 0);
    assert_eq!(r.metrics.mpc_solves, 0);
}

#[test]
fn mpc_run_is_consistent() {
    let r = run_closed_loop(&short(ControllerKind::Mpc), Path::new(".")).unwrap();
    let m = &r.metrics;
    assert_eq!(m.steps, 864);
    assert_eq!(r.trace.len(), m.steps);
    assert_eq!(m.mpc_solves + m.mpc_fallbacks, m.steps);
    assert_eq!(m.si_eligible_steps, m.steps - 288);
    assert_eq!(m.si_activations, r.trace.iter().filter(|t| t.si_ran).count());
    let cost: f64 = r.trace.iter().map(|t| t.cost).sum();
    assert!((cost - m.total_cost).abs() < 1e-9 * (1.0 + cost));
    let viol: f64 = r.trace.iter().map(|t| t.violation_kh).sum();
    assert!((viol - m.comfort_violation_kh).abs() < 1e-9 * (1.0 + viol));
}

#[test]
fn metrics_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_closed_loop(
        &Scenario {
            days: 1,
            controller: ControllerKind::Rbc,
            ..Scenario::default()
        },
        Path::new("."),
    )
    .unwrap();
    write_outputs(&r, dir.path()).unwrap();
    assert_eq!(read_metrics(&dir.path().join("metrics.json")).unwrap(), r.metrics);
}
