use std::ffi::{CStr, CString};
use std::ptr;

use semmpc_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(semmpc_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn bestest() -> (*mut SemmpcGraph, *mut SemmpcSetup) {
    let mut g = ptr::null_mut();
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(semmpc_graph_bestest(&mut g), SemmpcStatus::Ok);
        assert_eq!(semmpc_setup_derive(g, ptr::null(), &mut s), SemmpcStatus::Ok);
    }
    (g, s)
}

#[test]
fn derive_through_handles() {
    let (g, s) = bestest();
    unsafe {
        let mut n = 0;
        assert_eq!(semmpc_graph_len(g, &mut n), SemmpcStatus::Ok);
        assert!(n > 100);

        let mut th = SemmpcTheta {
            c_z: 0.0,
            r_w: 0.0,
            alpha: 0.0,
        };
        let mut lo = th;
        let mut hi = th;
        assert_eq!(semmpc_setup_theta0(s, &mut th, &mut lo, &mut hi), SemmpcStatus::Ok);
        assert_eq!(th.alpha, 4.2);
        assert_eq!(lo.c_z, 0.1 * th.c_z);
        assert_eq!(hi.r_w, 10.0 * th.r_w);

        let mut q = [0.0; 4];
        let mut gamma = [0.0; 4];
        assert_eq!(
            semmpc_setup_hvac(s, q.as_mut_ptr(), gamma.as_mut_ptr()),
            SemmpcStatus::Ok
        );
        assert_eq!(q, [-1814.0, 1477.0, 261.0, 2787.0]);
        assert_eq!(gamma, [2.7, 0.8, 0.8, 0.9]);

        let mut h = SemmpcHyper {
            dt: 0.0,
            n_c: 0,
            n_t: 0,
            n_s: 0,
            rho: 0.0,
        };
        assert_eq!(semmpc_setup_hyper(s, &mut h), SemmpcStatus::Ok);
        assert_eq!((h.dt, h.n_c, h.n_t, h.n_s, h.rho), (300.0, 96, 288, 2016, 0.1));

        let mut json = ptr::null_mut();
        assert_eq!(semmpc_setup_to_json(s, &mut json), SemmpcStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        semmpc_string_free(json);
        assert!(text.contains("BESTEST_case600"));

        semmpc_setup_free(s);
        semmpc_graph_free(g);
    }
}

#[test]
fn query_counts() {
    let (g, s) = bestest();
    let q = CString::new("SELECT ?f ?file WHERE { ?f seas:hasFilePath ?file . }").unwrap();
    let mut n = 0;
    unsafe {
        assert_eq!(semmpc_graph_query_count(g, q.as_ptr(), &mut n), SemmpcStatus::Ok);
        assert_eq!(n, 3);
        let bad = CString::new("SELECT ?x WHERE { ?x nope:p ?y . }").unwrap();
        assert_eq!(semmpc_graph_query_count(g, bad.as_ptr(), &mut n), SemmpcStatus::Parse);
        assert!(last_error().contains("nope"), "{}", last_error());
        semmpc_setup_free(s);
        semmpc_graph_free(g);
    }
}

#[test]
fn model_step_and_power() {
    let (g, s) = bestest();
    unsafe {
        let mut th = SemmpcTheta {
            c_z: 0.0,
            r_w: 0.0,
            alpha: 0.0,
        };
        semmpc_setup_theta0(s, &mut th, ptr::null_mut(), ptr::null_mut());
        let u = [1.0, 0.0, 0.0, 0.0];
        let mut p = 0.0;
        assert_eq!(semmpc_hvac_power(s, u.as_ptr(), &mut p), SemmpcStatus::Ok);
        assert!((p + 2.7 * 1814.0).abs() < 1e-9);

        // No gains, no HVAC: relaxes toward ambient by exp(-dt/RC).
        let e = SemmpcDisturbance {
            t_amb: 290.0,
            h_glo: 0.0,
            q_int: 0.0,
            price: 0.1,
            occupied: false,
        };
        let zero = [0.0; 4];
        let mut t = 0.0;
        assert_eq!(
            semmpc_step_rc(s, &th, 300.0, zero.as_ptr(), &e, 300.0, &mut t),
            SemmpcStatus::Ok
        );
        let a = (-300.0 / (th.r_w * th.c_z)).exp();
        assert!((t - (290.0 + a * 10.0)).abs() < 1e-9);

        let over = [1.5, 0.0, 0.0, 0.0];
        assert_eq!(
            semmpc_step_rc(s, &th, 300.0, over.as_ptr(), &e, 300.0, &mut t),
            SemmpcStatus::InvalidArgument
        );
        semmpc_setup_free(s);
        semmpc_graph_free(g);
    }
}

#[test]
fn mpc_idle_when_comfortable() {
    let (g, s) = bestest();
    unsafe {
        let mut th = SemmpcTheta {
            c_z: 0.0,
            r_w: 0.0,
            alpha: 0.0,
        };
        semmpc_setup_theta0(s, &mut th, ptr::null_mut(), ptr::null_mut());
        // Tuesday 2018-07-03 10:00, mild weather, zone at 24 °C.
        let start = 1_530_612_000;
        let f = vec![
            SemmpcDisturbance {
                t_amb: 295.15,
                h_glo: 0.0,
                q_int: 1.0,
                price: 0.2,
                occupied: true
            };
            12
        ];
        let mut u = [9.0; 4];
        let mut obj = -1.0;
        let st = semmpc_mpc_first_action(
            s,
            &th,
            297.15,
            start,
            f.as_ptr(),
            f.len(),
            1000.0,
            u.as_mut_ptr(),
            &mut obj,
        );
        assert_eq!(st, SemmpcStatus::Ok, "{}", last_error());
        assert_eq!(u, [0.0; 4]);
        assert!(obj.abs() < 1e-9);

        // Too hot: the first action cools.
        let st = semmpc_mpc_first_action(
            s,
            &th,
            301.15,
            start,
            f.as_ptr(),
            f.len(),
            1000.0,
            u.as_mut_ptr(),
            ptr::null_mut(),
        );
        assert_eq!(st, SemmpcStatus::Ok);
        assert!(u[0] > 0.0);
        semmpc_setup_free(s);
        semmpc_graph_free(g);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(semmpc_graph_parse(ptr::null(), &mut g), SemmpcStatus::NullPointer);
        assert!(g.is_null());
        let bad = CString::new("@prefix ex: <http://e/> .\nex:a ex:b .\n").unwrap();
        assert_eq!(semmpc_graph_parse(bad.as_ptr(), &mut g), SemmpcStatus::Parse);
        assert!(last_error().contains("line 2"), "{}", last_error());

        let empty = CString::new("@prefix ex: <http://e/> .\nex:a ex:b ex:c .\n").unwrap();
        assert_eq!(semmpc_graph_parse(empty.as_ptr(), &mut g), SemmpcStatus::Ok);
        assert_eq!(last_error(), "");
        let mut s = ptr::null_mut();
        assert_eq!(semmpc_setup_derive(g, ptr::null(), &mut s), SemmpcStatus::Derive);
        assert!(s.is_null());
        semmpc_graph_free(g);

        let path = CString::new("/nonexistent/model.ttl").unwrap();
        assert_eq!(semmpc_graph_load(path.as_ptr(), &mut g), SemmpcStatus::Io);
        semmpc_graph_free(ptr::null_mut());
        semmpc_setup_free(ptr::null_mut());
    }
}

#[test]
fn short_scenario_runs() {
    let toml = CString::new("days = 2\ncontroller = \"rbc\"\n").unwrap();
    let mut m = SemmpcMetrics {
        steps: 0,
        total_cost: 0.0,
        comfort_violation_kh: 0.0,
        energy_kwh: 0.0,
        si_eligible_steps: 0,
        si_activations: 0,
        mpc_fallbacks: 0,
        final_theta: SemmpcTheta {
            c_z: 0.0,
            r_w: 0.0,
            alpha: 0.0,
        },
    };
    unsafe {
        let st = semmpc_run_scenario(toml.as_ptr(), ptr::null(), ptr::null(), &mut m);
        assert_eq!(st, SemmpcStatus::Ok, "{}", last_error());
        assert_eq!(m.steps, 576);
        assert!(m.total_cost >= 0.0);
        let bad = CString::new("days = 0").unwrap();
        assert_eq!(
            semmpc_run_scenario(bad.as_ptr(), ptr::null(), ptr::null(), &mut m),
            SemmpcStatus::InvalidArgument
        );
    }
}

#[test]
fn header_declares_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/semmpc.h")).unwrap();
    for sym in [
        "semmpc_graph_parse",
        "semmpc_setup_derive",
        "semmpc_mpc_first_action",
        "semmpc_run_scenario",
        "typedef struct SemmpcGraph SemmpcGraph",
        "SEMMPC_STATUS_OK",
    ] {
        assert!(h.contains(sym), "header lacks {sym}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = std::process::Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(cc.status.success());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"semmpc.h\"\nint main(void) { SemmpcGraph *g = 0; return semmpc_graph_bestest(&g) == SEMMPC_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let out = std::process::Command::new("cc")
        .args([
            "-std=c99",
            "-Wall",
            "-Werror",
            "-fsyntax-only",
            "-I",
            concat!(env!("CARGO_MANIFEST_DIR"), "/include"),
        ])
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
