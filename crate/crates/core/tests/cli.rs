use std::path::Path;
use std::process::{Command, Output};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");

fn semmpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_semmpc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_scenario(dir: &Path) -> String {
    let p = dir.join("short.toml");
    std::fs::write(&p, "name = \"short\"\ndays = 2\n[overrides]\nn_s = 288\nn_t = 144\n").unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn query_prints_rows() {
    let ttl = format!("{FIXTURES}/bestest_case600.ttl");
    let o = semmpc(&[
        "query",
        "--graph",
        &ttl,
        "--pattern",
        &format!("{FIXTURES}/zone_sensors.rq"),
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "?property\t?quantity\t?id");
    assert_eq!(lines.len(), 5);
    assert!(out.contains("TR21"));
    assert_eq!(String::from_utf8_lossy(&o.stderr).trim(), "4 row(s)");

    let o = semmpc(&[
        "query",
        "--graph",
        &ttl,
        "--pattern",
        &format!("{FIXTURES}/forecasts.rq"),
    ]);
    assert_eq!(stdout(&o).lines().count(), 4);
}

#[test]
fn derive_prints_setup() {
    let o = semmpc(&["derive", "--graph", &format!("{FIXTURES}/bestest_case600.ttl")]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["theta0"]["alpha"], 4.2);
    assert_eq!(v["hyper"]["n_c"], 96);
}

#[test]
fn bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = semmpc(&["derive", "--graph", "/nonexistent.ttl"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "days = 3\nbogus = 1\n").unwrap();
    let o = semmpc(&[
        "run",
        "--scenario",
        bad.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = semmpc(&["lp", "--at", "not a time"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn lp_dump_is_written() {
    let o = semmpc(&["lp", "--at", "2018-07-03 10:00:00", "--t0", "26.0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(
        text.starts_with("\\") || text.contains("Minimize"),
        "{}",
        &text[..text.len().min(200)]
    );
    assert!(text.contains("Subject To"));
    assert!(text.trim_end().ends_with("End"));
}

#[test]
fn run_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_scenario(dir.path());
    let mpc = dir.path().join("mpc");
    let rbc = dir.path().join("rbc");
    for (c, out) in [("mpc", &mpc), ("rbc", &rbc)] {
        let o = semmpc(&[
            "run",
            "--scenario",
            &scn,
            "--controller",
            c,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(
            stdout(&o).starts_with(&format!("short {c}: 576 steps")),
            "{}",
            stdout(&o)
        );
        assert!(out.join("trace.csv").exists());
    }
    let trace = std::fs::read_to_string(mpc.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 577);

    let a = mpc.join("metrics.json");
    let b = rbc.join("metrics.json");
    let o = semmpc(&["compare", "--a", a.to_str().unwrap(), "--b", b.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("cost reduction"));
    assert!(text.lines().nth(2).unwrap().starts_with("rbc"));

    let o = semmpc(&[
        "compare",
        "--a",
        a.to_str().unwrap(),
        "--b",
        b.to_str().unwrap(),
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["baseline"]["controller"], "rbc");
}

#[test]
fn compare_rejects_different_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let scn = write_scenario(dir.path());
    let other = dir.path().join("other.toml");
    std::fs::write(&other, "name = \"short\"\ndays = 1\ncontroller = \"rbc\"\n").unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(semmpc(&[
        "run",
        "--scenario",
        &scn,
        "--controller",
        "rbc",
        "--out",
        a.to_str().unwrap()
    ])
    .status
    .success());
    assert!(semmpc(&[
        "run",
        "--scenario",
        other.to_str().unwrap(),
        "--out",
        b.to_str().unwrap()
    ])
    .status
    .success());
    let o = semmpc(&[
        "compare",
        "--a",
        a.join("metrics.json").to_str().unwrap(),
        "--b",
        b.join("metrics.json").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}
