use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use chrono::NaiveDateTime;
use clap::{Parser, Subcommand, ValueEnum};

use semmpc::derive::derive_setup;
use semmpc::forecast::ingest::parse_timestamp;
use semmpc::graph::{parse_query, Graph};
use semmpc::harness::{self, compare, read_metrics, ControllerKind, HarnessError, Scenario};
use semmpc::mpc::{build_problem, write_lp_file, MpcConfig};
use semmpc::thermal::celsius_to_kelvin;

#[derive(Parser)]
#[command(
    name = "semmpc",
    version,
    about = "Graph-configured economic MPC for a single HVAC zone"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Controller {
    Mpc,
    Rbc,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a closed-loop scenario and write trace.csv and metrics.json.
    Run {
        /// Scenario TOML; the default July scenario if omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Override the scenario's controller.
        #[arg(long, value_enum)]
        controller: Option<Controller>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two runs of the same scenario.
    Compare {
        /// Run directory or metrics.json.
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Derive the controller setup from a graph and print it as JSON.
    Derive {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        zone: Option<String>,
    },
    /// Evaluate a SELECT query against a graph; one tab-separated row per
    /// binding.
    Query {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        pattern: PathBuf,
    },
    /// Write the MPC linear program for one instant in LP file format.
    Lp {
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Start of the horizon, e.g. "2018-07-03 10:00:00".
        #[arg(long)]
        at: String,
        /// Measured zone temperature, °C.
        #[arg(long, default_value_t = 24.0)]
        t0: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure {
            code: e.exit_code() as u8,
            msg: e.to_string(),
        }
    }
}

fn input(msg: impl std::fmt::Display) -> Failure {
    Failure {
        code: 2,
        msg: msg.to_string(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn load_scenario(path: &Option<PathBuf>) -> Result<(Scenario, PathBuf), Failure> {
    match path {
        Some(p) => {
            let base = p.parent().map(Path::to_path_buf).unwrap_or_default();
            Ok((Scenario::load(p)?, base))
        }
        None => Ok((Scenario::default(), PathBuf::from("."))),
    }
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Run {
            scenario,
            controller,
            out,
        } => {
            let (mut scn, base) = load_scenario(&scenario)?;
            if let Some(c) = controller {
                scn.controller = match c {
                    Controller::Mpc => ControllerKind::Mpc,
                    Controller::Rbc => ControllerKind::Rbc,
                };
            }
            let started = Instant::now();
            let res = harness::run_closed_loop(&scn, &base)?;
            harness::write_outputs(&res, &out)?;
            let m = &res.metrics;
            println!(
                "{} {}: {} steps in {:.1} s, cost {:.3}, violation {:.3} K·h, identification {} of {} eligible steps",
                m.scenario,
                m.controller,
                m.steps,
                started.elapsed().as_secs_f64(),
                m.total_cost,
                m.comfort_violation_kh,
                m.si_activations,
                m.si_eligible_steps
            );
        }
        Cmd::Compare { a, b, json } => {
            let c = compare(&read_metrics(&a)?, &read_metrics(&b)?)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&c).expect("report serializes"));
            } else {
                println!("{c}");
            }
        }
        Cmd::Derive { graph, zone } => {
            let g = Graph::parse(&read(&graph)?).map_err(input)?;
            let setup = derive_setup(&g, zone.as_deref()).map_err(input)?;
            println!("{}", serde_json::to_string_pretty(&setup).expect("setup serializes"));
        }
        Cmd::Query { graph, pattern } => {
            let g = Graph::parse(&read(&graph)?).map_err(input)?;
            let q = parse_query(&read(&pattern)?, g.prefixes()).map_err(input)?;
            let rows = g.query(&q).map_err(input)?;
            let vars: Vec<String> = match &q.select {
                Some(v) => v.clone(),
                None => q.variables().into_iter().collect(),
            };
            println!(
                "{}",
                vars.iter().map(|v| format!("?{v}")).collect::<Vec<_>>().join("\t")
            );
            for r in &rows {
                let cells: Vec<String> = vars
                    .iter()
                    .map(|v| r.get(v).map(|t| g.display_term(t)).unwrap_or_default())
                    .collect();
                println!("{}", cells.join("\t"));
            }
            eprintln!("{} row(s)", rows.len());
        }
        Cmd::Lp { scenario, at, t0, out } => {
            let (scn, base) = load_scenario(&scenario)?;
            let at: NaiveDateTime = parse_timestamp(&at).ok_or_else(|| input(format!("bad timestamp '{at}'")))?;
            let prep = harness::prepare(&scn, &base)?;
            let h = prep.setup.hyper;
            let cfg = MpcConfig {
                n_c: h.n_c,
                mu_upper: scn.mpc.mu_upper,
                mu_lower: scn.mpc.mu_lower,
                dt: h.dt,
            };
            let f = prep.forecasts.get_forecast(at, h.n_c).map_err(input)?;
            let p = build_problem(
                celsius_to_kelvin(t0),
                &prep.theta_init,
                &f,
                at,
                &prep.setup.schedule,
                &prep.setup.hvac,
                &prep.setup.geom,
                &cfg,
            )
            .map_err(input)?;
            let text = write_lp_file(&p, &cfg);
            match out {
                Some(path) => std::fs::write(&path, text).map_err(|e| Failure {
                    code: 3,
                    msg: format!("{}: {e}", path.display()),
                })?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
