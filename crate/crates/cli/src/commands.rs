use std::fs;
use std::path::Path;

use congestio::counterexamples::{family_decelerating, pair_remark, pair_report};
use congestio::duality::{corpus_duality_scenario, frozen_non_solution, sign_flow_scenario, solver_duality};
use congestio::monitors::{
    switching_trend_violation, DiagnosticsRecord, InvariantTolerances, RunReport, SweepRow, SWEEP_SLACK,
};
use congestio::solver::{make_initial, run_with, RunOutput};
use congestio::{Error, Params};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{DualityScenario, Family, RunConfig, SCHEMA_VERSION};

/// Failure of a command, mapped to the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// A check ran and did not pass (exit 1).
    Check(String),
    /// The command could not run: bad config, bad input, I/O (exit 2).
    Usage(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Usage(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::Input(_) => Failure::Usage(e.to_string()),
            _ => Failure::Check(e.to_string()),
        }
    }
}

pub type Outcome = Result<(), Failure>;

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Usage(e.to_string()))?;
    text.push('\n');
    write(dir, name, &text)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn csv_stamp() -> String {
    format!("# schema_version={SCHEMA_VERSION}\n")
}

pub fn diagnostics_csv(records: &[DiagnosticsRecord]) -> String {
    let mut s = csv_stamp();
    s.push_str(&DiagnosticsRecord::csv_header());
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

fn snapshots_json(cfg: &RunConfig, out: &RunOutput) -> Result<Value, Failure> {
    let g = cfg.params.gamma;
    let mut snaps = Vec::new();
    for s in &out.trajectory.snapshots {
        snaps.push(json!({
            "t": s.t,
            "rho": s.rho.values,
            "u": s.u.values,
            "w": s.desired_velocity(g)?.values,
            "pi": s.potential(g)?.values,
        }));
    }
    let x = out.trajectory.initial().rho.centers();
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "params": cfg.params,
        "formulation": cfg.formulation,
        "datum": cfg.datum,
        "x": x,
        "snapshots": snaps,
    }))
}

fn run_config(cfg: &RunConfig, params: &Params) -> Result<RunOutput, Failure> {
    let datum = cfg.datum().map_err(Failure::Usage)?;
    let initial = make_initial(datum, params)?;
    Ok(run_with(
        cfg.formulation,
        &initial,
        params,
        &mut [],
        &cfg.output_times(),
    )?)
}

pub fn simulate(cfg: &RunConfig, dir: &Path) -> Outcome {
    cfg.datum().map_err(Failure::Usage)?;
    let out = match run_config(cfg, &cfg.params) {
        Ok(out) => out,
        Err(Failure::Check(msg)) => {
            let report = json!({
                "schema_version": SCHEMA_VERSION,
                "formulation": cfg.formulation,
                "params": cfg.params,
                "datum": cfg.datum,
                "error": msg,
                "pass": false,
            });
            write_json(dir, "report.json", &report)?;
            return Err(Failure::Check(msg));
        }
        Err(e) => return Err(e),
    };
    let report = RunReport::evaluate(&out, &cfg.params, cfg.formulation, &InvariantTolerances::default());
    write(dir, "diagnostics.csv", &diagnostics_csv(&out.diagnostics))?;
    write_json(dir, "snapshots.json", &snapshots_json(cfg, &out)?)?;
    write_json(
        dir,
        "report.json",
        &json!({
            "schema_version": SCHEMA_VERSION,
            "formulation": cfg.formulation,
            "params": cfg.params,
            "datum": cfg.datum,
            "admissibility": out.tracker.admissibility(),
            "checks": report.checks,
            "pass": report.pass,
        }),
    )?;
    match report.first_failure() {
        None => Ok(()),
        Some(c) => Err(Failure::Check(format!(
            "invariant `{}` failed: measured {:e} > bound {:e}",
            c.name, c.measured, c.bound
        ))),
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = csv_stamp();
    s.push_str(SweepRow::HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

pub fn sweep(cfg: &RunConfig, dir: &Path, workers: usize) -> Outcome {
    let gammas = cfg.gamma_list().map_err(Failure::Usage)?;
    cfg.datum().map_err(Failure::Usage)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let results: Vec<Result<SweepRow, Failure>> = pool.install(|| {
        gammas
            .par_iter()
            .map(|&gamma| {
                let params = Params {
                    gamma,
                    ..cfg.params.clone()
                };
                run_config(cfg, &params).map(|out| SweepRow::from_run(gamma, &out))
            })
            .collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    write(dir, "sweep.csv", &sweep_csv(&rows))?;
    match switching_trend_violation(&rows, SWEEP_SLACK) {
        None => Ok(()),
        Some(k) => Err(Failure::Check(format!(
            "switching residual increases from gamma = {} ({:e}) to gamma = {} ({:e})",
            rows[k - 1].gamma,
            rows[k - 1].switching_l1,
            rows[k].gamma,
            rows[k].switching_l1
        ))),
    }
}

pub fn duality(cfg: &RunConfig, dir: &Path) -> Outcome {
    let scenario = cfg
        .duality
        .as_ref()
        .ok_or_else(|| Failure::Usage("config has no duality scenario".into()))?;
    let (name, report, pass) = match *scenario {
        DualityScenario::SignFlow { intervals } => {
            let r = sign_flow_scenario(intervals)?;
            ("sign_flow", to_value(&r), r.pass)
        }
        DualityScenario::Corpus { intervals, count } => {
            let r = corpus_duality_scenario(cfg.seed, count, intervals)?;
            ("corpus", to_value(&r), r.pass)
        }
        DualityScenario::FrozenNonSolution { intervals } => {
            let r = frozen_non_solution(intervals)?;
            ("frozen_non_solution", to_value(&r), r.pass)
        }
        DualityScenario::Solver => {
            let out = run_config(cfg, &cfg.params)?;
            let r = solver_duality(&out.trajectory)?;
            ("solver", to_value(&r), r.pass)
        }
    };
    write_json(
        dir,
        "duality_report.json",
        &json!({
            "schema_version": SCHEMA_VERSION,
            "scenario": name,
            "report": report,
            "pass": pass,
        }),
    )?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Check(format!("duality scenario `{name}` failed its bound")))
    }
}

pub fn counterexample(cfg: &RunConfig, dir: &Path) -> Outcome {
    let c = cfg
        .counterexample
        .as_ref()
        .ok_or_else(|| Failure::Usage("config has no counterexample section".into()))?;
    let window = c.window()?;
    let (s1, s2) = match c.family {
        Family::Decelerating => family_decelerating(c.t_ref, &window)?,
        Family::Remark => pair_remark(c.t_ref)?,
    };
    let report = pair_report(&s1, &s2, &window, c.order, &c.tolerances)?;
    write_json(
        dir,
        "counterexample_report.json",
        &json!({
            "schema_version": SCHEMA_VERSION,
            "family": c.family,
            "t_ref": c.t_ref,
            "report": report,
            "pass": report.pass,
        }),
    )?;
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "counterexample pair failed: residuals {:e}, {:e}, initial gap {:e}, gap {:e}",
            report.members[0].residual.max(),
            report.members[1].residual.max(),
            report.initial_gap,
            report.gap
        )))
    }
}
