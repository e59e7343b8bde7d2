use std::path::Path;
use std::process::Command;

use lclgrid::lcl::{zoo, Problem};
use lclgrid::sat::{backend, BackendConfig, Branching, InternalSolver, SatBackend, SatResult, SOLVER_ENV};
use lclgrid::synth::{encode_csp, DimSchedule};
use lclgrid::tiles::build_tile_graph;

/// The configured external solver, or the bundled PySAT script when usable.
fn external_command() -> Option<String> {
    if let Ok(cmd) = std::env::var(SOLVER_ENV) {
        return Some(cmd);
    }
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scripts/pysat-solve.py");
    let ok = Command::new("python3").args(["-c", "import pysat"]).output().is_ok_and(|o| o.status.success());
    (ok && script.exists()).then(|| format!("python3 {}", script.display()))
}

#[test]
fn internal_heuristics_and_external_agree_on_small_zoo_instances() {
    let external = external_command().map(|cmd| {
        backend("external", &BackendConfig { solver_cmd: Some(cmd), branching: Branching::default() }).unwrap()
    });
    if external.is_none() {
        eprintln!("no external solver available; comparing internal heuristics only");
    }
    let lowest = InternalSolver::new(Branching::Lowest);
    let activity = InternalSolver::new(Branching::Activity);
    let mut compared = 0;
    for (name, p) in zoo::shipped().unwrap() {
        let Problem::Grid(p) = p else { continue };
        for (rows, cols) in DimSchedule::Default.dims(1) {
            let csp = encode_csp(&build_tile_graph(1, rows, cols).unwrap(), &p).unwrap();
            if csp.cnf.num_vars() > 200 {
                continue;
            }
            let want = lowest.solve(&csp.cnf).unwrap();
            let mut results = vec![activity.solve(&csp.cnf).unwrap()];
            if let Some(e) = &external {
                results.push(e.solve(&csp.cnf).unwrap());
            }
            for got in results {
                assert_eq!(got.is_sat(), want.is_sat(), "{name} {rows}x{cols}");
                if let SatResult::Sat(model) = got {
                    assert!(csp.cnf.satisfied_by(&model), "{name} {rows}x{cols}");
                }
            }
            compared += 1;
        }
    }
    assert!(compared >= 10);
}
