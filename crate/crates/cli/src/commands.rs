//! Command implementations. Each returns an [`Outcome`] or a [`Failure`].

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

use lclgrid::cycle::{
    build_h, classify_h, infeasible_lengths, run_cycle_algorithm, synthesize_cycle, CycleAlgorithm, CycleClass, Witness,
};
use lclgrid::lcl::{check_cycle, check_grid, parse_problem, serialize_problem, zoo, GridLcl, LabelledGrid, Problem};
use lclgrid::sat::{backend, BackendConfig, Branching};
use lclgrid::sim::{self, brute_force_solve, logstar, make_instance, run_normal_form};
use lclgrid::synth::{
    constant_algorithm, synthesize_with, triviality_check, Attempt, CspEncoding, DimSchedule, NormalFormAlgorithm,
    SynthesisOutcome,
};
use lclgrid::tiles::enumerate_tiles;

use crate::report::*;
use crate::{SolverArgs, SynthArgs};

/// Reads a problem document from a path, or a shipped problem by name.
pub fn load_problem(spec: &str, inputs: &mut Inputs) -> CmdResult<Problem> {
    let text = if Path::new(spec).exists() {
        fs::read_to_string(spec)?
    } else {
        let stem = spec.strip_prefix("zoo/").unwrap_or(spec).trim_end_matches(".json");
        let (_, p) = zoo::shipped()?
            .into_iter()
            .find(|(s, _)| s == stem)
            .ok_or_else(|| Failure::new(EXIT_INPUT, format!("no problem file or shipped problem named `{spec}`")))?;
        serialize_problem(&p)
    };
    inputs.add("problem", &text);
    Ok(parse_problem(&text)?)
}

fn write_file(path: &Path, contents: &str) -> CmdResult<()> {
    fs::write(path, contents).map_err(|e| Failure::new(EXIT_FAILED, format!("writing {}: {e}", path.display())))
}

fn stem(spec: &str) -> String {
    Path::new(spec).file_stem().map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned())
}

pub fn classify_cycle(spec: &str, out: Option<PathBuf>, inputs: &mut Inputs) -> CmdResult<Outcome> {
    let p = load_problem(spec, inputs)?.into_cycle()?;
    let h = build_h(&p);
    let c = classify_h(&h);
    let node = |u: usize| p.spell(&h.nodes[u]);
    let mut outputs =
        json!({ "problem": p.name(), "class": c.class, "h_nodes": h.nodes.len(), "h_edges": h.edges.len() });
    let text = match (&c.class, &c.witness) {
        (CycleClass::Constant, Witness::SelfLoop(u)) => {
            outputs["witness"] = json!({ "self_loop": node(*u) });
            format!("CONSTANT (self-loop at {})\n", node(*u))
        }
        (CycleClass::Logstar, Witness::Flexible { node: u, k }) => {
            let alg = synthesize_cycle(&p)?;
            let path = out.unwrap_or_else(|| PathBuf::from(format!("{}.cycle-algorithm.json", stem(spec))));
            write_file(&path, &alg.to_json())?;
            outputs["witness"] = json!({ "node": node(*u), "flexibility": k });
            outputs["algorithm"] = json!(alg.to_json());
            format!("LOGSTAR (k = {k}, witness {})\nalgorithm written to {}\n", node(*u), path.display())
        }
        (CycleClass::Global, _) => {
            let bad = infeasible_lengths(&h, 4 * h.nodes.len().max(4));
            outputs["infeasible_lengths"] = json!(bad);
            format!("GLOBAL (no flexible node; infeasible lengths include {bad:?})\n")
        }
        _ => "UNSOLVABLE\n".to_string(),
    };
    Ok(Outcome::new(EXIT_OK, text, outputs))
}

fn attempts_json(attempts: &[Attempt]) -> (Value, Value) {
    let outputs = attempts
        .iter()
        .map(|a| {
            json!({
                "k": a.k, "rows": a.rows, "cols": a.cols, "encoding": a.encoding, "tiles": a.tiles,
                "horizontal_edges": a.horizontal_edges, "vertical_edges": a.vertical_edges,
                "variables": a.variables, "clauses": a.clauses, "satisfiable": a.satisfiable,
            })
        })
        .collect();
    let timings =
        attempts.iter().map(|a| json!({ "k": a.k, "rows": a.rows, "cols": a.cols, "millis": a.millis })).collect();
    (outputs, timings)
}

fn attempt_line(a: &Attempt) -> String {
    format!(
        "k={} {}x{}: {} tiles, {} vars, {} clauses ({:?}) -> {} in {} ms\n",
        a.k,
        a.rows,
        a.cols,
        a.tiles,
        a.variables,
        a.clauses,
        a.encoding,
        if a.satisfiable { "SAT" } else { "UNSAT" },
        a.millis
    )
}

fn solver_config(args: &SolverArgs, inputs: &mut Inputs) -> BackendConfig {
    inputs.add("backend", &args.backend);
    inputs.add("branching", format!("{:?}", args.branching));
    if args.backend == "external" {
        inputs.add("solver_cmd", args.solver_cmd.as_deref().unwrap_or(""));
    }
    BackendConfig { solver_cmd: args.solver_cmd.clone(), branching: Branching::from(args.branching) }
}

/// Triviality check, then tile-graph synthesis. `Ok(None)` means exhausted.
fn synthesize_grid(
    p: &GridLcl,
    args: &SynthArgs,
    inputs: &mut Inputs,
    text: &mut String,
) -> CmdResult<(Option<NormalFormAlgorithm>, Value, Value)> {
    if let Some(l) = triviality_check(p) {
        let name = p.alphabet().name(l);
        text.push_str(&format!("trivial: constant label {name}\n"));
        return Ok((Some(constant_algorithm(p, l)?), json!({ "trivial": name }), json!({})));
    }
    let cfg = solver_config(&args.solver, inputs);
    let b = backend(&args.solver.backend, &cfg)?;
    let schedule = match &args.dims {
        Some(d) => DimSchedule::Fixed(d.clone()),
        None => DimSchedule::Default,
    };
    inputs.add("max_k", args.max_k);
    inputs.add("dims", format!("{:?}", args.dims));
    inputs.add("encoding", format!("{:?}", args.encoding));
    let s = synthesize_with(p, args.max_k, &schedule, b.as_ref(), CspEncoding::from(args.encoding))?;
    for a in &s.attempts {
        text.push_str(&attempt_line(a));
    }
    let (attempts, timings) = attempts_json(&s.attempts);
    let mut outputs = json!({ "attempts": attempts });
    match s.outcome {
        SynthesisOutcome::Found(alg) => {
            outputs["k"] = json!(alg.k);
            outputs["dims"] = json!([alg.rows, alg.cols]);
            Ok((Some(alg), outputs, json!({ "attempts": timings })))
        }
        SynthesisOutcome::Exhausted { max_k } => {
            outputs["exhausted_max_k"] = json!(max_k);
            Ok((None, outputs, json!({ "attempts": timings })))
        }
    }
}

pub fn synthesize(spec: &str, args: &SynthArgs, out: Option<PathBuf>, inputs: &mut Inputs) -> CmdResult<Outcome> {
    let p = load_problem(spec, inputs)?.into_grid()?;
    let mut text = String::new();
    let (alg, mut outputs, timings) = synthesize_grid(&p, args, inputs, &mut text)?;
    outputs["problem"] = json!(p.name());
    let code = match alg {
        Some(alg) => {
            let path = out.unwrap_or_else(|| PathBuf::from(format!("{}.algorithm.json", stem(spec))));
            write_file(&path, &alg.to_json())?;
            outputs["algorithm"] = json!(alg.to_json());
            text.push_str(&format!(
                "success: k = {}, {}x{} windows, {} table entries, min n = {}\nalgorithm written to {}\n",
                alg.k,
                alg.rows,
                alg.cols,
                alg.table.len(),
                alg.min_n,
                path.display()
            ));
            EXIT_OK
        }
        None => {
            text.push_str(&format!("inconclusive — possibly global (no table up to k = {})\n", args.max_k));
            EXIT_INCONCLUSIVE
        }
    };
    Ok(Outcome::new(code, text, outputs).with_timings(timings))
}

pub fn tiles(k: usize, rows: usize, cols: usize, count_only: bool, inputs: &mut Inputs) -> CmdResult<Outcome> {
    inputs.add("k", k);
    inputs.add("rows", rows);
    inputs.add("cols", cols);
    let start = Instant::now();
    let tiles = enumerate_tiles(k, rows, cols)?;
    let dump: Vec<String> = tiles.iter().map(|t| t.bitstring()).collect();
    let mut outputs = json!({ "k": k, "rows": rows, "cols": cols, "count": tiles.len() });
    let text = if count_only {
        format!("{}\n", tiles.len())
    } else {
        outputs["tiles"] = json!(dump);
        dump.iter().map(|s| format!("{s}\n")).collect()
    };
    Ok(Outcome::new(EXIT_OK, text, outputs).with_timings(json!({ "millis": start.elapsed().as_millis() })))
}

enum Algorithm {
    Grid(Box<NormalFormAlgorithm>),
    Cycle(CycleAlgorithm),
}

fn load_algorithm(path: &Path, inputs: &mut Inputs) -> CmdResult<Algorithm> {
    let text = fs::read_to_string(path)?;
    inputs.add("algorithm", &text);
    match NormalFormAlgorithm::from_json(&text) {
        Ok(a) => Ok(Algorithm::Grid(Box::new(a))),
        Err(grid_err) => CycleAlgorithm::from_json(&text).map(Algorithm::Cycle).map_err(|cycle_err| {
            Failure::new(EXIT_INPUT, format!("not an algorithm document: {grid_err}; {cycle_err}"))
        }),
    }
}

struct RunResult {
    text: String,
    violations: usize,
    rounds: usize,
    phases: Vec<(String, usize)>,
}

fn run_grid(alg: &NormalFormAlgorithm, n: usize, seed: u64, strategy: &str) -> CmdResult<RunResult> {
    let inst = make_instance(n, seed)?;
    let (grid, trace) = run_normal_form(alg, &inst, strategy)?;
    let violations = check_grid(&alg.problem, &grid).len();
    Ok(RunResult { text: grid.render(alg.problem.alphabet()), violations, rounds: trace.rounds, phases: trace.phases })
}

fn run_cycle(alg: &CycleAlgorithm, n: usize, seed: u64, strategy: &str) -> CmdResult<RunResult> {
    let ids = sim::make_cycle_ids(n, seed);
    let run = run_cycle_algorithm(alg, &ids, strategy)?;
    let violations = check_cycle(&alg.problem, &run.labels)?.len();
    let mut phases = run.mis.phases.clone();
    phases.push(("circuit-fill".to_string(), 2 * alg.k + 1));
    Ok(RunResult { text: format!("{}\n", alg.problem.spell(&run.labels)), violations, rounds: run.rounds, phases })
}

pub fn simulate(
    path: &Path,
    n: usize,
    seed: u64,
    trace: bool,
    strategy: &str,
    inputs: &mut Inputs,
) -> CmdResult<Outcome> {
    let alg = load_algorithm(path, inputs)?;
    inputs.add("n", n);
    inputs.add("seed", seed);
    inputs.add("strategy", strategy);
    let start = Instant::now();
    let run = match &alg {
        Algorithm::Grid(a) => run_grid(a, n, seed, strategy)?,
        Algorithm::Cycle(a) => run_cycle(a, n, seed, strategy)?,
    };
    let mut text = run.text.clone();
    text.push_str(&format!("rounds: {} (log* n = {})\n", run.rounds, logstar(n as u64)));
    if trace {
        for (phase, r) in &run.phases {
            text.push_str(&format!("  {phase}: {r}\n"));
        }
    }
    let outputs = json!({
        "n": n, "seed": seed, "labelling": run.text, "rounds": run.rounds, "phases": run.phases,
        "violations": run.violations,
    });
    let code = if run.violations == 0 { EXIT_OK } else { EXIT_FAILED };
    Ok(Outcome::new(code, text, outputs).with_timings(json!({ "millis": start.elapsed().as_millis() })))
}

pub fn oracle(spec: &str, n: usize, force: bool, inputs: &mut Inputs) -> CmdResult<Outcome> {
    let p = load_problem(spec, inputs)?.into_grid()?;
    inputs.add("n", n);
    let start = Instant::now();
    let result = brute_force_solve(&p, n, force)?;
    let timings = json!({ "millis": start.elapsed().as_millis() });
    Ok(match result {
        Some(g) => {
            let text = g.render(p.alphabet());
            Outcome::new(EXIT_OK, text.clone(), json!({ "n": n, "satisfiable": true, "labelling": text }))
        }
        None => Outcome::new(EXIT_OK, "UNSAT\n".to_string(), json!({ "n": n, "satisfiable": false })),
    }
    .with_timings(timings))
}

pub fn verify(spec: &str, labelling: &Path, inputs: &mut Inputs) -> CmdResult<Outcome> {
    let problem = load_problem(spec, inputs)?;
    let text = fs::read_to_string(labelling)?;
    inputs.add("labelling", &text);
    let violations: Vec<String> = match &problem {
        Problem::Grid(p) => {
            let g = LabelledGrid::parse(&text, p.alphabet())?;
            check_grid(p, &g).iter().map(ToString::to_string).collect()
        }
        Problem::Cycle(p) => {
            let seq = p.read(text.trim())?;
            check_cycle(p, &seq)?.iter().map(ToString::to_string).collect()
        }
    };
    let mut out: String = violations.iter().map(|v| format!("{v}\n")).collect();
    let code = if violations.is_empty() {
        out.push_str("PASS\n");
        EXIT_OK
    } else {
        out.push_str(&format!("FAIL: {} violations\n", violations.len()));
        EXIT_FAILED
    };
    Ok(Outcome::new(code, out, json!({ "violations": violations })))
}

pub fn pipeline(
    spec: &str,
    args: &SynthArgs,
    ns: &[usize],
    seeds: &[u64],
    strategy: &str,
    inputs: &mut Inputs,
) -> CmdResult<Outcome> {
    let problem = load_problem(spec, inputs)?;
    inputs.add("n", format!("{ns:?}"));
    inputs.add("seeds", format!("{seeds:?}"));
    inputs.add("strategy", strategy);
    let mut text = String::new();
    let start = Instant::now();
    let alg = match problem {
        Problem::Grid(p) => {
            let (alg, _, _) = synthesize_grid(&p, args, inputs, &mut text).map_err(|f| f.staged("synthesize"))?;
            match alg {
                Some(a) => Algorithm::Grid(Box::new(a)),
                None => {
                    text.push_str("inconclusive — possibly global\n");
                    return Ok(Outcome::new(EXIT_INCONCLUSIVE, text, json!({ "stage": "synthesize" })));
                }
            }
        }
        Problem::Cycle(p) => {
            let c = classify_h(&build_h(&p));
            if c.class != CycleClass::Logstar && c.class != CycleClass::Constant {
                text.push_str(&format!("{:?}: no local algorithm\n", c.class).to_uppercase());
                return Ok(Outcome::new(EXIT_INCONCLUSIVE, text, json!({ "stage": "classify", "class": c.class })));
            }
            Algorithm::Cycle(synthesize_cycle(&p).map_err(|e| Failure::from(e).staged("synthesize"))?)
        }
    };
    let synth_millis = start.elapsed().as_millis();
    let jobs: Vec<(usize, u64)> = ns.iter().flat_map(|&n| seeds.iter().map(move |&s| (n, s))).collect();
    let runs: Vec<CmdResult<RunResult>> = jobs
        .par_iter()
        .map(|&(n, seed)| match &alg {
            Algorithm::Grid(a) => run_grid(a, n, seed, strategy),
            Algorithm::Cycle(a) => run_cycle(a, n, seed, strategy),
        })
        .collect();
    let mut rows = Vec::new();
    let mut all_pass = true;
    for ((n, seed), run) in jobs.iter().zip(runs) {
        let run = run.map_err(|f| f.staged(&format!("simulate n={n} seed={seed}")))?;
        let pass = run.violations == 0;
        all_pass &= pass;
        let ls = logstar(*n as u64);
        text.push_str(&format!(
            "n={n} seed={seed}: {} ({} violations), rounds {} (log* n = {ls})\n",
            if pass { "PASS" } else { "FAIL" },
            run.violations,
            run.rounds
        ));
        rows.push(json!({ "n": n, "seed": seed, "pass": pass, "violations": run.violations, "rounds": run.rounds, "logstar": ls }));
    }
    let code = if all_pass { EXIT_OK } else { EXIT_FAILED };
    Ok(Outcome::new(code, text, json!({ "runs": rows }))
        .with_timings(json!({ "synthesis_millis": synth_millis, "total_millis": start.elapsed().as_millis() })))
}

/// Writes every shipped problem as `<dir>/<stem>.json`.
pub fn export_zoo(dir: &Path, inputs: &mut Inputs) -> CmdResult<Outcome> {
    fs::create_dir_all(dir)?;
    let mut names = Vec::new();
    for (stem, p) in zoo::shipped()? {
        write_file(&dir.join(format!("{stem}.json")), &serialize_problem(&p))?;
        names.push(stem);
    }
    inputs.add("dir", dir.display());
    let text = names.iter().map(|s| format!("{s}\n")).collect();
    Ok(Outcome::new(EXIT_OK, text, json!({ "problems": names })))
}
