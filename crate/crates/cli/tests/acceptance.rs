//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use serde_json::Value;

use lclgrid::cycle::{build_h, flexibility};
use lclgrid::lcl::{check_grid, zoo, GridLcl, Problem};
use lclgrid::sat::{CnfInstance, InternalSolver, SatBackend, SOLVER_ENV};
use lclgrid::sim::{
    distributed_mis_power, logstar, make_instance, run_normal_form, symmetry, torus_distance, voronoi_local_ids,
};
use lclgrid::synth::{
    constant_algorithm, synthesize, triviality_check, DimSchedule, NormalFormAlgorithm, SynthesisOutcome,
};
use lclgrid::tiles::{build_tile_graph, enumerate_tiles, is_tile, Tile};

fn lclgrid(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lclgrid")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn report(args: &[&str], dir: &Path) -> (i32, Value) {
    let mut full = args.to_vec();
    full.extend(["--report", "-"]);
    let o = lclgrid(&full, dir);
    let v = serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|_| panic!("no report from {args:?}: {}", String::from_utf8_lossy(&o.stderr)));
    (o.status.code().unwrap_or(-1), v)
}

/// External solver command: the configured one, else the bundled PySAT script.
fn external_solver() -> Option<String> {
    if let Ok(cmd) = std::env::var(SOLVER_ENV) {
        return Some(cmd);
    }
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scripts/pysat-solve.py");
    let ok = Command::new("python3").args(["-c", "import pysat"]).output().is_ok_and(|o| o.status.success());
    (ok && script.exists()).then(|| format!("python3 {}", script.display()))
}

struct Criterion {
    id: u32,
    checks: Vec<(String, bool)>,
}

impl Criterion {
    fn new(id: u32) -> Self {
        Self { id, checks: Vec::new() }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.checks.push((what.into(), ok));
    }

    fn finish(self) {
        let failed: Vec<&str> = self.checks.iter().filter(|(_, ok)| !ok).map(|(w, _)| w.as_str()).collect();
        let mut lines = String::new();
        for (what, ok) in &self.checks {
            lines.push_str(&format!("    [{}] {what}\n", if *ok { "ok" } else { "FAILED" }));
        }
        let verdict = if failed.is_empty() { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {}\n{lines}", self.id);
        assert!(failed.is_empty(), "criterion {} failed: {failed:?}", self.id);
    }
}

fn scratch() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

fn grid_problem(stem: &str) -> GridLcl {
    zoo::shipped().unwrap().into_iter().find(|(s, _)| s == stem).unwrap().1.into_grid().unwrap()
}

#[test]
fn criterion_1_tile_counts() {
    let mut c = Criterion::new(1);
    let dir = scratch();
    let start = Instant::now();
    let o = lclgrid(&["tiles", "--k", "1", "--rows", "3", "--cols", "2"], dir.path());
    let got: BTreeSet<String> = stdout(&o).lines().map(str::to_string).collect();
    // The 3x2 tiles as drawn top (north) to bottom; row 0 of a bitstring is south.
    let drawn = [
        "00 00 10", "00 00 01", "00 10 00", "00 10 01", "00 01 00", "00 01 10", "10 00 00", "10 00 10", "10 00 01",
        "10 01 00", "10 01 10", "01 00 00", "01 00 10", "01 00 01", "01 10 00", "01 10 01",
    ];
    let want: BTreeSet<String> = drawn.iter().map(|d| d.split(' ').rev().collect::<String>()).collect();
    c.check(format!("k=1 3x2 prints {} tiles (want 16)", stdout(&o).lines().count()), stdout(&o).lines().count() == 16);
    c.check("k=1 3x2 tile set equals the displayed list", got == want);
    let o = lclgrid(&["tiles", "--k", "3", "--rows", "7", "--cols", "5", "--count-only"], dir.path());
    let count = stdout(&o).trim().to_string();
    c.check(format!("k=3 7x5 count {count} (want 2079)"), count == "2079");
    let secs = start.elapsed().as_secs_f64();
    c.check(format!("runtime {secs:.1} s < 300 s"), secs < 300.0);
    c.finish();
}

fn synth_attempts(v: &Value) -> Vec<(u64, u64, u64, bool)> {
    v["outputs"]["attempts"]
        .as_array()
        .map(|a| {
            a.iter()
                .map(|x| {
                    let n = |k: &str| x[k].as_u64().unwrap();
                    (n("k"), n("rows"), n("cols"), x["satisfiable"].as_bool().unwrap())
                })
                .collect()
        })
        .unwrap_or_default()
}

fn check_four_colouring(c: &mut Criterion, backend: &str, solver: Option<&str>, limit_secs: f64) {
    let dir = scratch();
    let mut args = vec!["synthesize", "vertex-4-colouring", "--backend", backend];
    if let Some(cmd) = solver {
        args.extend(["--solver-cmd", cmd]);
    }
    let start = Instant::now();
    let (code, v) = report(&args, dir.path());
    let secs = start.elapsed().as_secs_f64();
    let attempts = synth_attempts(&v);
    let below: Vec<_> = attempts.iter().filter(|a| a.0 < 3).collect();
    let expected_below: usize = (1..3).map(|k| DimSchedule::Default.dims(k).len()).sum();
    c.check(
        format!("{backend}: all {} default-schedule attempts at k=1,2 UNSAT", below.len()),
        below.len() == expected_below && below.iter().all(|a| !a.3),
    );
    c.check(
        format!("{backend}: success at k=3 with 7x5 (exit {code}, last attempt {:?})", attempts.last()),
        code == 0 && attempts.last() == Some(&(3, 7, 5, true)),
    );
    c.check(format!("{backend}: {secs:.1} s within {limit_secs} s"), secs < limit_secs);
}

#[test]
fn criterion_2_four_colouring_synthesis() {
    let mut c = Criterion::new(2);
    check_four_colouring(&mut c, "internal", None, 1800.0);
    match external_solver() {
        Some(cmd) => check_four_colouring(&mut c, "external", Some(&cmd), 600.0),
        None => println!("criterion 2: no external solver configured; external run skipped"),
    }
    c.finish();
}

#[test]
fn criterion_3_orientation_table() {
    let mut c = Criterion::new(3);
    let dir = scratch();
    let trivial = triviality_check(&grid_problem("orientation-2"));
    c.check(format!("{{2}}: triviality_check returns {trivial:?}"), trivial.is_some());
    for stem in ["orientation-134", "orientation-013"] {
        let (code, v) = report(&["synthesize", stem, "--max-k", "1"], dir.path());
        c.check(format!("{stem}: synthesis succeeds with k=1 (exit {code})"), code == 0 && v["outputs"]["k"] == 1);
    }
    let o = lclgrid(&["oracle", "orientation-13", "--n", "3"], dir.path());
    c.check("{1,3}: oracle proves UNSAT at n=3", stdout(&o).trim() == "UNSAT" && o.status.success());
    let o = lclgrid(&["synthesize", "orientation-034", "--max-k", "2"], dir.path());
    c.check(
        format!("{{0,3,4}}: synthesis inconclusive at max_k=2 (exit {:?})", o.status.code()),
        o.status.code() == Some(3) && stdout(&o).contains("inconclusive"),
    );
    for n in ["4", "6"] {
        let o = lclgrid(&["oracle", "orientation-034", "--n", n], dir.path());
        let path = dir.path().join(format!("o034-{n}.txt"));
        std::fs::write(&path, stdout(&o)).unwrap();
        let v = lclgrid(&["verify", "orientation-034", path.to_str().unwrap()], dir.path());
        c.check(
            format!("{{0,3,4}}: oracle finds a labelling at n={n} that verifies"),
            o.status.success() && stdout(&o).trim() != "UNSAT" && v.status.success(),
        );
    }
    c.finish();
}

#[test]
fn criterion_4_edge_colouring_boundary() {
    let mut c = Criterion::new(4);
    let dir = scratch();
    match external_solver() {
        Some(cmd) => {
            let (code, v) = report(
                &[
                    "pipeline",
                    "edge-5-colouring",
                    "--n",
                    "16",
                    "--seed",
                    "0",
                    "--backend",
                    "external",
                    "--solver-cmd",
                    &cmd,
                ],
                dir.path(),
            );
            let runs = v["outputs"]["runs"].as_array().cloned().unwrap_or_default();
            c.check(
                format!("edge-5 pipeline at n=16 passes (exit {code}, {} runs)", runs.len()),
                code == 0 && runs.len() == 1 && runs[0]["pass"] == true,
            );
        }
        None => c.check("edge-5 pipeline at n=16 needs an external SAT solver (none available)", false),
    }
    let o = lclgrid(&["oracle", "edge-4-colouring", "--n", "3"], dir.path());
    c.check("edge-4 oracle returns UNSAT at n=3", o.status.success() && stdout(&o).trim() == "UNSAT");
    c.finish();
}

#[test]
fn criterion_5_cycle_classification() {
    let mut c = Criterion::new(5);
    let dir = scratch();
    for (stem, want) in [
        ("two-colouring-cycle", "GLOBAL"),
        ("three-colouring-cycle", "LOGSTAR"),
        ("mis-cycle", "LOGSTAR"),
        ("trivial-cycle", "CONSTANT"),
    ] {
        let (code, v) = report(&["classify-cycle", stem], dir.path());
        let got = v["outputs"]["class"].as_str().unwrap_or("?").to_string();
        c.check(format!("{stem}: {got} (want {want})"), code == 0 && got == want);
    }
    let mis = zoo::shipped().unwrap().into_iter().find(|(s, _)| s == "mis-cycle").unwrap().1.into_cycle().unwrap();
    let h = build_h(&mis);
    let node = h.index_of(&mis.read("00").unwrap()).unwrap();
    let f = flexibility(&h, node);
    c.check(format!("mis-cycle: flexibility(00) = {f:?} (want Some(8))"), f == Some(8));
    c.finish();
}

/// Every grid zoo problem with an algorithm from the internal backend at
/// `k ≤ 3`, or from the external backend when one is configured.
fn synthesized_zoo() -> Vec<NormalFormAlgorithm> {
    let external = external_solver().map(|cmd| lclgrid::sat::ExternalSolver::new(cmd).unwrap());
    let internal = InternalSolver::default();
    let mut out = Vec::new();
    for (stem, p) in zoo::shipped().unwrap() {
        let Problem::Grid(p) = p else { continue };
        if let Some(l) = triviality_check(&p) {
            out.push(constant_algorithm(&p, l).unwrap());
            continue;
        }
        let (max_k, backend): (usize, &dyn SatBackend) = match stem.as_str() {
            // Known exhausted or global; no algorithm to test.
            "vertex-2-colouring" | "vertex-3-colouring" | "orientation-13" | "orientation-034" | "edge-4-colouring" => {
                continue
            }
            "edge-5-colouring" => match &external {
                Some(e) => (2, e),
                None => continue,
            },
            _ => (3, &internal),
        };
        if let SynthesisOutcome::Found(a) = synthesize(&p, max_k, &DimSchedule::Default, backend).unwrap().outcome {
            out.push(a);
        }
    }
    out
}

#[test]
fn criterion_6_end_to_end_soundness() {
    let mut c = Criterion::new(6);
    let algs = synthesized_zoo();
    let names: Vec<&str> = algs.iter().map(|a| a.problem.name()).collect();
    c.check(format!("synthesized zoo algorithms: {names:?}"), algs.len() >= 6);
    for alg in &algs {
        let mut bad = Vec::new();
        let mut runs = 0;
        for n in [alg.min_n, 32, 64, 256] {
            for seed in 0..5 {
                let inst = make_instance(n, seed).unwrap();
                let (g, _) = run_normal_form(alg, &inst, symmetry::DEFAULT_STRATEGY).unwrap();
                let v = check_grid(&alg.problem, &g).len();
                runs += 1;
                if v > 0 {
                    bad.push((n, seed, v));
                }
            }
        }
        c.check(format!("{}: {runs} runs, violations {bad:?}", alg.problem.name()), bad.is_empty());
    }
    c.finish();
}

/// Extendability by SAT: some independent anchor placement on the ring of
/// width `k` around the window dominates every window cell.
fn extendable(k: usize, rows: usize, cols: usize, mask: u64) -> bool {
    let k = k as i64;
    let (r, c) = (rows as i64, cols as i64);
    let d = |a: (i64, i64), b: (i64, i64)| (a.0 - b.0).abs() + (a.1 - b.1).abs();
    let inside = |p: (i64, i64)| (0..r).contains(&p.0) && (0..c).contains(&p.1);
    let cells: Vec<(i64, i64)> = (-k..r + k).flat_map(|i| (-k..c + k).map(move |j| (i, j))).collect();
    let fixed: Vec<(i64, i64)> =
        cells.iter().copied().filter(|&p| inside(p) && mask >> (p.0 * c + p.1) & 1 == 1).collect();
    if fixed.iter().enumerate().any(|(i, &a)| fixed[i + 1..].iter().any(|&b| d(a, b) <= k)) {
        return false;
    }
    let ring: Vec<(i64, i64)> = cells.iter().copied().filter(|&p| !inside(p)).collect();
    let mut cnf = CnfInstance::new(ring.len());
    for (i, &a) in ring.iter().enumerate() {
        if fixed.iter().any(|&w| d(a, w) <= k) {
            cnf.add_clause([-(i as i32 + 1)]).unwrap();
        }
        for (j, &b) in ring.iter().enumerate().skip(i + 1) {
            if d(a, b) <= k {
                cnf.add_clause([-(i as i32 + 1), -(j as i32 + 1)]).unwrap();
            }
        }
    }
    for p in cells.iter().copied().filter(|&p| inside(p) && !fixed.iter().any(|&w| d(p, w) <= k)) {
        let near: Vec<i32> = (0..ring.len()).filter(|&i| d(p, ring[i]) <= k).map(|i| i as i32 + 1).collect();
        if near.is_empty() {
            return false;
        }
        cnf.add_clause(near).unwrap();
    }
    InternalSolver::default().solve(&cnf).unwrap().is_sat()
}

fn window(members: &[bool], n: usize, r0: usize, c0: usize, rows: usize, cols: usize) -> Tile {
    Tile::from_fn(rows, cols, |i, j| members[((r0 + i) % n) * n + (c0 + j) % n]).unwrap()
}

#[test]
fn criterion_7_property_suite() {
    let mut c = Criterion::new(7);
    let start = Instant::now();

    // MIS of the k-th power: independence and maximality by full scan.
    let mut mis_ok = true;
    for (n, k) in [(16, 1), (32, 2), (64, 3), (64, 6), (128, 4)] {
        for seed in 0..5 {
            let inst = make_instance(n, seed).unwrap();
            let a = distributed_mis_power(&inst, k, symmetry::DEFAULT_STRATEGY).unwrap();
            let anchors: Vec<usize> = a.anchors().collect();
            let independent =
                anchors.iter().enumerate().all(|(i, &x)| anchors[i + 1..].iter().all(|&y| torus_distance(n, x, y) > k));
            let maximal = (0..n * n).all(|v| anchors.iter().any(|&x| torus_distance(n, v, x) <= k));
            mis_ok &= independent && maximal;
        }
    }
    c.check("MIS of power: independence and maximality over (n,k) sweep x 5 seeds", mis_ok);

    // Local coordinates unique within floor(k/2).
    let mut unique = true;
    for (n, k) in [(32, 2), (64, 4), (64, 6), (96, 8)] {
        for seed in 0..3 {
            let inst = make_instance(n, seed).unwrap();
            let a = distributed_mis_power(&inst, k, symmetry::DEFAULT_STRATEGY).unwrap();
            unique &= voronoi_local_ids(&inst, &a).unwrap().unique_within(k / 2);
        }
    }
    c.check("local coordinates unique within floor(k/2)", unique);

    // Tile soundness on real anchor sets.
    for (k, n) in [(1, 16), (3, 32)] {
        let inst = make_instance(n, 11).unwrap();
        let anchors = distributed_mis_power(&inst, k, symmetry::DEFAULT_STRATEGY).unwrap();
        let mut sound = true;
        for (rows, cols) in DimSchedule::Default.dims(k) {
            let tg = build_tile_graph(k, rows, cols).unwrap();
            let h: HashSet<(usize, usize)> = tg.horizontal.iter().copied().collect();
            let v: HashSet<(usize, usize)> = tg.vertical.iter().copied().collect();
            let idx = |r: usize, col: usize| {
                let t = window(&anchors.members, n, r, col, rows, cols);
                if is_tile(k, &t) {
                    tg.index_of(&t)
                } else {
                    None
                }
            };
            for r in 0..n {
                for col in 0..n {
                    let (Some(a), Some(e), Some(north)) = (idx(r, col), idx(r, (col + 1) % n), idx((r + 1) % n, col))
                    else {
                        sound = false;
                        continue;
                    };
                    sound &= h.contains(&(a, e)) && v.contains(&(a, north));
                }
            }
        }
        c.check(format!("tile soundness k={k} n={n}: windows are tiles, gluings are edges"), sound);
    }

    // Enumeration equals the brute-force filter for k=1 up to 3x3.
    let mut same = true;
    for rows in 1..=3 {
        for cols in 1..=3 {
            let got: HashSet<String> = enumerate_tiles(1, rows, cols).unwrap().iter().map(Tile::bitstring).collect();
            let want: HashSet<String> = (0..1u64 << (rows * cols))
                .filter(|&m| extendable(1, rows, cols, m))
                .map(|m| (0..rows * cols).map(|i| if m >> i & 1 == 1 { '1' } else { '0' }).collect())
                .collect();
            same &= got == want;
        }
    }
    c.check("enumerate_tiles equals brute-force filter for k=1 up to 3x3", same);

    // Round budget: fit alpha, beta at n = 16, 32; assert at 64, 256, 1024.
    for stem in ["vertex-5-colouring", "vertex-4-colouring"] {
        let p = grid_problem(stem);
        let SynthesisOutcome::Found(alg) =
            synthesize(&p, 3, &DimSchedule::Default, &InternalSolver::default()).unwrap().outcome
        else {
            c.check(format!("{stem}: synthesis for round budget"), false);
            continue;
        };
        let rounds = |n: usize| {
            run_normal_form(&alg, &make_instance(n, 0).unwrap(), symmetry::DEFAULT_STRATEGY).unwrap().1.rounds as f64
        };
        let ls = |n: usize| logstar(n as u64) as f64;
        let (r16, r32) = (rounds(16.max(alg.min_n)), rounds(32));
        let alpha = ((r32 - r16) / (ls(32) - ls(16))).max(0.0);
        let beta = r16 - alpha * ls(16);
        let sweep: Vec<(usize, f64)> = [64, 256, 1024].iter().map(|&n| (n, rounds(n))).collect();
        let ok = sweep.iter().all(|&(n, r)| r <= alpha * ls(n) + beta + 1e-9);
        c.check(format!("{stem}: rounds <= {alpha}·log*(n) + {beta} over {sweep:?}"), ok);
    }

    let secs = start.elapsed().as_secs_f64();
    c.check(format!("property suite runtime {secs:.0} s < 900 s"), secs < 900.0);
    c.finish();
}

#[test]
fn reports_are_reproducible_and_exit_codes_hold() {
    let dir = scratch();
    let args = ["pipeline", "vertex-5-colouring", "--n", "16,32", "--seed", "0,1"];
    let (c1, mut a) = report(&args, dir.path());
    let (c2, mut b) = report(&args, dir.path());
    a["timings"] = Value::Null;
    b["timings"] = Value::Null;
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    let bad: PathBuf = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"kind\": \"grid\"").unwrap();
    assert_eq!(lclgrid(&["pipeline", bad.to_str().unwrap(), "--n", "16"], dir.path()).status.code(), Some(2));
    assert_eq!(lclgrid(&["synthesize", "vertex-3-colouring", "--max-k", "1"], dir.path()).status.code(), Some(3));
    assert_eq!(
        lclgrid(&["synthesize", "vertex-4-colouring", "--backend", "external", "--solver-cmd", "false"], dir.path())
            .status
            .code(),
        Some(4)
    );
}
