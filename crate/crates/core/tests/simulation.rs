use lclgrid::lcl::{builtin, check_grid, zoo::Params, GridLcl};
use lclgrid::sat::InternalSolver;
use lclgrid::sim::{brute_force_solve, logstar, make_instance, run_normal_form, symmetry};
use lclgrid::synth::{synthesize, DimSchedule, NormalFormAlgorithm, SynthesisOutcome};
use lclgrid::Error;

fn grid(name: &str, params: Params) -> GridLcl {
    builtin(name, &params).unwrap().into_grid().unwrap()
}

fn synth(p: &GridLcl, max_k: usize) -> NormalFormAlgorithm {
    match synthesize(p, max_k, &DimSchedule::Default, &InternalSolver::default()).unwrap().outcome {
        SynthesisOutcome::Found(a) => a,
        SynthesisOutcome::Exhausted { .. } => panic!("no algorithm for {}", p.name()),
    }
}

#[test]
fn four_colouring_runs_clean() {
    let alg = synth(&grid("vertex-colouring", Params::with_k(4)), 3);
    assert_eq!((alg.k, alg.rows, alg.cols), (3, 7, 5));
    for seed in 0..2 {
        let (g, trace) = run_normal_form(&alg, &make_instance(32, seed).unwrap(), symmetry::DEFAULT_STRATEGY).unwrap();
        assert!(check_grid(&alg.problem, &g).is_empty());
        assert_eq!(trace.rounds, trace.phases.iter().map(|(_, r)| r).sum::<usize>());
    }
}

#[test]
fn orientation_134_runs_clean_for_every_strategy() {
    let alg = synth(&grid("x-orientation", Params::with_set([1, 3, 4])), 1);
    assert_eq!(alg.k, 1);
    for s in symmetry::registry() {
        for seed in 0..5 {
            let (g, _) = run_normal_form(&alg, &make_instance(16, seed).unwrap(), s.name()).unwrap();
            assert!(check_grid(&alg.problem, &g).is_empty(), "{} seed {seed}", s.name());
        }
    }
}

#[test]
fn too_small_grid_is_refused() {
    let alg = synth(&grid("vertex-colouring", Params::with_k(5)), 1);
    let inst = make_instance(alg.min_n - 1, 0).unwrap();
    assert!(matches!(run_normal_form(&alg, &inst, symmetry::DEFAULT_STRATEGY), Err(Error::GridTooSmall { .. })));
}

#[test]
fn round_budget_holds_across_sweep() {
    let alg = synth(&grid("vertex-colouring", Params::with_k(5)), 1);
    let rounds = |n: usize| {
        run_normal_form(&alg, &make_instance(n, 3).unwrap(), symmetry::DEFAULT_STRATEGY).unwrap().1.rounds as f64
    };
    let ls = |n: usize| logstar(n as u64) as f64;
    let (r16, r32) = (rounds(16), rounds(32));
    let alpha = ((r32 - r16) / (ls(32) - ls(16))).max(0.0);
    let beta = r16 - alpha * ls(16);
    for n in [64, 256, 1024] {
        assert!(rounds(n) <= alpha * ls(n) + beta + 1e-9, "n = {n}");
    }
}

#[test]
fn oracle_labellings_pass_the_checker() {
    let cases = [
        (grid("vertex-colouring", Params::with_k(3)), 3, true),
        (grid("vertex-colouring", Params::with_k(2)), 4, true),
        (grid("vertex-colouring", Params::with_k(2)), 3, false),
        (grid("edge-colouring", Params::with_k(4)), 3, false),
        (grid("edge-colouring", Params::with_k(4)), 4, true),
        (grid("x-orientation", Params::with_set([1, 3])), 3, false),
        (grid("x-orientation", Params::with_set([1, 3])), 4, true),
    ];
    for (p, n, feasible) in cases {
        let got = brute_force_solve(&p, n, false).unwrap();
        assert_eq!(got.is_some(), feasible, "{} n={n}", p.name());
        if let Some(g) = got {
            assert!(check_grid(&p, &g).is_empty());
        }
    }
}
