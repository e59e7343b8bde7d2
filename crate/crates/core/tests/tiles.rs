use std::collections::HashSet;

use lclgrid::sat::{CnfInstance, InternalSolver, SatBackend};
use lclgrid::sim::{distributed_mis_power, make_instance, symmetry::DEFAULT_STRATEGY};
use lclgrid::synth::DimSchedule;
use lclgrid::tiles::{build_tile_graph, enumerate_tiles, is_tile, Tile};

/// Extendability by SAT: some independent anchor placement on the ring of
/// width `k` around the window dominates every window cell.
fn extendable(k: usize, rows: usize, cols: usize, mask: u64) -> bool {
    let k = k as i64;
    let (r, c) = (rows as i64, cols as i64);
    let inside = |p: (i64, i64)| (0..r).contains(&p.0) && (0..c).contains(&p.1);
    let fixed = |p: (i64, i64)| mask >> (p.0 * c + p.1) & 1 == 1;
    let cells: Vec<(i64, i64)> = (-k..r + k).flat_map(|i| (-k..c + k).map(move |j| (i, j))).collect();
    let ring: Vec<(i64, i64)> = cells.iter().copied().filter(|&p| !inside(p)).collect();
    let var = |p: (i64, i64)| ring.iter().position(|&q| q == p).map(|i| i as i32 + 1);
    let d = |a: (i64, i64), b: (i64, i64)| (a.0 - b.0).abs() + (a.1 - b.1).abs();
    let window_anchors: Vec<(i64, i64)> = cells.iter().copied().filter(|&p| inside(p) && fixed(p)).collect();
    for (i, &a) in window_anchors.iter().enumerate() {
        if window_anchors[i + 1..].iter().any(|&b| d(a, b) <= k) {
            return false;
        }
    }
    let mut cnf = CnfInstance::new(ring.len());
    for (i, &a) in ring.iter().enumerate() {
        if window_anchors.iter().any(|&w| d(a, w) <= k) {
            cnf.add_clause([-(i as i32 + 1)]).unwrap();
        }
        for &b in &ring[i + 1..] {
            if d(a, b) <= k {
                cnf.add_clause([-(i as i32 + 1), -var(b).unwrap()]).unwrap();
            }
        }
    }
    for &p in cells.iter().filter(|&&p| inside(p)) {
        if window_anchors.iter().any(|&w| d(p, w) <= k) {
            continue;
        }
        let near: Vec<i32> = ring.iter().filter(|&&q| d(p, q) <= k).map(|&q| var(q).unwrap()).collect();
        if near.is_empty() {
            return false;
        }
        cnf.add_clause(near).unwrap();
    }
    InternalSolver::default().solve(&cnf).unwrap().is_sat()
}

#[test]
fn enumeration_matches_brute_force_filter() {
    for k in 1..=2 {
        for rows in 1..=3 {
            for cols in 1..=3 {
                let got: HashSet<String> =
                    enumerate_tiles(k, rows, cols).unwrap().iter().map(Tile::bitstring).collect();
                let want: HashSet<String> = (0..1u64 << (rows * cols))
                    .filter(|&m| extendable(k, rows, cols, m))
                    .map(|m| (0..rows * cols).map(|i| if m >> i & 1 == 1 { '1' } else { '0' }).collect())
                    .collect();
                assert_eq!(got, want, "k={k} {rows}x{cols}");
            }
        }
    }
}

#[test]
fn sub_windows_of_tiles_are_tiles() {
    for (k, rows, cols) in [(1, 3, 3), (2, 5, 4)] {
        for t in enumerate_tiles(k, rows, cols).unwrap() {
            for (r, c) in [(rows - 1, cols), (rows, cols - 1)] {
                for r0 in 0..=rows - r {
                    for c0 in 0..=cols - c {
                        assert!(is_tile(k, &t.sub(r0, c0, r, c)), "{t:?}");
                    }
                }
            }
        }
    }
}

fn window(members: &[bool], n: usize, r0: usize, c0: usize, rows: usize, cols: usize) -> Tile {
    Tile::from_fn(rows, cols, |i, j| members[((r0 + i) % n) * n + (c0 + j) % n]).unwrap()
}

#[test]
fn windows_of_a_real_mis_are_tiles_and_glue_along_edges() {
    for (k, n) in [(1, 16), (3, 32)] {
        let inst = make_instance(n, 7).unwrap();
        let anchors = distributed_mis_power(&inst, k, DEFAULT_STRATEGY).unwrap();
        for (rows, cols) in DimSchedule::Default.dims(k) {
            let tg = build_tile_graph(k, rows, cols).unwrap();
            let horizontal: HashSet<(usize, usize)> = tg.horizontal.iter().copied().collect();
            let vertical: HashSet<(usize, usize)> = tg.vertical.iter().copied().collect();
            let at = |r: usize, c: usize| {
                let t = window(&anchors.members, n, r, c, rows, cols);
                assert!(is_tile(k, &t), "k={k} window at ({r},{c}) is not a tile");
                tg.index_of(&t).expect("every tile is a graph node")
            };
            for r in 0..n {
                for c in 0..n {
                    let here = at(r, c);
                    assert!(horizontal.contains(&(here, at(r, (c + 1) % n))), "k={k} east gluing at ({r},{c})");
                    assert!(vertical.contains(&(here, at((r + 1) % n, c))), "k={k} north gluing at ({r},{c})");
                }
            }
        }
    }
}
