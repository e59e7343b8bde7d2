//! Round-counted LOCAL-model execution on oriented toroidal grids:
//! identifiers, MIS of the grid's `k`-th power, Voronoi local coordinates,
//! normal-form algorithms, and an exact brute-force oracle.

pub mod symmetry;

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lcl::{Axis, GridLcl, Label, LabelledGrid};
use crate::sat::{CnfInstance, InternalSolver, SatBackend, SatResult};
use crate::synth::NormalFormAlgorithm;
use symmetry::TorusPower;

/// Identifiers are drawn injectively from `1..=ID_FACTOR · n²`.
pub const ID_FACTOR: u64 = 8;

/// Largest instance the oracle searches without being forced.
pub const ORACLE_GUARD: usize = 64;

/// Least `i` with `tower(i) ≥ n`, where `tower(0) = 1` and
/// `tower(i + 1) = 2^tower(i)`.
pub fn logstar(n: u64) -> u32 {
    let mut tower: u64 = 1;
    let mut i = 0;
    while tower < n {
        i += 1;
        if tower >= 64 {
            return i;
        }
        tower = 1 << tower;
    }
    i
}

/// `n × n` torus with identifiers in row-major order; row `i + 1` is north
/// of row `i` and column `j + 1` east of column `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridInstance {
    pub n: usize,
    pub ids: Vec<u64>,
}

impl GridInstance {
    pub fn id_bound(&self) -> u64 {
        ID_FACTOR * (self.n * self.n) as u64 + 1
    }
}

pub fn make_instance(n: usize, seed: u64) -> Result<GridInstance> {
    if n < 3 {
        return Err(Error::GridTooSmall { n, min: 3 });
    }
    let cells = n * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids = rand::seq::index::sample(&mut rng, ID_FACTOR as usize * cells, cells)
        .into_iter()
        .map(|i| i as u64 + 1)
        .collect();
    Ok(GridInstance { n, ids })
}

/// Seeded distinct identifiers for an `n`-cycle, drawn from `1..=ID_FACTOR · n`.
pub fn make_cycle_ids(n: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand::seq::index::sample(&mut rng, ID_FACTOR as usize * n.max(1), n).into_iter().map(|i| i as u64 + 1).collect()
}

fn torus_offset(n: usize, from: usize, to: usize) -> i64 {
    let d = (to + n - from) % n;
    if d <= n / 2 {
        d as i64
    } else {
        d as i64 - n as i64
    }
}

/// L1 distance on the `n × n` torus between row-major indices.
pub fn torus_distance(n: usize, a: usize, b: usize) -> usize {
    let dr = torus_offset(n, a / n, b / n).unsigned_abs() as usize;
    let dc = torus_offset(n, a % n, b % n).unsigned_abs() as usize;
    dr + dc
}

/// Cells within L1 distance `radius`, as wrapped row-major indices.
fn ball(n: usize, v: usize, radius: usize) -> impl Iterator<Item = usize> {
    let (r, c) = ((v / n) as i64, (v % n) as i64);
    let (n_i, k) = (n as i64, radius as i64);
    (-k..=k).flat_map(move |dr| {
        let w = k - dr.abs();
        (-w..=w).map(move |dc| ((r + dr).rem_euclid(n_i) * n_i + (c + dc).rem_euclid(n_i)) as usize)
    })
}

/// A maximal independent set of the torus's `k`-th power.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnchorSet {
    pub n: usize,
    pub k: usize,
    pub members: Vec<bool>,
    pub rounds_used: usize,
    pub phases: Vec<(String, usize)>,
}

impl AnchorSet {
    /// Wraps and checks a given membership vector.
    pub fn from_members(n: usize, k: usize, members: Vec<bool>) -> Result<Self> {
        let set = Self { n, k, members, rounds_used: 0, phases: Vec::new() };
        set.validate()?;
        Ok(set)
    }

    pub fn anchors(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().enumerate().filter(|(_, &m)| m).map(|(v, _)| v)
    }

    /// Full scan: members pairwise more than `k` apart, every cell within `k` of one.
    pub fn validate(&self) -> Result<()> {
        let (n, k) = (self.n, self.k);
        if self.members.len() != n * n {
            return Err(Error::InvalidAnchors(format!("{} cells for a {n}x{n} torus", self.members.len())));
        }
        if n < 2 * k + 2 {
            return Err(Error::InvalidAnchors(format!("torus side {n} below {} for k = {k}", 2 * k + 2)));
        }
        let bad = (0..n * n).into_par_iter().find_map_any(|v| {
            let near = ball(n, v, k).filter(|&w| self.members[w]).count();
            if self.members[v] && near > 1 {
                Some(format!("anchor at {} has another within distance {k}", v))
            } else if near == 0 {
                Some(format!("cell {} is farther than {k} from every anchor", v))
            } else {
                None
            }
        });
        bad.map_or(Ok(()), |m| Err(Error::InvalidAnchors(m)))
    }
}

/// Deterministic round-counted MIS of the torus's `k`-th power.
pub fn distributed_mis_power(inst: &GridInstance, k: usize, strategy: &str) -> Result<AnchorSet> {
    let topo = TorusPower::new(inst.n, k)?;
    let run = symmetry::strategy(strategy)?.mis(&topo, &inst.ids, inst.id_bound());
    let set = AnchorSet { n: inst.n, k, rounds_used: run.rounds(), members: run.members, phases: run.phases };
    set.validate()?;
    Ok(set)
}

/// Nearest anchor per cell (ties to the smaller anchor identifier) and the
/// cell's offset `(north, east)` from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Voronoi {
    pub n: usize,
    pub anchor: Vec<usize>,
    pub local: Vec<(i64, i64)>,
}

impl Voronoi {
    /// Largest L1 length of a local coordinate.
    pub fn tile_radius(&self) -> usize {
        self.local.iter().map(|&(a, b)| (a.abs() + b.abs()) as usize).max().unwrap_or(0)
    }

    /// True when no two distinct cells within `radius` of a common cell share
    /// a local coordinate.
    pub fn unique_within(&self, radius: usize) -> bool {
        let n = self.n;
        (0..n * n).into_par_iter().all(|v| {
            let mut seen = HashMap::new();
            ball(n, v, radius).all(|w| seen.insert(self.local[w], w).is_none_or(|prev| prev == w))
        })
    }
}

pub fn voronoi_local_ids(inst: &GridInstance, anchors: &AnchorSet) -> Result<Voronoi> {
    anchors.validate()?;
    let n = inst.n;
    if anchors.n != n {
        return Err(Error::InvalidAnchors(format!("anchor set for n = {} on n = {n}", anchors.n)));
    }
    let (anchor, local): (Vec<usize>, Vec<(i64, i64)>) = (0..n * n)
        .into_par_iter()
        .map(|v| {
            let a = ball(n, v, anchors.k)
                .filter(|&w| anchors.members[w])
                .min_by_key(|&w| (torus_distance(n, v, w), inst.ids[w]))
                .expect("validated anchor sets cover every cell");
            (a, (torus_offset(n, a / n, v / n), torus_offset(n, a % n, v % n)))
        })
        .unzip();
    Ok(Voronoi { n, anchor, local })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundTrace {
    pub algorithm: String,
    pub n: usize,
    pub rounds: usize,
    pub phases: Vec<(String, usize)>,
}

/// Rounds for a node to read a `rows × cols` window holding it at `offset`.
pub fn window_radius(rows: usize, cols: usize, offset: (usize, usize)) -> usize {
    offset.0.max(rows - 1 - offset.0) + offset.1.max(cols - 1 - offset.1)
}

/// Anchors from the MIS of the `k`-th power, then one table lookup per node
/// on the anchor window around it.
pub fn run_normal_form(
    alg: &NormalFormAlgorithm,
    inst: &GridInstance,
    strategy: &str,
) -> Result<(LabelledGrid, RoundTrace)> {
    let n = inst.n;
    if n < alg.min_n {
        return Err(Error::GridTooSmall { n, min: alg.min_n });
    }
    let anchors = distributed_mis_power(inst, alg.k, strategy)?;
    let table = alg.lookup_table();
    let (rows, cols) = (alg.rows, alg.cols);
    let (o_r, o_c) = alg.anchor_offset;
    let cells = (0..n * n)
        .into_par_iter()
        .map(|v| {
            let (r, c) = (v / n, v % n);
            let words: Vec<u32> = (0..rows)
                .map(|i| {
                    let gr = (r + n + i - o_r) % n;
                    (0..cols).fold(0u32, |w, j| {
                        let gc = (c + n + j - o_c) % n;
                        (w << 1) | u32::from(anchors.members[gr * n + gc])
                    })
                })
                .collect();
            table.get(&words).copied().ok_or_else(|| {
                let bits: String = words
                    .iter()
                    .map(|w| (0..cols).rev().map(|j| if w >> j & 1 == 1 { '1' } else { '0' }).collect::<String>())
                    .collect();
                Error::MissingTile(bits)
            })
        })
        .collect::<Result<Vec<Label>>>()?;
    let grid = LabelledGrid::new(n, cells)?;
    let mut phases = anchors.phases.clone();
    let lookup = window_radius(rows, cols, alg.anchor_offset);
    phases.push(("window-lookup".to_string(), lookup));
    let trace = RoundTrace {
        algorithm: format!("{} (k={}, {}x{})", alg.problem.name(), alg.k, rows, cols),
        n,
        rounds: anchors.rounds_used + lookup,
        phases,
    };
    Ok((grid, trace))
}

/// Exact search for a labelling of the `n × n` torus. `None` proves that
/// no labelling exists.
pub fn brute_force_solve(p: &GridLcl, n: usize, force: bool) -> Result<Option<LabelledGrid>> {
    if n < 2 {
        return Err(Error::GridTooSmall { n, min: 2 });
    }
    let cells = n * n;
    if cells > ORACLE_GUARD && !force {
        return Err(Error::OracleGuard { cells, guard: ORACLE_GUARD });
    }
    let q = p.alphabet().len();
    let var = |cell: usize, l: usize| (cell * q + l + 1) as i32;
    let mut cnf = CnfInstance::new(cells * q);
    for cell in 0..cells {
        cnf.add_clause((0..q).map(|l| var(cell, l)))?;
        for a in 0..q {
            for b in a + 1..q {
                cnf.add_clause([-var(cell, a), -var(cell, b)])?;
            }
        }
    }
    for cell in 0..cells {
        let (r, c) = (cell / n, cell % n);
        let east = r * n + (c + 1) % n;
        let north = ((r + 1) % n) * n + c;
        for (other, axis) in [(east, Axis::Horizontal), (north, Axis::Vertical)] {
            for a in 0..q as Label {
                for b in 0..q as Label {
                    if p.allows(axis, a, b) {
                        continue;
                    }
                    let (x, y) = (var(cell, a as usize), var(other, b as usize));
                    if x == y {
                        cnf.add_clause([-x])?;
                    } else {
                        cnf.add_clause([-x, -y])?;
                    }
                }
            }
        }
    }
    match InternalSolver::default().solve(&cnf)? {
        SatResult::Unsat => Ok(None),
        SatResult::Sat(model) => {
            let labels = (0..cells)
                .map(|cell| (0..q).find(|&l| model[var(cell, l) as usize]).expect("at-least-one clause") as Label)
                .collect();
            Ok(Some(LabelledGrid::new(n, labels)?))
        }
    }
}
