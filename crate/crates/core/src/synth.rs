//! Synthesis of normal-form algorithms: anchors from an MIS of the grid's
//! `k`-th power, followed by a finite lookup table from anchor windows to
//! output labels. The table is found by labelling the tile neighbourhood
//! graph so that every edge carries an allowed label pair.

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lcl::{parse_problem, serialize_problem, Axis, GridLcl, Label, Problem};
use crate::sat::{CnfInstance, SatBackend, SatResult};
use crate::tiles::{build_tile_graph, Tile, TileGraph};

/// One-hot CSP encoding: variable `x(t, ℓ)` says tile `t` outputs label `ℓ`.
#[derive(Clone, Debug)]
pub struct CspInstance {
    pub cnf: CnfInstance,
    pub num_tiles: usize,
    pub num_labels: usize,
}

impl CspInstance {
    pub fn var(&self, tile: usize, label: Label) -> i32 {
        (tile * self.num_labels + label as usize + 1) as i32
    }
}

fn forbidden_pairs(p: &GridLcl, axis: Axis) -> Vec<(Label, Label)> {
    let q = p.alphabet().len() as Label;
    (0..q).flat_map(|a| (0..q).map(move |b| (a, b))).filter(|&(a, b)| !p.allows(axis, a, b)).collect()
}

/// How the tile-graph CSP is turned into clauses. Every encoding uses the
/// same one-hot table variables, so models decode identically.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CspEncoding {
    /// `Direct` unless its clause count exceeds [`DIRECT_CLAUSE_BUDGET`].
    #[default]
    Auto,
    /// Pairwise at-most-one and one binary blocking clause per forbidden pair.
    Direct,
    /// Sequential-counter at-most-one; edge constraints through per-tile
    /// auxiliaries, one per class of labels with the same allowed partners.
    Compact,
}

pub const DIRECT_CLAUSE_BUDGET: usize = 2_000_000;

pub fn direct_clause_count(tg: &TileGraph, p: &GridLcl) -> usize {
    let l = p.alphabet().len();
    let edge_clauses: usize = [(&tg.horizontal, Axis::Horizontal), (&tg.vertical, Axis::Vertical)]
        .into_iter()
        .map(|(edges, axis)| edges.len() * forbidden_pairs(p, axis).len())
        .sum();
    tg.nodes.len() * (1 + l * (l - 1) / 2) + edge_clauses
}

pub fn encode_csp(tg: &TileGraph, p: &GridLcl) -> Result<CspInstance> {
    encode_csp_with(tg, p, CspEncoding::Direct)
}

pub fn encode_csp_with(tg: &TileGraph, p: &GridLcl, encoding: CspEncoding) -> Result<CspInstance> {
    if tg.nodes.is_empty() {
        return Err(Error::Precondition("tile graph has no nodes".into()));
    }
    let num_labels = p.alphabet().len();
    let num_tiles = tg.nodes.len();
    let mut csp = CspInstance { cnf: CnfInstance::new(num_tiles * num_labels), num_tiles, num_labels };
    let compact = match encoding {
        CspEncoding::Auto => direct_clause_count(tg, p) > DIRECT_CLAUSE_BUDGET,
        CspEncoding::Direct => false,
        CspEncoding::Compact => true,
    };
    if compact {
        encode_compact(&mut csp, p, tg)?;
        return Ok(csp);
    }
    for t in 0..num_tiles {
        let vars: Vec<i32> = (0..num_labels as Label).map(|l| csp.var(t, l)).collect();
        csp.cnf.add_clause(vars.iter().copied())?;
        for (i, &a) in vars.iter().enumerate() {
            for &b in &vars[i + 1..] {
                csp.cnf.add_clause([-a, -b])?;
            }
        }
    }
    for (edges, axis) in [(&tg.horizontal, Axis::Horizontal), (&tg.vertical, Axis::Vertical)] {
        let forbidden = forbidden_pairs(p, axis);
        for &(t1, t2) in edges {
            for &(a, b) in &forbidden {
                if t1 == t2 && a != b {
                    // already excluded by at-most-one
                    continue;
                }
                let (x, y) = (csp.var(t1, a), csp.var(t2, b));
                if x == y {
                    csp.cnf.add_clause([-x])?;
                } else {
                    csp.cnf.add_clause([-x, -y])?;
                }
            }
        }
    }
    Ok(csp)
}

fn at_most_one_sequential(cnf: &mut CnfInstance, vars: &[i32]) -> Result<()> {
    let Some((&last, init)) = vars.split_last() else { return Ok(()) };
    let mut prev: Option<i32> = None;
    for &x in init {
        let s = cnf.new_var();
        cnf.add_clause([-x, s])?;
        if let Some(p) = prev {
            cnf.add_clause([-p, s])?;
            cnf.add_clause([-x, -p])?;
        }
        prev = Some(s);
    }
    if let Some(p) = prev {
        cnf.add_clause([-last, -p])?;
    }
    Ok(())
}

const COMBINATION_LIMIT: usize = 1 << 20;

/// Label sets read off the constraints. Per axis, labels are grouped into
/// classes with equal allowed-partner sets; every class and partner set
/// becomes a per-tile auxiliary meaning "the tile's label lies in the set".
struct LabelStructure {
    sets: Vec<Vec<Label>>,
    /// Per axis: (class set, partner set) pairs and whether the classes
    /// cover the alphabet.
    rules: Vec<(Axis, Vec<(usize, usize)>, bool)>,
    disjoint: Vec<(usize, usize)>,
    /// Families of pairwise disjoint sets covering the alphabet.
    partitions: Vec<Vec<usize>>,
    /// Labels singled out by their partition members.
    defining: Vec<(Label, Vec<usize>)>,
    /// The partition clauses alone imply exactly one label per tile.
    factored: bool,
}

impl LabelStructure {
    fn new(p: &GridLcl) -> Self {
        let q = p.alphabet().len() as Label;
        let mut sets: Vec<Vec<Label>> = Vec::new();
        let mut index: HashMap<Vec<Label>, usize> = HashMap::new();
        let mut intern = |set: Vec<Label>| -> usize {
            *index.entry(set.clone()).or_insert_with(|| {
                sets.push(set);
                sets.len() - 1
            })
        };
        let mut rules = Vec::new();
        let mut families: Vec<Vec<usize>> = Vec::new();
        for axis in [Axis::Horizontal, Axis::Vertical] {
            let mut classes: BTreeMap<Vec<Label>, Vec<Label>> = BTreeMap::new();
            for a in 0..q {
                let partners: Vec<Label> = (0..q).filter(|&b| p.allows(axis, a, b)).collect();
                if partners.len() < q as usize {
                    classes.entry(partners).or_default().push(a);
                }
            }
            let covers = classes.values().map(Vec::len).sum::<usize>() == q as usize;
            let pairs: Vec<(usize, usize)> =
                classes.into_iter().map(|(partners, members)| (intern(members), intern(partners))).collect();
            families.push(pairs.iter().map(|&(c, _)| c).collect());
            families.push(pairs.iter().map(|&(_, s)| s).collect());
            rules.push((axis, pairs, covers));
        }
        let is_disjoint = |i: usize, j: usize| sets[i].iter().all(|l| !sets[j].contains(l));
        let disjoint: Vec<(usize, usize)> = (0..sets.len())
            .flat_map(|i| (i + 1..sets.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| !sets[i].is_empty() && !sets[j].is_empty() && is_disjoint(i, j))
            .collect();
        let mut partitions: Vec<Vec<usize>> = Vec::new();
        for mut f in families {
            f.sort_unstable();
            f.dedup();
            let size: usize = f.iter().map(|&i| sets[i].len()).sum();
            let pairwise = f.iter().enumerate().all(|(x, &i)| f[x + 1..].iter().all(|&j| is_disjoint(i, j)));
            if !f.is_empty() && size == q as usize && pairwise && !partitions.contains(&f) {
                partitions.push(f);
            }
        }
        let defining: Vec<(Label, Vec<usize>)> = (0..q)
            .filter_map(|l| {
                let holders: Vec<usize> =
                    partitions.iter().filter_map(|f| f.iter().copied().find(|&i| sets[i].contains(&l))).collect();
                let unique = (0..q).filter(|&m| holders.iter().all(|&i| sets[i].contains(&m))).count() == 1;
                unique.then_some((l, holders))
            })
            .collect();
        let mut s = LabelStructure { sets, rules, disjoint, partitions, defining, factored: false };
        s.factored = s.defining.len() == q as usize && s.combinations_name_labels();
        s
    }

    /// True when every choice of one member per partition that avoids the
    /// disjointness clauses intersects to a label.
    fn combinations_name_labels(&self) -> bool {
        fn walk(s: &LabelStructure, chosen: &mut Vec<usize>, budget: &mut usize) -> bool {
            if *budget == 0 {
                return false;
            }
            *budget -= 1;
            let Some(family) = s.partitions.get(chosen.len()) else {
                let first = &s.sets[chosen[0]];
                return first.iter().any(|l| chosen.iter().all(|&i| s.sets[i].contains(l)));
            };
            for &m in family {
                if chosen.iter().any(|&c| s.disjoint.contains(&(c.min(m), c.max(m)))) {
                    continue;
                }
                chosen.push(m);
                let ok = walk(s, chosen, budget);
                chosen.pop();
                if !ok {
                    return false;
                }
            }
            true
        }
        let mut budget = COMBINATION_LIMIT;
        !self.partitions.is_empty() && walk(self, &mut Vec::new(), &mut budget)
    }
}

/// Compact encoding over the label structure. Clauses among auxiliaries of
/// one tile (disjoint sets exclude each other, partitions have a true
/// member, a label singled out by its partition members is forced by them)
/// are implied; when they pin down exactly one label the one-hot clauses on
/// the table variables are left out.
fn encode_compact(csp: &mut CspInstance, p: &GridLcl, tg: &TileGraph) -> Result<()> {
    let st = LabelStructure::new(p);
    let q = csp.num_labels as Label;
    let mut aux: Vec<Vec<i32>> = Vec::with_capacity(csp.num_tiles);
    for t in 0..csp.num_tiles {
        let labels: Vec<i32> = (0..q).map(|l| csp.var(t, l)).collect();
        if !st.factored {
            csp.cnf.add_clause(labels.iter().copied())?;
            at_most_one_sequential(&mut csp.cnf, &labels)?;
        }
        let mut vars = Vec::with_capacity(st.sets.len());
        for set in &st.sets {
            let u = csp.cnf.new_var();
            let clause: Vec<i32> = std::iter::once(-u).chain(set.iter().map(|&l| labels[l as usize])).collect();
            csp.cnf.add_clause(clause)?;
            for &l in set {
                csp.cnf.add_clause([-labels[l as usize], u])?;
            }
            vars.push(u);
        }
        for &(i, j) in &st.disjoint {
            csp.cnf.add_clause([-vars[i], -vars[j]])?;
        }
        for f in &st.partitions {
            csp.cnf.add_clause(f.iter().map(|&i| vars[i]))?;
        }
        for (l, holders) in &st.defining {
            let clause: Vec<i32> =
                holders.iter().map(|&i| -vars[i]).chain(std::iter::once(labels[*l as usize])).collect();
            csp.cnf.add_clause(clause)?;
        }
        aux.push(vars);
    }
    for (axis, pairs, covers) in &st.rules {
        let edges = if *axis == Axis::Horizontal { &tg.horizontal } else { &tg.vertical };
        for &(t1, t2) in edges {
            for &(class, partners) in pairs {
                csp.cnf.add_clause([-aux[t1][class], aux[t2][partners]])?;
                if *covers {
                    // t1's class must list t2's label among its partners
                    let support = pairs
                        .iter()
                        .filter(|&&(_, other)| st.sets[other].iter().any(|l| st.sets[partners].contains(l)))
                        .map(|&(c, _)| aux[t1][c]);
                    let clause: Vec<i32> = std::iter::once(-aux[t2][partners]).chain(support).collect();
                    csp.cnf.add_clause(clause)?;
                }
            }
        }
    }
    Ok(())
}

/// Reads the table off a model and re-checks every tile-graph edge.
pub fn decode_table(tg: &TileGraph, p: &GridLcl, csp: &CspInstance, model: &[bool]) -> Result<Vec<Label>> {
    let table = (0..csp.num_tiles)
        .map(|t| {
            let chosen: Vec<Label> = (0..csp.num_labels as Label).filter(|&l| model[csp.var(t, l) as usize]).collect();
            match chosen.as_slice() {
                [l] => Ok(*l),
                _ => Err(Error::Precondition(format!("tile {t} has {} labels in the model", chosen.len()))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    verify_table(tg, p, &table)?;
    Ok(table)
}

pub fn verify_table(tg: &TileGraph, p: &GridLcl, table: &[Label]) -> Result<()> {
    if table.len() != tg.nodes.len() {
        return Err(Error::Precondition("table does not cover every tile".into()));
    }
    for (edges, axis) in [(&tg.horizontal, Axis::Horizontal), (&tg.vertical, Axis::Vertical)] {
        for &(a, b) in edges {
            if !p.allows(axis, table[a], table[b]) {
                return Err(Error::Precondition(format!(
                    "{axis:?} edge {} -> {} gets disallowed pair",
                    tg.nodes[a].bitstring(),
                    tg.nodes[b].bitstring()
                )));
            }
        }
    }
    Ok(())
}

/// Normal-form algorithm: anchors form an MIS of the grid's `k`-th power;
/// each node reads the `rows × cols` anchor window whose cell
/// `anchor_offset` is the node itself and outputs `table[window]`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormAlgorithm {
    pub problem: GridLcl,
    pub k: usize,
    pub rows: usize,
    pub cols: usize,
    pub anchor_offset: (usize, usize),
    pub min_n: usize,
    pub table: BTreeMap<Tile, Label>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgorithmDoc {
    problem: serde_json::Value,
    k: usize,
    rows: usize,
    cols: usize,
    anchor_offset: (usize, usize),
    min_n: usize,
    table: BTreeMap<String, String>,
}

impl NormalFormAlgorithm {
    pub fn min_n_for(k: usize, rows: usize, cols: usize) -> usize {
        rows.max(cols) + 2 * k + 2
    }

    pub fn to_json(&self) -> String {
        let problem: serde_json::Value = serde_json::from_str(&serialize_problem(&Problem::Grid(self.problem.clone())))
            .expect("problem documents are valid JSON");
        let a = self.problem.alphabet();
        let doc = AlgorithmDoc {
            problem,
            k: self.k,
            rows: self.rows,
            cols: self.cols,
            anchor_offset: self.anchor_offset,
            min_n: self.min_n,
            table: self.table.iter().map(|(t, &l)| (t.bitstring(), a.name(l).to_string())).collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("algorithm documents always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: AlgorithmDoc = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        let problem = parse_problem(&doc.problem.to_string())?.into_grid()?;
        if doc.anchor_offset.0 >= doc.rows || doc.anchor_offset.1 >= doc.cols {
            return Err(Error::Malformed("anchor offset outside the window".into()));
        }
        let table = doc
            .table
            .iter()
            .map(|(bits, label)| {
                Ok((Tile::from_bitstring(doc.rows, doc.cols, bits)?, problem.alphabet().lookup(label)?))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(Self {
            problem,
            k: doc.k,
            rows: doc.rows,
            cols: doc.cols,
            anchor_offset: doc.anchor_offset,
            min_n: doc.min_n,
            table,
        })
    }

    /// Lookup keyed by the row words of a window.
    pub fn lookup_table(&self) -> HashMap<Vec<u32>, Label> {
        self.table.iter().map(|(t, &l)| (t.row_words().to_vec(), l)).collect()
    }
}

/// Window dimensions tried for each `k`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum DimSchedule {
    /// `(2k+1, 2k−1)` (for `k ≥ 2`), `(2k+1, 2k)`, `(2k+1, 2k+1)`.
    #[default]
    Default,
    Fixed(Vec<(usize, usize)>),
}

impl DimSchedule {
    pub fn dims(&self, k: usize) -> Vec<(usize, usize)> {
        match self {
            DimSchedule::Default => {
                let mut out = Vec::new();
                if k >= 2 {
                    out.push((2 * k + 1, 2 * k - 1));
                }
                out.push((2 * k + 1, 2 * k));
                out.push((2 * k + 1, 2 * k + 1));
                out
            }
            DimSchedule::Fixed(d) => d.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Attempt {
    pub k: usize,
    pub rows: usize,
    pub cols: usize,
    pub encoding: CspEncoding,
    pub tiles: usize,
    pub horizontal_edges: usize,
    pub vertical_edges: usize,
    pub variables: usize,
    pub clauses: usize,
    pub satisfiable: bool,
    pub millis: u128,
}

#[derive(Clone, Debug)]
pub enum SynthesisOutcome {
    Found(NormalFormAlgorithm),
    /// No table at any scheduled `(k, dims)` up to `max_k`. This is not a
    /// proof that the problem is global.
    Exhausted {
        max_k: usize,
    },
}

#[derive(Clone, Debug)]
pub struct Synthesis {
    pub outcome: SynthesisOutcome,
    pub attempts: Vec<Attempt>,
}

/// Solves the tile-graph CSP for one `(k, rows, cols)`.
pub fn try_dims(
    p: &GridLcl,
    k: usize,
    rows: usize,
    cols: usize,
    backend: &dyn SatBackend,
    encoding: CspEncoding,
) -> Result<(Attempt, Option<NormalFormAlgorithm>)> {
    let start = Instant::now();
    let tg = build_tile_graph(k, rows, cols)?;
    let compact = encoding == CspEncoding::Compact
        || (encoding == CspEncoding::Auto && direct_clause_count(&tg, p) > DIRECT_CLAUSE_BUDGET);
    let encoding = if compact { CspEncoding::Compact } else { CspEncoding::Direct };
    let csp = encode_csp_with(&tg, p, encoding)?;
    let result = backend.solve(&csp.cnf)?;
    let algorithm = match &result {
        SatResult::Sat(model) => {
            let labels = decode_table(&tg, p, &csp, model)?;
            Some(NormalFormAlgorithm {
                problem: p.clone(),
                k,
                rows,
                cols,
                anchor_offset: (rows / 2, cols / 2),
                min_n: NormalFormAlgorithm::min_n_for(k, rows, cols),
                table: tg.nodes.iter().cloned().zip(labels).collect(),
            })
        }
        SatResult::Unsat => None,
    };
    let attempt = Attempt {
        k,
        rows,
        cols,
        encoding,
        tiles: tg.nodes.len(),
        horizontal_edges: tg.horizontal.len(),
        vertical_edges: tg.vertical.len(),
        variables: csp.cnf.num_vars(),
        clauses: csp.cnf.clauses().len(),
        satisfiable: result.is_sat(),
        millis: start.elapsed().as_millis(),
    };
    Ok((attempt, algorithm))
}

/// Tries `k = 1..=max_k`, each over the scheduled window dimensions, and
/// returns the first table found.
pub fn synthesize(p: &GridLcl, max_k: usize, schedule: &DimSchedule, backend: &dyn SatBackend) -> Result<Synthesis> {
    synthesize_with(p, max_k, schedule, backend, CspEncoding::Auto)
}

pub fn synthesize_with(
    p: &GridLcl,
    max_k: usize,
    schedule: &DimSchedule,
    backend: &dyn SatBackend,
    encoding: CspEncoding,
) -> Result<Synthesis> {
    let mut attempts = Vec::new();
    for k in 1..=max_k {
        for (rows, cols) in schedule.dims(k) {
            let (attempt, algorithm) = try_dims(p, k, rows, cols, backend, encoding)?;
            attempts.push(attempt);
            if let Some(alg) = algorithm {
                return Ok(Synthesis { outcome: SynthesisOutcome::Found(alg), attempts });
            }
        }
    }
    Ok(Synthesis { outcome: SynthesisOutcome::Exhausted { max_k }, attempts })
}

/// A label that may fill the whole grid, if any (first by name).
pub fn triviality_check(p: &GridLcl) -> Option<Label> {
    let a = p.alphabet();
    (0..a.len() as Label)
        .filter(|&l| p.allows(Axis::Horizontal, l, l) && p.allows(Axis::Vertical, l, l))
        .min_by(|&x, &y| a.name(x).cmp(a.name(y)))
}

/// The zero-round algorithm writing `label` everywhere, as a `k = 1` table.
pub fn constant_algorithm(p: &GridLcl, label: Label) -> Result<NormalFormAlgorithm> {
    let (rows, cols) = DimSchedule::Default.dims(1)[0];
    let tg = build_tile_graph(1, rows, cols)?;
    let table: Vec<Label> = vec![label; tg.nodes.len()];
    verify_table(&tg, p, &table)?;
    Ok(NormalFormAlgorithm {
        problem: p.clone(),
        k: 1,
        rows,
        cols,
        anchor_offset: (rows / 2, cols / 2),
        min_n: NormalFormAlgorithm::min_n_for(1, rows, cols),
        table: tg.nodes.into_iter().zip(table).collect(),
    })
}
