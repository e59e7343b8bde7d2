//! Problems on directed cycles: the output-neighbourhood graph, flexibility,
//! the constant / log* / global classification, and the anchor-and-circuit
//! algorithm for log* problems.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lcl::{parse_problem, serialize_problem, CycleLcl, Label, Problem};
use crate::sim::symmetry::{self, CyclePower, MisRun};

/// Nodes are length-`2r` sequences; `(u, v)` is an edge when some allowed
/// window has prefix `u` and suffix `v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighbourhoodGraphH {
    pub radius: usize,
    pub nodes: Vec<Vec<Label>>,
    pub edges: BTreeSet<(usize, usize)>,
    succ: Vec<Vec<usize>>,
}

impl NeighbourhoodGraphH {
    pub fn index_of(&self, node: &[Label]) -> Option<usize> {
        self.nodes.binary_search_by(|n| n.as_slice().cmp(node)).ok()
    }

    pub fn successors(&self, u: usize) -> &[usize] {
        &self.succ[u]
    }

    pub fn has_self_loop(&self, u: usize) -> bool {
        self.edges.contains(&(u, u))
    }

    /// True when the closed walk `walk` (first node equals last) uses only edges of H.
    pub fn is_closed_walk(&self, walk: &[usize]) -> bool {
        walk.len() >= 2 && walk.first() == walk.last() && walk.windows(2).all(|w| self.edges.contains(&(w[0], w[1])))
    }

    /// Lengths `m` in `1..=max_len` with a closed walk of length `m` from `u`.
    pub fn closed_walk_lengths(&self, u: usize, max_len: usize) -> Vec<usize> {
        let n = self.nodes.len();
        let mut frontier = vec![false; n];
        frontier[u] = true;
        let mut out = Vec::new();
        for m in 1..=max_len {
            let mut next = vec![false; n];
            for (v, _) in frontier.iter().enumerate().filter(|(_, &f)| f) {
                for &w in &self.succ[v] {
                    next[w] = true;
                }
            }
            frontier = next;
            if frontier[u] {
                out.push(m);
            }
        }
        out
    }
}

pub fn build_h(p: &CycleLcl) -> NeighbourhoodGraphH {
    let r = p.radius();
    let mut nodes: BTreeSet<Vec<Label>> = BTreeSet::new();
    for w in p.windows() {
        nodes.insert(w[..2 * r].to_vec());
        nodes.insert(w[1..].to_vec());
    }
    let nodes: Vec<Vec<Label>> = nodes.into_iter().collect();
    let index = |s: &[Label]| nodes.binary_search_by(|n| n.as_slice().cmp(s)).expect("node was inserted");
    let edges: BTreeSet<(usize, usize)> = p.windows().iter().map(|w| (index(&w[..2 * r]), index(&w[1..]))).collect();
    let mut succ = vec![Vec::new(); nodes.len()];
    for &(a, b) in &edges {
        succ[a].push(b);
    }
    NeighbourhoodGraphH { radius: r, nodes, edges, succ }
}

/// Smallest `k` such that closed walks of every length `≥ k` from `u`
/// exist, or `None` if `u` is not flexible.
pub fn flexibility(h: &NeighbourhoodGraphH, u: usize) -> Option<usize> {
    let n = h.nodes.len();
    // closed walk lengths through u have gcd equal to the period of u's
    // strongly connected component; flexible iff that period is 1
    let lengths = h.closed_walk_lengths(u, 4 * n);
    let shortest = *lengths.first()?;
    let period = lengths.iter().fold(0, |g, &m| gcd(g, m));
    if period != 1 {
        return None;
    }
    // lengths are closed under adding `shortest`, so a run of `shortest`
    // consecutive lengths continues forever; Wielandt's bound caps its start
    let bound = (n.saturating_sub(1)).pow(2) + 1 + 2 * shortest + n;
    let lengths = h.closed_walk_lengths(u, bound);
    let mut run = 0;
    let mut prev = 0;
    for &m in &lengths {
        run = if m == prev + 1 { run + 1 } else { 1 };
        prev = m;
        if run == shortest {
            return Some(m + 1 - shortest);
        }
    }
    unreachable!("period-one component must reach a run of {shortest} lengths within {bound}")
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CycleClass {
    Constant,
    Logstar,
    Global,
    Unsolvable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    SelfLoop(usize),
    Flexible { node: usize, k: usize },
    None,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleClassification {
    pub class: CycleClass,
    pub witness: Witness,
}

pub fn classify_cycle(p: &CycleLcl) -> CycleClassification {
    classify_h(&build_h(p))
}

pub fn classify_h(h: &NeighbourhoodGraphH) -> CycleClassification {
    let n = h.nodes.len();
    if let Some(u) = (0..n).find(|&u| h.has_self_loop(u)) {
        return CycleClassification { class: CycleClass::Constant, witness: Witness::SelfLoop(u) };
    }
    // nodes are sorted, so the first minimum is the lexicographic tie-break
    let best = (0..n).filter_map(|u| flexibility(h, u).map(|k| (k, u))).min();
    if let Some((k, node)) = best {
        return CycleClassification { class: CycleClass::Logstar, witness: Witness::Flexible { node, k } };
    }
    let cyclic = (0..n).any(|u| !h.closed_walk_lengths(u, n).is_empty());
    let class = if cyclic { CycleClass::Global } else { CycleClass::Unsolvable };
    CycleClassification { class, witness: Witness::None }
}

/// Cycle lengths in `2r+1..=up_to` admitting no valid labelling.
pub fn infeasible_lengths(h: &NeighbourhoodGraphH, up_to: usize) -> Vec<usize> {
    let min = 2 * h.radius + 1;
    let mut feasible = vec![false; up_to + 1];
    for u in 0..h.nodes.len() {
        for m in h.closed_walk_lengths(u, up_to) {
            feasible[m] = true;
        }
    }
    (min..=up_to).filter(|&m| !feasible[m]).collect()
}

/// Flexible node `u` of minimum flexibility `k` and a closed walk from `u`
/// of every length `k+1..=2k+1`. Walks list nodes, first and last both `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleAlgorithm {
    pub problem: CycleLcl,
    pub u: Vec<Label>,
    pub k: usize,
    pub circuits: BTreeMap<usize, Vec<Vec<Label>>>,
}

pub fn synthesize_cycle(p: &CycleLcl) -> Result<CycleAlgorithm> {
    let h = build_h(p);
    let c = classify_h(&h);
    let (u, k) = match c.witness {
        Witness::Flexible { node, k } => (node, k),
        Witness::SelfLoop(node) => (node, 1),
        Witness::None => {
            return Err(Error::Precondition(format!("{} has no flexible node ({:?})", p.name(), c.class)));
        }
    };
    let mut circuits = BTreeMap::new();
    for len in k + 1..=2 * k + 1 {
        let walk = closed_walk(&h, u, len).ok_or_else(|| {
            Error::Precondition(format!("no closed walk of length {len} at a node of flexibility {k}"))
        })?;
        circuits.insert(len, walk.into_iter().map(|v| h.nodes[v].clone()).collect());
    }
    Ok(CycleAlgorithm { problem: p.clone(), u: h.nodes[u].clone(), k, circuits })
}

/// Breadth-first search over (node, steps taken); the smallest-index
/// predecessor is kept, so the walk is deterministic.
pub fn closed_walk(h: &NeighbourhoodGraphH, u: usize, len: usize) -> Option<Vec<usize>> {
    let n = h.nodes.len();
    let mut layers = vec![vec![None::<usize>; n]; len + 1];
    let mut reached = vec![false; n];
    reached[u] = true;
    for step in 0..len {
        let mut next = vec![false; n];
        for v in (0..n).filter(|&v| reached[v]) {
            for &w in h.successors(v) {
                if !next[w] {
                    next[w] = true;
                    layers[step + 1][w] = Some(v);
                }
            }
        }
        reached = next;
    }
    if !reached[u] {
        return None;
    }
    let mut walk = vec![u];
    let mut at = u;
    for step in (1..=len).rev() {
        at = layers[step][at].expect("reached nodes have a predecessor");
        walk.push(at);
    }
    walk.reverse();
    Some(walk)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CycleAlgorithmDoc {
    problem: serde_json::Value,
    u: String,
    k: usize,
    circuits: BTreeMap<usize, String>,
}

impl CycleAlgorithm {
    /// Circuit `len` as the label string it spells (`2r + len` symbols).
    pub fn circuit_labels(&self, len: usize) -> Option<Vec<Label>> {
        let walk = self.circuits.get(&len)?;
        let r2 = self.u.len();
        let mut out = walk[0].clone();
        out.extend(walk[1..].iter().map(|node| node[r2 - 1]));
        Some(out)
    }

    pub fn to_json(&self) -> String {
        let problem: serde_json::Value =
            serde_json::from_str(&serialize_problem(&Problem::Cycle(self.problem.clone())))
                .expect("problem documents are valid JSON");
        let doc = CycleAlgorithmDoc {
            problem,
            u: self.problem.spell(&self.u),
            k: self.k,
            circuits: self
                .circuits
                .keys()
                .map(|&len| (len, self.problem.spell(&self.circuit_labels(len).expect("key exists"))))
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("algorithm documents always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CycleAlgorithmDoc = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        let problem = parse_problem(&doc.problem.to_string())?.into_cycle()?;
        let r2 = 2 * problem.radius();
        let u = problem.read(&doc.u)?;
        if u.len() != r2 {
            return Err(Error::Malformed(format!("u must have {r2} symbols")));
        }
        let h = build_h(&problem);
        let mut circuits = BTreeMap::new();
        for (len, text) in &doc.circuits {
            let labels = problem.read(text)?;
            if labels.len() != r2 + len {
                return Err(Error::Malformed(format!("circuit {len} must spell {} symbols", r2 + len)));
            }
            let walk: Vec<Vec<Label>> = (0..=*len).map(|j| labels[j..j + r2].to_vec()).collect();
            let idx: Option<Vec<usize>> = walk.iter().map(|n| h.index_of(n)).collect();
            if walk[0] != u || !idx.is_some_and(|i| h.is_closed_walk(&i)) {
                return Err(Error::Malformed(format!("circuit {len} is not a closed walk from u")));
            }
            circuits.insert(*len, walk);
        }
        if (doc.k + 1..=2 * doc.k + 1).any(|len| !circuits.contains_key(&len)) {
            return Err(Error::Malformed("circuits must cover lengths k+1..=2k+1".into()));
        }
        Ok(Self { problem, u, k: doc.k, circuits })
    }

    pub fn min_n(&self) -> usize {
        2 * (2 * self.k + 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleRun {
    pub labels: Vec<Label>,
    pub anchors: Vec<usize>,
    pub mis: MisRun,
    /// Symmetry breaking plus the `2k + 1` rounds to see the next anchor.
    pub rounds: usize,
}

/// Anchors form an MIS of the cycle's `k`-th power; each gap of length `i`
/// between consecutive anchors is filled with circuit `i`. Position `x`
/// reached at walk step `j` outputs symbol `r` of that walk node.
pub fn run_cycle_algorithm(alg: &CycleAlgorithm, ids: &[u64], strategy: &str) -> Result<CycleRun> {
    let n = ids.len();
    let k = alg.k;
    if n < alg.min_n() {
        return Err(Error::CycleTooShort { n, min: alg.min_n() });
    }
    if ids.iter().collect::<BTreeSet<_>>().len() != n {
        return Err(Error::Precondition("identifiers must be distinct".into()));
    }
    let topo = CyclePower::new(n, k)?;
    let id_bound = ids.iter().max().map_or(1, |m| m + 1);
    let mis = symmetry::strategy(strategy)?.mis(&topo, ids, id_bound);
    let anchors: Vec<usize> = (0..n).filter(|&v| mis.members[v]).collect();
    let r = alg.problem.radius();
    let mut labels = vec![0; n];
    for (i, &a) in anchors.iter().enumerate() {
        let b = anchors[(i + 1) % anchors.len()];
        let gap = (b + n - a) % n;
        let gap = if gap == 0 { n } else { gap };
        let walk = alg
            .circuits
            .get(&gap)
            .ok_or_else(|| Error::Precondition(format!("anchor gap {gap} outside {}..={}", k + 1, 2 * k + 1)))?;
        for (j, node) in walk[..gap].iter().enumerate() {
            labels[(a + j) % n] = node[r];
        }
    }
    let rounds = mis.rounds() + 2 * k + 1;
    Ok(CycleRun { labels, anchors, mis, rounds })
}
