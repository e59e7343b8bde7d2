//! Complete CDCL solver: unit propagation over two watched literals,
//! first-UIP clause learning with minimisation, non-chronological
//! backjumping, and (in activity mode) restarts, phase saving and
//! learnt-clause reduction.

use super::{CnfInstance, SatBackend, SatResult};
use crate::error::Result;

/// Decision order. Both are deterministic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Branching {
    /// Lowest-index unassigned variable, `true` first, no restarts.
    Lowest,
    /// Highest conflict activity with saved phases and Luby restarts.
    #[default]
    Activity,
}

#[derive(Clone, Debug, Default)]
pub struct InternalSolver {
    branching: Branching,
}

impl InternalSolver {
    pub fn new(branching: Branching) -> Self {
        Self { branching }
    }
}

impl SatBackend for InternalSolver {
    fn name(&self) -> &'static str {
        "internal"
    }

    fn solve(&self, cnf: &CnfInstance) -> Result<SatResult> {
        Ok(Solver::new(cnf, self.branching).run())
    }
}

type Lit = u32;

fn lit_of(dimacs: i32) -> Lit {
    let v = dimacs.unsigned_abs() - 1;
    2 * v + (dimacs < 0) as u32
}

fn var(l: Lit) -> usize {
    (l >> 1) as usize
}

const UNDEF: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

const RESTART_UNIT: u64 = 100;
const FIRST_REDUCE: u64 = 2000;
const REDUCE_STEP: u64 = 300;

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    lbd: u32,
    deleted: bool,
}

#[derive(Clone, Copy)]
struct Watcher {
    clause: u32,
    blocker: Lit,
}

/// Max-heap of variables keyed by activity, ties to the lower index.
#[derive(Default)]
struct VarHeap {
    heap: Vec<usize>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn new(n: usize) -> Self {
        Self { heap: (0..n).collect(), pos: (0..n).map(Some).collect() }
    }

    fn before(act: &[f64], a: usize, b: usize) -> bool {
        act[a] > act[b] || (act[a] == act[b] && a < b)
    }

    fn contains(&self, v: usize) -> bool {
        self.pos[v].is_some()
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            if !Self::before(act, v, self.heap[parent]) {
                break;
            }
            self.heap[i] = self.heap[parent];
            self.pos[self.heap[i]] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        loop {
            let l = 2 * i + 1;
            if l >= self.heap.len() {
                break;
            }
            let r = l + 1;
            let c = if r < self.heap.len() && Self::before(act, self.heap[r], self.heap[l]) { r } else { l };
            if !Self::before(act, self.heap[c], v) {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i]] = Some(i);
            i = c;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }

    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        let i = self.heap.len() - 1;
        self.pos[v] = Some(i);
        self.up(i, act);
    }

    fn increased(&mut self, v: usize, act: &[f64]) {
        if let Some(i) = self.pos[v] {
            self.up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.pos[top] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last] = Some(0);
            self.down(0, act);
        }
        Some(top)
    }
}

struct Solver {
    branching: Branching,
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<i8>,
    phase: Vec<bool>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    seen: Vec<bool>,
    activity: Vec<f64>,
    var_inc: f64,
    order: VarHeap,
    lowest_hint: usize,
    level_stamp: Vec<u64>,
    stamp: u64,
    unsat: bool,
}

impl Solver {
    fn new(cnf: &CnfInstance, branching: Branching) -> Self {
        let n = cnf.num_vars();
        let mut s = Solver {
            branching,
            clauses: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            assigns: vec![UNDEF; n],
            phase: vec![branching == Branching::Lowest; n],
            level: vec![0; n],
            reason: vec![None; n],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            seen: vec![false; n],
            activity: vec![0.0; n],
            var_inc: 1.0,
            order: VarHeap::new(n),
            lowest_hint: 0,
            level_stamp: vec![0; n + 1],
            stamp: 0,
            unsat: false,
        };
        for c in cnf.clauses() {
            let mut lits: Vec<Lit> = c.iter().map(|&l| lit_of(l)).collect();
            lits.sort_unstable();
            lits.dedup();
            if lits.windows(2).any(|w| w[0] ^ 1 == w[1]) {
                continue;
            }
            s.add_input_clause(lits);
        }
        s
    }

    fn value(&self, l: Lit) -> i8 {
        let a = self.assigns[var(l)];
        if l & 1 == 1 {
            -a
        } else {
            a
        }
    }

    fn add_input_clause(&mut self, lits: Vec<Lit>) {
        if self.unsat {
            return;
        }
        match lits.len() {
            0 => self.unsat = true,
            1 => match self.value(lits[0]) {
                FALSE => self.unsat = true,
                UNDEF => self.enqueue(lits[0], None),
                _ => {}
            },
            _ => {
                self.attach(lits, false, 0);
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool, lbd: u32) -> u32 {
        let ci = self.clauses.len() as u32;
        self.watches[lits[0] as usize].push(Watcher { clause: ci, blocker: lits[1] });
        self.watches[lits[1] as usize].push(Watcher { clause: ci, blocker: lits[0] });
        self.clauses.push(Clause { lits, learnt, lbd, deleted: false });
        ci
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, l: Lit, reason: Option<u32>) {
        let v = var(l);
        self.assigns[v] = if l & 1 == 1 { FALSE } else { TRUE };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Returns a conflicting clause, if any.
    fn propagate(&mut self) -> Option<u32> {
        let mut conflict = None;
        while self.qhead < self.trail.len() && conflict.is_none() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = p ^ 1;
            let mut ws = std::mem::take(&mut self.watches[false_lit as usize]);
            let (mut i, mut j) = (0, 0);
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let clause = &mut self.clauses[w.clause as usize];
                if clause.deleted {
                    continue;
                }
                if clause.lits[0] == false_lit {
                    clause.lits.swap(0, 1);
                }
                let first = clause.lits[0];
                let w = Watcher { clause: w.clause, blocker: first };
                let first_value = {
                    let a = self.assigns[var(first)];
                    if first & 1 == 1 {
                        -a
                    } else {
                        a
                    }
                };
                if first_value == TRUE {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let assigns = &self.assigns;
                let value = |l: Lit| {
                    let a = assigns[var(l)];
                    if l & 1 == 1 {
                        -a
                    } else {
                        a
                    }
                };
                let clause = &mut self.clauses[w.clause as usize];
                if let Some(k) = (2..clause.lits.len()).find(|&k| value(clause.lits[k]) != FALSE) {
                    clause.lits.swap(1, k);
                    let new_watch = clause.lits[1];
                    self.watches[new_watch as usize].push(w);
                    continue;
                }
                ws[j] = w;
                j += 1;
                if first_value == FALSE {
                    conflict = Some(w.clause);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                    self.qhead = self.trail.len();
                } else {
                    self.enqueue(first, Some(w.clause));
                }
            }
            ws.truncate(j);
            self.watches[false_lit as usize] = ws;
        }
        conflict
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.increased(v, &self.activity);
    }

    /// First-UIP learnt clause, its backjump level and its LBD.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32, u32) {
        let mut learnt: Vec<Lit> = vec![0];
        let mut path = 0;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        loop {
            let start = usize::from(p.is_some());
            let len = self.clauses[confl as usize].lits.len();
            for k in start..len {
                let q = self.clauses[confl as usize].lits[k];
                let v = var(q);
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump(v);
                    if self.level[v] >= self.decision_level() {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[var(self.trail[idx])] {
                    break;
                }
            }
            let lit = self.trail[idx];
            self.seen[var(lit)] = false;
            path -= 1;
            p = Some(lit);
            if path == 0 {
                break;
            }
            confl = self.reason[var(lit)].expect("implied literal has a reason");
        }
        learnt[0] = p.expect("conflict at positive level") ^ 1;

        // drop literals implied by the rest of the clause
        let tail: Vec<Lit> = learnt[1..].to_vec();
        let mut kept = vec![learnt[0]];
        for &q in &tail {
            let redundant = match self.reason[var(q)] {
                None => false,
                Some(r) => {
                    self.clauses[r as usize].lits[1..].iter().all(|&l| self.seen[var(l)] || self.level[var(l)] == 0)
                }
            };
            if !redundant {
                kept.push(q);
            }
        }
        for &q in &tail {
            self.seen[var(q)] = false;
        }
        let mut learnt = kept;

        let mut back = 0;
        if learnt.len() > 1 {
            let best = (1..learnt.len())
                .max_by_key(|&i| (self.level[var(learnt[i])], std::cmp::Reverse(i)))
                .expect("non-empty");
            learnt.swap(1, best);
            back = self.level[var(learnt[1])];
        }
        self.stamp += 1;
        let mut lbd = 0;
        for &l in &learnt {
            let lv = self.level[var(l)] as usize;
            if self.level_stamp[lv] != self.stamp {
                self.level_stamp[lv] = self.stamp;
                lbd += 1;
            }
        }
        self.var_inc /= 0.95;
        (learnt, back, lbd)
    }

    fn cancel_until(&mut self, lvl: u32) {
        if self.decision_level() <= lvl {
            return;
        }
        let lim = self.trail_lim[lvl as usize];
        for i in (lim..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = var(l);
            self.assigns[v] = UNDEF;
            self.reason[v] = None;
            if self.branching == Branching::Activity {
                self.phase[v] = l & 1 == 0;
                self.order.insert(v, &self.activity);
            } else {
                self.lowest_hint = self.lowest_hint.min(v);
            }
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(lvl as usize);
        self.qhead = self.trail.len();
    }

    fn pick(&mut self) -> Option<usize> {
        match self.branching {
            Branching::Lowest => {
                while self.lowest_hint < self.assigns.len() && self.assigns[self.lowest_hint] != UNDEF {
                    self.lowest_hint += 1;
                }
                (self.lowest_hint < self.assigns.len()).then_some(self.lowest_hint)
            }
            Branching::Activity => {
                while let Some(v) = self.order.pop(&self.activity) {
                    if self.assigns[v] == UNDEF {
                        return Some(v);
                    }
                }
                None
            }
        }
    }

    fn locked(&self, ci: u32) -> bool {
        let first = self.clauses[ci as usize].lits[0];
        self.reason[var(first)] == Some(ci) && self.value(first) == TRUE
    }

    /// Deletes the worse half of the learnt clauses with LBD above 2.
    fn reduce(&mut self) {
        let mut candidates: Vec<u32> = (0..self.clauses.len() as u32)
            .filter(|&ci| {
                let c = &self.clauses[ci as usize];
                c.learnt && !c.deleted && c.lbd > 2
            })
            .filter(|&ci| !self.locked(ci))
            .collect();
        candidates.sort_by_key(|&ci| (std::cmp::Reverse(self.clauses[ci as usize].lbd), ci));
        let remove = candidates.len() / 2;
        for &ci in &candidates[..remove] {
            let c = &mut self.clauses[ci as usize];
            c.deleted = true;
            c.lits = Vec::new();
        }
        for ws in &mut self.watches {
            ws.retain(|w| !self.clauses[w.clause as usize].deleted);
        }
    }

    fn run(mut self) -> SatResult {
        if self.unsat || self.propagate().is_some() {
            return SatResult::Unsat;
        }
        let activity = self.branching == Branching::Activity;
        let mut restarts = 0;
        let mut conflicts_until_restart = luby(0) * RESTART_UNIT;
        let mut conflicts_until_reduce = FIRST_REDUCE;
        let mut reductions = 0;
        loop {
            if let Some(confl) = self.propagate() {
                if self.decision_level() == 0 {
                    return SatResult::Unsat;
                }
                let (learnt, back, lbd) = self.analyze(confl);
                self.cancel_until(back);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let ci = self.attach(learnt, true, lbd);
                    self.enqueue(first, Some(ci));
                }
                if activity {
                    conflicts_until_restart -= 1;
                    conflicts_until_reduce -= 1;
                    if conflicts_until_reduce == 0 {
                        reductions += 1;
                        conflicts_until_reduce = FIRST_REDUCE + REDUCE_STEP * reductions;
                        self.reduce();
                    }
                    if conflicts_until_restart == 0 {
                        restarts += 1;
                        conflicts_until_restart = luby(restarts) * RESTART_UNIT;
                        self.cancel_until(0);
                    }
                }
            } else {
                let Some(v) = self.pick() else {
                    let mut model = vec![false; self.assigns.len() + 1];
                    for (v, &a) in self.assigns.iter().enumerate() {
                        model[v + 1] = a == TRUE;
                    }
                    return SatResult::Sat(model);
                };
                self.trail_lim.push(self.trail.len());
                let lit = 2 * v as u32 + u32::from(!self.phase[v]);
                self.enqueue(lit, None);
            }
        }
    }
}

/// Luby restart sequence 1, 1, 2, 1, 1, 2, 4, …
fn luby(i: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = i;
    while size - 1 != x {
        size = (size - 1) >> 1;
        seq -= 1;
        x %= size;
    }
    1 << seq
}
