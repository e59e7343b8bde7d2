//! Deterministic maximal independent sets in power graphs of cycles and tori.
//!
//! Both topologies are Cayley graphs of `Z_n` or `Z_n × Z_n`: node `v` is
//! adjacent in the power graph to `v ± δ` for every forward offset `δ`. A
//! power-graph round costs `radius` rounds of the underlying graph.
//!
//! Execution is synchronous: every phase computes new state from the
//! previous round's state only. Phases that let a single colour class act
//! per round are evaluated class by class, which is equivalent because a
//! colour class is independent.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Colours can exceed `u64` after the per-direction product step.
pub type Colour = u128;

pub trait PowerTopology: Sync {
    fn len(&self) -> usize;
    fn forward_offsets(&self) -> usize;
    /// `v + δ_dir`, or `v − δ_dir` when `backwards`.
    fn shift(&self, v: usize, dir: usize, backwards: bool) -> usize;
    /// Underlying-graph rounds per power-graph round.
    fn radius(&self) -> usize;

    fn degree(&self) -> usize {
        2 * self.forward_offsets()
    }
}

fn neighbours(topo: &dyn PowerTopology, v: usize, mut f: impl FnMut(usize)) {
    for d in 0..topo.forward_offsets() {
        f(topo.shift(v, d, false));
        f(topo.shift(v, d, true));
    }
}

/// `k`-th power of the directed `n`-cycle.
pub struct CyclePower {
    pub n: usize,
    pub k: usize,
}

impl CyclePower {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || n < 2 * k + 1 {
            return Err(Error::CycleTooShort { n, min: 2 * k + 1 });
        }
        Ok(Self { n, k })
    }
}

impl PowerTopology for CyclePower {
    fn len(&self) -> usize {
        self.n
    }

    fn forward_offsets(&self) -> usize {
        self.k
    }

    fn shift(&self, v: usize, dir: usize, backwards: bool) -> usize {
        let d = dir + 1;
        if backwards {
            (v + self.n - d) % self.n
        } else {
            (v + d) % self.n
        }
    }

    fn radius(&self) -> usize {
        self.k
    }
}

/// `k`-th power (L1 metric) of the `n × n` torus; node `v = row · n + col`.
pub struct TorusPower {
    pub n: usize,
    pub k: usize,
    offsets: Vec<(usize, usize)>,
}

impl TorusPower {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || n < 2 * k + 2 {
            return Err(Error::GridTooSmall { n, min: 2 * k + 2 });
        }
        let k_i = k as i64;
        let mut offsets = Vec::new();
        for dr in 0..=k_i {
            for dc in -k_i..=k_i {
                if dr.abs() + dc.abs() <= k_i && (dr > 0 || dc > 0) {
                    let n_i = n as i64;
                    offsets.push((dr.rem_euclid(n_i) as usize, dc.rem_euclid(n_i) as usize));
                }
            }
        }
        Ok(Self { n, k, offsets })
    }
}

impl PowerTopology for TorusPower {
    fn len(&self) -> usize {
        self.n * self.n
    }

    fn forward_offsets(&self) -> usize {
        self.offsets.len()
    }

    fn shift(&self, v: usize, dir: usize, backwards: bool) -> usize {
        let n = self.n;
        let (r, c) = (v / n, v % n);
        let (dr, dc) = self.offsets[dir];
        if backwards {
            ((r + n - dr) % n) * n + (c + n - dc) % n
        } else {
            ((r + dr) % n) * n + (c + dc) % n
        }
    }

    fn radius(&self) -> usize {
        self.k
    }
}

/// Result of a symmetry-breaking run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MisRun {
    pub members: Vec<bool>,
    /// `(phase, underlying-graph rounds)` in execution order.
    pub phases: Vec<(String, usize)>,
}

impl MisRun {
    pub fn rounds(&self) -> usize {
        self.phases.iter().map(|(_, r)| r).sum()
    }
}

/// A deterministic distributed MIS algorithm for power graphs.
pub trait SymmetryBreaker: Send + Sync {
    fn name(&self) -> &'static str;
    /// `ids` are distinct and smaller than `id_bound`.
    fn mis(&self, topo: &dyn PowerTopology, ids: &[u64], id_bound: u64) -> MisRun;
}

/// Per-direction Cole–Vishkin reduction to 3 colours, combined into a
/// `3^D`-colouring, then polynomial (Linial) reduction, then class-by-class
/// reduction to `Δ + 1` colours, then greedy MIS over colour classes.
/// Falls back to [`Linial`] when `3^D` does not fit in a [`Colour`].
pub struct ColeVishkin;

/// Polynomial reduction straight from the identifiers, then the same
/// class-by-class reduction and greedy MIS.
pub struct Linial;

impl SymmetryBreaker for ColeVishkin {
    fn name(&self) -> &'static str {
        "cole-vishkin"
    }

    fn mis(&self, topo: &dyn PowerTopology, ids: &[u64], id_bound: u64) -> MisRun {
        let dirs = topo.forward_offsets();
        if Colour::from(3u8).checked_pow(dirs as u32).is_none() {
            return Linial.mis(topo, ids, id_bound);
        }
        let mut phases = Vec::new();
        let mut product = vec![0 as Colour; topo.len()];
        let mut cv_rounds = 0;
        let mut weight: Colour = 1;
        for d in 0..dirs {
            let (colours, rounds) = cole_vishkin_direction(topo, d, ids, id_bound);
            cv_rounds = cv_rounds.max(rounds);
            product.par_iter_mut().zip(colours.par_iter()).for_each(|(p, &c)| *p += weight * c as Colour);
            weight *= 3;
        }
        phases.push(("cole-vishkin".to_string(), cv_rounds * topo.radius()));
        finish(topo, product, weight, phases)
    }
}

impl SymmetryBreaker for Linial {
    fn name(&self) -> &'static str {
        "linial"
    }

    fn mis(&self, topo: &dyn PowerTopology, ids: &[u64], id_bound: u64) -> MisRun {
        let colours = ids.iter().map(|&i| i as Colour).collect();
        finish(topo, colours, id_bound as Colour, Vec::new())
    }
}

fn finish(topo: &dyn PowerTopology, colours: Vec<Colour>, palette: Colour, mut phases: Vec<(String, usize)>) -> MisRun {
    let (colours, palette, steps) = linial_reduce(topo, colours, palette);
    phases.push(("linial".to_string(), steps * topo.radius()));
    let target = (2 * topo.forward_offsets() + 1) as Colour;
    let (colours, steps) = class_reduce(topo, colours, palette, target);
    phases.push(("class-reduction".to_string(), steps * topo.radius()));
    let (members, steps) = greedy_by_class(topo, &colours, palette.min(target));
    phases.push(("greedy-mis".to_string(), steps * topo.radius()));
    MisRun { members, phases }
}

pub fn registry() -> Vec<Box<dyn SymmetryBreaker>> {
    vec![Box::new(ColeVishkin), Box::new(Linial)]
}

pub fn strategy(name: &str) -> Result<Box<dyn SymmetryBreaker>> {
    registry().into_iter().find(|s| s.name() == name).ok_or_else(|| Error::UnknownStrategy(name.to_string()))
}

pub const DEFAULT_STRATEGY: &str = "cole-vishkin";

fn bit_len(palette: Colour) -> u32 {
    // number of bits needed for values below `palette`
    Colour::BITS - (palette.max(2) - 1).leading_zeros()
}

/// Cole–Vishkin on the functional graph `v ↦ v + δ_dir`: a 3-colouring in
/// which `v` and `v + δ` always differ. Returns colours and power rounds.
pub fn cole_vishkin_direction(topo: &dyn PowerTopology, dir: usize, ids: &[u64], id_bound: u64) -> (Vec<u8>, usize) {
    let mut colours: Vec<Colour> = ids.iter().map(|&i| i as Colour).collect();
    let mut palette = id_bound as Colour;
    let mut rounds = 0;
    loop {
        let next_palette = 2 * bit_len(palette) as Colour;
        if next_palette >= palette {
            break;
        }
        let prev = &colours;
        colours = (0..topo.len())
            .into_par_iter()
            .map(|v| {
                let own = prev[v];
                let succ = prev[topo.shift(v, dir, false)];
                let i = (own ^ succ).trailing_zeros() as Colour;
                2 * i + ((own >> i) & 1)
            })
            .collect();
        palette = next_palette;
        rounds += 1;
    }
    // remaining classes above 2, one per round, against predecessor and successor
    for c in (3..palette).rev() {
        let prev = colours.clone();
        for v in 0..topo.len() {
            if prev[v] == c {
                let a = prev[topo.shift(v, dir, false)];
                let b = prev[topo.shift(v, dir, true)];
                colours[v] = (0..3).find(|&x| x != a && x != b).expect("two neighbours block at most two colours");
            }
        }
        rounds += 1;
    }
    (colours.into_iter().map(|c| c as u8).collect(), rounds)
}

fn is_prime(q: u64) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d))
}

fn fits(q: u64, exp: u32, palette: Colour) -> bool {
    let mut acc: Colour = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(q as Colour);
        if acc >= palette {
            return true;
        }
    }
    false
}

fn root_ceil(x: Colour, exp: u32) -> u64 {
    let mut r = ((x as f64).powf(1.0 / exp as f64) as u64).max(1);
    while !fits(r, exp, x) {
        r += 1;
    }
    while r > 1 && fits(r - 1, exp, x) {
        r -= 1;
    }
    r
}

/// Best `(q, d)` for one polynomial step: `q` prime, `q > Δ·d`,
/// `q^(d+1) ≥ palette`, minimising the new palette `q²`. `None` when no
/// choice shrinks the palette.
pub fn linial_parameters(palette: Colour, degree: usize) -> Option<(u64, u32)> {
    let mut bounds: Vec<(u64, u32)> =
        (1..=64u32).map(|d| ((degree as u64 * d as u64 + 1).max(root_ceil(palette, d + 1)), d)).collect();
    bounds.sort_unstable();
    let mut best: Option<(u64, u32)> = None;
    for (lower, d) in bounds {
        if best.is_some_and(|(b, _)| lower >= b) {
            break;
        }
        let q = (lower..).find(|&q| is_prime(q)).expect("primes are unbounded");
        if best.is_none_or(|(b, _)| q < b) {
            best = Some((q, d));
        }
    }
    best.filter(|&(q, _)| (q as Colour) * (q as Colour) < palette)
}

fn poly_eval(colour: Colour, q: u64, d: u32, x: u64) -> u64 {
    // coefficients are the base-q digits of the colour
    let mut digits = Vec::with_capacity(d as usize + 1);
    let mut c = colour;
    for _ in 0..=d {
        digits.push((c % q as Colour) as u64);
        c /= q as Colour;
    }
    digits.iter().rev().fold(0u64, |acc, &a| (acc * x + a) % q)
}

/// Iterated polynomial colour reduction until the palette stops shrinking.
/// Returns the colours, the final palette and the number of power rounds.
pub fn linial_reduce(
    topo: &dyn PowerTopology,
    mut colours: Vec<Colour>,
    mut palette: Colour,
) -> (Vec<Colour>, Colour, usize) {
    let degree = 2 * topo.forward_offsets();
    let mut rounds = 0;
    while let Some((q, d)) = linial_parameters(palette, degree) {
        let prev = &colours;
        colours = (0..topo.len())
            .into_par_iter()
            .map(|v| {
                let own = prev[v];
                let mut nbrs = Vec::with_capacity(degree);
                neighbours(topo, v, |u| nbrs.push(prev[u]));
                let x = (0..q)
                    .find(|&x| {
                        let mine = poly_eval(own, q, d, x);
                        nbrs.iter().all(|&c| poly_eval(c, q, d, x) != mine)
                    })
                    .expect("distinct polynomials of degree d agree on at most d points");
                (x * q + poly_eval(own, q, d, x)) as Colour
            })
            .collect();
        palette = (q as Colour) * (q as Colour);
        rounds += 1;
    }
    (colours, palette, rounds)
}

fn classes(colours: &[Colour], lo: Colour) -> Vec<(Colour, usize)> {
    let mut order: Vec<(Colour, usize)> =
        colours.iter().enumerate().filter(|(_, &c)| c >= lo).map(|(v, &c)| (c, v)).collect();
    order.sort_unstable();
    order
}

/// Recolours classes `palette − 1, …, target` one per round into `0..target`.
pub fn class_reduce(
    topo: &dyn PowerTopology,
    mut colours: Vec<Colour>,
    palette: Colour,
    target: Colour,
) -> (Vec<Colour>, usize) {
    if palette <= target {
        return (colours, 0);
    }
    let mut order = classes(&colours, target);
    order.reverse();
    let mut used = vec![false; target as usize];
    for &(_, v) in &order {
        used.iter_mut().for_each(|u| *u = false);
        neighbours(topo, v, |u| {
            let c = colours[u];
            if c < target {
                used[c as usize] = true;
            }
        });
        colours[v] = used.iter().position(|&u| !u).expect("degree < target leaves a free colour") as Colour;
    }
    (colours, (palette - target) as usize)
}

/// Classes join the independent set in increasing colour order.
pub fn greedy_by_class(topo: &dyn PowerTopology, colours: &[Colour], palette: Colour) -> (Vec<bool>, usize) {
    let mut members = vec![false; topo.len()];
    for (_, v) in classes(colours, 0) {
        let mut blocked = false;
        neighbours(topo, v, |u| blocked |= members[u]);
        members[v] = !blocked;
    }
    (members, palette as usize)
}

/// True when `colours` is a proper colouring of the power graph.
pub fn is_proper(topo: &dyn PowerTopology, colours: &[Colour]) -> bool {
    (0..topo.len()).all(|v| {
        let mut ok = true;
        neighbours(topo, v, |u| ok &= colours[u] != colours[v]);
        ok
    })
}

/// Full scan: independence and maximality in the power graph.
pub fn is_mis(topo: &dyn PowerTopology, members: &[bool]) -> bool {
    (0..topo.len()).all(|v| {
        let mut member_nbr = false;
        neighbours(topo, v, |u| member_nbr |= members[u]);
        if members[v] {
            !member_nbr
        } else {
            member_nbr
        }
    })
}
