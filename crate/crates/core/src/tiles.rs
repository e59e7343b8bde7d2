//! Anchor tiles: rectangular windows of a maximal independent set of the
//! `k`-th power (L1 metric) of the grid, and the tile neighbourhood graph.
//!
//! A 0/1 window is a tile when its anchors are pairwise more than `k` apart
//! and some independent set of anchors placed in the frame of cells within
//! distance `k` of the window covers every window cell left uncovered. Any
//! such configuration extends to a maximal independent set of the whole
//! grid without touching the window, so the frame search is exact.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Row-major 0/1 window. Row `i + 1` lies north of row `i`; column 0 is
/// stored in the most significant used bit of each row word, so the derived
/// ordering is the row-major bitstring order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Tile {
    rows: usize,
    cols: usize,
    bits: Vec<u32>,
}

impl Ord for Tile {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.rows, self.cols, &self.bits).cmp(&(other.rows, other.cols, &other.bits))
    }
}

impl PartialOrd for Tile {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tile({}x{} {})", self.rows, self.cols, self.bitstring())
    }
}

pub const MAX_COLS: usize = 32;

impl Tile {
    pub fn new(rows: usize, cols: usize, bits: Vec<u32>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Precondition("tile must have at least one row and column".into()));
        }
        if cols > MAX_COLS || bits.len() != rows || bits.iter().any(|&r| cols < 32 && r >> cols != 0) {
            return Err(Error::Precondition(format!("bad {rows}x{cols} tile rows {bits:?}")));
        }
        Ok(Self { rows, cols, bits })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let bits = (0..rows).map(|r| (0..cols).fold(0u32, |acc, c| (acc << 1) | f(r, c) as u32)).collect();
        Self::new(rows, cols, bits)
    }

    /// Parses a row-major bitstring of `rows · cols` characters.
    pub fn from_bitstring(rows: usize, cols: usize, s: &str) -> Result<Self> {
        let chars: Vec<char> = s.chars().filter(|c| !matches!(c, ',' | '/' | ' ')).collect();
        if chars.len() != rows * cols || chars.iter().any(|c| !matches!(c, '0' | '1')) {
            return Err(Error::Precondition(format!("`{s}` is not a {rows}x{cols} bitstring")));
        }
        Self::from_fn(rows, cols, |r, c| chars[r * cols + c] == '1')
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_words(&self) -> &[u32] {
        &self.bits
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r] >> (self.cols - 1 - c) & 1 == 1
    }

    pub fn anchors(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    out.push((r as i64, c as i64));
                }
            }
        }
        out
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.iter().map(|r| r.count_ones()).sum()
    }

    pub fn sub(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Tile {
        assert!(r0 + rows <= self.rows && c0 + cols <= self.cols);
        let mask = if cols == 32 { u32::MAX } else { (1u32 << cols) - 1 };
        let shift = self.cols - c0 - cols;
        let bits = self.bits[r0..r0 + rows].iter().map(|&w| (w >> shift) & mask).collect();
        Tile { rows, cols, bits }
    }

    pub fn bitstring(&self) -> String {
        let mut s = String::with_capacity(self.rows * self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                s.push(if self.get(r, c) { '1' } else { '0' });
            }
        }
        s
    }
}

fn l1(a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - b.0).abs() + (a.1 - b.1).abs()
}

/// Minimal growable bitset for the frame search.
#[derive(Clone)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64).max(1)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn union_with(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }
}

/// Decides whether `tile` can occur as a window of a maximal independent set
/// of the `k`-th power of a (large) grid.
pub fn is_tile(k: usize, tile: &Tile) -> bool {
    let k = k as i64;
    let anchors = tile.anchors();
    for (i, &a) in anchors.iter().enumerate() {
        if anchors[i + 1..].iter().any(|&b| l1(a, b) <= k) {
            return false;
        }
    }
    let (rows, cols) = (tile.rows as i64, tile.cols as i64);
    let uncovered: Vec<(i64, i64)> = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .filter(|&v| anchors.iter().all(|&a| l1(a, v) > k))
        .collect();
    if uncovered.is_empty() {
        return true;
    }
    let inside = |(r, c): (i64, i64)| (0..rows).contains(&r) && (0..cols).contains(&c);
    let mut candidates = Vec::new();
    for r in -k..rows + k {
        for c in -k..cols + k {
            let p = (r, c);
            if inside(p) || anchors.iter().any(|&a| l1(a, p) <= k) {
                continue;
            }
            if uncovered.iter().any(|&v| l1(v, p) <= k) {
                candidates.push(p);
            }
        }
    }
    let m = candidates.len();
    let covers: Vec<Bits> = candidates
        .iter()
        .map(|&p| {
            let mut b = Bits::new(uncovered.len());
            for (i, &v) in uncovered.iter().enumerate() {
                if l1(v, p) <= k {
                    b.set(i);
                }
            }
            b
        })
        .collect();
    let conflicts: Vec<Bits> = candidates
        .iter()
        .map(|&p| {
            let mut b = Bits::new(m);
            for (j, &q) in candidates.iter().enumerate() {
                if l1(p, q) <= k {
                    b.set(j);
                }
            }
            b
        })
        .collect();
    let hitters: Vec<Vec<usize>> =
        uncovered.iter().map(|&v| (0..m).filter(|&j| l1(v, candidates[j]) <= k).collect()).collect();
    let search = FrameSearch { covers, conflicts, hitters };
    search.solve(Bits::new(uncovered.len()), Bits::new(m))
}

struct FrameSearch {
    covers: Vec<Bits>,
    conflicts: Vec<Bits>,
    hitters: Vec<Vec<usize>>,
}

impl FrameSearch {
    /// Backtracking over the most constrained uncovered cell: every solution
    /// must pick one of that cell's remaining hitters.
    fn solve(&self, covered: Bits, blocked: Bits) -> bool {
        let mut best: Option<(usize, usize)> = None;
        for (v, hs) in self.hitters.iter().enumerate() {
            if covered.get(v) {
                continue;
            }
            let open = hs.iter().filter(|&&j| !blocked.get(j)).count();
            if open == 0 {
                return false;
            }
            if best.is_none_or(|(_, o)| open < o) {
                best = Some((v, open));
            }
        }
        let Some((v, _)) = best else { return true };
        for &j in &self.hitters[v] {
            if blocked.get(j) {
                continue;
            }
            let mut c = covered.clone();
            c.union_with(&self.covers[j]);
            let mut b = blocked.clone();
            b.union_with(&self.conflicts[j]);
            if self.solve(c, b) {
                return true;
            }
        }
        false
    }
}

/// Row words of width `cols` whose set bits are pairwise more than `k` apart.
fn independent_rows(k: usize, cols: usize) -> Vec<u32> {
    (0u32..1 << cols).filter(|&w| (1..=k.min(cols)).all(|s| w & (w >> s) == 0)).collect()
}

fn compatible(k: usize, above: &[u32], row: u32) -> bool {
    // `above[above.len() - dr]` is the row `dr` steps back
    for dr in 1..=k.min(above.len()) {
        let prev = above[above.len() - dr];
        if prev == 0 {
            continue;
        }
        let reach = k - dr;
        if prev & row != 0 {
            return false;
        }
        for s in 1..=reach.min(31) {
            if (prev << s) & row != 0 || (prev >> s) & row != 0 {
                return false;
            }
        }
    }
    true
}

/// All `rows × cols` tiles for power `k`, in canonical order.
///
/// Built one row at a time; since being a tile is hereditary, every partial
/// window is checked with [`is_tile`] before it is extended.
pub fn enumerate_tiles(k: usize, rows: usize, cols: usize) -> Result<Vec<Tile>> {
    if rows == 0 || cols == 0 || cols > MAX_COLS {
        return Err(Error::Precondition(format!("tile dimensions {rows}x{cols} out of range")));
    }
    let row_words = independent_rows(k, cols);
    let mut partial: Vec<Vec<u32>> = vec![Vec::new()];
    for height in 1..=rows {
        let mut next: Vec<Vec<u32>> = partial
            .par_iter()
            .flat_map_iter(|p| {
                row_words.iter().filter_map(move |&w| {
                    if !compatible(k, p, w) {
                        return None;
                    }
                    let mut bits = p.clone();
                    bits.push(w);
                    let t = Tile { rows: height, cols, bits };
                    is_tile(k, &t).then_some(t.bits)
                })
            })
            .collect();
        next.sort_unstable();
        partial = next;
    }
    Ok(partial.into_iter().map(|bits| Tile { rows, cols, bits }).collect())
}

/// Tile neighbourhood graph on `rows × cols` tiles. A horizontal edge
/// `(west, east)` exists when some `rows × (cols + 1)` tile has those two
/// sub-windows; a vertical edge `(south, north)` likewise from
/// `(rows + 1) × cols` tiles.
#[derive(Clone, Debug)]
pub struct TileGraph {
    pub k: usize,
    pub rows: usize,
    pub cols: usize,
    pub nodes: Vec<Tile>,
    pub horizontal: Vec<(usize, usize)>,
    pub vertical: Vec<(usize, usize)>,
}

impl TileGraph {
    pub fn index_of(&self, t: &Tile) -> Option<usize> {
        self.nodes.binary_search(t).ok()
    }
}

pub fn build_tile_graph(k: usize, rows: usize, cols: usize) -> Result<TileGraph> {
    let nodes = enumerate_tiles(k, rows, cols)?;
    let find = |t: &Tile| -> Result<usize> { nodes.binary_search(t).map_err(|_| Error::MissingTile(t.bitstring())) };
    let mut vertical = enumerate_tiles(k, rows + 1, cols)?
        .iter()
        .map(|t| Ok((find(&t.sub(0, 0, rows, cols))?, find(&t.sub(1, 0, rows, cols))?)))
        .collect::<Result<Vec<_>>>()?;
    let mut horizontal = enumerate_tiles(k, rows, cols + 1)?
        .iter()
        .map(|t| Ok((find(&t.sub(0, 0, rows, cols))?, find(&t.sub(0, 1, rows, cols))?)))
        .collect::<Result<Vec<_>>>()?;
    for edges in [&mut vertical, &mut horizontal] {
        edges.sort_unstable();
        edges.dedup();
    }
    Ok(TileGraph { k, rows, cols, nodes, horizontal, vertical })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tile(rows: usize, cols: usize, s: &str) -> Tile {
        Tile::from_bitstring(rows, cols, s).unwrap()
    }

    #[test]
    fn small_cases() {
        assert!(is_tile(1, &tile(1, 1, "1")));
        assert!(is_tile(1, &tile(1, 1, "0")));
        assert!(!is_tile(1, &tile(2, 1, "11")));
        assert!(!is_tile(1, &tile(3, 2, "000000")));
        assert!(Tile::new(0, 1, vec![]).is_err());
    }

    #[test]
    fn ordering_is_row_major_bitstring() {
        let tiles = enumerate_tiles(1, 3, 2).unwrap();
        let strings: Vec<String> = tiles.iter().map(Tile::bitstring).collect();
        let mut sorted = strings.clone();
        sorted.sort();
        assert_eq!(strings, sorted);
    }

    #[test]
    fn sub_windows() {
        let t = tile(3, 3, "000010100");
        assert_eq!(t.sub(0, 0, 3, 2).bitstring(), "000110");
        assert_eq!(t.sub(0, 1, 3, 2).bitstring(), "001000");
        assert_eq!(t.sub(1, 1, 2, 2).bitstring(), "1000");
    }

    #[test]
    fn one_by_one_graph() {
        let g = build_tile_graph(1, 1, 1).unwrap();
        assert_eq!(g.nodes.len(), 2);
        assert_eq!(g.horizontal, vec![(0, 0), (0, 1), (1, 0)]);
        assert_eq!(g.vertical, vec![(0, 0), (0, 1), (1, 0)]);
    }

    #[test]
    fn row_independence() {
        assert_eq!(independent_rows(1, 3), vec![0b000, 0b001, 0b010, 0b100, 0b101]);
        assert!(!compatible(2, &[0b0100], 0b1000));
        assert!(!compatible(2, &[0b0100, 0], 0b0100));
        assert!(compatible(2, &[0b0100, 0], 0b0001));
    }
}
