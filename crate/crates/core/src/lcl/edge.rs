//! Edge labellings encoded as node labellings over half-edge tuples.

use super::{Alphabet, GridLcl, Label, LabelledGrid};
use crate::error::{Error, Result};

/// Half-edge labels around a node in the fixed order north, east, south, west.
pub type HalfEdges = [Label; 4];

pub const NORTH: usize = 0;
pub const EAST: usize = 1;
pub const SOUTH: usize = 2;
pub const WEST: usize = 3;

/// How the two halves of one edge must relate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Agreement {
    /// Both endpoints see the same edge label (colourings).
    Identity,
    /// Two-symbol alphabet; the endpoints see complementary symbols
    /// (`in` at one end is `out` at the other).
    Orientation,
}

impl Agreement {
    fn matches(self, a: Label, b: Label) -> bool {
        match self {
            Agreement::Identity => a == b,
            Agreement::Orientation => a != b,
        }
    }
}

/// A grid LCL produced by [`encode_edge_lcl`], together with the tuple each
/// node label stands for.
#[derive(Clone, Debug)]
pub struct EdgeLcl {
    pub lcl: GridLcl,
    pub edge_alphabet: Alphabet,
    pub agreement: Agreement,
    pub tuples: Vec<HalfEdges>,
}

/// Edge labels of a torus: `east[r][c]` is the edge from `(r,c)` to
/// `(r,c+1)` and `north[r][c]` the edge from `(r,c)` to `(r+1,c)`, both as
/// seen from `(r,c)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeLabelling {
    pub n: usize,
    pub east: Vec<Label>,
    pub north: Vec<Label>,
}

impl EdgeLcl {
    /// Reads the edge labelling off a feasible node labelling, failing if
    /// any edge's halves disagree.
    pub fn decode(&self, g: &LabelledGrid) -> Result<EdgeLabelling> {
        let n = g.n();
        let tuple = |r: usize, c: usize| -> Result<HalfEdges> {
            self.tuples
                .get(g.get(r, c) as usize)
                .copied()
                .ok_or_else(|| Error::Precondition(format!("cell ({r}, {c}) holds a foreign label")))
        };
        let mut east = Vec::with_capacity(n * n);
        let mut north = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let here = tuple(r, c)?;
                let e = tuple(r, c + 1)?;
                let up = tuple(r + 1, c)?;
                if !self.agreement.matches(here[EAST], e[WEST]) {
                    return Err(Error::Precondition(format!("edge east of ({r}, {c}) disagrees")));
                }
                if !self.agreement.matches(here[NORTH], up[SOUTH]) {
                    return Err(Error::Precondition(format!("edge north of ({r}, {c}) disagrees")));
                }
                east.push(here[EAST]);
                north.push(here[NORTH]);
            }
        }
        Ok(EdgeLabelling { n, east, north })
    }

    /// Half-edge tuple of node `(r, c)` recovered from an edge labelling.
    pub fn tuple_at(&self, e: &EdgeLabelling, r: usize, c: usize) -> HalfEdges {
        let n = e.n;
        let flip = |l: Label| match self.agreement {
            Agreement::Identity => l,
            Agreement::Orientation => 1 - l,
        };
        let idx = |r: usize, c: usize| (r % n) * n + c % n;
        [e.north[idx(r, c)], e.east[idx(r, c)], flip(e.north[idx(r + n - 1, c)]), flip(e.east[idx(r, c + n - 1)])]
    }
}

/// Encodes an edge-labelling problem as a node-labelling grid LCL whose
/// labels are the half-edge tuples accepted by `node_rule`.
pub fn encode_edge_lcl(
    name: impl Into<String>,
    edge_alphabet: &Alphabet,
    node_rule: impl Fn(&HalfEdges) -> bool,
    agreement: Agreement,
) -> Result<EdgeLcl> {
    let q = edge_alphabet.len() as Label;
    if agreement == Agreement::Orientation && q != 2 {
        return Err(Error::InvalidProblem("orientation agreement needs exactly two edge symbols".into()));
    }
    let mut tuples = Vec::new();
    for n in 0..q {
        for e in 0..q {
            for s in 0..q {
                for w in 0..q {
                    let t = [n, e, s, w];
                    if node_rule(&t) {
                        tuples.push(t);
                    }
                }
            }
        }
    }
    if tuples.is_empty() {
        return Err(Error::InvalidProblem("node rule rejects every half-edge tuple".into()));
    }
    let sep = if edge_alphabet.single_char() { "" } else { "," };
    let names = tuples.iter().map(|t| t.iter().map(|&l| edge_alphabet.name(l)).collect::<Vec<_>>().join(sep));
    let alphabet = Alphabet::new(names)?;
    let mut horizontal = Vec::new();
    let mut vertical = Vec::new();
    for (i, a) in tuples.iter().enumerate() {
        for (j, b) in tuples.iter().enumerate() {
            if agreement.matches(a[EAST], b[WEST]) {
                horizontal.push((i as Label, j as Label));
            }
            if agreement.matches(a[NORTH], b[SOUTH]) {
                vertical.push((i as Label, j as Label));
            }
        }
    }
    let lcl = GridLcl::new(name, alphabet, horizontal, vertical)?;
    Ok(EdgeLcl { lcl, edge_alphabet: edge_alphabet.clone(), agreement, tuples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lcl::check_grid;

    fn distinct(t: &HalfEdges) -> bool {
        (0..4).all(|i| (i + 1..4).all(|j| t[i] != t[j]))
    }

    #[test]
    fn edge_five_colouring_alphabet() {
        let colours = Alphabet::new(["1", "2", "3", "4", "5"]).unwrap();
        let enc = encode_edge_lcl("e5", &colours, distinct, Agreement::Identity).unwrap();
        assert_eq!(enc.lcl.alphabet().len(), 5 * 4 * 3 * 2);
        assert_eq!(enc.lcl.alphabet().name(0), "1234");
    }

    #[test]
    fn orientation_alphabet_sizes() {
        let io = Alphabet::new(["i", "o"]).unwrap();
        let indeg = |t: &HalfEdges| t.iter().filter(|&&l| l == 0).count();
        let enc = encode_edge_lcl("x134", &io, |t| [1, 3, 4].contains(&indeg(t)), Agreement::Orientation).unwrap();
        assert_eq!(enc.lcl.alphabet().len(), 4 + 4 + 1);
        let two = encode_edge_lcl("x2", &io, |t| indeg(t) == 2, Agreement::Orientation).unwrap();
        assert_eq!(two.lcl.alphabet().len(), 6);
        // every edge pointing north or east: in from south and west
        let l = two.lcl.alphabet().lookup("ooii").unwrap();
        let g = LabelledGrid::filled(5, l).unwrap();
        assert!(check_grid(&two.lcl, &g).is_empty());
        let e = two.decode(&g).unwrap();
        assert_eq!(two.tuple_at(&e, 2, 3), two.tuples[l as usize]);
    }

    #[test]
    fn empty_rule_is_rejected() {
        let io = Alphabet::new(["i", "o"]).unwrap();
        assert!(encode_edge_lcl("none", &io, |_| false, Agreement::Orientation).is_err());
        let three = Alphabet::new(["a", "b", "c"]).unwrap();
        assert!(encode_edge_lcl("bad", &three, |_| true, Agreement::Orientation).is_err());
    }
}
