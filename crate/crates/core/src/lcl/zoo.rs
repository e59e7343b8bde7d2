//! Built-in problem families, registered by name.

use std::collections::BTreeSet;

use super::edge::{encode_edge_lcl, Agreement, HalfEdges};
use super::{Alphabet, CycleLcl, GridLcl, Label, Problem};
use crate::error::{Error, Result};

/// Parameters accepted by the built-in families. Unused fields are ignored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Params {
    pub k: Option<usize>,
    pub set: Option<BTreeSet<u8>>,
}

impl Params {
    pub fn with_k(k: usize) -> Self {
        Self { k: Some(k), set: None }
    }

    pub fn with_set(set: impl IntoIterator<Item = u8>) -> Self {
        Self { k: None, set: Some(set.into_iter().collect()) }
    }

    fn need_k(&self, family: &str) -> Result<usize> {
        match self.k {
            Some(k) if k >= 1 => Ok(k),
            Some(k) => Err(Error::InvalidParameter(format!("{family}: k = {k} must be at least 1"))),
            None => Err(Error::InvalidParameter(format!("{family}: missing parameter k"))),
        }
    }
}

pub trait ProblemFamily: Send + Sync {
    fn name(&self) -> &'static str;
    fn build(&self, params: &Params) -> Result<Problem>;
}

struct VertexColouring;
struct EdgeColouring;
struct XOrientation;
struct GridMis;
struct GridTrivial;
struct TwoColouringCycle;
struct ThreeColouringCycle;
struct MisCycle;
struct TrivialCycle;

fn digits(k: usize) -> Vec<String> {
    (1..=k).map(|i| i.to_string()).collect()
}

impl ProblemFamily for VertexColouring {
    fn name(&self) -> &'static str {
        "vertex-colouring"
    }

    fn build(&self, params: &Params) -> Result<Problem> {
        let k = params.need_k(self.name())?;
        let alphabet = Alphabet::new(digits(k))?;
        let pairs: Vec<(Label, Label)> =
            (0..k as Label).flat_map(|a| (0..k as Label).filter(move |&b| b != a).map(move |b| (a, b))).collect();
        Ok(Problem::Grid(GridLcl::new(format!("vertex-{k}-colouring"), alphabet, pairs.clone(), pairs)?))
    }
}

impl ProblemFamily for EdgeColouring {
    fn name(&self) -> &'static str {
        "edge-colouring"
    }

    fn build(&self, params: &Params) -> Result<Problem> {
        let k = params.need_k(self.name())?;
        if k < 4 {
            return Err(Error::InvalidParameter(format!(
                "edge-colouring: k = {k} leaves no proper tuple on degree-4 nodes"
            )));
        }
        let colours = Alphabet::new(digits(k))?;
        let distinct = |t: &HalfEdges| (0..4).all(|i| (i + 1..4).all(|j| t[i] != t[j]));
        let enc = encode_edge_lcl(format!("edge-{k}-colouring"), &colours, distinct, Agreement::Identity)?;
        Ok(Problem::Grid(enc.lcl))
    }
}

impl ProblemFamily for XOrientation {
    fn name(&self) -> &'static str {
        "x-orientation"
    }

    fn build(&self, params: &Params) -> Result<Problem> {
        Ok(Problem::Grid(x_orientation(
            params
                .set
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter("x-orientation: missing in-degree set X".into()))?,
        )?))
    }
}

/// Orientation problem where every in-degree must lie in `allowed`.
/// Edge symbols are `i` (edge points into the node) and `o`.
pub fn x_orientation(allowed: &BTreeSet<u8>) -> Result<GridLcl> {
    if allowed.is_empty() || allowed.iter().any(|&d| d > 4) {
        return Err(Error::InvalidParameter(format!(
            "x-orientation: X = {allowed:?} must be a non-empty subset of 0..=4"
        )));
    }
    let io = Alphabet::new(["i", "o"])?;
    let tag: String = allowed.iter().map(|d| d.to_string()).collect();
    let rule = |t: &HalfEdges| allowed.contains(&(t.iter().filter(|&&l| l == 0).count() as u8));
    Ok(encode_edge_lcl(format!("orientation-{tag}"), &io, rule, Agreement::Orientation)?.lcl)
}

impl ProblemFamily for GridMis {
    fn name(&self) -> &'static str {
        "mis"
    }

    /// Radius-1 normalised MIS: a non-member names a neighbour that is a member.
    fn build(&self, _params: &Params) -> Result<Problem> {
        let alphabet = Alphabet::new(["1", "0N", "0E", "0S", "0W"])?;
        let (one, n, e, s, w) = (0, 1, 2, 3, 4);
        let mut horizontal = Vec::new();
        let mut vertical = Vec::new();
        for a in 0..5 {
            for b in 0..5 {
                let ok_h = !(a == one && b == one) && (a != e || b == one) && (b != w || a == one);
                if ok_h {
                    horizontal.push((a, b));
                }
                let ok_v = !(a == one && b == one) && (a != n || b == one) && (b != s || a == one);
                if ok_v {
                    vertical.push((a, b));
                }
            }
        }
        Ok(Problem::Grid(GridLcl::new("mis", alphabet, horizontal, vertical)?))
    }
}

impl ProblemFamily for GridTrivial {
    fn name(&self) -> &'static str {
        "trivial"
    }

    fn build(&self, _params: &Params) -> Result<Problem> {
        let alphabet = Alphabet::new(["0"])?;
        Ok(Problem::Grid(GridLcl::new("trivial", alphabet, [(0, 0)], [(0, 0)])?))
    }
}

fn cycle_from_predicate(name: &str, labels: &[&str], accept: impl Fn(&[Label]) -> bool) -> Result<Problem> {
    let alphabet = Alphabet::new(labels.iter().copied())?;
    let q = labels.len() as Label;
    let mut windows = Vec::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                let w = [a, b, c];
                if accept(&w) {
                    windows.push(w.to_vec());
                }
            }
        }
    }
    Ok(Problem::Cycle(CycleLcl::new(name, alphabet, 1, windows)?))
}

impl ProblemFamily for TwoColouringCycle {
    fn name(&self) -> &'static str {
        "two-colouring-cycle"
    }

    fn build(&self, _params: &Params) -> Result<Problem> {
        cycle_from_predicate(self.name(), &["1", "2"], |w| w[0] != w[1] && w[1] != w[2])
    }
}

impl ProblemFamily for ThreeColouringCycle {
    fn name(&self) -> &'static str {
        "three-colouring-cycle"
    }

    fn build(&self, _params: &Params) -> Result<Problem> {
        cycle_from_predicate(self.name(), &["1", "2", "3"], |w| w[0] != w[1] && w[1] != w[2])
    }
}

impl ProblemFamily for MisCycle {
    fn name(&self) -> &'static str {
        "mis-cycle"
    }

    fn build(&self, _params: &Params) -> Result<Problem> {
        cycle_from_predicate(self.name(), &["0", "1"], |w| {
            let independent = !(w[1] == 1 && (w[0] == 1 || w[2] == 1));
            let dominated = w.contains(&1);
            independent && dominated
        })
    }
}

impl ProblemFamily for TrivialCycle {
    fn name(&self) -> &'static str {
        "trivial-cycle"
    }

    fn build(&self, _params: &Params) -> Result<Problem> {
        cycle_from_predicate(self.name(), &["0"], |_| true)
    }
}

/// All registered families, in a fixed order.
pub fn registry() -> Vec<Box<dyn ProblemFamily>> {
    vec![
        Box::new(VertexColouring),
        Box::new(EdgeColouring),
        Box::new(XOrientation),
        Box::new(GridMis),
        Box::new(GridTrivial),
        Box::new(TwoColouringCycle),
        Box::new(ThreeColouringCycle),
        Box::new(MisCycle),
        Box::new(TrivialCycle),
    ]
}

pub fn builtin(name: &str, params: &Params) -> Result<Problem> {
    registry()
        .into_iter()
        .find(|f| f.name() == name)
        .ok_or_else(|| Error::UnknownBuiltin(name.to_string()))?
        .build(params)
}

/// The shipped zoo: `(file stem, problem)` pairs.
pub fn shipped() -> Result<Vec<(String, Problem)>> {
    let mut out = Vec::new();
    for k in 2..=5 {
        out.push((format!("vertex-{k}-colouring"), builtin("vertex-colouring", &Params::with_k(k))?));
    }
    for k in 4..=5 {
        out.push((format!("edge-{k}-colouring"), builtin("edge-colouring", &Params::with_k(k))?));
    }
    for set in [&[2u8][..], &[1, 3, 4], &[0, 1, 3], &[1, 3], &[0, 3, 4]] {
        let p = builtin("x-orientation", &Params::with_set(set.iter().copied()))?;
        out.push((p.name().to_string(), p));
    }
    for name in ["mis", "trivial", "two-colouring-cycle", "three-colouring-cycle", "mis-cycle", "trivial-cycle"] {
        out.push((name.to_string(), builtin(name, &Params::default())?));
    }
    Ok(out)
}
