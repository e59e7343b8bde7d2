//! Locally checkable labelling problems on oriented toroidal grids and
//! directed cycles.
//!
//! Grid coordinates are `(row, col)`. Row `i + 1` lies north of row `i` and
//! column `j + 1` lies east of column `j`; both wrap modulo `n`.

mod edge;
mod format;
pub mod zoo;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

pub use edge::{encode_edge_lcl, Agreement, EdgeLcl, HalfEdges};
pub use format::{parse_problem, serialize_problem};
pub use zoo::builtin;

/// Index of a symbol inside an [`Alphabet`].
pub type Label = u32;

/// Ordered, duplicate-free list of output symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
    index: HashMap<String, Label>,
}

impl Alphabet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::InvalidProblem("alphabet is empty".into()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l.chars().any(char::is_whitespace) {
                return Err(Error::InvalidProblem(format!("label `{l}` must be a non-empty token")));
            }
            if index.insert(l.clone(), i as Label).is_some() {
                return Err(Error::InvalidProblem(format!("duplicate label `{l}`")));
            }
        }
        Ok(Self { labels, index })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn name(&self, l: Label) -> &str {
        &self.labels[l as usize]
    }

    pub fn get(&self, name: &str) -> Option<Label> {
        self.index.get(name).copied()
    }

    pub fn lookup(&self, name: &str) -> Result<Label> {
        self.get(name).ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    pub fn names(&self) -> &[String] {
        &self.labels
    }

    /// True when every symbol is a single character, so sequences can be
    /// written as plain strings.
    pub fn single_char(&self) -> bool {
        self.labels.iter().all(|l| l.chars().count() == 1)
    }
}

/// Radius-1, edge-checkable LCL on oriented toroidal grids.
#[derive(Clone, Debug)]
pub struct GridLcl {
    name: String,
    alphabet: Alphabet,
    horizontal: BTreeSet<(Label, Label)>,
    vertical: BTreeSet<(Label, Label)>,
    h_table: Vec<bool>,
    v_table: Vec<bool>,
}

impl PartialEq for GridLcl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.alphabet == other.alphabet
            && self.horizontal == other.horizontal
            && self.vertical == other.vertical
    }
}

impl GridLcl {
    /// `horizontal` holds `(west, east)` pairs, `vertical` holds `(south, north)` pairs.
    pub fn new(
        name: impl Into<String>,
        alphabet: Alphabet,
        horizontal: impl IntoIterator<Item = (Label, Label)>,
        vertical: impl IntoIterator<Item = (Label, Label)>,
    ) -> Result<Self> {
        let size = alphabet.len();
        let horizontal: BTreeSet<_> = horizontal.into_iter().collect();
        let vertical: BTreeSet<_> = vertical.into_iter().collect();
        let mut h_table = vec![false; size * size];
        let mut v_table = vec![false; size * size];
        for (pairs, table) in [(&horizontal, &mut h_table), (&vertical, &mut v_table)] {
            for &(a, b) in pairs {
                if a as usize >= size || b as usize >= size {
                    return Err(Error::InvalidProblem(format!("pair ({a}, {b}) outside alphabet")));
                }
                table[a as usize * size + b as usize] = true;
            }
        }
        Ok(Self { name: name.into(), alphabet, horizontal, vertical, h_table, v_table })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn horizontal(&self) -> &BTreeSet<(Label, Label)> {
        &self.horizontal
    }

    pub fn vertical(&self) -> &BTreeSet<(Label, Label)> {
        &self.vertical
    }

    pub fn allows(&self, axis: Axis, first: Label, second: Label) -> bool {
        let size = self.alphabet.len();
        if first as usize >= size || second as usize >= size {
            return false;
        }
        let idx = first as usize * size + second as usize;
        match axis {
            Axis::Horizontal => self.h_table[idx],
            Axis::Vertical => self.v_table[idx],
            Axis::Window | Axis::Symbol => false,
        }
    }
}

/// Windowed LCL on directed cycles: every length `2r+1` window must be listed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleLcl {
    name: String,
    alphabet: Alphabet,
    radius: usize,
    windows: BTreeSet<Vec<Label>>,
}

impl CycleLcl {
    pub fn new(
        name: impl Into<String>,
        alphabet: Alphabet,
        radius: usize,
        windows: impl IntoIterator<Item = Vec<Label>>,
    ) -> Result<Self> {
        if radius < 1 {
            return Err(Error::InvalidProblem("radius must be at least 1".into()));
        }
        let windows: BTreeSet<_> = windows.into_iter().collect();
        for w in &windows {
            if w.len() != 2 * radius + 1 {
                return Err(Error::InvalidProblem(format!("window of length {} for radius {radius}", w.len())));
            }
            if w.iter().any(|&l| l as usize >= alphabet.len()) {
                return Err(Error::InvalidProblem("window symbol outside alphabet".into()));
            }
        }
        Ok(Self { name: name.into(), alphabet, radius, windows })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn windows(&self) -> &BTreeSet<Vec<Label>> {
        &self.windows
    }

    /// Writes a label sequence using the alphabet's names.
    pub fn spell(&self, seq: &[Label]) -> String {
        spell(&self.alphabet, seq)
    }

    /// Inverse of [`CycleLcl::spell`].
    pub fn read(&self, text: &str) -> Result<Vec<Label>> {
        read_sequence(&self.alphabet, text)
    }

    /// Returns a copy with every symbol renamed through `rename`.
    pub fn relabel(&self, rename: impl Fn(&str) -> String) -> Result<Self> {
        let alphabet = Alphabet::new(self.alphabet.names().iter().map(|l| rename(l)))?;
        Self::new(self.name.clone(), alphabet, self.radius, self.windows.iter().cloned())
    }
}

pub(crate) fn spell(alphabet: &Alphabet, seq: &[Label]) -> String {
    let sep = if alphabet.single_char() { "" } else { " " };
    seq.iter().map(|&l| alphabet.name(l)).collect::<Vec<_>>().join(sep)
}

pub(crate) fn read_sequence(alphabet: &Alphabet, text: &str) -> Result<Vec<Label>> {
    if alphabet.single_char() && !text.contains(char::is_whitespace) {
        text.chars().map(|c| alphabet.lookup(&c.to_string())).collect()
    } else {
        text.split_whitespace().map(|t| alphabet.lookup(t)).collect()
    }
}

/// Either kind of problem, as read from a problem document.
#[derive(Clone, Debug, PartialEq)]
pub enum Problem {
    Grid(GridLcl),
    Cycle(CycleLcl),
}

impl Problem {
    pub fn name(&self) -> &str {
        match self {
            Problem::Grid(p) => p.name(),
            Problem::Cycle(p) => p.name(),
        }
    }

    pub fn into_grid(self) -> Result<GridLcl> {
        match self {
            Problem::Grid(p) => Ok(p),
            Problem::Cycle(p) => {
                Err(Error::Malformed(format!("`{}` is a cycle problem, expected a grid problem", p.name())))
            }
        }
    }

    pub fn into_cycle(self) -> Result<CycleLcl> {
        match self {
            Problem::Cycle(p) => Ok(p),
            Problem::Grid(p) => {
                Err(Error::Malformed(format!("`{}` is a grid problem, expected a cycle problem", p.name())))
            }
        }
    }
}

/// Full labelling of an `n × n` torus, stored row-major.
///
/// Tokens that are not in the problem's alphabet are kept (as indices past
/// the end of the alphabet) so the checker can report them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelledGrid {
    n: usize,
    cells: Vec<Label>,
    foreign: Vec<String>,
}

impl LabelledGrid {
    pub fn new(n: usize, cells: Vec<Label>) -> Result<Self> {
        if n < 2 {
            return Err(Error::GridTooSmall { n, min: 2 });
        }
        if cells.len() != n * n {
            return Err(Error::Precondition(format!("expected {} cells, got {}", n * n, cells.len())));
        }
        Ok(Self { n, cells, foreign: Vec::new() })
    }

    pub fn filled(n: usize, label: Label) -> Result<Self> {
        Self::new(n, vec![label; n * n])
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Label) -> Result<Self> {
        let mut cells = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                cells.push(f(r, c));
            }
        }
        Self::new(n, cells)
    }

    /// Builds a grid from label names; unknown names are retained as foreign symbols.
    pub fn from_names<S: AsRef<str>>(n: usize, names: &[S], alphabet: &Alphabet) -> Result<Self> {
        let mut foreign: Vec<String> = Vec::new();
        let cells = names
            .iter()
            .map(|s| {
                let s = s.as_ref();
                alphabet.get(s).unwrap_or_else(|| {
                    let pos = foreign.iter().position(|f| f == s).unwrap_or_else(|| {
                        foreign.push(s.to_string());
                        foreign.len() - 1
                    });
                    (alphabet.len() + pos) as Label
                })
            })
            .collect();
        let mut grid = Self::new(n, cells)?;
        grid.foreign = foreign;
        Ok(grid)
    }

    /// Parses the text format: one row per line, row 0 first, labels separated
    /// by whitespace (or packed together when every label is one character).
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self> {
        let rows: Vec<Vec<String>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|line| {
                if line.contains(char::is_whitespace) || !alphabet.single_char() {
                    line.split_whitespace().map(str::to_string).collect()
                } else {
                    line.chars().map(|c| c.to_string()).collect()
                }
            })
            .collect();
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Malformed("labelling must be a square of n rows with n labels each".into()));
        }
        let names: Vec<String> = rows.into_iter().flatten().collect();
        Self::from_names(n, &names, alphabet)
    }

    pub fn render(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        for r in 0..self.n {
            let row: Vec<&str> = (0..self.n).map(|c| self.label_name(self.get(r, c), alphabet)).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[Label] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> Label {
        self.cells[(row % self.n) * self.n + col % self.n]
    }

    pub fn set(&mut self, row: usize, col: usize, label: Label) {
        let n = self.n;
        self.cells[(row % n) * n + col % n] = label;
    }

    pub fn label_name<'a>(&'a self, l: Label, alphabet: &'a Alphabet) -> &'a str {
        let l = l as usize;
        if l < alphabet.len() {
            alphabet.name(l as Label)
        } else {
            self.foreign.get(l - alphabet.len()).map(String::as_str).unwrap_or("?")
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    /// `(west, east)` pair.
    Horizontal,
    /// `(south, north)` pair.
    Vertical,
    /// Cycle window.
    Window,
    /// Symbol outside the alphabet.
    Symbol,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Location {
    Cell { row: usize, col: usize },
    Index(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub location: Location,
    pub axis: Axis,
    pub detail: Vec<String>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.location {
            Location::Cell { row, col } => write!(f, "({row}, {col})")?,
            Location::Index(i) => write!(f, "[{i}]")?,
        }
        write!(f, " {:?}: {}", self.axis, self.detail.join(" "))
    }
}

/// Reports every non-allowed adjacent pair and every foreign symbol.
pub fn check_grid(p: &GridLcl, g: &LabelledGrid) -> Vec<Violation> {
    let n = g.n();
    let alphabet = p.alphabet();
    let mut out = Vec::new();
    for r in 0..n {
        for c in 0..n {
            let here = g.get(r, c);
            if here as usize >= alphabet.len() {
                out.push(Violation {
                    location: Location::Cell { row: r, col: c },
                    axis: Axis::Symbol,
                    detail: vec![g.label_name(here, alphabet).to_string()],
                });
            }
            let east = g.get(r, c + 1);
            if !p.allows(Axis::Horizontal, here, east) {
                out.push(Violation {
                    location: Location::Cell { row: r, col: c },
                    axis: Axis::Horizontal,
                    detail: vec![g.label_name(here, alphabet).into(), g.label_name(east, alphabet).into()],
                });
            }
            let north = g.get(r + 1, c);
            if !p.allows(Axis::Vertical, here, north) {
                out.push(Violation {
                    location: Location::Cell { row: r, col: c },
                    axis: Axis::Vertical,
                    detail: vec![g.label_name(here, alphabet).into(), g.label_name(north, alphabet).into()],
                });
            }
        }
    }
    out
}

/// Reports every index whose centred window is not allowed.
pub fn check_cycle(p: &CycleLcl, labels: &[Label]) -> Result<Vec<Violation>> {
    let n = labels.len();
    let r = p.radius();
    if n <= 2 * r {
        return Err(Error::CycleTooShort { n, min: 2 * r + 1 });
    }
    let mut out = Vec::new();
    let mut window = Vec::with_capacity(2 * r + 1);
    for i in 0..n {
        window.clear();
        window.extend((0..=2 * r).map(|d| labels[(i + n - r + d) % n]));
        if !p.windows().contains(&window) {
            let detail =
                window
                    .iter()
                    .map(|&l| {
                        if (l as usize) < p.alphabet().len() {
                            p.alphabet().name(l).to_string()
                        } else {
                            format!("#{l}")
                        }
                    })
                    .collect();
            out.push(Violation { location: Location::Index(i), axis: Axis::Window, detail });
        }
    }
    Ok(out)
}
