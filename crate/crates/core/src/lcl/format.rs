//! JSON problem documents.
//!
//! ```json
//! { "kind": "grid", "name": "...", "labels": ["1", "2"],
//!   "horizontal": [["1", "2"], ["2", "1"]], "vertical": [["1", "2"], ["2", "1"]] }
//! { "kind": "cycle", "name": "...", "labels": ["0", "1"], "radius": 1,
//!   "windows": ["001", "010", "100", "101"] }
//! ```
//!
//! Windows are plain strings when every label is a single character and
//! arrays of labels otherwise.

use serde::{Deserialize, Serialize};

use super::{read_sequence, Alphabet, CycleLcl, GridLcl, Label, Problem};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum ProblemDoc {
    Grid { name: String, labels: Vec<String>, horizontal: Vec<(String, String)>, vertical: Vec<(String, String)> },
    Cycle { name: String, labels: Vec<String>, radius: i64, windows: Vec<WindowDoc> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum WindowDoc {
    Text(String),
    Labels(Vec<String>),
}

fn pairs(alphabet: &Alphabet, pairs: &[(String, String)]) -> Result<Vec<(Label, Label)>> {
    pairs.iter().map(|(a, b)| Ok((alphabet.lookup(a)?, alphabet.lookup(b)?))).collect()
}

pub fn parse_problem(text: &str) -> Result<Problem> {
    let doc: ProblemDoc = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
    match doc {
        ProblemDoc::Grid { name, labels, horizontal, vertical } => {
            let alphabet = Alphabet::new(labels)?;
            let h = pairs(&alphabet, &horizontal)?;
            let v = pairs(&alphabet, &vertical)?;
            Ok(Problem::Grid(GridLcl::new(name, alphabet, h, v)?))
        }
        ProblemDoc::Cycle { name, labels, radius, windows } => {
            if radius < 1 {
                return Err(Error::InvalidProblem(format!("radius {radius} < 1")));
            }
            let alphabet = Alphabet::new(labels)?;
            let windows = windows
                .iter()
                .map(|w| match w {
                    WindowDoc::Text(t) => read_sequence(&alphabet, t),
                    WindowDoc::Labels(ls) => ls.iter().map(|l| alphabet.lookup(l)).collect(),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Problem::Cycle(CycleLcl::new(name, alphabet, radius as usize, windows)?))
        }
    }
}

pub fn serialize_problem(p: &Problem) -> String {
    let doc = match p {
        Problem::Grid(g) => {
            let a = g.alphabet();
            let names = |set: &std::collections::BTreeSet<(Label, Label)>| {
                set.iter().map(|&(x, y)| (a.name(x).to_string(), a.name(y).to_string())).collect()
            };
            ProblemDoc::Grid {
                name: g.name().to_string(),
                labels: a.names().to_vec(),
                horizontal: names(g.horizontal()),
                vertical: names(g.vertical()),
            }
        }
        Problem::Cycle(c) => {
            let a = c.alphabet();
            let windows = c
                .windows()
                .iter()
                .map(|w| {
                    if a.single_char() {
                        WindowDoc::Text(c.spell(w))
                    } else {
                        WindowDoc::Labels(w.iter().map(|&l| a.name(l).to_string()).collect())
                    }
                })
                .collect();
            ProblemDoc::Cycle {
                name: c.name().to_string(),
                labels: a.names().to_vec(),
                radius: c.radius() as i64,
                windows,
            }
        }
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("problem documents always serialize");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_two_colouring() {
        let text = r#"{"kind":"grid","name":"2col","labels":["1","2"],
            "horizontal":[["1","2"],["2","1"]],"vertical":[["1","2"],["2","1"]]}"#;
        let Problem::Grid(p) = parse_problem(text).unwrap() else { panic!("expected grid") };
        assert_eq!(p.alphabet().len(), 2);
        assert_eq!(p.horizontal().len(), 2);
        assert_eq!(p.vertical().len(), 2);
    }

    #[test]
    fn rejects_unknown_label() {
        let text = r#"{"kind":"grid","name":"x","labels":["1","2"],
            "horizontal":[["1","3"]],"vertical":[]}"#;
        assert!(matches!(parse_problem(text), Err(Error::UnknownLabel(l)) if l == "3"));
    }

    #[test]
    fn parses_mis_cycle() {
        let text = r#"{"kind":"cycle","name":"mis","labels":["0","1"],"radius":1,
            "windows":["001","010","100","101"]}"#;
        let Problem::Cycle(p) = parse_problem(text).unwrap() else { panic!("expected cycle") };
        assert_eq!(p.windows().len(), 4);
        // independent oracle: all length-3 strings with no adjacent 1s and no 000
        let expected: Vec<Vec<Label>> = (0..8u32)
            .map(|m| vec![(m >> 2) & 1, (m >> 1) & 1, m & 1])
            .filter(|w| !(w[0] == 1 && w[1] == 1) && !(w[1] == 1 && w[2] == 1))
            .filter(|w| w.contains(&1))
            .collect();
        assert_eq!(p.windows().iter().cloned().collect::<Vec<_>>(), expected);
    }

    #[test]
    fn rejects_bad_radius_and_garbage() {
        let text = r#"{"kind":"cycle","name":"m","labels":["0"],"radius":0,"windows":[]}"#;
        assert!(parse_problem(text).is_err());
        assert!(matches!(parse_problem("{ not json"), Err(Error::Malformed(_))));
        let text = r#"{"kind":"cycle","name":"m","labels":["0","1"],"radius":1,"windows":["0101"]}"#;
        assert!(parse_problem(text).is_err());
    }

    #[test]
    fn multi_char_windows_use_arrays() {
        let text = r#"{"kind":"cycle","name":"m","labels":["aa","b"],"radius":1,
            "windows":[["aa","b","aa"]]}"#;
        let p = parse_problem(text).unwrap();
        let out = serialize_problem(&p);
        assert!(out.contains("\"aa\""));
        assert_eq!(parse_problem(&out).unwrap(), p);
    }
}
