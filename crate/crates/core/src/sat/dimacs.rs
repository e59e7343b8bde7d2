//! DIMACS CNF text format.

use std::fmt::Write as _;

use super::CnfInstance;
use crate::error::{Error, Result};

pub fn write(cnf: &CnfInstance) -> String {
    let mut out = String::new();
    writeln!(out, "p cnf {} {}", cnf.num_vars(), cnf.clauses().len()).unwrap();
    for clause in cnf.clauses() {
        for lit in clause {
            write!(out, "{lit} ").unwrap();
        }
        out.push_str("0\n");
    }
    out
}

pub fn parse(text: &str) -> Result<CnfInstance> {
    let mut cnf: Option<CnfInstance> = None;
    let mut declared = 0;
    let mut pending: Vec<i32> = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(header) = line.strip_prefix("p") {
            let fields: Vec<&str> = header.split_whitespace().collect();
            match fields.as_slice() {
                ["cnf", v, c] => {
                    let v = v.parse().map_err(|_| Error::Malformed(format!("bad header `{line}`")))?;
                    declared = c.parse().map_err(|_| Error::Malformed(format!("bad header `{line}`")))?;
                    cnf = Some(CnfInstance::new(v));
                }
                _ => return Err(Error::Malformed(format!("bad header `{line}`"))),
            }
            continue;
        }
        let target = cnf.as_mut().ok_or_else(|| Error::Malformed("clause before `p cnf` header".into()))?;
        for tok in line.split_whitespace() {
            let lit: i32 = tok.parse().map_err(|_| Error::Malformed(format!("bad literal `{tok}`")))?;
            if lit == 0 {
                target.add_clause(pending.drain(..))?;
            } else {
                pending.push(lit);
            }
        }
    }
    let cnf = cnf.ok_or_else(|| Error::Malformed("missing `p cnf` header".into()))?;
    if !pending.is_empty() {
        return Err(Error::Malformed("unterminated clause".into()));
    }
    if cnf.clauses().len() != declared {
        return Err(Error::Malformed(format!("header declares {declared} clauses, found {}", cnf.clauses().len())));
    }
    Ok(cnf)
}
