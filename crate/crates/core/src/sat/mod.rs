//! CNF instances and interchangeable satisfiability backends.

mod cdcl;
pub mod dimacs;
mod external;

use crate::error::{Error, Result};

pub use cdcl::{Branching, InternalSolver};
pub use external::ExternalSolver;

/// Environment variable holding the default external solver command.
pub const SOLVER_ENV: &str = "LCLGRID_SOLVER";

/// Propositional formula over variables `1..=num_vars`, literals as signed
/// integers in DIMACS convention.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnfInstance {
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
}

impl CnfInstance {
    pub fn new(num_vars: usize) -> Self {
        Self { num_vars, clauses: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Allocates a fresh variable and returns its index.
    pub fn new_var(&mut self) -> i32 {
        self.num_vars += 1;
        self.num_vars as i32
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    /// Adds a clause. Empty clauses and out-of-range literals are rejected.
    pub fn add_clause(&mut self, lits: impl IntoIterator<Item = i32>) -> Result<()> {
        let clause: Vec<i32> = lits.into_iter().collect();
        if clause.is_empty() {
            return Err(Error::Precondition("empty clause".into()));
        }
        if let Some(&bad) = clause.iter().find(|&&l| l == 0 || l.unsigned_abs() as usize > self.num_vars) {
            return Err(Error::Precondition(format!("literal {bad} out of range 1..={}", self.num_vars)));
        }
        self.clauses.push(clause);
        Ok(())
    }

    /// True when `model` (indexed by variable, slot 0 unused) satisfies every clause.
    pub fn satisfied_by(&self, model: &[bool]) -> bool {
        model.len() == self.num_vars + 1
            && self.clauses.iter().all(|c| c.iter().any(|&l| model[l.unsigned_abs() as usize] == (l > 0)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    /// Model indexed by variable; index 0 is unused.
    Sat(Vec<bool>),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }
}

pub trait SatBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, cnf: &CnfInstance) -> Result<SatResult>;
}

/// Backend options gathered from the command line or caller.
#[derive(Clone, Debug, Default)]
pub struct BackendConfig {
    /// External solver command; falls back to [`SOLVER_ENV`].
    pub solver_cmd: Option<String>,
    pub branching: Branching,
}

/// Instantiates a backend by name (`internal` or `external`).
pub fn backend(name: &str, config: &BackendConfig) -> Result<Box<dyn SatBackend>> {
    match name {
        "internal" => Ok(Box::new(InternalSolver::new(config.branching))),
        "external" => {
            let cmd = match &config.solver_cmd {
                Some(c) => c.clone(),
                None => std::env::var(SOLVER_ENV).map_err(|_| Error::Backend {
                    backend: "external".into(),
                    reason: format!("no solver command given and {SOLVER_ENV} is unset"),
                })?,
            };
            Ok(Box::new(ExternalSolver::new(cmd)?))
        }
        other => Err(Error::UnknownBackend(other.to_string())),
    }
}

pub const BACKENDS: &[&str] = &["internal", "external"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_malformed_clauses() {
        let mut c = CnfInstance::new(2);
        assert!(c.add_clause([]).is_err());
        assert!(c.add_clause([3]).is_err());
        assert!(c.add_clause([0]).is_err());
        assert!(c.add_clause([1, -2]).is_ok());
    }

    #[test]
    fn unknown_backend() {
        assert!(matches!(backend("minisat", &BackendConfig::default()), Err(Error::UnknownBackend(_))));
    }
}
