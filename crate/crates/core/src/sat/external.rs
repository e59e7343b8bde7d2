//! External solver process speaking DIMACS.
//!
//! The command is run through `sh -c` with the CNF file path appended as
//! the last argument. Its standard output must start (after `c` comment
//! lines) with `SAT`/`UNSAT` or the competition form `s SATISFIABLE` /
//! `s UNSATISFIABLE`, followed for satisfiable instances by model lines of
//! signed literals (optionally prefixed by `v`) terminated by `0`.

use std::io::Write as _;
use std::process::Command;

use super::{dimacs, CnfInstance, SatBackend, SatResult};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct ExternalSolver {
    command: String,
}

impl ExternalSolver {
    pub fn new(command: impl Into<String>) -> Result<Self> {
        let command = command.into();
        if command.trim().is_empty() {
            return Err(Error::Backend { backend: "external".into(), reason: "empty solver command".into() });
        }
        Ok(Self { command })
    }

    fn fail(&self, reason: impl Into<String>) -> Error {
        Error::Backend { backend: format!("external ({})", self.command), reason: reason.into() }
    }
}

/// Parses solver output into a model over `num_vars` variables. Variables
/// the solver leaves out of the model default to `false`.
pub fn parse_output(stdout: &str, num_vars: usize) -> std::result::Result<SatResult, String> {
    let mut lines = stdout.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('c'));
    let verdict = lines.next().ok_or("solver printed no verdict")?;
    match verdict {
        "UNSAT" | "UNSATISFIABLE" | "s UNSATISFIABLE" => return Ok(SatResult::Unsat),
        "SAT" | "SATISFIABLE" | "s SATISFIABLE" => {}
        other => return Err(format!("unrecognised verdict `{other}`")),
    }
    let mut model = vec![false; num_vars + 1];
    let mut terminated = false;
    for line in lines {
        let body = line.strip_prefix('v').unwrap_or(line);
        for tok in body.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| format!("bad model literal `{tok}`"))?;
            if lit == 0 {
                terminated = true;
                continue;
            }
            let v = lit.unsigned_abs() as usize;
            if v > num_vars {
                return Err(format!("model literal {lit} out of range"));
            }
            model[v] = lit > 0;
        }
    }
    if !terminated && num_vars > 0 {
        return Err("model is not terminated by 0".into());
    }
    Ok(SatResult::Sat(model))
}

impl SatBackend for ExternalSolver {
    fn name(&self) -> &'static str {
        "external"
    }

    fn solve(&self, cnf: &CnfInstance) -> Result<SatResult> {
        let mut file = tempfile::Builder::new().suffix(".cnf").tempfile()?;
        file.write_all(dimacs::write(cnf).as_bytes())?;
        file.flush()?;
        let output = Command::new("sh")
            .arg("-c")
            .arg(format!("{} \"$1\"", self.command))
            .arg("sh")
            .arg(file.path())
            .output()
            .map_err(|e| self.fail(format!("cannot start: {e}")))?;
        let code = output.status.code();
        if !matches!(code, Some(0) | Some(10) | Some(20)) {
            return Err(self.fail(format!(
                "exit status {:?}: {}",
                code,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        let stdout = String::from_utf8_lossy(&output.stdout);
        let result = parse_output(&stdout, cnf.num_vars()).map_err(|e| self.fail(e))?;
        if let SatResult::Sat(model) = &result {
            if !cnf.satisfied_by(model) {
                return Err(self.fail("returned model does not satisfy the formula"));
            }
        }
        Ok(result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_output_styles() {
        assert_eq!(parse_output("SAT\n1 -2 0\n", 2).unwrap(), SatResult::Sat(vec![false, true, false]));
        assert_eq!(
            parse_output("c hello\ns SATISFIABLE\nv -1 2\nv 0\n", 2).unwrap(),
            SatResult::Sat(vec![false, false, true])
        );
        assert_eq!(parse_output("s UNSATISFIABLE\n", 2).unwrap(), SatResult::Unsat);
        assert!(parse_output("", 2).is_err());
        assert!(parse_output("MAYBE\n", 2).is_err());
        assert!(parse_output("SAT\n1 5 0\n", 2).is_err());
        assert!(parse_output("SAT\n1 2\n", 2).is_err());
    }

    #[test]
    fn missing_executable_is_an_error() {
        let mut c = CnfInstance::new(1);
        c.add_clause([1]).unwrap();
        let s = ExternalSolver::new("/nonexistent/solver-binary").unwrap();
        assert!(matches!(s.solve(&c), Err(Error::Backend { .. })));
    }

    #[test]
    fn garbage_model_is_an_error() {
        let mut c = CnfInstance::new(1);
        c.add_clause([1]).unwrap();
        let s = ExternalSolver::new("printf 'SAT\\n-1 0\\n'; true").unwrap();
        assert!(matches!(s.solve(&c), Err(Error::Backend { .. })));
        let s = ExternalSolver::new("echo SAT; echo 1 0; true").unwrap();
        assert_eq!(s.solve(&c).unwrap(), SatResult::Sat(vec![false, true]));
    }
}
