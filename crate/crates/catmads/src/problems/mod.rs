//! Problem abstraction, built-in synthetic problems and the external
//! blackbox adapter.

mod external;
mod mechanical;
mod synthetic;

pub use external::external_blackbox;
pub use mechanical::{anchor_point, feasible_components, mechanical_analog};
pub use synthetic::synthetic_suite;

use std::path::Path;

use serde::Deserialize;

use crate::domain::{Domain, Evaluation, Point, VariableSpec};
use crate::error::{Error, Result};

type EvalFn = Box<dyn Fn(&Point) -> Evaluation + Send + Sync>;

/// A blackbox optimization problem.
pub struct Problem {
    pub name: String,
    pub domain: Domain,
    pub n_constraints: usize,
    /// Reference optimum for testing, when one is known.
    pub known_best: Option<f64>,
    /// A point attaining the reference optimum, when one is known.
    pub known_best_point: Option<Point>,
    evaluate: EvalFn,
}

impl Problem {
    pub fn new<F>(
        name: &str,
        domain: Domain,
        n_constraints: usize,
        known_best: Option<f64>,
        evaluate: F,
    ) -> Self
    where
        F: Fn(&Point) -> Evaluation + Send + Sync + 'static,
    {
        Problem {
            name: name.to_owned(),
            domain,
            n_constraints,
            known_best,
            known_best_point: None,
            evaluate: Box::new(evaluate),
        }
    }

    pub fn evaluate(&self, point: &Point) -> Evaluation {
        (self.evaluate)(point)
    }
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("n", &self.domain.n())
            .field("n_constraints", &self.n_constraints)
            .field("known_best", &self.known_best)
            .finish()
    }
}

#[derive(Debug, Deserialize)]
struct ProblemFile {
    name: Option<String>,
    #[serde(default)]
    n_constraints: usize,
    /// External blackbox command line (program plus arguments).
    command: Vec<String>,
    variables: Vec<VariableSpec>,
}

/// Loads an external-blackbox problem definition from a TOML file.
pub fn load_problem_file(path: &Path) -> Result<Problem> {
    let text = std::fs::read_to_string(path)?;
    let decl: ProblemFile =
        toml::from_str(&text).map_err(|e| Error::Parse(format!("problem file: {e}")))?;
    let domain = Domain::new(decl.variables)?;
    let name = decl.name.unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "external".into())
    });
    external_blackbox(&decl.command, &name, domain, decl.n_constraints)
}

/// Resolves a problem reference: a built-in name, a synthetic suite member
/// (`synthetic-<i>`), or a path to a problem definition file.
pub fn resolve(reference: &str, suite_seed: u64) -> Result<Problem> {
    if reference == "mech-analog" {
        return Ok(mechanical_analog());
    }
    if let Some(idx) = reference.strip_prefix("synthetic-") {
        let idx: usize = idx
            .parse()
            .map_err(|_| Error::Config(format!("unknown problem reference '{reference}'")))?;
        let mut suite = synthetic_suite(suite_seed);
        if idx >= suite.len() {
            return Err(Error::Config(format!(
                "synthetic index {idx} out of range (suite has {} problems)",
                suite.len()
            )));
        }
        return Ok(suite.swap_remove(idx));
    }
    let path = Path::new(reference);
    if path.exists() {
        return load_problem_file(path);
    }
    Err(Error::Config(format!("unknown problem reference '{reference}'")))
}
