//! Compile-once, solve-many MINSAT.
//!
//! A MINSAT instance is a CNF formula with a nonnegative cost on each
//! variable; the task is a model of least total True-cost. This crate
//! normalizes instances, splits the variables into an enumerated part and
//! a hidden-Horn easy part, solves by branch-and-bound over the enumerated
//! part, and learns clauses from sampled partial instances so that later
//! solves of the same class are cheaper.

pub mod cnf;
pub mod driver;
pub mod forms;
pub mod gen;
pub mod instance;
pub mod learner;
pub mod oracle;
pub mod partition;
pub mod solver;
mod twosat;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cnf::{Clause, CnfFormula, Lit, ParseError, Var};
pub use driver::CompiledClass;
pub use instance::{Fixing, MinsatInstance, RawCosts};
pub use solver::{solve, Outcome, SolveOptions};

/// Satisfiability only, or least cost.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Sat,
    Minsat,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s.to_ascii_lowercase().as_str() {
            "sat" => Ok(Mode::Sat),
            "minsat" => Ok(Mode::Minsat),
            _ => Err(format!("unknown mode {s:?}, expected sat or minsat")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Sat => "sat",
            Mode::Minsat => "minsat",
        })
    }
}

/// Runs the guide's and README's code samples as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/instances.md")]
    mod instances {}
    #[doc = include_str!("../../../book/src/partition.md")]
    mod partition {}
    #[doc = include_str!("../../../book/src/solving.md")]
    mod solving {}
    #[doc = include_str!("../../../book/src/learning.md")]
    mod learning {}
    #[doc = include_str!("../../../book/src/artifacts.md")]
    mod artifacts {}
    #[doc = include_str!("../../../book/src/curves.md")]
    mod curves {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
