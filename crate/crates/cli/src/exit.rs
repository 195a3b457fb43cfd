//! Process exit codes.
//!
//! | code | meaning |
//! |------|---------|
//! | 0  | success; equivalent |
//! | 1  | not equivalent (a counterexample was found) |
//! | 2  | equivalence inconclusive |
//! | 3  | port mismatch between the AIG and the netlist |
//! | 10 | file could not be read or written |
//! | 11 | malformed input file (AIGER, BLIF, genlib, genome, report, config) |
//! | 12 | mapping failed |
//! | 13 | invalid arguments or configuration values |
//! | 14 | evolution precondition failed (the baseline does not map cleanly) |

use std::fmt;

use techmap_evolve::EvolveError;

pub const OK: i32 = 0;
pub const NOT_EQUIVALENT: i32 = 1;
pub const INCONCLUSIVE: i32 = 2;
pub const PORT_MISMATCH: i32 = 3;
pub const IO: i32 = 10;
pub const PARSE: i32 = 11;
pub const MAPPING: i32 = 12;
pub const USAGE: i32 = 13;
pub const PRECONDITION: i32 = 14;

/// An error message paired with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn new(code: i32, message: impl Into<String>) -> Failure {
        Failure { code, message: message.into() }
    }

    pub fn io(what: impl fmt::Display, err: impl fmt::Display) -> Failure {
        Failure::new(IO, format!("{what}: {err}"))
    }

    pub fn parse(what: impl fmt::Display, err: impl fmt::Display) -> Failure {
        Failure::new(PARSE, format!("{what}: {err}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<EvolveError> for Failure {
    fn from(e: EvolveError) -> Failure {
        let code = match &e {
            EvolveError::Config { field, .. } if field == "<document>" => PARSE,
            EvolveError::Config { .. } => USAGE,
            EvolveError::Suite(_) => PARSE,
            EvolveError::Baseline(_) => PRECONDITION,
            EvolveError::Io(_) => IO,
        };
        Failure::new(code, e.to_string())
    }
}
