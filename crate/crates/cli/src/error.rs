use std::fmt;

/// A failure carrying the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub msg: String,
}

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_CORRUPT: i32 = 4;

impl Failure {
    pub fn config(msg: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, msg: msg.into() }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Self { code: EXIT_DATA, msg: msg.into() }
    }

    pub fn corrupt(msg: impl Into<String>) -> Self {
        Self { code: EXIT_CORRUPT, msg: msg.into() }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self { code: 1, msg: format!("{}: {e}", path.display()) }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl From<maxstable::Error> for Failure {
    fn from(e: maxstable::Error) -> Self {
        use maxstable::Error::*;
        let code = match &e {
            Config(_) | Constraint(_) | Structure(_) | Unsupported(_) | Capability(_) => EXIT_CONFIG,
            Domain(_) | Infeasible(_) | Degenerate(_) => EXIT_DATA,
            Numerical(_) => 1,
        };
        Self { code, msg: e.to_string() }
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;
