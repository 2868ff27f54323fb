use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config {path}: {msg}")]
    Config { path: String, msg: String },

    #[error("[{module}] {source}", module = module_of(.source))]
    Core {
        #[from]
        source: kleinwave::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("validation failed: {0} check(s) did not pass")]
    Validation(usize),
}

impl CliError {
    pub fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for configuration problems, 2 for numerical failures, 3 for a
    /// failed validation run.
    pub fn exit_code(&self) -> i32 {
        use kleinwave::Error as E;
        match self {
            CliError::Config { .. } | CliError::Io { .. } => 1,
            CliError::Core { source } => match source {
                E::Configuration(_)
                | E::InvalidInput(_)
                | E::Capacity { .. }
                | E::Domain { .. }
                | E::ComplexData => 1,
                _ => 2,
            },
            CliError::Validation(_) => 3,
        }
    }
}

/// Library module an error originates from.
fn module_of(e: &kleinwave::Error) -> &'static str {
    use kleinwave::Error as E;
    match e {
        E::VanishingF { .. } | E::Capacity { .. } => "basis",
        E::Compatibility { .. } => "wavepoly",
        E::HaarViolation(_)
        | E::ComplexData
        | E::Stagnation { .. }
        | E::IterationCap { .. }
        | E::LinearProgram(_) => "approx",
        E::NonConvergence { .. } => "transmute",
        E::Configuration(_) => "cauchy",
        E::InvalidInput(_) | E::Domain { .. } => "input",
    }
}
