use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INVALID: i32 = 1;
    pub const HERMITICITY: i32 = 2;
    pub const NOT_VGP: i32 = 3;
    pub const BUDGET: i32 = 4;
    pub const INTERNAL: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed document: {0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] vgp_core::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use vgp_core::Error as E;
        match self {
            CliError::Io { .. } | CliError::Parse(_) | CliError::Usage(_) => exit::INVALID,
            CliError::Core(e) => match e {
                E::Hermiticity { .. } => exit::HERMITICITY,
                E::NotVgp { .. } => exit::NOT_VGP,
                E::BudgetExceeded { .. } => exit::BUDGET,
                E::ZeroWeightTrap(_) => exit::INTERNAL,
                _ => exit::INVALID,
            },
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Parse(e.to_string())
    }
}
