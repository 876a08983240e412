use serde_json::json;
use thiserror::Error;

/// Everything a subcommand can fail with, mapped onto the exit codes
/// 1 (I/O), 2 (configuration), 3 (numerical failure), 4 (work budget).
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    /// A check the command exists to perform did not pass.
    #[error("{0}")]
    Numerical(String),
    #[error(transparent)]
    Core(#[from] tori_core::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use tori_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Core(e) => match e {
                E::InvalidParameter(_) | E::Precondition(_) | E::Json(_) => 2,
                E::NonFinite { .. } | E::Overflow(_) => 3,
                E::WorkBudgetExceeded { .. } => 4,
                E::Io(_) | E::Format(_) => 1,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        use tori_core::Error as E;
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Core(e) => match e {
                E::InvalidParameter(_) | E::Json(_) => "config",
                E::Precondition(_) => "precondition",
                E::NonFinite { .. } => "blow_up",
                E::Overflow(_) => "overflow",
                E::WorkBudgetExceeded { .. } => "work_budget_exceeded",
                E::Io(_) => "io",
                E::Format(_) => "format",
            },
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let CliError::Core(tori_core::Error::NonFinite { time }) = self {
            v["time"] = json!(time);
        }
        if let CliError::Core(tori_core::Error::WorkBudgetExceeded { required, budget }) = self {
            v["required"] = json!(required.to_string());
            v["budget"] = json!(budget.to_string());
        }
        v
    }
}
