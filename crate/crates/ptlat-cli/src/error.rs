//! CLI error taxonomy: configuration problems exit with status 2, failures
//! during computation or output with status 3.

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: invalid flag values, malformed config files, unknown
    /// presets, or parameter combinations the library rejects up front.
    #[error("{0}")]
    Config(String),
    /// Failure while running the experiment or writing its artifacts.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

/// Adapter for `map_err` where the failure means "the configuration asked
/// for something impossible".
pub fn cfg_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

/// Adapter for `map_err` where the failure happened while computing results.
pub fn run_err<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}
