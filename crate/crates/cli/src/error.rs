use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] circrx::Error),
    #[error("output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    /// 2 for anything the user can fix in the config, 3 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        use circrx::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Model(e) => match e {
                E::InvalidParam { .. }
                | E::NonNominalAntenna { .. }
                | E::OverlappingClocks
                | E::PhaseOffGrid { .. }
                | E::NoSections
                | E::Arity { .. }
                | E::Aliasing { .. }
                | E::Empty(_)
                | E::Dimension(_)
                | E::Json(_) => 2,
                E::Io(_) => 1,
                _ => 3,
            },
            CliError::Output(_) => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(std::io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(std::io::Error::other(e))
    }
}
