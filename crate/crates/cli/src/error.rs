use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] quantbound_core::Error),
    #[error("output error: {0}")]
    Output(String),
}

