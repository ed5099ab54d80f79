use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("invalid certificate: {0}")]
    Certificate(String),

    #[error("{what} is inapplicable: {why}")]
    Inapplicable { what: &'static str, why: String },

    #[error("n = {n} is below the validity threshold {threshold}")]
    BelowThreshold { n: f64, threshold: f64 },

    #[error("no bound: D = {d} is not below D_max = {limit}")]
    NoBound { d: f64, limit: f64 },

    #[error("optimizer did not converge (best value {best})")]
    NoConvergence { best: f64 },

    #[error("degenerate codebook: {0}")]
    Degenerate(String),

    #[error("sampler failure: {0}")]
    Sampler(String),
}

pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        op,
        detail: detail.into(),
    }
}
