use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(
        "integration accuracy: norm drift {drift:.3e} exceeds 1e-6; \
         retry with dt <= {suggested_dt:.3e} s"
    )]
    Accuracy { drift: f64, suggested_dt: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
