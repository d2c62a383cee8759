use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate analysis geometry: {0}")]
    DegenerateGeometry(String),

    #[error("grid has {points} points, above the dense-oracle limit of {limit}")]
    GridTooLarge { points: usize, limit: usize },

    #[error("insufficient data for fit: {0}")]
    InsufficientData(String),

    #[error("lemma not applicable: {0}")]
    LemmaInapplicable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
