use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("need at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("k = {k} exceeds the {distinct} distinct points")]
    TooFewDistinct { k: usize, distinct: usize },
    #[error("k range {0}..={1} must lie within 2..=12")]
    KRange(usize, usize),
    #[error("perplexity too large: {perplexity} must be below (n - 1) / 3 = {bound}")]
    PerplexityTooLarge { perplexity: f64, bound: f64 },
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("no usable columns: every column has zero variance")]
    NoColumns,
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
