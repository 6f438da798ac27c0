use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum GwmError {
    #[error("invalid alphabet: {0}")]
    Alphabet(String),

    #[error("encoding error at position {position}: {message}")]
    Encoding { position: usize, message: String },

    #[error("invalid bin specification: {0}")]
    BinSpec(String),

    #[error("invalid pattern expression `{expr}`: {message}")]
    Pattern { expr: String, message: String },

    #[error("symbol '{symbol}' not in alphabet")]
    ForeignSymbol { symbol: char },

    #[error("hierarchy error: {0}")]
    Hierarchy(String),

    #[error("dataset error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Dataset { line: Option<usize>, message: String },

    #[error("statistics error: {0}")]
    Stats(String),

    #[error("synthesis error: {0}")]
    Synthesis(String),

    #[error("repository mining error: {0}")]
    Mining(String),

    #[error("test generation error: {0}")]
    TestGen(String),

    #[error("apriori error: {0}")]
    Apriori(String),

    #[error("pipeline error in stage `{stage}`: {message}")]
    Pipeline { stage: String, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GwmError>;
