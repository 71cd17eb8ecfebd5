use std::path::PathBuf;

use crate::model::GenericClass;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("type schema line {line}: {message}")]
    SchemaLine { line: usize, message: String },
    #[error("type schema is empty")]
    EmptySchema,
    #[error("invalid place type code {0:?}")]
    InvalidCode(String),
    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: String },
    #[error("invalid symbol {symbol:?} for class {class}")]
    InvalidSymbol { class: GenericClass, symbol: String },
    #[error("record validation failed: {0}")]
    Validation(String),

    #[error("gazetteer line {line}: {message}")]
    GazetteerRow { line: u64, message: String },
    #[error("candidate product {product} exceeds cap {cap}; pre-prune the candidate sets")]
    CandidateCap { product: u128, cap: usize },
    #[error("disambiguation needs at least one nonempty candidate set")]
    NoCandidates,

    #[error("natural breaks fit: {0}")]
    Fit(String),

    #[error("rule mining: {0}")]
    Mining(String),

    #[error("training: {0}")]
    Training(String),
    #[error("triple {0} is not in the codebook")]
    UnknownTriple(String),
    #[error("code {0} is not in the codebook")]
    UnknownCode(u32),
    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("generic class mismatch: {0} vs {1}")]
    ClassMismatch(GenericClass, GenericClass),
    #[error("evaluation: {0}")]
    Eval(String),
    #[error("missing report cells: {}", .0.join(", "))]
    MissingCells(Vec<String>),

    #[error("class map line {line}: {message}")]
    ClassMapLine { line: usize, message: String },
    #[error("type code {code} has no class term in dialect {dialect}")]
    UnmappedType { code: String, dialect: String },
    #[error("invalid query plan: {0}")]
    InvalidPlan(String),
    #[error("malformed query: {0}")]
    MalformedQuery(String),

    #[error("endpoint request timed out")]
    Timeout,
    #[error("transport error: {0}")]
    Transport(String),
    #[error("endpoint returned HTTP {status}")]
    Http { status: u16 },
    #[error("malformed SPARQL results: {0}")]
    MalformedResults(String),
    #[error("no recorded fixture for query")]
    FixtureMissing,

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::file(path, e))
}
