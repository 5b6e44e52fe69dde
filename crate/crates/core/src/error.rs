use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error("edge list parse error at line {line}: {message}")]
    EdgeListParse { line: usize, message: String },

    #[error("malformed term `{0}`")]
    MalformedTerm(String),
    #[error("quadratic term `{0}` repeats a variable")]
    RepeatedVariable(String),
    #[error("coefficient {0} is not in {{0,1}}")]
    CoefficientOutOfRange(String),
    #[error("empty program graph")]
    EmptyProgramGraph,

    #[error("embedding has {found} chains but the program graph has {expected} vertices")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid play: {0}")]
    InvalidPlay(String),
    #[error("invalid mixed profile: {0}")]
    InvalidProfile(String),
    #[error("game has {plays} plays, above the enumeration cap of {cap}")]
    EnumerationCap { plays: usize, cap: usize },

    #[error("invalid compilation game: {0}")]
    InvalidCompilationGame(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
