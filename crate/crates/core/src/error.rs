use std::path::PathBuf;

/// Coarse error category, used by the CLI to pick an exit code
/// (usage = 1, data = 2, numerical = 3).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numerical,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{input}: line {line}: {message}")]
    Parse {
        /// Name of the offending input (path or stream label).
        input: String,
        line: usize,
        message: String,
    },

    #[error("duplicate article_id {0:?}")]
    DuplicateArticle(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("network has {nodes} node(s): insufficient for motif analysis (need >= 3)")]
    InsufficientNodes { nodes: usize },

    #[error("infeasible random-graph parameters: m={m} exceeds n*(n-1)={max} for n={n}")]
    InfeasibleParameters { n: usize, m: usize, max: usize },

    #[error("zero denominator in delta for class {class}: real + mean = 0 and epsilon = 0")]
    DivisionDegeneracy { class: &'static str },

    #[error("article not found: {0:?}")]
    ArticleNotFound(String),

    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },

    #[error("malformed API response: field {field}: {message}")]
    ApiResponse { field: String, message: String },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("unknown figure {name:?}; valid figures: {valid}")]
    UnknownFigure { name: String, valid: String },

    #[error("{stage} stage: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Precondition(_) | Error::UnknownFigure { .. } => ErrorKind::Usage,
            Error::Numerical(_) | Error::DivisionDegeneracy { .. } => ErrorKind::Numerical,
            Error::Stage { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
