use std::path::PathBuf;

/// Errors produced by corpus I/O, model training and the metric routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid UTF-8 in {path} at byte {byte}")]
    Decode { path: PathBuf, byte: usize },

    #[error("format error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Format { msg: String, line: Option<usize> },

    #[error("unknown document id '{doc_id}'")]
    Reference { doc_id: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("degenerate corpus: period-token proportion is {0}")]
    DegenerateCorpus(f64),
}

impl Error {
    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format {
            msg: msg.into(),
            line: None,
        }
    }

    pub fn format_at(line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            msg: msg.into(),
            line: Some(line),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
