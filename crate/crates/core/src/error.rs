use std::path::PathBuf;

/// Every failure the toolkit reports. The CLI maps all of these to the
/// data/validation exit code; usage errors never reach this type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("corrupt file: {0}")]
    Corrupt(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("pairing error: {0}")]
    Pairing(String),

    #[error("incomplete manifest: model {model} missing angle {angle}")]
    IncompleteManifest { model: String, angle: u32 },

    #[error("aggregation error: {0}")]
    Aggregation(String),

    #[error("grouping error: {0}")]
    Grouping(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
