use std::path::PathBuf;

/// Errors produced by the detection pipeline and its loaders.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot decode image {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("depth image {0} is not single-channel 16-bit")]
    DepthFormat(PathBuf),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),

    #[error("malformed PCD: {0}")]
    Pcd(String),

    #[error("unorganized point cloud (height = 1) is not supported")]
    UnorganizedCloud,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate segment: {0}")]
    DegenerateSegment(String),

    #[error("degenerate frame: chosen axis is within 5 degrees of the surface normal")]
    DegenerateAxis,

    #[error("boundary not found: {plus} points on + side, {minus} on - side")]
    BoundaryNotFound { plus: usize, minus: usize },

    #[error("line fit failed: {0}")]
    LineFit(&'static str),

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
