use std::fmt;
use std::path::PathBuf;

/// Where in an input a reader gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Byte(u64),
    Line(usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Byte(b) => write!(f, "byte {b}"),
            Location::Line(l) => write!(f, "line {l}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed PLY header at line {line}: {message}")]
    MalformedHeader { line: usize, message: String },
    #[error("unsupported PLY format {0:?}")]
    UnsupportedFormat(String),
    #[error("PLY body ends early at {at}: {message}")]
    TruncatedBody { at: Location, message: String },
    #[error("malformed PLY body at {at}: {message}")]
    MalformedBody { at: Location, message: String },
    #[error("vertex {index} coordinate {value} does not fit a 32-bit float")]
    CoordinateOverflow { index: usize, value: f64 },
    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{ids} instance ids for {vertices} vertices")]
    LengthMismatch { ids: usize, vertices: usize },
    #[error("instance {id} {reason}")]
    UnmappedInstance { id: u32, reason: &'static str },
    #[error("schema violation at {path}: {message}")]
    SchemaViolation { path: String, message: String },
    #[error("annotation file name {0:?} is not of the form <class>_<index>.txt")]
    UnparsableFilename(String),
    #[error("{}:{line}: {message}", file.display())]
    MalformedLine {
        file: PathBuf,
        line: usize,
        message: String,
    },
    #[error("annotation file {} has no points", .0.display())]
    EmptyAnnotation(PathBuf),
    #[error("room {} has no annotation files", .0.display())]
    EmptyRoom(PathBuf),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] pcx_core::Error),
    #[error("scene {scene_id}: {source}")]
    Scene {
        scene_id: String,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    pub(crate) fn in_scene(self, scene_id: &str) -> Error {
        match self {
            e @ Error::Scene { .. } => e,
            e => Error::Scene {
                scene_id: scene_id.to_owned(),
                source: Box::new(e),
            },
        }
    }
}
