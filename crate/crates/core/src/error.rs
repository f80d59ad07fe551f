use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("vertex {vertex} has a non-finite coordinate")]
    NonFiniteCoordinate { vertex: usize },

    #[error("face {face} references vertex {index}, but the mesh has {vertex_count} vertices")]
    FaceIndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },

    #[error("face {face} repeats a vertex index")]
    DegenerateFace { face: usize },

    #[error("vertex {0} has no incident faces")]
    IsolatedVertex(usize),

    #[error("all faces around vertex {0} are degenerate")]
    ZeroAreaUmbrella(usize),

    #[error("a triangle at vertex {0} has a zero-length edge")]
    DegenerateTriangle(usize),

    #[error("vertex {0} has no interior edge")]
    NoInteriorEdge(usize),

    #[error("vertex {vertex}: neighborhood has {found} usable points, need at least 5")]
    InsufficientNeighbors { vertex: usize, found: usize },

    #[error("vertex {vertex}: quadric fit is rank deficient (condition estimate {condition:.3e})")]
    RankDeficient { vertex: usize, condition: f64 },

    #[error("all vertices coincide")]
    DegeneratePointCloud,

    #[error("feature table is empty")]
    EmptyFeatureTable,

    #[error("every vertex is excluded from ranking")]
    AllExcluded,

    #[error("requested {requested} hosts but only {available} stable vertices are ranked")]
    InsufficientStableVertices { requested: usize, available: usize },

    #[error("expected {expected} values, got {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("non-finite network input")]
    NonFiniteInput,

    #[error("training dataset is empty")]
    EmptyDataset,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("decimation stalled at {remaining} vertices (target {target})")]
    CannotReachTarget { remaining: usize, target: usize },

    #[error("vertex index {index} out of range for {vertex_count} vertices")]
    VertexOutOfRange { index: usize, vertex_count: usize },

    #[error("projection vector is not unit length (norm {0})")]
    NonUnitProjection(f64),

    #[error("parity-check matrix construction failed: {0}")]
    CodeConstruction(String),

    #[error("malformed run at channel bit {position}: {reason}")]
    MalformedRun { position: usize, reason: String },

    #[error("watermark needs {required} host vertices, only {available} available")]
    InsufficientHosts { required: usize, available: usize },

    #[error("principal axis is ambiguous (relative eigenvalue gap {gap:.1e}); embedding would rotate the channel frame")]
    AmbiguousAxis { gap: f64 },

    #[error("host ranking did not stabilize after {0} embedding passes")]
    UnstableEmbedding(usize),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
