//! Stability-ranked host selection and LDPC-coded sparse-QIM watermarking
//! for triangle meshes.
//!
//! The pipeline: compute per-vertex curvature and dihedral descriptors
//! ([`geometry`]), rank vertices by how likely they are to survive
//! simplification, either with fixed criterion rates or a small trained
//! network ([`ranking`], [`neuro`]), then embed a coded watermark into the
//! most stable vertices ([`watermark`]). [`attack`] provides the
//! simplification and noise channel used for training and evaluation.

pub mod attack;
pub mod error;
pub mod geometry;
pub mod mesh;
pub mod neuro;
pub mod ranking;
pub mod shapes;
pub mod watermark;

pub use attack::{AttackReport, SurvivalMap};
pub use error::{Error, Result};
pub use geometry::{AreaScheme, QuadricCoeffs, VertexFeatures};
pub use mesh::{
    build_adjacency, load_mesh, save_mesh, validate_topology, AdjacencyIndex, Mesh, MeshFormat,
    Point, TopologyReport, DEFAULT_FLAT_ANGLE_TOL,
};
pub use neuro::{NetworkParams, TrainConfig, TrainingSample};
pub use ranking::{CriterionConfig, FeatureRecord, StabilityRanking};
pub use watermark::{LdpcCode, QimConfig, WatermarkKey, WatermarkPayload};
