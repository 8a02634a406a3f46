//! Execution of shape statements into indexed triangle meshes.

pub mod array;
pub mod bridge;
pub mod csg;
pub mod curves;
pub mod exec;
pub mod fill;
pub mod io;
pub mod mesh;
pub mod primitives;
pub mod sweep;
pub mod triangulate;

pub use csg::boolean;
pub use curves::{eval_section, eval_trajectory, Frame, FrameField};
pub use exec::{execute_program, execute_shape};
pub use mesh::Mesh;
pub use primitives::make_primitive;

use thiserror::Error;

use crate::math::TransformError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("resolution {0} is below the minimum of 3")]
    InvalidResolution(u32),
    #[error("curve self-intersects")]
    SelfIntersection,
    #[error("trajectory has coincident consecutive samples")]
    DegenerateTangent,
    #[error("section crosses the revolve axis")]
    SectionCrossesAxis,
    #[error("loops have different vertex counts ({0} vs {1})")]
    LoopCountMismatch(usize, usize),
    #[error("degenerate mesh: {0}")]
    DegenerateMesh(String),
    #[error("boolean operand is not watertight")]
    NonWatertightInput,
    #[error("boolean result failed the manifold check")]
    RobustnessFailure,
    #[error("array basis vectors are not linearly independent")]
    DegenerateBasis,
    #[error("boundary does not project to a simple polygon")]
    NonSimpleProjection,
    #[error("mesh is not watertight")]
    NonWatertight,
    #[error("mesh has no triangles")]
    EmptyMesh,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Failure while executing a program, tagged with the part index.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("part {part_index}: {source}")]
pub struct ExecError {
    pub part_index: usize,
    pub source: GeometryError,
}
