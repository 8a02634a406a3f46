//! Shape programs: parsing, execution to meshes, synthetic data generation,
//! part assembly and reconstruction metrics.

pub mod assembly;
pub mod config;
pub mod dsl;
pub mod geometry;
pub mod math;
pub mod metrics;
pub mod pointcloud;
pub mod sampler;

pub use dsl::{parse_program, print_program, PartStatement, Shape, ShapeOp, ShapeProgram};
pub use geometry::{execute_program, execute_shape, GeometryError, Mesh};
pub use math::{Aabb, Point3, SimilarityTransform, Vec3};
pub use metrics::{chamfer_l2, evaluate_reconstruction, voxel_iou, voxelize_solid, EvalProtocol, EvalReport};
pub use pointcloud::{augment, normalize_to_unit_cube, sample_surface, AugmentConfig, PointCloud};
pub use config::RunConfig;
