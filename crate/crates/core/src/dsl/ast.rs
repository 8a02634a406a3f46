use serde::{Deserialize, Serialize};

use crate::math::{Point2, Point3, SimilarityTransform, Vec2, Vec3};

/// Canonical primitive with its resolution parameters.
///
/// Unit conventions: cube spans `[-1,1]^3`; cylinder and cone have radius 1
/// and `z in [-1,1]`; sphere radius 1; torus major radius 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrimitiveKind {
    Cube,
    Cylinder { segments: u32 },
    UvSphere { segments: u32, rings: u32 },
    Cone { segments: u32 },
    Torus { major_segments: u32, minor_segments: u32, minor_radius: f64 },
}

impl PrimitiveKind {
    pub const NAMES: [&'static str; 5] = ["cube", "cylinder", "uv_sphere", "cone", "torus"];

    pub fn name(&self) -> &'static str {
        match self {
            PrimitiveKind::Cube => "cube",
            PrimitiveKind::Cylinder { .. } => "cylinder",
            PrimitiveKind::UvSphere { .. } => "uv_sphere",
            PrimitiveKind::Cone { .. } => "cone",
            PrimitiveKind::Torus { .. } => "torus",
        }
    }

    /// Kind with Blender's default resolution.
    pub fn default_for(name: &str) -> Option<PrimitiveKind> {
        Some(match name {
            "cube" => PrimitiveKind::Cube,
            "cylinder" => PrimitiveKind::Cylinder { segments: 32 },
            "uv_sphere" => PrimitiveKind::UvSphere { segments: 32, rings: 16 },
            "cone" => PrimitiveKind::Cone { segments: 32 },
            "torus" => PrimitiveKind::Torus {
                major_segments: 48,
                minor_segments: 12,
                minor_radius: 0.25,
            },
            _ => return None,
        })
    }
}

/// Planar closed profile in the part's local `(u, v)` coordinates.
/// Angles are in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SectionSpec {
    Rectangle { width: f64, height: f64 },
    Circle { radius: f64 },
    /// Arc from `start_angle` to `end_angle`, closed either by its chord or
    /// through the center (pie slice).
    Arc { radius: f64, start_angle: f64, end_angle: f64, chord: bool },
    Polygon { points: Vec<Point2> },
    /// Piecewise cubic Bézier. Open curves have `3k + 1` control points and
    /// are closed with a straight segment; closed curves have `3k`.
    Bezier { points: Vec<Point2>, closed: bool },
}

impl SectionSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            SectionSpec::Rectangle { .. } => "rectangle",
            SectionSpec::Circle { .. } => "circle",
            SectionSpec::Arc { .. } => "arc",
            SectionSpec::Polygon { .. } => "polygon",
            SectionSpec::Bezier { .. } => "bezier",
        }
    }
}

/// 3D path. Angles in degrees; in-plane angles are measured from the first
/// vector of [`crate::math::plane_basis`] of `axis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrajectorySpec {
    Line { start: Point3, end: Point3 },
    Polyline { points: Vec<Point3> },
    Circle { center: Point3, axis: Vec3, radius: f64 },
    Arc { center: Point3, axis: Vec3, radius: f64, start_angle: f64, end_angle: f64 },
    Rectangle { center: Point3, axis: Vec3, width: f64, height: f64 },
    /// Piecewise cubic Bézier with `3k + 1` control points.
    Bezier { points: Vec<Point3> },
}

impl TrajectorySpec {
    pub fn is_closed(&self) -> bool {
        matches!(self, TrajectorySpec::Circle { .. } | TrajectorySpec::Rectangle { .. })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            TrajectorySpec::Line { .. } => "line",
            TrajectorySpec::Polyline { .. } => "polyline",
            TrajectorySpec::Circle { .. } => "circle",
            TrajectorySpec::Arc { .. } => "arc",
            TrajectorySpec::Rectangle { .. } => "rectangle",
            TrajectorySpec::Bezier { .. } => "bezier",
        }
    }
}

/// Piecewise-linear section scale along normalized arc length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleProfile {
    pub keys: Vec<(f64, f64)>,
}

impl ScaleProfile {
    pub fn constant() -> Self {
        Self {
            keys: vec![(0.0, 1.0), (1.0, 1.0)],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let keys = &self.keys;
        if keys.is_empty() {
            return 1.0;
        }
        if t <= keys[0].0 {
            return keys[0].1;
        }
        for w in keys.windows(2) {
            let (t0, s0) = w[0];
            let (t1, s1) = w[1];
            if t <= t1 {
                let a = if t1 > t0 { (t - t0) / (t1 - t0) } else { 1.0 };
                return s0 + (s1 - s0) * a;
            }
        }
        keys[keys.len() - 1].1
    }
}

/// Section placed in 3D for bridging: local `(u, v)` maps to `(u, v, 0)`
/// before `transform`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedSection {
    pub section: SectionSpec,
    pub transform: SimilarityTransform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BooleanKind {
    Union,
    Intersection,
    Difference,
}

impl BooleanKind {
    pub fn name(&self) -> &'static str {
        match self {
            BooleanKind::Union => "union",
            BooleanKind::Intersection => "intersection",
            BooleanKind::Difference => "difference",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Translation {
    pub section: SectionSpec,
    pub trajectory: TrajectorySpec,
    pub profile: ScaleProfile,
    pub section_resolution: u32,
    pub path_resolution: u32,
}

/// Solid of revolution. The axis is a line in the section plane; in the
/// part's local frame it becomes the `z` axis and the section at angle 0
/// lies in the `+x` half of the `xz` plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Revolve {
    pub section: SectionSpec,
    pub axis_origin: Point2,
    pub axis_direction: Vec2,
    pub sweep_angle: f64,
    pub section_resolution: u32,
    pub steps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BridgeLoop {
    pub loops: Vec<PlacedSection>,
    pub cap_start: bool,
    pub cap_end: bool,
    pub section_resolution: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BooleanOp {
    pub operation: BooleanKind,
    pub operands: Vec<Shape>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Array1D {
    pub proto: Box<Shape>,
    pub trajectory: TrajectorySpec,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Array2D {
    pub proto: Box<Shape>,
    pub u: Vec3,
    pub v: Vec3,
    pub counts: (u32, u32),
    pub spacings: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillGrid {
    pub boundary: Vec<Point3>,
    pub thickness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ShapeOp {
    Primitive(PrimitiveKind),
    Translation(Translation),
    Revolve(Revolve),
    BridgeLoop(BridgeLoop),
    Boolean(BooleanOp),
    Array1D(Array1D),
    Array2D(Array2D),
    FillGrid(FillGrid),
}

impl ShapeOp {
    /// Statement name used in program text.
    pub fn function_name(&self) -> &'static str {
        match self {
            ShapeOp::Primitive(_) => "create_primitive",
            ShapeOp::Translation(_) => "translation",
            ShapeOp::Revolve(_) => "revolve",
            ShapeOp::BridgeLoop(_) => "bridge_loop",
            ShapeOp::Boolean(_) => "boolean",
            ShapeOp::Array1D(_) => "array_1d",
            ShapeOp::Array2D(_) => "array_2d",
            ShapeOp::FillGrid(_) => "fill_grid",
        }
    }
}

/// A construction op together with the transform applied to its result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub op: ShapeOp,
    pub transform: SimilarityTransform,
}

impl Shape {
    pub fn new(op: ShapeOp) -> Self {
        Self {
            op,
            transform: SimilarityTransform::identity(),
        }
    }

    pub fn with_transform(op: ShapeOp, transform: SimilarityTransform) -> Self {
        Self { op, transform }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartStatement {
    pub name: String,
    pub index: usize,
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeProgram {
    pub object_name: String,
    pub object_category: String,
    pub parts: Vec<PartStatement>,
}

impl ShapeProgram {
    pub fn new(object_name: impl Into<String>, object_category: impl Into<String>) -> Self {
        Self {
            object_name: object_name.into(),
            object_category: object_category.into(),
            parts: Vec::new(),
        }
    }

    /// Appends a part, assigning the next index.
    pub fn push_part(&mut self, name: impl Into<String>, shape: Shape) {
        let index = self.parts.len();
        self.parts.push(PartStatement {
            name: name.into(),
            index,
            shape,
        });
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

/// 1-based line/column position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Span,
    pub message: String,
    /// Index of the offending part, when the diagnostic concerns one.
    pub part: Option<usize>,
}

impl Diagnostic {
    pub fn error(span: Span, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            span,
            message: message.into(),
            part: None,
        }
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{}:{}: {}: {}",
            self.span.start.line, self.span.start.column, sev, self.message
        )
    }
}
