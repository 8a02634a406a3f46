use super::ast::*;
use crate::geometry::curves::{eval_section, DEFAULT_CHECK_SAMPLES};
use crate::geometry::exec::execute_shape;
use crate::geometry::fill::check_fill_boundary;
use crate::math::{Point3, SimilarityTransform, Vec3, ROTATION_NORM_TOL};

#[derive(Debug, Clone, Default)]
pub struct ValidateOptions {
    /// Warn about parts whose bounding box leaves `[-b, b]^3`. Requires
    /// executing each part.
    pub world_bound: Option<f64>,
}

/// All type-invariant violations of `p`; empty iff the program is valid.
pub fn validate_program(p: &ShapeProgram) -> Vec<Diagnostic> {
    validate_program_with(p, &ValidateOptions::default())
}

pub fn validate_program_with(p: &ShapeProgram, opts: &ValidateOptions) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if !is_ident(&p.object_name) {
        out.push(Diagnostic::error(Span::default(), "object name must be a non-empty identifier"));
    }
    if !p.object_category.is_empty() && !is_ident(&p.object_category) {
        out.push(Diagnostic::error(Span::default(), "object category must be an identifier"));
    }
    for (i, part) in p.parts.iter().enumerate() {
        let mut v = Collector { errors: Vec::new() };
        if part.index != i {
            v.err(format!("part index {} out of order, expected {i}", part.index));
        }
        if !is_ident(&part.name) {
            v.err("part name must be a non-empty identifier");
        }
        v.shape(&part.shape);
        let has_errors = !v.errors.is_empty();
        out.extend(v.errors.into_iter().map(|message| Diagnostic {
            severity: Severity::Error,
            span: Span::default(),
            message: format!("part_{i} ({}): {message}", part.name),
            part: Some(i),
        }));
        if let (Some(bound), false) = (opts.world_bound, has_errors) {
            if let Ok(mesh) = execute_shape(&part.shape) {
                let bb = mesh.bbox();
                let limit = crate::math::Aabb::new(
                    Point3::new(-bound, -bound, -bound),
                    Point3::new(bound, bound, bound),
                );
                if !bb.is_empty() && !limit.contains_box(&bb, 1e-9) {
                    out.push(Diagnostic {
                        severity: Severity::Warning,
                        span: Span::default(),
                        message: format!("part_{i} ({}): bounding box exceeds world bound {bound}", part.name),
                        part: Some(i),
                    });
                }
            }
        }
    }
    out
}

pub(crate) fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Collector {
    errors: Vec<String>,
}

fn finite(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite())
}

impl Collector {
    fn err(&mut self, m: impl Into<String>) {
        self.errors.push(m.into());
    }

    fn check(&mut self, ok: bool, m: &str) {
        if !ok {
            self.err(m);
        }
    }

    fn transform(&mut self, t: &SimilarityTransform) {
        let all = [
            t.location.x, t.location.y, t.location.z, t.rotation[0], t.rotation[1], t.rotation[2], t.rotation[3],
            t.scale.x, t.scale.y, t.scale.z,
        ];
        if !finite(&all) {
            self.err("transform has non-finite components");
            return;
        }
        self.check(t.scale.iter().all(|s| *s > 0.0), "scale components > 0 required");
        self.check(
            (t.rotation_norm() - 1.0).abs() <= ROTATION_NORM_TOL,
            "rotation must be a unit quaternion",
        );
    }

    fn shape(&mut self, s: &Shape) {
        self.transform(&s.transform);
        match &s.op {
            ShapeOp::Primitive(kind) => self.primitive(kind),
            ShapeOp::Translation(t) => {
                self.section(&t.section, t.section_resolution);
                self.trajectory(&t.trajectory);
                self.profile(&t.profile);
                self.check(t.section_resolution >= 3, "section_resolution must be >= 3");
                self.check(t.path_resolution >= 2, "path_resolution must be >= 2");
            }
            ShapeOp::Revolve(r) => {
                self.section(&r.section, r.section_resolution);
                self.check(r.section_resolution >= 3, "section_resolution must be >= 3");
                self.check(r.steps >= 3, "steps must be >= 3");
                self.check(
                    r.sweep_angle.is_finite() && r.sweep_angle > 0.0 && r.sweep_angle <= 360.0,
                    "sweep_angle must lie in (0, 360] degrees",
                );
                let d = r.axis_direction;
                if !(finite(&[d.x, d.y, r.axis_origin.x, r.axis_origin.y]) && d.norm() > 0.0) {
                    self.err("revolve axis direction must be non-zero");
                } else if self.errors.is_empty() {
                    if let Ok(pts) = eval_section(&r.section, r.section_resolution.max(3)) {
                        let dn = d.normalize();
                        let side: Vec<f64> = pts
                            .iter()
                            .map(|p| {
                                let q = p - r.axis_origin;
                                dn.x * q.y - dn.y * q.x
                            })
                            .collect();
                        let all_pos = side.iter().all(|s| *s > 1e-12);
                        let all_neg = side.iter().all(|s| *s < -1e-12);
                        self.check(all_pos || all_neg, "section crosses or touches the revolve axis");
                    }
                }
            }
            ShapeOp::BridgeLoop(b) => {
                self.check(b.loops.len() >= 2, "bridge_loop needs at least 2 loops");
                self.check(b.section_resolution >= 3, "section_resolution must be >= 3");
                for l in &b.loops {
                    self.section(&l.section, b.section_resolution.max(3));
                    self.transform(&l.transform);
                }
            }
            ShapeOp::Boolean(b) => {
                self.check(b.operands.len() >= 2, "boolean needs at least 2 operands");
                for o in &b.operands {
                    self.shape(o);
                }
            }
            ShapeOp::Array1D(a) => {
                self.check(a.count >= 1, "array count must be >= 1");
                self.trajectory(&a.trajectory);
                self.shape(&a.proto);
            }
            ShapeOp::Array2D(a) => {
                self.check(a.counts.0 >= 1 && a.counts.1 >= 1, "array counts must be >= 1");
                self.check(
                    finite(&[a.spacings.0, a.spacings.1]) && a.spacings.0 > 0.0 && a.spacings.1 > 0.0,
                    "array spacings must be > 0",
                );
                let ok = finite(&[a.u.x, a.u.y, a.u.z, a.v.x, a.v.y, a.v.z])
                    && a.u.norm() > 0.0
                    && a.v.norm() > 0.0
                    && a.u.normalize().cross(&a.v.normalize()).norm() > 1e-9;
                self.check(ok, "array basis vectors must be linearly independent");
                self.shape(&a.proto);
            }
            ShapeOp::FillGrid(f) => {
                self.check(f.thickness.is_finite() && f.thickness > 0.0, "fill_grid thickness must be > 0");
                if f.boundary.len() < 3 {
                    self.err("fill_grid boundary needs at least 3 points");
                } else if !f.boundary.iter().all(|p| finite(&[p.x, p.y, p.z])) {
                    self.err("fill_grid boundary has non-finite points");
                } else if let Err(e) = check_fill_boundary(&f.boundary) {
                    self.err(format!("fill_grid boundary: {e}"));
                }
            }
        }
    }

    fn primitive(&mut self, kind: &PrimitiveKind) {
        match *kind {
            PrimitiveKind::Cube => {}
            PrimitiveKind::Cylinder { segments } | PrimitiveKind::Cone { segments } => {
                self.check(segments >= 3, "segments must be >= 3");
            }
            PrimitiveKind::UvSphere { segments, rings } => {
                self.check(segments >= 3, "segments must be >= 3");
                self.check(rings >= 3, "rings must be >= 3");
            }
            PrimitiveKind::Torus {
                major_segments,
                minor_segments,
                minor_radius,
            } => {
                self.check(major_segments >= 3, "major_segments must be >= 3");
                self.check(minor_segments >= 3, "minor_segments must be >= 3");
                self.check(
                    minor_radius.is_finite() && minor_radius > 0.0 && minor_radius < 1.0,
                    "torus minor_radius must lie in (0, 1)",
                );
            }
        }
    }

    fn section(&mut self, s: &SectionSpec, n: u32) {
        let before = self.errors.len();
        match s {
            SectionSpec::Rectangle { width, height } => {
                self.check(
                    finite(&[*width, *height]) && *width > 0.0 && *height > 0.0,
                    "rectangle width and height must be > 0",
                );
            }
            SectionSpec::Circle { radius } => {
                self.check(radius.is_finite() && *radius > 0.0, "circle radius must be > 0");
            }
            SectionSpec::Arc {
                radius,
                start_angle,
                end_angle,
                ..
            } => {
                self.check(radius.is_finite() && *radius > 0.0, "arc radius must be > 0");
                let span = (end_angle - start_angle).abs();
                self.check(
                    finite(&[*start_angle, *end_angle]) && span > 0.0 && span < 360.0,
                    "arc angular span must lie in (0, 360) degrees",
                );
            }
            SectionSpec::Polygon { points } => {
                self.check(points.len() >= 3, "polygon section needs at least 3 vertices");
                self.check(points.iter().all(|p| finite(&[p.x, p.y])), "polygon has non-finite vertices");
            }
            SectionSpec::Bezier { points, closed } => {
                let ok = if *closed {
                    points.len() >= 3 && points.len() % 3 == 0
                } else {
                    points.len() >= 4 && (points.len() - 1) % 3 == 0
                };
                self.check(
                    ok,
                    "bezier section needs 3k+1 control points (open) or 3k (closed)",
                );
                self.check(points.iter().all(|p| finite(&[p.x, p.y])), "bezier has non-finite points");
            }
        }
        if self.errors.len() == before {
            if let Err(e) = eval_section(s, n.clamp(3, DEFAULT_CHECK_SAMPLES)) {
                self.err(format!("section is not a simple closed curve: {e}"));
            }
        }
    }

    fn trajectory(&mut self, t: &TrajectorySpec) {
        let pts_ok = |pts: &[Point3]| pts.iter().all(|p| finite(&[p.x, p.y, p.z]));
        let distinct = |pts: &[Point3]| pts.windows(2).all(|w| (w[1] - w[0]).norm() > 1e-12);
        let axis_ok = |a: &Vec3| finite(&[a.x, a.y, a.z]) && a.norm() > 1e-12;
        match t {
            TrajectorySpec::Line { start, end } => {
                let pts = [*start, *end];
                self.check(pts_ok(&pts) && distinct(&pts), "line endpoints must be finite and distinct");
            }
            TrajectorySpec::Polyline { points } => {
                self.check(points.len() >= 2, "polyline needs at least 2 points");
                self.check(pts_ok(points) && distinct(points), "consecutive polyline points must be distinct");
            }
            TrajectorySpec::Circle { center, axis, radius } => {
                self.check(pts_ok(&[*center]) && axis_ok(axis), "circle axis must be non-zero");
                self.check(radius.is_finite() && *radius > 0.0, "circle radius must be > 0");
            }
            TrajectorySpec::Arc {
                center,
                axis,
                radius,
                start_angle,
                end_angle,
            } => {
                self.check(pts_ok(&[*center]) && axis_ok(axis), "arc axis must be non-zero");
                self.check(radius.is_finite() && *radius > 0.0, "arc radius must be > 0");
                let span = (end_angle - start_angle).abs();
                self.check(
                    finite(&[*start_angle, *end_angle]) && span > 0.0 && span <= 360.0,
                    "arc angular span must be non-zero and at most 360 degrees",
                );
            }
            TrajectorySpec::Rectangle {
                center,
                axis,
                width,
                height,
            } => {
                self.check(pts_ok(&[*center]) && axis_ok(axis), "rectangle axis must be non-zero");
                self.check(
                    finite(&[*width, *height]) && *width > 0.0 && *height > 0.0,
                    "rectangle width and height must be > 0",
                );
            }
            TrajectorySpec::Bezier { points } => {
                self.check(
                    points.len() >= 4 && (points.len() - 1) % 3 == 0,
                    "bezier trajectory needs 3k+1 control points",
                );
                self.check(pts_ok(points) && distinct(points), "consecutive bezier control points must be distinct");
            }
        }
    }

    fn profile(&mut self, p: &ScaleProfile) {
        let k = &p.keys;
        if k.len() < 2 {
            self.err("scale profile needs at least 2 keys");
            return;
        }
        self.check(
            k.iter().all(|(t, s)| t.is_finite() && s.is_finite() && *s > 0.0),
            "scale profile values must be > 0",
        );
        self.check(k.windows(2).all(|w| w[1].0 > w[0].0), "scale profile keys must strictly increase");
        self.check(k[0].0 == 0.0 && k[k.len() - 1].0 == 1.0, "scale profile must start at t=0 and end at t=1");
    }
}
