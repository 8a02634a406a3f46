//! Canonical program text.
//!
//! Floats carry at most six significant digits in their shortest form, so
//! `parse(print(p)) == p` holds for any program whose numbers are already
//! quantized with [`quantize`].

use std::fmt::Write;

use super::ast::*;
use crate::math::{Point2, Point3, SimilarityTransform, Vec3};

/// Rounds to six significant digits; `-0` and subnormals become `0`.
pub fn quantize(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    if x.abs() < f64::MIN_POSITIVE {
        return 0.0;
    }
    let q: f64 = format!("{:.5e}", x).parse().expect("formatted float parses");
    if q == 0.0 {
        0.0
    } else {
        q
    }
}

pub fn format_number(x: f64) -> String {
    let q = quantize(x);
    if q == 0.0 {
        return "0".to_string();
    }
    let a = q.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{q}")
    } else {
        format!("{q:e}")
    }
}

pub fn print_program(p: &ShapeProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# object: {}", p.object_name);
    if !p.object_category.is_empty() {
        let _ = writeln!(out, "# category: {}", p.object_category);
    }
    for part in &p.parts {
        let _ = writeln!(out, "# part_{}: {}", part.index, part.name);
        out.push_str(&print_shape(&part.shape));
        out.push('\n');
    }
    out
}

/// Statement text for one shape (no header, no trailing newline).
pub fn print_shape(s: &Shape) -> String {
    let mut args = op_args(&s.op);
    push_transform(&mut args, &s.transform);
    call(s.op.function_name(), &args)
}

fn call(name: &str, args: &[(&'static str, String)]) -> String {
    let body: Vec<String> = args.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{name}({})", body.join(", "))
}

fn push_transform(args: &mut Vec<(&'static str, String)>, t: &SimilarityTransform) {
    args.push(("location", vec3(&t.location)));
    args.push(("rotation", tuple(&t.rotation)));
    args.push(("scale", vec3(&t.scale)));
}

fn tuple(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format_number(*x)).collect();
    format!("({})", parts.join(", "))
}

fn vec3(v: &Vec3) -> String {
    tuple(&[v.x, v.y, v.z])
}

fn pt3(p: &Point3) -> String {
    tuple(&[p.x, p.y, p.z])
}

fn pt2(p: &Point2) -> String {
    tuple(&[p.x, p.y])
}

fn list<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    let parts: Vec<String> = items.iter().map(f).collect();
    format!("[{}]", parts.join(", "))
}

fn boolean(b: bool) -> String {
    if b { "True" } else { "False" }.to_string()
}

fn quoted(s: &str) -> String {
    format!("\"{s}\"")
}

fn op_args(op: &ShapeOp) -> Vec<(&'static str, String)> {
    match op {
        ShapeOp::Primitive(kind) => primitive_args(kind),
        ShapeOp::Translation(t) => vec![
            ("section", section(&t.section)),
            ("trajectory", trajectory(&t.trajectory)),
            ("profile", list(&t.profile.keys, |(a, b)| tuple(&[*a, *b]))),
            ("section_resolution", t.section_resolution.to_string()),
            ("path_resolution", t.path_resolution.to_string()),
        ],
        ShapeOp::Revolve(r) => vec![
            ("section", section(&r.section)),
            ("axis_origin", pt2(&r.axis_origin)),
            ("axis_direction", tuple(&[r.axis_direction.x, r.axis_direction.y])),
            ("sweep_angle", format_number(r.sweep_angle)),
            ("section_resolution", r.section_resolution.to_string()),
            ("steps", r.steps.to_string()),
        ],
        ShapeOp::BridgeLoop(b) => vec![
            ("loops", list(&b.loops, placed_section)),
            ("cap_start", boolean(b.cap_start)),
            ("cap_end", boolean(b.cap_end)),
            ("section_resolution", b.section_resolution.to_string()),
        ],
        ShapeOp::Boolean(b) => vec![
            ("operation", quoted(b.operation.name())),
            ("operands", list(&b.operands, print_shape)),
        ],
        ShapeOp::Array1D(a) => vec![
            ("shape", print_shape(&a.proto)),
            ("trajectory", trajectory(&a.trajectory)),
            ("count", a.count.to_string()),
        ],
        ShapeOp::Array2D(a) => vec![
            ("shape", print_shape(&a.proto)),
            ("u", vec3(&a.u)),
            ("v", vec3(&a.v)),
            ("counts", format!("({}, {})", a.counts.0, a.counts.1)),
            ("spacings", tuple(&[a.spacings.0, a.spacings.1])),
        ],
        ShapeOp::FillGrid(f) => vec![
            ("boundary", list(&f.boundary, pt3)),
            ("thickness", format_number(f.thickness)),
        ],
    }
}

fn primitive_args(kind: &PrimitiveKind) -> Vec<(&'static str, String)> {
    let mut args = vec![("kind", quoted(kind.name()))];
    match kind {
        PrimitiveKind::Cube => {}
        PrimitiveKind::Cylinder { segments } | PrimitiveKind::Cone { segments } => {
            args.push(("segments", segments.to_string()));
        }
        PrimitiveKind::UvSphere { segments, rings } => {
            args.push(("segments", segments.to_string()));
            args.push(("rings", rings.to_string()));
        }
        PrimitiveKind::Torus {
            major_segments,
            minor_segments,
            minor_radius,
        } => {
            args.push(("major_segments", major_segments.to_string()));
            args.push(("minor_segments", minor_segments.to_string()));
            args.push(("minor_radius", format_number(*minor_radius)));
        }
    }
    args
}

fn section_args(s: &SectionSpec) -> Vec<(&'static str, String)> {
    let mut args = vec![("kind", quoted(s.kind_name()))];
    match s {
        SectionSpec::Rectangle { width, height } => {
            args.push(("width", format_number(*width)));
            args.push(("height", format_number(*height)));
        }
        SectionSpec::Circle { radius } => args.push(("radius", format_number(*radius))),
        SectionSpec::Arc {
            radius,
            start_angle,
            end_angle,
            chord,
        } => {
            args.push(("radius", format_number(*radius)));
            args.push(("start_angle", format_number(*start_angle)));
            args.push(("end_angle", format_number(*end_angle)));
            args.push(("chord", boolean(*chord)));
        }
        SectionSpec::Polygon { points } => args.push(("points", list(points, pt2))),
        SectionSpec::Bezier { points, closed } => {
            args.push(("points", list(points, pt2)));
            args.push(("closed", boolean(*closed)));
        }
    }
    args
}

fn section(s: &SectionSpec) -> String {
    call("create_curve", &section_args(s))
}

fn placed_section(p: &PlacedSection) -> String {
    let mut args = section_args(&p.section);
    push_transform(&mut args, &p.transform);
    call("create_curve", &args)
}

fn trajectory(t: &TrajectorySpec) -> String {
    let mut args = vec![("kind", quoted(t.kind_name()))];
    match t {
        TrajectorySpec::Line { start, end } => {
            args.push(("start", pt3(start)));
            args.push(("end", pt3(end)));
        }
        TrajectorySpec::Polyline { points } | TrajectorySpec::Bezier { points } => {
            args.push(("points", list(points, pt3)));
        }
        TrajectorySpec::Circle { center, axis, radius } => {
            args.push(("center", pt3(center)));
            args.push(("axis", vec3(axis)));
            args.push(("radius", format_number(*radius)));
        }
        TrajectorySpec::Arc {
            center,
            axis,
            radius,
            start_angle,
            end_angle,
        } => {
            args.push(("center", pt3(center)));
            args.push(("axis", vec3(axis)));
            args.push(("radius", format_number(*radius)));
            args.push(("start_angle", format_number(*start_angle)));
            args.push(("end_angle", format_number(*end_angle)));
        }
        TrajectorySpec::Rectangle {
            center,
            axis,
            width,
            height,
        } => {
            args.push(("center", pt3(center)));
            args.push(("axis", vec3(axis)));
            args.push(("width", format_number(*width)));
            args.push(("height", format_number(*height)));
        }
    }
    call("create_curve", &args)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(0.1234567), "0.123457");
        assert_eq!(format_number(-2.5), "-2.5");
        assert_eq!(format_number(1234567.0), "1234570");
        assert_eq!(format_number(1.5e-7), "1.5e-7");
        assert_eq!(format_number(0.0001), "0.0001");
        assert_eq!(quantize(-1e-320), 0.0);
    }

    #[test]
    fn quantize_is_idempotent() {
        for &x in &[0.1, 1.0 / 3.0, 2.0f64.sqrt(), -7.77777777e-9, 6.02214076e23, 0.999999951] {
            let q = quantize(x);
            assert_eq!(quantize(q), q);
            assert_eq!(format_number(q), format_number(x));
        }
    }

    #[test]
    fn empty_program_prints_header_only() {
        let p = ShapeProgram::new("thing", "");
        assert_eq!(print_program(&p), "# object: thing\n");
    }
}
