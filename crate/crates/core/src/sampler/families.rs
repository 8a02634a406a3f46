//! Per-family parameter draws producing an unplaced shape op.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use super::{p3, q, random_orientation, shape_op_mesh, uniform, uniform_u32, Family, Ranges};
use crate::dsl::{
    Array1D, Array2D, BooleanKind, BooleanOp, BridgeLoop, FillGrid, PlacedSection, PrimitiveKind, Revolve,
    ScaleProfile, SectionSpec, Shape, ShapeOp, TrajectorySpec, Translation,
};
use crate::geometry::curves::eval_section;
use crate::geometry::fill::check_fill_boundary;
use crate::geometry::{execute_shape, Mesh};
use crate::math::{Aabb, Point2, Point3, SimilarityTransform, Vec2, Vec3};

type Built = (ShapeOp, Mesh, Vec3);

const SECTION_TRIES: usize = 32;

pub(super) fn build(
    family: Family,
    rng: &mut ChaCha8Rng,
    r: &Ranges,
    meta: &mut Map<String, Value>,
) -> Result<Built, String> {
    match family {
        Family::Primitive => primitive(rng, r, meta),
        Family::Translation => {
            let op = if rng.random_bool(r.revolve_probability) {
                revolve(rng, r, meta)?
            } else {
                translation(rng, r, meta, false)?
            };
            let m = shape_op_mesh(&op)?;
            Ok((op, m, Vec3::new(1.0, 1.0, 1.0)))
        }
        Family::BridgeLoop => {
            let op = bridge(rng, r, meta)?;
            let m = shape_op_mesh(&op)?;
            Ok((op, m, Vec3::new(1.0, 1.0, 1.0)))
        }
        Family::Boolean => boolean(rng, r, meta),
        Family::Array => array(rng, r, meta),
        Family::FillGrid => {
            let op = fill(rng, r, meta)?;
            let m = shape_op_mesh(&op)?;
            Ok((op, m, Vec3::new(1.0, 1.0, 1.0)))
        }
    }
}

fn primitive_kind(rng: &mut ChaCha8Rng, r: &Ranges, coarse: bool) -> PrimitiveKind {
    let name = PrimitiveKind::NAMES[rng.random_range(0..PrimitiveKind::NAMES.len())];
    let kind = PrimitiveKind::default_for(name).expect("known primitive");
    match (kind, coarse) {
        (PrimitiveKind::Torus { .. }, true) => PrimitiveKind::Torus {
            major_segments: 24,
            minor_segments: 8,
            minor_radius: q(r.torus_minor_radius),
        },
        (PrimitiveKind::Torus {
            major_segments,
            minor_segments,
            ..
        }, false) => PrimitiveKind::Torus {
            major_segments,
            minor_segments,
            minor_radius: q(r.torus_minor_radius),
        },
        (PrimitiveKind::Cylinder { .. }, true) => PrimitiveKind::Cylinder { segments: 16 },
        (PrimitiveKind::Cone { .. }, true) => PrimitiveKind::Cone { segments: 16 },
        (PrimitiveKind::UvSphere { .. }, true) => PrimitiveKind::UvSphere { segments: 16, rings: 8 },
        (k, _) => k,
    }
}

fn primitive(rng: &mut ChaCha8Rng, r: &Ranges, meta: &mut Map<String, Value>) -> Result<Built, String> {
    let kind = primitive_kind(rng, r, false);
    let x: [f64; 3] = std::array::from_fn(|_| uniform(rng, r.log_scale));
    meta.insert("kind".into(), json!(kind.name()));
    meta.insert("log_scale".into(), json!(x));
    let op = ShapeOp::Primitive(kind);
    let m = shape_op_mesh(&op)?;
    Ok((op, m, Vec3::new(10f64.powf(x[0]), 10f64.powf(x[1]), 10f64.powf(x[2]))))
}

fn star_points(rng: &mut ChaCha8Rng, n: u32, radius: (f64, f64)) -> Vec<(f64, f64)> {
    let step = TAU / n as f64;
    let phase = rng.random_range(0.0..TAU);
    (0..n)
        .map(|j| {
            let a = phase + step * (j as f64 + rng.random_range(-0.3..0.3));
            let rad = uniform(rng, radius);
            (a, rad)
        })
        .collect()
}

fn section_once(rng: &mut ChaCha8Rng, r: &Ranges) -> SectionSpec {
    match rng.random_range(0..5) {
        0 => SectionSpec::Rectangle {
            width: q(rng.random_range(0.2..1.0)),
            height: q(rng.random_range(0.2..1.0)),
        },
        1 => SectionSpec::Circle {
            radius: q(rng.random_range(0.1..0.5)),
        },
        2 => {
            let start = rng.random_range(0.0..360.0);
            let span = rng.random_range(60.0..300.0);
            SectionSpec::Arc {
                radius: q(rng.random_range(0.2..0.5)),
                start_angle: q(start),
                end_angle: q(start + span),
                chord: rng.random_bool(0.5),
            }
        }
        3 => {
            let n = uniform_u32(rng, r.polygon_vertices);
            let base = rng.random_range(0.2..0.5);
            let points = star_points(rng, n, (0.6 * base, base))
                .into_iter()
                .map(|(a, rad)| Point2::new(q(rad * a.cos()), q(rad * a.sin())))
                .collect();
            SectionSpec::Polygon { points }
        }
        _ => {
            let k = rng.random_range(3..=5u32);
            let base = rng.random_range(0.2..0.5);
            let anchors = star_points(rng, k, (0.7 * base, base));
            let h = (4.0 / 3.0) * (std::f64::consts::PI / (2.0 * k as f64)).tan();
            let mut points = Vec::with_capacity(3 * k as usize);
            for j in 0..k as usize {
                let (a0, r0) = anchors[j];
                let (a1, r1) = anchors[(j + 1) % k as usize];
                let a1 = if a1 < a0 { a1 + TAU } else { a1 };
                let p0 = Vec2::new(r0 * a0.cos(), r0 * a0.sin());
                let p1 = Vec2::new(r1 * a1.cos(), r1 * a1.sin());
                let t0 = Vec2::new(-a0.sin(), a0.cos());
                let t1 = Vec2::new(-a1.sin(), a1.cos());
                let l0 = h * r0 * rng.random_range(0.6..1.2);
                let l1 = h * r1 * rng.random_range(0.6..1.2);
                for v in [p0, p0 + t0 * l0, p1 - t1 * l1] {
                    points.push(Point2::new(q(v.x), q(v.y)));
                }
            }
            SectionSpec::Bezier { points, closed: true }
        }
    }
}

/// Section plus its largest distance from the local origin.
fn section(rng: &mut ChaCha8Rng, r: &Ranges) -> Result<(SectionSpec, f64), String> {
    for _ in 0..SECTION_TRIES {
        let s = section_once(rng, r);
        if let Ok(pts) = eval_section(&s, 32) {
            let ext = pts.iter().map(|p| p.coords.norm()).fold(0.0, f64::max);
            return Ok((s, ext));
        }
    }
    Err("no simple section".into())
}

fn rotate_towards(d: &Vec3, rng: &mut ChaCha8Rng, max_deg: f64) -> Vec3 {
    let mut axis = super::unit_vector(rng).cross(d);
    if axis.norm() < 1e-6 {
        axis = d.cross(&Vec3::x());
    }
    let axis = nalgebra::Unit::new_normalize(axis);
    let ang = rng.random_range(-max_deg..max_deg).to_radians();
    nalgebra::Rotation3::from_axis_angle(&axis, ang) * d
}

fn trajectory(rng: &mut ChaCha8Rng, ext: f64, closed_ok: bool) -> TrajectorySpec {
    let kinds = if closed_ok { 6 } else { 4 };
    let z = Vec3::z();
    match rng.random_range(0..kinds) {
        0 => TrajectorySpec::Line {
            start: p3(0.0, 0.0, 0.0),
            end: p3(
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
                rng.random_range(1.0..3.0),
            ),
        },
        1 => {
            let n = rng.random_range(3..=5);
            let mut d = z;
            let mut p = Vec3::zeros();
            let mut points = vec![p3(0.0, 0.0, 0.0)];
            for _ in 1..n {
                let len = rng.random_range(0.8..1.5) * (3.0 * ext).max(1.0);
                p += d * len;
                points.push(p3(p.x, p.y, p.z));
                d = rotate_towards(&d, rng, 50.0);
            }
            TrajectorySpec::Polyline { points }
        }
        2 => {
            let start = rng.random_range(0.0..360.0);
            TrajectorySpec::Arc {
                center: p3(0.0, 0.0, 0.0),
                axis: z,
                radius: q(2.5 * ext + rng.random_range(0.3..1.5)),
                start_angle: q(start),
                end_angle: q(start + rng.random_range(45.0..270.0)),
            }
        }
        3 => {
            let lat = 0.3 + ext;
            let points = (0..4)
                .map(|i| {
                    if i == 0 {
                        p3(0.0, 0.0, 0.0)
                    } else {
                        p3(
                            rng.random_range(-lat..lat),
                            rng.random_range(-lat..lat),
                            i as f64 * rng.random_range(0.6..1.0) * (2.0 * ext).max(1.0),
                        )
                    }
                })
                .collect();
            TrajectorySpec::Bezier { points }
        }
        4 => TrajectorySpec::Circle {
            center: p3(0.0, 0.0, 0.0),
            axis: z,
            radius: q(2.0 * ext + rng.random_range(0.3..1.0)),
        },
        _ => TrajectorySpec::Rectangle {
            center: p3(0.0, 0.0, 0.0),
            axis: z,
            width: q(3.0 * ext + rng.random_range(0.5..1.5)),
            height: q(3.0 * ext + rng.random_range(0.5..1.5)),
        },
    }
}

fn translation(rng: &mut ChaCha8Rng, r: &Ranges, meta: &mut Map<String, Value>, coarse: bool) -> Result<ShapeOp, String> {
    let (section, ext) = section(rng, r)?;
    let trajectory = if coarse {
        TrajectorySpec::Line {
            start: p3(0.0, 0.0, 0.0),
            end: p3(0.0, 0.0, rng.random_range(0.5..2.0)),
        }
    } else {
        trajectory(rng, ext, true)
    };
    let profile = if !trajectory.is_closed() && rng.random_bool(0.5) {
        ScaleProfile {
            keys: vec![(0.0, 1.0), (1.0, q(uniform(rng, r.taper)))],
        }
    } else {
        ScaleProfile::constant()
    };
    let path_resolution = match (&trajectory, coarse) {
        (_, true) => 2,
        (TrajectorySpec::Line { .. } | TrajectorySpec::Polyline { .. }, _) => 8,
        _ => rng.random_range(32..=64),
    };
    meta.insert("section".into(), json!(section.kind_name()));
    meta.insert("trajectory".into(), json!(trajectory.kind_name()));
    Ok(ShapeOp::Translation(Translation {
        section,
        trajectory,
        profile,
        section_resolution: if coarse { 16 } else { 32 },
        path_resolution,
    }))
}

fn revolve(rng: &mut ChaCha8Rng, r: &Ranges, meta: &mut Map<String, Value>) -> Result<ShapeOp, String> {
    let (section, ext) = section(rng, r)?;
    let gap = rng.random_range(0.05..0.8);
    let sweep_angle = if rng.random_bool(0.5) {
        360.0
    } else {
        q(rng.random_range(90.0..315.0))
    };
    meta.insert("section".into(), json!(section.kind_name()));
    meta.insert("trajectory".into(), json!("revolve"));
    Ok(ShapeOp::Revolve(Revolve {
        section,
        axis_origin: Point2::new(q(-(ext + gap)), 0.0),
        axis_direction: Vec2::new(0.0, 1.0),
        sweep_angle,
        section_resolution: 32,
        steps: rng.random_range(32..=64),
    }))
}

fn bridge(rng: &mut ChaCha8Rng, r: &Ranges, meta: &mut Map<String, Value>) -> Result<ShapeOp, String> {
    let n = uniform_u32(rng, r.loops);
    let mut loops = Vec::with_capacity(n as usize);
    let mut z = 0.0;
    let mut kinds = Vec::new();
    for i in 0..n {
        let (mut s, _) = section(rng, r)?;
        if let SectionSpec::Arc { chord, .. } = &mut s {
            *chord = true;
        }
        if i > 0 {
            z += rng.random_range(0.4..1.0);
        }
        let tilt_axis = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0);
        let tilt = match nalgebra::Unit::try_new(tilt_axis, 1e-6) {
            Some(a) => nalgebra::UnitQuaternion::from_axis_angle(&a, rng.random_range(-15f64..15.0).to_radians()),
            None => nalgebra::UnitQuaternion::identity(),
        };
        let s_uni = rng.random_range(0.6..1.4);
        let t = super::quantize_transform(&SimilarityTransform::new(
            Vec3::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2), z),
            tilt,
            Vec3::new(s_uni, s_uni, s_uni),
        ));
        kinds.push(s.kind_name());
        loops.push(PlacedSection { section: s, transform: t });
    }
    meta.insert("loops".into(), json!(kinds));
    Ok(ShapeOp::BridgeLoop(BridgeLoop {
        loops,
        cap_start: true,
        cap_end: true,
        section_resolution: 32,
    }))
}

/// Places `local` with random orientation, longest edge in `edge` and box
/// center at `center`.
fn placed_operand(op: ShapeOp, local: &Mesh, per_axis: Vec3, edge: (f64, f64), center: Vec3, rng: &mut ChaCha8Rng) -> Shape {
    let rot = random_orientation(rng);
    let o = SimilarityTransform::new(Vec3::zeros(), rot, per_axis);
    let bb = Aabb::from_points(&o.apply_points(&local.vertices));
    let k = uniform(rng, edge) / bb.longest_edge();
    let c = bb.center().coords * k;
    let t = super::quantize_transform(&SimilarityTransform::new(center - c, rot, per_axis * k));
    Shape::with_transform(op, t)
}

fn boolean(rng: &mut ChaCha8Rng, r: &Ranges, meta: &mut Map<String, Value>) -> Result<Built, String> {
    let n = uniform_u32(rng, r.operands);
    let operation = [BooleanKind::Union, BooleanKind::Intersection, BooleanKind::Difference][rng.random_range(0..3)];
    let mut operands = Vec::with_capacity(n as usize);
    let mut kinds = Vec::new();
    for _ in 0..n {
        let (op, per_axis) = if rng.random_bool(0.6) {
            let kind = primitive_kind(rng, r, true);
            let x: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.5..0.5));
            (ShapeOp::Primitive(kind), Vec3::new(10f64.powf(x[0]), 10f64.powf(x[1]), 10f64.powf(x[2])))
        } else {
            let mut m = Map::new();
            (translation(rng, r, &mut m, true)?, Vec3::new(1.0, 1.0, 1.0))
        };
        let local = shape_op_mesh(&op)?;
        let center = Vec3::new(
            rng.random_range(-0.35..0.35),
            rng.random_range(-0.35..0.35),
            rng.random_range(-0.35..0.35),
        );
        kinds.push(match &op {
            ShapeOp::Primitive(k) => k.name(),
            _ => "translation",
        });
        operands.push(placed_operand(op, &local, per_axis, (0.8, 1.4), center, rng));
    }
    meta.insert("operation".into(), json!(operation.name()));
    meta.insert("operands".into(), json!(kinds));
    let op = ShapeOp::Boolean(BooleanOp { operation, operands });
    let m = execute_shape(&Shape::new(op.clone())).map_err(|e| e.to_string())?;
    if m.is_empty() {
        return Err("empty boolean result".into());
    }
    if !m.watertight {
        return Err("boolean result not watertight".into());
    }
    Ok((op, m, Vec3::new(1.0, 1.0, 1.0)))
}

fn array(rng: &mut ChaCha8Rng, r: &Ranges, meta: &mut Map<String, Value>) -> Result<Built, String> {
    let kind = primitive_kind(rng, r, true);
    let x: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.7..0.0));
    let scale = Vec3::new(10f64.powf(x[0]), 10f64.powf(x[1]), 10f64.powf(x[2])) * 0.25;
    let proto_t = super::quantize_transform(&SimilarityTransform::new(Vec3::zeros(), random_orientation(rng), scale));
    meta.insert("proto".into(), json!(kind.name()));
    let proto = Box::new(Shape::with_transform(ShapeOp::Primitive(kind), proto_t));
    let op = if rng.random_bool(0.6) {
        let count = uniform_u32(rng, r.count);
        let trajectory = match rng.random_range(0..3) {
            0 => TrajectorySpec::Line {
                start: p3(0.0, 0.0, 0.0),
                end: p3(q(rng.random_range(1.5..4.0)), 0.0, 0.0),
            },
            1 => TrajectorySpec::Circle {
                center: p3(0.0, 0.0, 0.0),
                axis: Vec3::z(),
                radius: q(rng.random_range(0.8..2.0)),
            },
            _ => {
                let start = rng.random_range(0.0..360.0);
                TrajectorySpec::Arc {
                    center: p3(0.0, 0.0, 0.0),
                    axis: Vec3::z(),
                    radius: q(rng.random_range(0.8..2.0)),
                    start_angle: q(start),
                    end_angle: q(start + rng.random_range(90.0..300.0)),
                }
            }
        };
        meta.insert("layout".into(), json!(format!("1d_{}", trajectory.kind_name())));
        ShapeOp::Array1D(Array1D { proto, trajectory, count })
    } else {
        let theta = rng.random_range(0.0..TAU);
        let (s, c) = theta.sin_cos();
        meta.insert("layout".into(), json!("2d"));
        ShapeOp::Array2D(Array2D {
            proto,
            u: Vec3::new(q(c), q(s), 0.0),
            v: Vec3::new(q(-s), q(c), 0.0),
            counts: (uniform_u32(rng, r.count), uniform_u32(rng, r.count)),
            spacings: (q(rng.random_range(0.4..1.0)), q(rng.random_range(0.4..1.0))),
        })
    };
    let m = shape_op_mesh(&op)?;
    Ok((op, m, Vec3::new(1.0, 1.0, 1.0)))
}

fn fill(rng: &mut ChaCha8Rng, r: &Ranges, meta: &mut Map<String, Value>) -> Result<ShapeOp, String> {
    for _ in 0..SECTION_TRIES {
        let n = uniform_u32(rng, r.polygon_vertices).max(4);
        let amp = rng.random_range(0.0..0.15);
        let boundary: Vec<Point3> = star_points(rng, n, (0.5, 1.0))
            .into_iter()
            .map(|(a, rad)| p3(rad * a.cos(), rad * a.sin(), amp * (2.0 * a).sin()))
            .collect();
        if check_fill_boundary(&boundary).is_ok() {
            meta.insert("boundary_vertices".into(), json!(n));
            meta.insert("warp".into(), json!(amp));
            return Ok(ShapeOp::FillGrid(FillGrid {
                boundary,
                thickness: q(uniform(rng, r.thickness)),
            }));
        }
    }
    Err("no simple fill boundary".into())
}
