//! Repeated instancing of a prototype mesh along a curve or over a plane.

use nalgebra::Matrix3;

use super::curves::equidistant_frames;
use super::mesh::Mesh;
use super::GeometryError;
use crate::dsl::TrajectorySpec;
use crate::math::Vec3;

/// Places `count` copies at arc-length-equidistant points, each copy's local
/// `x, y, z` mapped to the frame's normal, binormal and tangent.
pub fn array_1d(proto: &Mesh, trajectory: &TrajectorySpec, count: u32) -> Result<Mesh, GeometryError> {
    if count == 0 {
        return Err(GeometryError::InvalidInput("array count must be >= 1".into()));
    }
    let frames = equidistant_frames(trajectory, count)?;
    let instances: Vec<Mesh> = frames
        .iter()
        .map(|f| {
            let r = Matrix3::from_columns(&[f.normal, f.binormal, f.tangent]);
            Mesh {
                vertices: proto.vertices.iter().map(|p| f.position + r * p.coords).collect(),
                ..proto.clone()
            }
        })
        .collect();
    Ok(Mesh::merge(&instances))
}

/// Places `counts.0 * counts.1` copies at `i du u + j dv v` with unit `u, v`.
pub fn array_2d(
    proto: &Mesh,
    u: &Vec3,
    v: &Vec3,
    counts: (u32, u32),
    spacings: (f64, f64),
) -> Result<Mesh, GeometryError> {
    let (Some(un), Some(vn)) = (u.try_normalize(0.0), v.try_normalize(0.0)) else {
        return Err(GeometryError::DegenerateBasis);
    };
    if un.cross(&vn).norm() <= 1e-9 {
        return Err(GeometryError::DegenerateBasis);
    }
    if counts.0 == 0 || counts.1 == 0 {
        return Err(GeometryError::InvalidInput("array counts must be >= 1".into()));
    }
    let mut instances = Vec::with_capacity((counts.0 * counts.1) as usize);
    for i in 0..counts.0 {
        for j in 0..counts.1 {
            let off = un * (i as f64 * spacings.0) + vn * (j as f64 * spacings.1);
            instances.push(proto.translated(&off));
        }
    }
    Ok(Mesh::merge(&instances))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::PrimitiveKind;
    use crate::geometry::primitives::{cube, make_primitive};
    use crate::math::{Point3, SimilarityTransform};
    use std::f64::consts::TAU;

    fn centroid(m: &Mesh) -> Point3 {
        Point3::from(m.vertices.iter().map(|p| p.coords).sum::<Vec3>() / m.vertices.len() as f64)
    }

    #[test]
    fn single_instance_at_start() {
        let t = TrajectorySpec::Line {
            start: Point3::new(1.0, 2.0, 3.0),
            end: Point3::new(1.0, 2.0, 5.0),
        };
        let m = array_1d(&cube(), &t, 1).unwrap();
        assert_eq!(m.vertices.len(), 8);
        assert!((centroid(&m) - Point3::new(1.0, 2.0, 3.0)).norm() < 1e-12);
    }

    #[test]
    fn line_spacing_is_arc_length() {
        let small = cube().transformed(&SimilarityTransform::uniform_scale(0.25));
        let t = TrajectorySpec::Line {
            start: Point3::origin(),
            end: Point3::new(3.0, 0.0, 0.0),
        };
        let m = array_1d(&small, &t, 4).unwrap();
        let comps = m.connected_components();
        assert_eq!(comps.len(), 4);
        let mut xs: Vec<f64> = comps.iter().map(|c| centroid(c).x).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for w in xs.windows(2) {
            assert!((w[1] - w[0] - 1.0).abs() < 1e-12);
        }
        assert!(m.watertight);
    }

    #[test]
    fn closed_circle_sixfold_symmetry() {
        let proto = cube().transformed(&SimilarityTransform::new(
            Vec3::new(0.0, 0.1, 0.0),
            nalgebra::UnitQuaternion::identity(),
            Vec3::new(0.1, 0.2, 0.05),
        ));
        let t = TrajectorySpec::Circle {
            center: Point3::origin(),
            axis: Vec3::z(),
            radius: 1.0,
        };
        let m = array_1d(&proto, &t, 6).unwrap();
        let rot = nalgebra::Rotation3::from_axis_angle(&Vec3::z_axis(), TAU / 6.0);
        for p in &m.vertices {
            let q = rot * p;
            let d = m.vertices.iter().map(|v| (v - q).norm()).fold(f64::MAX, f64::min);
            assert!(d < 1e-9, "{d}");
        }
    }

    #[test]
    fn grid_of_spheres() {
        let s = make_primitive(&PrimitiveKind::UvSphere { segments: 8, rings: 6 }).unwrap();
        let m = array_2d(&s, &Vec3::x(), &Vec3::y(), (2, 3), (2.5, 2.5)).unwrap();
        assert_eq!(m.connected_components().len(), 6);
        assert_eq!(m.vertices.len(), 6 * s.vertices.len());
        let one = array_2d(&s, &Vec3::x(), &Vec3::y(), (1, 1), (1.0, 1.0)).unwrap();
        assert_eq!(one.vertices, s.vertices);
        assert_eq!(
            array_2d(&s, &Vec3::x(), &(Vec3::x() * 2.0), (2, 2), (1.0, 1.0)),
            Err(GeometryError::DegenerateBasis)
        );
    }
}
