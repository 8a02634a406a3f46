//! Thin solids filling a closed 3D boundary.

use nalgebra::{Matrix3, SymmetricEigen};

use super::bridge::newell_normal;
use super::curves::{is_simple_polygon, signed_area};
use super::mesh::Mesh;
use super::sweep::RingMesh;
use super::triangulate::triangulate;
use super::GeometryError;
use crate::math::{plane_basis, Point2, Point3, Vec3};

/// Least-squares plane through `pts`: centroid and unit normal, the normal
/// oriented so that the boundary winds counter-clockwise about it.
pub fn best_fit_plane(pts: &[Point3]) -> Result<(Point3, Vec3), GeometryError> {
    if pts.len() < 3 {
        return Err(GeometryError::NonSimpleProjection);
    }
    let c = Point3::from(pts.iter().map(|p| p.coords).sum::<Vec3>() / pts.len() as f64);
    let mut cov = Matrix3::zeros();
    for p in pts {
        let d = p - c;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov);
    let i = eig.eigenvalues.imin();
    let mut n: Vec3 = eig.eigenvectors.column(i).into_owned();
    if n.norm() == 0.0 {
        return Err(GeometryError::NonSimpleProjection);
    }
    n = n.normalize();
    if n.dot(&newell_normal(pts)) < 0.0 {
        n = -n;
    }
    Ok((c, n))
}

fn closed_boundary(boundary: &[Point3]) -> Vec<Point3> {
    let mut pts = boundary.to_vec();
    if pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() <= 1e-12 {
        pts.pop();
    }
    pts
}

fn project(pts: &[Point3], n: &Vec3) -> Vec<Point2> {
    let (e1, e2) = plane_basis(n);
    pts.iter().map(|p| Point2::new(p.coords.dot(&e1), p.coords.dot(&e2))).collect()
}

/// Checks that the boundary projects to a simple polygon on its best-fit
/// plane.
pub fn check_fill_boundary(boundary: &[Point3]) -> Result<(), GeometryError> {
    let pts = closed_boundary(boundary);
    let (_, n) = best_fit_plane(&pts)?;
    let proj = project(&pts, &n);
    if !is_simple_polygon(&proj) || signed_area(&proj) <= 0.0 {
        return Err(GeometryError::NonSimpleProjection);
    }
    Ok(())
}

/// Triangulates the boundary in its best-fit plane and offsets it by
/// `thickness / 2` to either side along the plane normal.
pub fn fill_grid(boundary: &[Point3], thickness: f64) -> Result<Mesh, GeometryError> {
    if !(thickness > 0.0) {
        return Err(GeometryError::InvalidInput("thickness must be > 0".into()));
    }
    let pts = closed_boundary(boundary);
    let (_, n) = best_fit_plane(&pts)?;
    let proj = project(&pts, &n);
    if !is_simple_polygon(&proj) || signed_area(&proj) <= 0.0 {
        return Err(GeometryError::NonSimpleProjection);
    }
    let tris = triangulate(&proj)?;
    let k = pts.len() as u32;
    let half = n * (thickness / 2.0);
    let mut rm = RingMesh::new();
    rm.vertices.extend(pts.iter().map(|p| p - half));
    rm.vertices.extend(pts.iter().map(|p| p + half));
    rm.stitch(0, k, k);
    rm.cap(0, &tris, true);
    rm.cap(k, &tris, false);
    rm.finish()
}
