//! Lofting between closed loops by joining corresponding vertices.

use super::mesh::Mesh;
use super::sweep::RingMesh;
use super::triangulate::triangulate;
use super::GeometryError;
use crate::math::{plane_basis, Point2, Point3, Vec3};

/// Minimum loop size after resampling.
pub const MIN_BRIDGE_VERTICES: usize = 32;

/// Newell normal (area-weighted, not normalized).
pub fn newell_normal(pts: &[Point3]) -> Vec3 {
    let n = pts.len();
    let mut v = Vec3::zeros();
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        v.x += (a.y - b.y) * (a.z + b.z);
        v.y += (a.z - b.z) * (a.x + b.x);
        v.z += (a.x - b.x) * (a.y + b.y);
    }
    v
}

fn centroid(pts: &[Point3]) -> Point3 {
    Point3::from(pts.iter().map(|p| p.coords).sum::<Vec3>() / pts.len() as f64)
}

/// Resamples a closed polyline to exactly `k` vertices, keeping every
/// original vertex and subdividing edges so that the longest piece is as
/// short as possible. Requires `k >= pts.len()`.
pub fn resample_closed(pts: &[Point3], k: usize) -> Vec<Point3> {
    let n = pts.len();
    if k <= n {
        return pts.to_vec();
    }
    let len: Vec<f64> = (0..n).map(|i| (pts[(i + 1) % n] - pts[i]).norm()).collect();
    let mut pieces = vec![1usize; n];
    for _ in 0..k - n {
        let mut best = 0;
        for i in 1..n {
            if len[i] / pieces[i] as f64 > len[best] / pieces[best] as f64 {
                best = i;
            }
        }
        pieces[best] += 1;
    }
    let mut out = Vec::with_capacity(k);
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        for j in 0..pieces[i] {
            out.push(a + (b - a) * (j as f64 / pieces[i] as f64));
        }
    }
    out
}

fn lex_min_index(pts: &[Point3]) -> usize {
    let mut best = 0;
    for i in 1..pts.len() {
        let (p, q) = (pts[i], pts[best]);
        if (p.x, p.y, p.z) < (q.x, q.y, q.z) {
            best = i;
        }
    }
    best
}

fn rotate_start(pts: &[Point3], start: usize) -> Vec<Point3> {
    (0..pts.len()).map(|i| pts[(start + i) % pts.len()]).collect()
}

fn reversed_keep_first(pts: &[Point3]) -> Vec<Point3> {
    let mut v = pts.to_vec();
    v[1..].reverse();
    v
}

/// Cyclic shift and direction of `b` minimizing the summed squared distance
/// to `a`.
fn best_correspondence(a: &[Point3], b: &[Point3]) -> Vec<Point3> {
    let k = a.len();
    let mut best = (f64::INFINITY, false, 0usize);
    for rev in [false, true] {
        for shift in 0..k {
            let e: f64 = (0..k)
                .map(|i| {
                    let j = if rev { (shift + k - i) % k } else { (shift + i) % k };
                    (a[i] - b[j]).norm_squared()
                })
                .sum();
            if e < best.0 {
                best = (e, rev, shift);
            }
        }
    }
    let (_, rev, shift) = best;
    (0..k)
        .map(|i| {
            let j = if rev { (shift + k - i) % k } else { (shift + i) % k };
            b[j]
        })
        .collect()
}

fn cap_triangles(pts: &[Point3]) -> Result<(Vec<[usize; 3]>, Vec3), GeometryError> {
    let n = newell_normal(pts);
    if n.norm() <= 1e-300 {
        return Err(GeometryError::NonSimpleProjection);
    }
    let (e1, e2) = plane_basis(&n);
    let proj: Vec<Point2> = pts.iter().map(|p| Point2::new(p.coords.dot(&e1), p.coords.dot(&e2))).collect();
    if !super::curves::is_simple_polygon(&proj) || super::curves::signed_area(&proj) <= 0.0 {
        return Err(GeometryError::NonSimpleProjection);
    }
    Ok((triangulate(&proj)?, n))
}

/// Joins vertex `i` of each loop to vertex `i` of the next. All loops must
/// have the same vertex count. The result does not depend on the cyclic
/// labeling of the inputs.
pub fn bridge_loops(loops: &[Vec<Point3>], cap_start: bool, cap_end: bool) -> Result<Mesh, GeometryError> {
    if loops.len() < 2 {
        return Err(GeometryError::InvalidInput("bridge needs at least 2 loops".into()));
    }
    let k = loops[0].len();
    for l in loops {
        if l.len() != k {
            return Err(GeometryError::LoopCountMismatch(k, l.len()));
        }
    }
    if k < 3 {
        return Err(GeometryError::InvalidResolution(k as u32));
    }
    let mut first = rotate_start(&loops[0], lex_min_index(&loops[0]));
    let travel0 = centroid(&loops[1]) - centroid(&first);
    if newell_normal(&first).dot(&travel0) < 0.0 {
        first = reversed_keep_first(&first);
    }
    let mut ordered = vec![first];
    for l in &loops[1..] {
        let next = best_correspondence(ordered.last().unwrap(), l);
        ordered.push(next);
    }
    let mut rm = RingMesh::new();
    for l in &ordered {
        rm.vertices.extend_from_slice(l);
    }
    let k32 = k as u32;
    for j in 0..ordered.len() - 1 {
        rm.stitch(j as u32 * k32, (j as u32 + 1) * k32, k32);
    }
    let last = ordered.len() - 1;
    if cap_start {
        let (tris, n) = cap_triangles(&ordered[0])?;
        let travel = centroid(&ordered[1]) - centroid(&ordered[0]);
        rm.cap(0, &tris, n.dot(&travel) >= 0.0);
    }
    if cap_end {
        let (tris, n) = cap_triangles(&ordered[last])?;
        let travel = centroid(&ordered[last]) - centroid(&ordered[last - 1]);
        rm.cap(last as u32 * k32, &tris, n.dot(&travel) < 0.0);
    }
    let mut m = rm.finish()?;
    if m.watertight {
        m.orient_outward();
    }
    Ok(m)
}
