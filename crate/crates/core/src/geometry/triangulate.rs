//! Ear clipping for simple counter-clockwise polygons.

use super::GeometryError;
use crate::math::Point2;

fn cross(a: &Point2, b: &Point2, c: &Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn is_straight(a: &Point2, b: &Point2, c: &Point2) -> bool {
    let l = (b - a).norm() * (c - b).norm();
    cross(a, b, c).abs() <= 1e-12 * l
}

/// Triangulates a simple CCW polygon into CCW index triples. Vertices lying
/// on a straight run are kept and never produce zero-area triangles.
pub fn triangulate(poly: &[Point2]) -> Result<Vec<[usize; 3]>, GeometryError> {
    let n = poly.len();
    if n < 3 {
        return Err(GeometryError::DegenerateMesh("polygon with fewer than 3 vertices".into()));
    }
    let kept: Vec<usize> = (0..n)
        .filter(|&i| !is_straight(&poly[(i + n - 1) % n], &poly[i], &poly[(i + 1) % n]))
        .collect();
    if kept.len() < 3 {
        return Err(GeometryError::DegenerateMesh("polygon has zero area".into()));
    }
    let reduced: Vec<Point2> = kept.iter().map(|&i| poly[i]).collect();
    let tris = ear_clip(&reduced)?;
    let mut tris: Vec<[usize; 3]> = tris.into_iter().map(|t| t.map(|i| kept[i])).collect();
    // reinsert straight-run vertices by splitting the triangle on their edge
    for k in 0..kept.len() {
        let a = kept[k];
        let b = kept[(k + 1) % kept.len()];
        let gap = (b + n - a) % n;
        if gap <= 1 {
            continue;
        }
        let run: Vec<usize> = (1..gap).map(|j| (a + j) % n).collect();
        let ti = tris
            .iter()
            .position(|t| (0..3).any(|e| t[e] == a && t[(e + 1) % 3] == b))
            .ok_or_else(|| GeometryError::DegenerateMesh("boundary edge lost in triangulation".into()))?;
        let t = tris[ti];
        let e = (0..3).find(|&e| t[e] == a).unwrap();
        let c = t[(e + 2) % 3];
        let mut chain = vec![a];
        chain.extend(run);
        chain.push(b);
        tris.swap_remove(ti);
        for w in chain.windows(2) {
            tris.push([w[0], w[1], c]);
        }
    }
    Ok(tris)
}

fn ear_clip(poly: &[Point2]) -> Result<Vec<[usize; 3]>, GeometryError> {
    let n = poly.len();
    if (0..n).all(|i| cross(&poly[(i + n - 1) % n], &poly[i], &poly[(i + 1) % n]) > 0.0) {
        return Ok((1..n - 1).map(|i| [0, i, i + 1]).collect());
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n - 2);
    let mut guard = 0usize;
    let mut i = 0usize;
    while idx.len() > 3 {
        let m = idx.len();
        let (ia, ib, ic) = (idx[(i + m - 1) % m], idx[i % m], idx[(i + 1) % m]);
        if is_ear(poly, &idx, ia, ib, ic) {
            out.push([ia, ib, ic]);
            idx.remove(i % m);
            guard = 0;
            i = if i == 0 { 0 } else { i - 1 };
        } else {
            i = (i + 1) % m;
            guard += 1;
            if guard > m {
                return Err(GeometryError::NonSimpleProjection);
            }
        }
    }
    out.push([idx[0], idx[1], idx[2]]);
    Ok(out)
}

fn is_ear(poly: &[Point2], idx: &[usize], ia: usize, ib: usize, ic: usize) -> bool {
    let (a, b, c) = (&poly[ia], &poly[ib], &poly[ic]);
    if cross(a, b, c) <= 0.0 {
        return false;
    }
    idx.iter().all(|&j| {
        if j == ia || j == ib || j == ic {
            return true;
        }
        let p = &poly[j];
        if *p == *a || *p == *b || *p == *c {
            return true;
        }
        !(cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0)
    })
}
