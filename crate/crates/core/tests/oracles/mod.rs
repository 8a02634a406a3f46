//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the library's metric, voxel
//! or ordering code.
#![allow(dead_code)]

use shapeforge::geometry::mesh::Mesh;
use shapeforge::{Aabb, Point3};

/// Chamfer distance by exhaustive search.
pub fn brute_chamfer(p: &[Point3], q: &[Point3]) -> f64 {
    let one = |a: &[Point3], b: &[Point3]| {
        let mut s = 0.0;
        for x in a {
            let mut best = f64::INFINITY;
            for y in b {
                let d = (x - y).norm_squared();
                if d < best {
                    best = d;
                }
            }
            s += best;
        }
        s / a.len() as f64
    };
    one(p, q) + one(q, p)
}

/// Signed volume by summing tetrahedra against the origin.
pub fn tet_volume(m: &Mesh) -> f64 {
    m.triangles
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|i| m.vertices[i as usize].coords);
            a.dot(&b.cross(&c)) / 6.0
        })
        .sum()
}

/// Sample grid of `n^3` points, one per cell of `frame`, nudged off the
/// cell centers in y and z so rays avoid mesh edges.
#[derive(Debug, Clone, Copy)]
pub struct SampleGrid {
    pub origin: Point3,
    pub h: [f64; 3],
    pub n: usize,
}

impl SampleGrid {
    pub fn new(frame: &Aabb, n: usize) -> Self {
        let e = frame.extent();
        Self {
            origin: frame.min,
            h: [e.x / n as f64, e.y / n as f64, e.z / n as f64],
            n,
        }
    }

    fn coord(&self, axis: usize, i: usize) -> f64 {
        let nudge = [0.0, 0.013_728_1, 0.029_137_9][axis];
        self.origin[axis] + (i as f64 + 0.5 + nudge) * self.h[axis]
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }
}

/// Inside/outside at every sample point by counting crossings of a ray in
/// +x. Index is `ix + n * (iy + n * iz)`.
pub fn parity_occupancy(m: &Mesh, g: &SampleGrid) -> Vec<bool> {
    let n = g.n;
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); n * n];
    let cell = |axis: usize, v: f64| -> f64 { (v - g.origin[axis]) / g.h[axis] - 0.5 };
    for t in &m.triangles {
        let [a, b, c] = t.map(|i| m.vertices[i as usize]);
        let d2 = (b.y - a.y) * (c.z - a.z) - (b.z - a.z) * (c.y - a.y);
        if d2 == 0.0 {
            continue;
        }
        let lo_y = a.y.min(b.y).min(c.y);
        let hi_y = a.y.max(b.y).max(c.y);
        let lo_z = a.z.min(b.z).min(c.z);
        let hi_z = a.z.max(b.z).max(c.z);
        let y0 = cell(1, lo_y).floor().max(0.0) as usize;
        let y1 = (cell(1, hi_y).ceil() as isize).clamp(-1, n as isize - 1);
        let z0 = cell(2, lo_z).floor().max(0.0) as usize;
        let z1 = (cell(2, hi_z).ceil() as isize).clamp(-1, n as isize - 1);
        if y1 < 0 || z1 < 0 {
            continue;
        }
        for iz in z0..=z1 as usize {
            let z = g.coord(2, iz);
            for iy in y0..=y1 as usize {
                let y = g.coord(1, iy);
                // barycentric coordinates in the yz projection
                let w1 = ((y - a.y) * (c.z - a.z) - (z - a.z) * (c.y - a.y)) / d2;
                let w2 = ((b.y - a.y) * (z - a.z) - (b.z - a.z) * (y - a.y)) / d2;
                let w0 = 1.0 - w1 - w2;
                if w0 > 0.0 && w1 > 0.0 && w2 > 0.0 {
                    rows[iy + n * iz].push(w0 * a.x + w1 * b.x + w2 * c.x);
                }
            }
        }
    }
    let mut out = vec![false; g.len()];
    for (r, xs) in rows.iter_mut().enumerate() {
        xs.sort_by(f64::total_cmp);
        for ix in 0..n {
            let x = g.coord(0, ix);
            let after = xs.len() - xs.partition_point(|&v| v <= x);
            out[ix + n * r] = after % 2 == 1;
        }
    }
    out
}

pub fn iou(a: &[bool], b: &[bool]) -> f64 {
    let inter = a.iter().zip(b).filter(|(x, y)| **x && **y).count();
    let union = a.iter().zip(b).filter(|(x, y)| **x || **y).count();
    if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    }
}

/// Sutherland-Hodgman clip of a polygon against `axis` `>= v` (or `<= v`).
fn clip(poly: &[Point3], axis: usize, v: f64, keep_above: bool) -> Vec<Point3> {
    let inside = |p: &Point3| if keep_above { p[axis] >= v } else { p[axis] <= v };
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let cur = poly[i];
        let prev = poly[(i + poly.len() - 1) % poly.len()];
        let (ci, pi) = (inside(&cur), inside(&prev));
        if ci != pi {
            let t = (v - prev[axis]) / (cur[axis] - prev[axis]);
            out.push(prev + (cur - prev) * t);
        }
        if ci {
            out.push(cur);
        }
    }
    out
}

/// Whether a triangle meets the interior of the box `[lo, hi]`, decided by
/// clipping it to the box shrunk by `eps`.
pub fn tri_meets_open_box(tri: &[Point3; 3], lo: &Point3, hi: &Point3, eps: f64) -> bool {
    let mut poly = tri.to_vec();
    for axis in 0..3 {
        poly = clip(&poly, axis, lo[axis] + eps, true);
        if poly.is_empty() {
            return false;
        }
        poly = clip(&poly, axis, hi[axis] - eps, false);
        if poly.is_empty() {
            return false;
        }
    }
    true
}

/// Least `(z, x, y)` cell of the `grid^3` division of `frame` whose
/// interior the mesh surface enters.
pub fn brute_cell(m: &Mesh, frame: &Aabb, grid: usize) -> Option<(usize, usize, usize)> {
    let e = frame.extent();
    let h = [e.x / grid as f64, e.y / grid as f64, e.z / grid as f64];
    let eps = 1e-9 * frame.longest_edge();
    let idx = |axis: usize, v: f64| (((v - frame.min[axis]) / h[axis]).floor().max(0.0) as usize).min(grid - 1);
    let mut best: Option<(usize, usize, usize)> = None;
    for t in &m.triangles {
        let tri = t.map(|i| m.vertices[i as usize]);
        let bb = Aabb::from_points(&tri);
        for iz in idx(2, bb.min.z)..=idx(2, bb.max.z) {
            for ix in idx(0, bb.min.x)..=idx(0, bb.max.x) {
                for iy in idx(1, bb.min.y)..=idx(1, bb.max.y) {
                    let key = (iz, ix, iy);
                    if best.is_some_and(|b| b <= key) {
                        continue;
                    }
                    let lo = Point3::new(
                        frame.min.x + ix as f64 * h[0],
                        frame.min.y + iy as f64 * h[1],
                        frame.min.z + iz as f64 * h[2],
                    );
                    let hi = Point3::new(lo.x + h[0], lo.y + h[1], lo.z + h[2]);
                    if tri_meets_open_box(&tri, &lo, &hi, eps) {
                        best = Some(key);
                    }
                }
            }
        }
    }
    best
}

/// Part order by pairwise comparison of brute-force cells, ties by index.
pub fn brute_order(meshes: &[Mesh]) -> Vec<usize> {
    let frame = meshes.iter().fold(Aabb::empty(), |b, m| b.union(&m.bbox()));
    let cells: Vec<_> = meshes.iter().map(|m| brute_cell(m, &frame, 32)).collect();
    let mut order: Vec<usize> = Vec::new();
    for i in 0..meshes.len() {
        // insertion after every element not greater than i
        let pos = order
            .iter()
            .position(|&j| (cells[j], j) > (cells[i], i))
            .unwrap_or(order.len());
        order.insert(pos, i);
    }
    order
}

/// One-sample Kolmogorov-Smirnov test against U[a, b]. Returns the
/// statistic and its asymptotic p-value.
pub fn ks_uniform(samples: &[f64], a: f64, b: f64) -> (f64, f64) {
    let mut x: Vec<f64> = samples.iter().map(|v| (v - a) / (b - a)).collect();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, v) in x.iter().enumerate() {
        let f = v.clamp(0.0, 1.0);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    let sn = n.sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    (d, kolmogorov_q(lambda))
}

/// Kolmogorov survival function `2 sum (-1)^(k-1) exp(-2 k^2 l^2)`.
pub fn kolmogorov_q(l: f64) -> f64 {
    if l < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..200 {
        let k = k as f64;
        let term = (-2.0 * k * k * l * l).exp();
        s += if k as u64 % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}
