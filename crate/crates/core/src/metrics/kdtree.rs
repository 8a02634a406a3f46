//! Static 3-d tree for exact nearest-neighbour queries.

use crate::math::Point3;

const LEAF: usize = 8;

/// Points are stored in tree order: the median of every range of length
/// greater than `LEAF` splits it along `axes[mid]`.
#[derive(Debug, Clone)]
pub struct KdTree {
    pts: Vec<[f64; 3]>,
    axes: Vec<u8>,
}

impl KdTree {
    pub fn build(points: &[Point3]) -> Self {
        let mut pts: Vec<[f64; 3]> = points.iter().map(|p| [p.x, p.y, p.z]).collect();
        let mut axes = vec![0u8; pts.len()];
        build(&mut pts, &mut axes);
        Self { pts, axes }
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    /// Squared distance to the nearest stored point; `INFINITY` when empty.
    pub fn nearest_sq(&self, q: &Point3) -> f64 {
        let q = [q.x, q.y, q.z];
        let mut best = f64::INFINITY;
        search(&self.pts, &self.axes, &q, &mut best);
        best
    }
}

#[inline]
fn dist_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

fn build(pts: &mut [[f64; 3]], axes: &mut [u8]) {
    if pts.len() <= LEAF {
        return;
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in pts.iter() {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let axis = (0..3)
        .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
        .unwrap_or(0);
    let mid = pts.len() / 2;
    pts.select_nth_unstable_by(mid, |a, b| a[axis].total_cmp(&b[axis]));
    axes[mid] = axis as u8;
    let (lp, rest) = pts.split_at_mut(mid);
    let (la, rest_a) = axes.split_at_mut(mid);
    build(lp, la);
    build(&mut rest[1..], &mut rest_a[1..]);
}

fn search(pts: &[[f64; 3]], axes: &[u8], q: &[f64; 3], best: &mut f64) {
    if pts.len() <= LEAF {
        for p in pts {
            let d = dist_sq(p, q);
            if d < *best {
                *best = d;
            }
        }
        return;
    }
    let mid = pts.len() / 2;
    let axis = axes[mid] as usize;
    let p = &pts[mid];
    let d = dist_sq(p, q);
    if d < *best {
        *best = d;
    }
    let diff = q[axis] - p[axis];
    let (near, far) = if diff < 0.0 {
        ((&pts[..mid], &axes[..mid]), (&pts[mid + 1..], &axes[mid + 1..]))
    } else {
        ((&pts[mid + 1..], &axes[mid + 1..]), (&pts[..mid], &axes[..mid]))
    };
    search(near.0, near.1, q, best);
    if diff * diff <= *best {
        search(far.0, far.1, q, best);
    }
}
