//! Solid voxelization and voxel IoU.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::geometry::mesh::{ray_x_hit, RayHit};
use crate::geometry::Mesh;
use crate::math::{Aabb, Point3, Vec3};

pub const DEFAULT_RESOLUTION: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoxelMethod {
    /// Voxel centers classified by `+x` ray parity.
    Parity,
    /// Surface cells plus everything not reachable from the grid boundary.
    SurfaceFill,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyGrid {
    pub resolution: usize,
    /// Index `ix + r * (iy + r * iz)`.
    pub bits: Vec<bool>,
    pub frame: Aabb,
    /// Whether any component needed the surface fallback.
    pub fallback_used: bool,
}

impl OccupancyGrid {
    pub fn new(resolution: usize, frame: Aabb) -> Self {
        assert!(resolution >= 2, "resolution must be >= 2");
        Self {
            resolution,
            bits: vec![false; resolution * resolution * resolution],
            frame,
            fallback_used: false,
        }
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.resolution * (iy + self.resolution * iz)
    }

    pub fn get(&self, ix: usize, iy: usize, iz: usize) -> bool {
        self.bits[self.index(ix, iy, iz)]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn voxel_size(&self) -> Vec3 {
        self.frame.extent() / self.resolution as f64
    }

    pub fn voxel_volume(&self) -> f64 {
        let d = self.voxel_size();
        d.x * d.y * d.z
    }

    pub fn center(&self, ix: usize, iy: usize, iz: usize) -> Point3 {
        let d = self.voxel_size();
        self.frame.min + Vec3::new((ix as f64 + 0.5) * d.x, (iy as f64 + 0.5) * d.y, (iz as f64 + 0.5) * d.z)
    }

    pub fn same_frame(&self, other: &OccupancyGrid) -> bool {
        self.resolution == other.resolution && self.frame == other.frame
    }

    pub fn union_with(&mut self, other: &OccupancyGrid) -> Result<(), MetricsError> {
        if !self.same_frame(other) {
            return Err(MetricsError::FrameMismatch);
        }
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= *b;
        }
        self.fallback_used |= other.fallback_used;
        Ok(())
    }

    /// Index range of cells whose closed extent meets `[lo, hi]` on `axis`.
    fn cell_range(&self, axis: usize, lo: f64, hi: f64) -> Option<(usize, usize)> {
        let d = self.voxel_size()[axis];
        let o = self.frame.min[axis];
        let r = self.resolution as f64;
        let a = ((lo - o) / d).floor().max(0.0);
        let b = ((hi - o) / d).floor().min(r - 1.0);
        if a > r - 1.0 || b < 0.0 || a > b {
            return None;
        }
        Some((a as usize, b as usize))
    }

    /// Index range of cells whose centers lie in `[lo, hi]` on `axis`.
    fn center_range(&self, axis: usize, lo: f64, hi: f64) -> Option<(usize, usize)> {
        let d = self.voxel_size()[axis];
        let o = self.frame.min[axis];
        let r = self.resolution as f64;
        let a = ((lo - o) / d - 0.5).ceil().max(0.0);
        let b = ((hi - o) / d - 0.5).floor().min(r - 1.0);
        if a > r - 1.0 || b < 0.0 || a > b {
            return None;
        }
        Some((a as usize, b as usize))
    }
}

/// Voxelizes `m` into the grid spanned by `frame`. Each connected component
/// is voxelized separately and the results OR-ed: watertight components by
/// ray parity, others (or watertight ones too thin to contain any voxel
/// center) by surface marking and exterior flood fill.
pub fn voxelize_solid(m: &Mesh, resolution: usize, frame: &Aabb) -> OccupancyGrid {
    let mut grid = OccupancyGrid::new(resolution, *frame);
    if m.is_empty() || frame.is_empty() {
        return grid;
    }
    let comps = if m.watertight && m.connected_components().len() == 1 {
        vec![m.clone()]
    } else {
        m.connected_components()
    };
    for c in &comps {
        let g = voxelize_component(c, resolution, frame);
        grid.union_with(&g).expect("same frame");
    }
    grid
}

fn voxelize_component(m: &Mesh, resolution: usize, frame: &Aabb) -> OccupancyGrid {
    if m.watertight {
        let g = parity_fill(m, resolution, frame);
        if g.count() > 0 {
            return g;
        }
    }
    let surface = surface_cells(m, resolution, frame, false);
    if surface.count() == 0 {
        return surface;
    }
    let mut g = exterior_fill(surface);
    g.fallback_used = true;
    g
}

fn parity_fill(m: &Mesh, resolution: usize, frame: &Aabb) -> OccupancyGrid {
    let mut grid = OccupancyGrid::new(resolution, *frame);
    let r = resolution;
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); r * r];
    for (ti, _) in m.triangles.iter().enumerate() {
        let tri = m.triangle(ti);
        let bb = Aabb::from_points(&tri);
        let (Some((y0, y1)), Some((z0, z1))) = (
            grid.center_range(1, bb.min.y, bb.max.y),
            grid.center_range(2, bb.min.z, bb.max.z),
        ) else {
            continue;
        };
        for iz in z0..=z1 {
            for iy in y0..=y1 {
                rows[iy + r * iz].push(ti as u32);
            }
        }
    }
    let scale = frame.longest_edge().max(m.bbox().longest_edge());
    let mut hits = Vec::new();
    for iz in 0..r {
        for iy in 0..r {
            let row = &rows[iy + r * iz];
            if row.is_empty() {
                continue;
            }
            let c = grid.center(0, iy, iz);
            if !row_hits(m, row, c.y, c.z, scale, &mut hits) {
                continue;
            }
            if hits.len() < 2 {
                continue;
            }
            for ix in 0..r {
                let x = grid.center(ix, iy, iz).x;
                let below = hits.partition_point(|&h| h < x);
                if below % 2 == 1 {
                    let i = grid.index(ix, iy, iz);
                    grid.bits[i] = true;
                }
            }
        }
    }
    grid
}

/// Sorted crossing abscissae of the line through `(y, z)`, jittering the
/// line by multiples of `1e-7 * scale` while it grazes an edge. Returns
/// false if no clean line is found.
fn row_hits(m: &Mesh, row: &[u32], y: f64, z: f64, scale: f64, hits: &mut Vec<f64>) -> bool {
    'attempt: for attempt in 0..8 {
        let j = 1e-7 * scale * attempt as f64;
        let (yy, zz) = (y + j * 0.7548776662466927, z + j * 0.5698402909980532);
        hits.clear();
        for &ti in row {
            let [a, b, c] = m.triangle(ti as usize);
            match ray_x_hit(&a, &b, &c, yy, zz) {
                RayHit::Miss => {}
                RayHit::Hit(x) => hits.push(x),
                RayHit::Degenerate => continue 'attempt,
            }
        }
        hits.sort_by(f64::total_cmp);
        return true;
    }
    false
}

/// Cells meeting some triangle. With `open`, only cells whose interior
/// meets a triangle count; otherwise touching counts.
pub(crate) fn surface_cells(m: &Mesh, resolution: usize, frame: &Aabb, open: bool) -> OccupancyGrid {
    let mut grid = OccupancyGrid::new(resolution, *frame);
    let d = grid.voxel_size();
    let half = d / 2.0;
    for ti in 0..m.triangles.len() {
        let tri = m.triangle(ti);
        let bb = Aabb::from_points(&tri);
        let (Some((x0, x1)), Some((y0, y1)), Some((z0, z1))) = (
            grid.cell_range(0, bb.min.x, bb.max.x),
            grid.cell_range(1, bb.min.y, bb.max.y),
            grid.cell_range(2, bb.min.z, bb.max.z),
        ) else {
            continue;
        };
        for iz in z0..=z1 {
            for iy in y0..=y1 {
                for ix in x0..=x1 {
                    let i = grid.index(ix, iy, iz);
                    if grid.bits[i] {
                        continue;
                    }
                    let c = grid.center(ix, iy, iz);
                    if tri_box_overlap(&c, &half, &tri, open) {
                        grid.bits[i] = true;
                    }
                }
            }
        }
    }
    grid
}

/// Marks every cell not 6-connected to the grid boundary through empty
/// cells.
fn exterior_fill(surface: OccupancyGrid) -> OccupancyGrid {
    let r = surface.resolution;
    let mut outside = vec![false; surface.bits.len()];
    let mut queue = VecDeque::new();
    for iz in 0..r {
        for iy in 0..r {
            for ix in 0..r {
                let on_boundary = ix == 0 || iy == 0 || iz == 0 || ix == r - 1 || iy == r - 1 || iz == r - 1;
                let i = surface.index(ix, iy, iz);
                if on_boundary && !surface.bits[i] && !outside[i] {
                    outside[i] = true;
                    queue.push_back((ix, iy, iz));
                }
            }
        }
    }
    while let Some((ix, iy, iz)) = queue.pop_front() {
        let nbrs = [
            (ix.wrapping_sub(1), iy, iz),
            (ix + 1, iy, iz),
            (ix, iy.wrapping_sub(1), iz),
            (ix, iy + 1, iz),
            (ix, iy, iz.wrapping_sub(1)),
            (ix, iy, iz + 1),
        ];
        for (x, y, z) in nbrs {
            if x >= r || y >= r || z >= r {
                continue;
            }
            let i = surface.index(x, y, z);
            if !surface.bits[i] && !outside[i] {
                outside[i] = true;
                queue.push_back((x, y, z));
            }
        }
    }
    let mut g = surface;
    for (b, o) in g.bits.iter_mut().zip(outside) {
        *b = !o;
    }
    g
}

/// Separating-axis test between a triangle and the box `center ± half`.
/// With `open`, touching without interior overlap is not an intersection.
pub fn tri_box_overlap(center: &Point3, half: &Vec3, tri: &[Point3; 3], open: bool) -> bool {
    let v = [tri[0] - center, tri[1] - center, tri[2] - center];
    let e = [v[1] - v[0], v[2] - v[1], v[0] - v[2]];
    let separated = |lo: f64, hi: f64, r: f64| -> bool {
        let tol = 1e-12 * (1.0 + r);
        if open {
            lo >= r - tol || hi <= -r + tol
        } else {
            lo > r + tol || hi < -r - tol
        }
    };
    let axis_test = |a: &Vec3| -> bool {
        let p = [a.dot(&v[0]), a.dot(&v[1]), a.dot(&v[2])];
        let lo = p[0].min(p[1]).min(p[2]);
        let hi = p[0].max(p[1]).max(p[2]);
        let r = half.x * a.x.abs() + half.y * a.y.abs() + half.z * a.z.abs();
        separated(lo, hi, r)
    };
    for k in 0..3 {
        let mut a = Vec3::zeros();
        a[k] = 1.0;
        if axis_test(&a) {
            return false;
        }
    }
    let n = e[0].cross(&e[1]);
    if n.norm_squared() > 0.0 && axis_test(&n) {
        return false;
    }
    for ei in &e {
        for k in 0..3 {
            let mut u = Vec3::zeros();
            u[k] = 1.0;
            let a = ei.cross(&u);
            if a.norm_squared() > 1e-30 && axis_test(&a) {
                return false;
            }
        }
    }
    true
}

/// `|A ∩ B| / |A ∪ B|`, with the union of two empty grids scoring 1.
pub fn voxel_iou(a: &OccupancyGrid, b: &OccupancyGrid) -> Result<f64, MetricsError> {
    if !a.same_frame(b) {
        return Err(MetricsError::FrameMismatch);
    }
    let mut inter = 0usize;
    let mut union = 0usize;
    for (x, y) in a.bits.iter().zip(&b.bits) {
        inter += usize::from(*x && *y);
        union += usize::from(*x || *y);
    }
    if union == 0 {
        return Ok(1.0);
    }
    Ok(inter as f64 / union as f64)
}
