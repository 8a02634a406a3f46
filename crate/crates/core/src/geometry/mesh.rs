use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::math::{Aabb, Point3, SimilarityTransform, Vec3};

/// Indexed triangle mesh.
///
/// `watertight` is computed on construction: every directed edge appears
/// exactly once and its reverse exactly once. `quad_pairs` optionally lists
/// pairs of triangles that together form one quad of the construction grid;
/// it is only used for export.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<Point3>,
    pub triangles: Vec<[u32; 3]>,
    pub watertight: bool,
    #[serde(default)]
    pub quad_pairs: Vec<[u32; 2]>,
}

impl Mesh {
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[u32; 3]>) -> Self {
        let watertight = is_edge_manifold(&triangles);
        Self {
            vertices,
            triangles,
            watertight,
            quad_pairs: Vec::new(),
        }
    }

    pub fn with_quads(vertices: Vec<Point3>, triangles: Vec<[u32; 3]>, quad_pairs: Vec<[u32; 2]>) -> Self {
        let mut m = Self::new(vertices, triangles);
        m.quad_pairs = quad_pairs;
        m
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(&self.vertices)
    }

    pub fn triangle(&self, i: usize) -> [Point3; 3] {
        let [a, b, c] = self.triangles[i];
        [self.vertices[a as usize], self.vertices[b as usize], self.vertices[c as usize]]
    }

    pub fn triangle_area(&self, i: usize) -> f64 {
        let [a, b, c] = self.triangle(i);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.triangle_area(i)).sum()
    }

    /// Triangles with area at or below `eps`.
    pub fn degenerate_triangles(&self, eps: f64) -> Vec<usize> {
        (0..self.triangles.len()).filter(|&i| self.triangle_area(i) <= eps).collect()
    }

    /// Sum of signed tetrahedron volumes against the origin.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|&[a, b, c]| {
                let (a, b, c) = (
                    self.vertices[a as usize].coords,
                    self.vertices[b as usize].coords,
                    self.vertices[c as usize].coords,
                );
                a.dot(&b.cross(&c))
            })
            .sum::<f64>()
            / 6.0
    }

    /// Enclosed volume; positive for outward winding.
    pub fn volume(&self) -> Result<f64, GeometryError> {
        if !self.watertight {
            return Err(GeometryError::NonWatertight);
        }
        Ok(self.signed_volume())
    }

    pub fn flip(&mut self) {
        for t in &mut self.triangles {
            t.swap(1, 2);
        }
    }

    /// Flips the winding when the signed volume is negative. Returns whether
    /// a flip happened.
    pub fn orient_outward(&mut self) -> bool {
        if self.signed_volume() < 0.0 {
            self.flip();
            true
        } else {
            false
        }
    }

    pub fn transformed(&self, t: &SimilarityTransform) -> Mesh {
        Mesh {
            vertices: t.apply_points(&self.vertices),
            triangles: self.triangles.clone(),
            watertight: self.watertight,
            quad_pairs: self.quad_pairs.clone(),
        }
    }

    pub fn translated(&self, v: &Vec3) -> Mesh {
        Mesh {
            vertices: self.vertices.iter().map(|p| p + v).collect(),
            ..self.clone()
        }
    }

    /// Concatenates meshes without any boolean processing. The result is
    /// watertight iff all inputs are and no two inputs intersect.
    pub fn merge(parts: &[Mesh]) -> Mesh {
        let mut out = Mesh::empty();
        for m in parts {
            out.append(m);
        }
        out.watertight = parts.iter().all(|m| m.watertight) && !any_pair_intersects(parts);
        out
    }

    /// Concatenates meshes; `watertight` reflects edge pairing only.
    pub fn concat(parts: &[Mesh]) -> Mesh {
        let mut out = Mesh::empty();
        for m in parts {
            out.append(m);
        }
        out.watertight = is_edge_manifold(&out.triangles);
        out
    }

    fn append(&mut self, m: &Mesh) {
        let off = self.vertices.len() as u32;
        let toff = self.triangles.len() as u32;
        self.vertices.extend_from_slice(&m.vertices);
        self.triangles
            .extend(m.triangles.iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
        self.quad_pairs
            .extend(m.quad_pairs.iter().map(|q| [q[0] + toff, q[1] + toff]));
    }

    /// Merges vertices closer than `tol` and drops triangles that collapse.
    pub fn welded(&self, tol: f64) -> Mesh {
        let (verts, remap) = weld_points(&self.vertices, tol);
        let tris: Vec<[u32; 3]> = self
            .triangles
            .iter()
            .map(|t| [remap[t[0] as usize], remap[t[1] as usize], remap[t[2] as usize]])
            .filter(|t| t[0] != t[1] && t[1] != t[2] && t[0] != t[2])
            .collect();
        Mesh::new(verts, tris)
    }

    /// Number of vertex pairs closer than `tol`.
    pub fn duplicate_vertex_count(&self, tol: f64) -> usize {
        let (verts, _) = weld_points(&self.vertices, tol);
        self.vertices.len() - verts.len()
    }

    /// Splits into vertex-connected components (each re-indexed).
    pub fn connected_components(&self) -> Vec<Mesh> {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for t in &self.triangles {
            for k in 1..3 {
                let a = find(&mut parent, t[0] as usize);
                let b = find(&mut parent, t[k] as usize);
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut comp_of_root: HashMap<usize, usize> = HashMap::new();
        let mut comps: Vec<Vec<[u32; 3]>> = Vec::new();
        for t in &self.triangles {
            let r = find(&mut parent, t[0] as usize);
            let idx = *comp_of_root.entry(r).or_insert_with(|| {
                comps.push(Vec::new());
                comps.len() - 1
            });
            comps[idx].push(*t);
        }
        comps
            .into_iter()
            .map(|tris| {
                let mut map: HashMap<u32, u32> = HashMap::new();
                let mut verts = Vec::new();
                let tris = tris
                    .iter()
                    .map(|t| {
                        t.map(|v| {
                            *map.entry(v).or_insert_with(|| {
                                verts.push(self.vertices[v as usize]);
                                (verts.len() - 1) as u32
                            })
                        })
                    })
                    .collect();
                Mesh::new(verts, tris)
            })
            .collect()
    }

    /// Ray-parity point containment along `+x`, jittering the ray when it
    /// grazes an edge. Meaningful for watertight meshes.
    pub fn contains_point(&self, p: &Point3) -> bool {
        let scale = self.bbox().longest_edge().max(1e-300);
        let mut y = p.y;
        let mut z = p.z;
        for attempt in 0..8 {
            match parity_crossings(self, p.x, y, z) {
                Some(n) => return n % 2 == 1,
                None => {
                    let j = 1e-7 * scale * (attempt as f64 + 1.0);
                    y = p.y + j * 0.7548776662466927;
                    z = p.z + j * 0.5698402909980532;
                }
            }
        }
        false
    }
}

/// Counts triangle crossings of the ray `{(t, y, z) : t > x}`. Returns
/// `None` on a degenerate hit (edge or vertex).
fn parity_crossings(m: &Mesh, x: f64, y: f64, z: f64) -> Option<usize> {
    let mut count = 0;
    for t in &m.triangles {
        let [a, b, c] = t.map(|i| m.vertices[i as usize]);
        match ray_x_hit(&a, &b, &c, y, z) {
            RayHit::Miss => {}
            RayHit::Degenerate => return None,
            RayHit::Hit(hx) => {
                if hx > x {
                    count += 1;
                }
            }
        }
    }
    Some(count)
}

pub(crate) enum RayHit {
    Miss,
    Hit(f64),
    Degenerate,
}

/// Intersection of the line `{(t, y, z)}` with a triangle via edge
/// functions in the `yz` projection.
pub(crate) fn ray_x_hit(a: &Point3, b: &Point3, c: &Point3, y: f64, z: f64) -> RayHit {
    let e = |p: &Point3, q: &Point3| (q.y - p.y) * (z - p.z) - (q.z - p.z) * (y - p.y);
    let w0 = e(b, c);
    let w1 = e(c, a);
    let w2 = e(a, b);
    let pos = w0 > 0.0 || w1 > 0.0 || w2 > 0.0;
    let neg = w0 < 0.0 || w1 < 0.0 || w2 < 0.0;
    if pos && neg {
        return RayHit::Miss;
    }
    let sum = w0 + w1 + w2;
    if sum == 0.0 {
        // triangle projects to a segment; a line through it is grazing
        let on_line = w0 == 0.0 && w1 == 0.0 && w2 == 0.0;
        return if on_line { RayHit::Degenerate } else { RayHit::Miss };
    }
    if w0 == 0.0 || w1 == 0.0 || w2 == 0.0 {
        return RayHit::Degenerate;
    }
    RayHit::Hit((w0 * a.x + w1 * b.x + w2 * c.x) / sum)
}

pub(crate) fn is_edge_manifold(triangles: &[[u32; 3]]) -> bool {
    let mut edges: HashMap<(u32, u32), u32> = HashMap::with_capacity(triangles.len() * 3);
    for t in triangles {
        for k in 0..3 {
            let e = (t[k], t[(k + 1) % 3]);
            if e.0 == e.1 {
                return false;
            }
            let c = edges.entry(e).or_insert(0);
            *c += 1;
            if *c > 1 {
                return false;
            }
        }
    }
    edges.keys().all(|&(a, b)| edges.contains_key(&(b, a)))
}

/// Clusters points closer than `tol` (grid hashing). Returns the unique
/// points in first-occurrence order and the old->new index map.
pub fn weld_points(points: &[Point3], tol: f64) -> (Vec<Point3>, Vec<u32>) {
    let cell = tol.max(1e-300) * 2.0;
    let key = |p: &Point3| {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
    let mut out: Vec<Point3> = Vec::new();
    let mut remap = Vec::with_capacity(points.len());
    for p in points {
        let (kx, ky, kz) = key(p);
        let mut found = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = grid.get(&(kx + dx, ky + dy, kz + dz)) {
                        for &i in list {
                            if (out[i as usize] - p).norm() <= tol {
                                found = Some(i);
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
        let idx = match found {
            Some(i) => i,
            None => {
                out.push(*p);
                let i = (out.len() - 1) as u32;
                grid.entry((kx, ky, kz)).or_default().push(i);
                i
            }
        };
        remap.push(idx);
    }
    (out, remap)
}

fn any_pair_intersects(parts: &[Mesh]) -> bool {
    let boxes: Vec<Aabb> = parts.iter().map(|m| m.bbox()).collect();
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            if parts[i].is_empty() || parts[j].is_empty() || !boxes[i].overlaps(&boxes[j], 1e-12) {
                continue;
            }
            if meshes_intersect(&parts[i], &boxes[i], &parts[j], &boxes[j]) {
                return true;
            }
        }
    }
    false
}

fn meshes_intersect(a: &Mesh, abox: &Aabb, b: &Mesh, bbox: &Aabb) -> bool {
    let near = |m: &Mesh, other: &Aabb| -> Vec<(usize, Aabb)> {
        (0..m.triangles.len())
            .filter_map(|i| {
                let tri = m.triangle(i);
                let tb = Aabb::from_points(tri.iter());
                tb.overlaps(other, 1e-12).then_some((i, tb))
            })
            .collect()
    };
    let ta = near(a, bbox);
    let tb = near(b, abox);
    for (i, ba) in &ta {
        let t1 = a.triangle(*i);
        for (j, bb) in &tb {
            if ba.overlaps(bb, 1e-12) && triangles_intersect(&t1, &b.triangle(*j)) {
                return true;
            }
        }
    }
    // no surface contact: one may still enclose the other
    (a.watertight && !b.vertices.is_empty() && abox.overlaps(bbox, 0.0) && a.contains_point(&b.vertices[0]))
        || (b.watertight && !a.vertices.is_empty() && b.contains_point(&a.vertices[0]))
}

/// Edge-vs-triangle test in both directions; misses coplanar overlap.
pub(crate) fn triangles_intersect(t1: &[Point3; 3], t2: &[Point3; 3]) -> bool {
    for k in 0..3 {
        if segment_hits_triangle(&t1[k], &t1[(k + 1) % 3], t2) || segment_hits_triangle(&t2[k], &t2[(k + 1) % 3], t1)
        {
            return true;
        }
    }
    false
}

fn segment_hits_triangle(p: &Point3, q: &Point3, t: &[Point3; 3]) -> bool {
    let d = q - p;
    let e1 = t[1] - t[0];
    let e2 = t[2] - t[0];
    let h = d.cross(&e2);
    let det = e1.dot(&h);
    if det.abs() < 1e-18 {
        return false;
    }
    let inv = 1.0 / det;
    let s = p - t[0];
    let u = inv * s.dot(&h);
    if !(0.0..=1.0).contains(&u) {
        return false;
    }
    let qv = s.cross(&e1);
    let v = inv * d.dot(&qv);
    if v < 0.0 || u + v > 1.0 {
        return false;
    }
    let t = inv * e2.dot(&qv);
    (0.0..=1.0).contains(&t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives::cube;

    #[test]
    fn cube_volume_and_bbox() {
        let c = cube();
        assert!(c.watertight);
        assert_eq!(c.volume().unwrap(), 8.0);
        let b = c.bbox();
        assert_eq!(b.min, Point3::new(-1.0, -1.0, -1.0));
        assert_eq!(b.max, Point3::new(1.0, 1.0, 1.0));
    }

    #[test]
    fn flipped_cube_is_detected_and_repaired() {
        let mut c = cube();
        c.flip();
        assert_eq!(c.volume().unwrap(), -8.0);
        assert!(c.orient_outward());
        assert_eq!(c.volume().unwrap(), 8.0);
    }

    #[test]
    fn open_mesh_has_no_volume() {
        let mut c = cube();
        c.triangles.pop();
        let c = Mesh::new(c.vertices, c.triangles);
        assert!(!c.watertight);
        assert_eq!(c.volume(), Err(GeometryError::NonWatertight));
    }

    #[test]
    fn merge_flags_overlap() {
        let a = cube();
        let far = a.translated(&Vec3::new(3.0, 0.0, 0.0));
        assert!(Mesh::merge(&[a.clone(), far]).watertight);
        let near = a.translated(&Vec3::new(1.0, 0.0, 0.0));
        assert!(!Mesh::merge(&[a.clone(), near]).watertight);
        let inner = a.transformed(&SimilarityTransform::uniform_scale(0.5));
        assert!(!Mesh::merge(&[a, inner]).watertight);
    }

    #[test]
    fn point_containment() {
        let c = cube();
        assert!(c.contains_point(&Point3::new(0.0, 0.0, 0.0)));
        assert!(c.contains_point(&Point3::new(0.9, -0.9, 0.5)));
        assert!(!c.contains_point(&Point3::new(1.5, 0.0, 0.0)));
    }

    #[test]
    fn components_split() {
        let a = cube();
        let m = Mesh::merge(&[a.clone(), a.translated(&Vec3::new(5.0, 0.0, 0.0))]);
        let comps = m.connected_components();
        assert_eq!(comps.len(), 2);
        assert!(comps.iter().all(|c| c.watertight && c.vertices.len() == 8));
    }
}
