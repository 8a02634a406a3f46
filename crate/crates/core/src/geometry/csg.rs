//! Mesh booleans on BSP trees of convex polygons.
//!
//! Trees live in a node arena and every traversal is iterative, so deep
//! trees built from finely tessellated curved surfaces cannot overflow the
//! stack.

use std::collections::{HashMap, HashSet};

use super::mesh::{is_edge_manifold, weld_points, Mesh};
use super::sweep::MIN_TRIANGLE_AREA;
use super::triangulate::triangulate;
use super::GeometryError;
use crate::dsl::BooleanKind;
use crate::math::{plane_basis, Point2, Point3, Vec3};

/// Plane classification tolerance.
pub const PLANE_EPS: f64 = 1e-9;
/// Vertex merge tolerance for the result.
pub const WELD_TOL: f64 = 1e-9;
/// Magnitude of the operand perturbation used on retries.
pub const JITTER: f64 = 1e-7;
const RETRIES: usize = 3;

#[derive(Debug, Clone, Copy)]
struct Plane {
    normal: Vec3,
    w: f64,
}

impl Plane {
    fn from_points(a: &Point3, b: &Point3, c: &Point3) -> Option<Plane> {
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        if len <= 1e-300 {
            return None;
        }
        let normal = n / len;
        Some(Plane {
            normal,
            w: normal.dot(&a.coords),
        })
    }

    fn flip(&mut self) {
        self.normal = -self.normal;
        self.w = -self.w;
    }
}

#[derive(Debug, Clone)]
struct Polygon {
    vertices: Vec<Point3>,
    plane: Plane,
}

impl Polygon {
    fn flip(&mut self) {
        self.vertices.reverse();
        self.plane.flip();
    }
}

const COPLANAR: u8 = 0;
const FRONT: u8 = 1;
const BACK: u8 = 2;
const SPANNING: u8 = 3;

/// Splits `poly` by `plane`. Coplanar polygons go to `cf` or `cb` by facing.
fn split_polygon(
    plane: &Plane,
    poly: Polygon,
    cf: &mut Vec<Polygon>,
    cb: &mut Vec<Polygon>,
    front: &mut Vec<Polygon>,
    back: &mut Vec<Polygon>,
) {
    let mut ptype = 0u8;
    let types: Vec<u8> = poly
        .vertices
        .iter()
        .map(|v| {
            let t = plane.normal.dot(&v.coords) - plane.w;
            let ty = if t < -PLANE_EPS {
                BACK
            } else if t > PLANE_EPS {
                FRONT
            } else {
                COPLANAR
            };
            ptype |= ty;
            ty
        })
        .collect();
    match ptype {
        COPLANAR => {
            if plane.normal.dot(&poly.plane.normal) > 0.0 {
                cf.push(poly);
            } else {
                cb.push(poly);
            }
        }
        FRONT => front.push(poly),
        BACK => back.push(poly),
        _ => {
            let n = poly.vertices.len();
            let mut f = Vec::with_capacity(n + 1);
            let mut b = Vec::with_capacity(n + 1);
            for i in 0..n {
                let j = (i + 1) % n;
                let (ti, tj) = (types[i], types[j]);
                let (vi, vj) = (poly.vertices[i], poly.vertices[j]);
                if ti != BACK {
                    f.push(vi);
                }
                if ti != FRONT {
                    b.push(vi);
                }
                if (ti | tj) == SPANNING {
                    let t = (plane.w - plane.normal.dot(&vi.coords)) / plane.normal.dot(&(vj - vi));
                    let v = vi + (vj - vi) * t;
                    f.push(v);
                    b.push(v);
                }
            }
            if f.len() >= 3 {
                front.push(Polygon {
                    vertices: f,
                    plane: poly.plane,
                });
            }
            if b.len() >= 3 {
                back.push(Polygon {
                    vertices: b,
                    plane: poly.plane,
                });
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Node {
    plane: Option<Plane>,
    front: Option<usize>,
    back: Option<usize>,
    polygons: Vec<Polygon>,
}

#[derive(Debug, Clone)]
struct Bsp {
    nodes: Vec<Node>,
}

impl Bsp {
    fn new(polygons: Vec<Polygon>) -> Bsp {
        let mut t = Bsp {
            nodes: vec![Node::default()],
        };
        t.build(polygons);
        t
    }

    fn build(&mut self, polygons: Vec<Polygon>) {
        let mut stack = vec![(0usize, polygons)];
        while let Some((id, polys)) = stack.pop() {
            if polys.is_empty() {
                continue;
            }
            let plane = *self.nodes[id].plane.get_or_insert(polys[0].plane);
            let mut front = Vec::new();
            let mut back = Vec::new();
            let mut coplanar = Vec::new();
            for p in polys {
                let mut cb = Vec::new();
                split_polygon(&plane, p, &mut coplanar, &mut cb, &mut front, &mut back);
                coplanar.extend(cb);
            }
            self.nodes[id].polygons.extend(coplanar);
            if !front.is_empty() {
                let child = self.child(id, true);
                stack.push((child, front));
            }
            if !back.is_empty() {
                let child = self.child(id, false);
                stack.push((child, back));
            }
        }
    }

    fn child(&mut self, id: usize, front: bool) -> usize {
        let existing = if front { self.nodes[id].front } else { self.nodes[id].back };
        if let Some(c) = existing {
            return c;
        }
        self.nodes.push(Node::default());
        let c = self.nodes.len() - 1;
        if front {
            self.nodes[id].front = Some(c);
        } else {
            self.nodes[id].back = Some(c);
        }
        c
    }

    fn invert(&mut self) {
        for n in &mut self.nodes {
            for p in &mut n.polygons {
                p.flip();
            }
            if let Some(pl) = &mut n.plane {
                pl.flip();
            }
            std::mem::swap(&mut n.front, &mut n.back);
        }
    }

    /// Removes the parts of `polygons` inside this solid.
    fn clip_polygons(&self, polygons: Vec<Polygon>) -> Vec<Polygon> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, polygons)];
        while let Some((id, polys)) = stack.pop() {
            let node = &self.nodes[id];
            let Some(plane) = node.plane else {
                out.extend(polys);
                continue;
            };
            let mut front = Vec::new();
            let mut back = Vec::new();
            for p in polys {
                let mut cf = Vec::new();
                let mut cb = Vec::new();
                split_polygon(&plane, p, &mut cf, &mut cb, &mut front, &mut back);
                front.extend(cf);
                back.extend(cb);
            }
            if let Some(c) = node.back {
                stack.push((c, back));
            }
            match node.front {
                Some(c) => stack.push((c, front)),
                None => out.extend(front),
            }
        }
        out
    }

    fn clip_to(&mut self, other: &Bsp) {
        for i in 0..self.nodes.len() {
            let polys = std::mem::take(&mut self.nodes[i].polygons);
            self.nodes[i].polygons = other.clip_polygons(polys);
        }
    }

    fn all_polygons(&self) -> Vec<Polygon> {
        self.nodes.iter().flat_map(|n| n.polygons.iter().cloned()).collect()
    }
}

fn mesh_polygons(m: &Mesh) -> Vec<Polygon> {
    m.triangles
        .iter()
        .filter_map(|t| {
            let [a, b, c] = t.map(|i| m.vertices[i as usize]);
            Plane::from_points(&a, &b, &c).map(|plane| Polygon {
                vertices: vec![a, b, c],
                plane,
            })
        })
        .collect()
}

fn bsp_boolean(a: &Mesh, b: &Mesh, op: BooleanKind) -> Vec<Polygon> {
    let mut a = Bsp::new(mesh_polygons(a));
    let mut b = Bsp::new(mesh_polygons(b));
    match op {
        BooleanKind::Union => {
            a.clip_to(&b);
            b.clip_to(&a);
            b.invert();
            b.clip_to(&a);
            b.invert();
            a.build(b.all_polygons());
        }
        BooleanKind::Difference => {
            a.invert();
            a.clip_to(&b);
            b.clip_to(&a);
            b.invert();
            b.clip_to(&a);
            b.invert();
            a.build(b.all_polygons());
            a.invert();
        }
        BooleanKind::Intersection => {
            a.invert();
            b.clip_to(&a);
            b.invert();
            a.clip_to(&b);
            b.clip_to(&a);
            a.build(b.all_polygons());
            a.invert();
        }
    }
    a.all_polygons()
}

/// Welds polygon vertices, repairs T-junctions and triangulates.
fn polygons_to_mesh(polys: &[Polygon], scale: f64) -> Mesh {
    let all: Vec<Point3> = polys.iter().flat_map(|p| p.vertices.iter().copied()).collect();
    let (verts, remap) = weld_points(&all, WELD_TOL);
    let mut faces: Vec<(Vec<u32>, Vec3)> = Vec::with_capacity(polys.len());
    let mut k = 0;
    for p in polys {
        let mut idx: Vec<u32> = p.vertices.iter().map(|_| {
            k += 1;
            remap[k - 1]
        })
        .collect();
        idx.dedup();
        while idx.len() > 1 && idx[0] == idx[idx.len() - 1] {
            idx.pop();
        }
        if idx.len() >= 3 {
            faces.push((idx, p.plane.normal));
        }
    }
    fix_t_junctions(&verts, &mut faces, scale);
    let mut tris = Vec::new();
    for (idx, normal) in &faces {
        let (e1, e2) = plane_basis(normal);
        let proj: Vec<Point2> = idx
            .iter()
            .map(|&i| {
                let p = verts[i as usize].coords;
                Point2::new(p.dot(&e1), p.dot(&e2))
            })
            .collect();
        if super::curves::signed_area(&proj) <= 0.0 {
            continue;
        }
        if let Ok(t) = triangulate(&proj) {
            tris.extend(t.into_iter().map(|t| t.map(|i| idx[i])));
        }
    }
    compact(&verts, &tris)
}

fn compact(verts: &[Point3], tris: &[[u32; 3]]) -> Mesh {
    let mut map: HashMap<u32, u32> = HashMap::new();
    let mut out_v = Vec::new();
    let out_t = tris
        .iter()
        .map(|t| {
            t.map(|v| {
                *map.entry(v).or_insert_with(|| {
                    out_v.push(verts[v as usize]);
                    (out_v.len() - 1) as u32
                })
            })
        })
        .collect();
    Mesh::new(out_v, out_t)
}

/// Inserts vertices lying on the interior of unmatched edges into those
/// edges.
fn fix_t_junctions(verts: &[Point3], faces: &mut [(Vec<u32>, Vec3)], scale: f64) {
    let tol = WELD_TOL * scale.max(1.0);
    for _ in 0..4 {
        let mut directed: HashSet<(u32, u32)> = HashSet::new();
        for (f, _) in faces.iter() {
            for i in 0..f.len() {
                directed.insert((f[i], f[(i + 1) % f.len()]));
            }
        }
        let unmatched: Vec<(u32, u32)> = directed
            .iter()
            .filter(|&&(a, b)| !directed.contains(&(b, a)))
            .copied()
            .collect();
        if unmatched.is_empty() {
            return;
        }
        let mut cand: Vec<u32> = unmatched.iter().flat_map(|&(a, b)| [a, b]).collect();
        cand.sort_unstable();
        cand.dedup();
        let unmatched: HashSet<(u32, u32)> = unmatched.into_iter().collect();
        let mut changed = false;
        for (f, _) in faces.iter_mut() {
            let mut out = Vec::with_capacity(f.len());
            for i in 0..f.len() {
                let (a, b) = (f[i], f[(i + 1) % f.len()]);
                out.push(a);
                if !unmatched.contains(&(a, b)) {
                    continue;
                }
                let (pa, pb) = (verts[a as usize], verts[b as usize]);
                let d = pb - pa;
                let len2 = d.norm_squared();
                if len2 == 0.0 {
                    continue;
                }
                let lo = pa.coords.inf(&pb.coords).add_scalar(-tol);
                let hi = pa.coords.sup(&pb.coords).add_scalar(tol);
                let mut on: Vec<(f64, u32)> = cand
                    .iter()
                    .filter(|&&v| v != a && v != b)
                    .filter_map(|&v| {
                        let p = verts[v as usize].coords;
                        if (0..3).any(|k| p[k] < lo[k] || p[k] > hi[k]) {
                            return None;
                        }
                        let t = (p - pa.coords).dot(&d) / len2;
                        if t <= 0.0 || t >= 1.0 {
                            return None;
                        }
                        let dist = (pa.coords + d * t - p).norm();
                        (dist <= tol).then_some((t, v))
                    })
                    .collect();
                if !on.is_empty() {
                    on.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap().then(x.1.cmp(&y.1)));
                    out.extend(on.into_iter().map(|(_, v)| v));
                    changed = true;
                }
            }
            *f = out;
        }
        if !changed {
            return;
        }
    }
}

fn is_clean(m: &Mesh) -> bool {
    is_edge_manifold(&m.triangles) && m.degenerate_triangles(MIN_TRIANGLE_AREA).is_empty()
}

/// Boolean of two watertight meshes. Retries with a perturbed second
/// operand when the result fails the manifold check.
pub fn boolean(a: &Mesh, b: &Mesh, op: BooleanKind) -> Result<Mesh, GeometryError> {
    if !a.watertight || !b.watertight {
        return Err(GeometryError::NonWatertightInput);
    }
    let scale = a.bbox().union(&b.bbox()).longest_edge();
    if a.is_empty() || b.is_empty() {
        return Ok(trivial(a, b, op));
    }
    const DIRS: [[f64; 3]; RETRIES] = [
        [0.5377, 0.8317, 0.1379],
        [-0.3729, 0.2588, 0.8910],
        [0.7071, -0.6124, 0.3536],
    ];
    for attempt in 0..=RETRIES {
        let b_used = if attempt == 0 {
            b.clone()
        } else {
            let d = DIRS[attempt - 1];
            let s = JITTER * scale.max(1.0) * attempt as f64;
            b.translated(&Vec3::new(d[0] * s, d[1] * s, d[2] * s))
        };
        let polys = bsp_boolean(a, &b_used, op);
        let m = polygons_to_mesh(&polys, scale);
        if is_clean(&m) {
            return Ok(m);
        }
        if is_edge_manifold(&m.triangles) {
            let r = remove_slivers(&m, scale);
            if is_clean(&r) {
                return Ok(r);
            }
        }
    }
    Err(GeometryError::RobustnessFailure)
}

fn tri_area(v: &[Point3], t: &[u32; 3]) -> f64 {
    let [a, b, c] = t.map(|i| v[i as usize]);
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Removes near-zero-area triangles from an edge-manifold mesh. Needles
/// (one very short edge) are collapsed, caps (a vertex lying on the
/// opposite edge) have their longest edge flipped.
fn remove_slivers(m: &Mesh, scale: f64) -> Mesh {
    let verts = m.vertices.clone();
    let mut tris = m.triangles.clone();
    let short = 1e-6 * scale.max(1.0);
    let budget = 8 * m.degenerate_triangles(MIN_TRIANGLE_AREA).len() + 8;
    for _ in 0..budget {
        let Some(ti) = (0..tris.len()).find(|&i| tri_area(&verts, &tris[i]) < MIN_TRIANGLE_AREA) else {
            break;
        };
        let t = tris[ti];
        let len = |k: usize| (verts[t[(k + 1) % 3] as usize] - verts[t[k] as usize]).norm();
        let lens = [len(0), len(1), len(2)];
        let kmin = (0..3).min_by(|&x, &y| lens[x].total_cmp(&lens[y])).unwrap();
        if lens[kmin] < short {
            let (keep, gone) = (t[kmin], t[(kmin + 1) % 3]);
            tris.retain(|u| !(u.contains(&keep) && u.contains(&gone)));
            for u in tris.iter_mut() {
                for v in u.iter_mut() {
                    if *v == gone {
                        *v = keep;
                    }
                }
            }
            continue;
        }
        let kmax = (0..3).max_by(|&x, &y| lens[x].total_cmp(&lens[y])).unwrap();
        let (u, v, w) = (t[kmax], t[(kmax + 1) % 3], t[(kmax + 2) % 3]);
        let Some(ni) = tris.iter().position(|n| (0..3).any(|k| n[k] == v && n[(k + 1) % 3] == u)) else {
            break;
        };
        let n = tris[ni];
        let k = (0..3).find(|&k| n[k] == v).unwrap();
        let x = n[(k + 2) % 3];
        let exists = tris.iter().any(|q| {
            (0..3).any(|j| (q[j] == w && q[(j + 1) % 3] == x) || (q[j] == x && q[(j + 1) % 3] == w))
        });
        if exists || x == w {
            break;
        }
        tris[ti] = [u, x, w];
        tris[ni] = [x, v, w];
    }
    compact(&verts, &tris)
}

fn trivial(a: &Mesh, b: &Mesh, op: BooleanKind) -> Mesh {
    match op {
        BooleanKind::Union => Mesh::merge(&[a.clone(), b.clone()]),
        BooleanKind::Intersection => Mesh::empty(),
        BooleanKind::Difference => a.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::PrimitiveKind;
    use crate::geometry::primitives::{cube, make_primitive};
    use crate::math::SimilarityTransform;

    #[test]
    fn difference_with_self_is_empty() {
        let a = cube();
        let m = boolean(&a, &a, BooleanKind::Difference).unwrap();
        assert_eq!(m.triangles.len(), 0);
    }

    #[test]
    fn disjoint_union_adds_volume() {
        let a = cube();
        let b = a.translated(&Vec3::new(3.0, 0.0, 0.0));
        let m = boolean(&a, &b, BooleanKind::Union).unwrap();
        assert!((m.volume().unwrap() - 16.0).abs() < 1e-6);
    }

    #[test]
    fn shifted_cube_intersection() {
        let a = cube();
        let b = a.translated(&Vec3::new(1.0, 0.0, 0.0));
        let m = boolean(&a, &b, BooleanKind::Intersection).unwrap();
        assert!(m.watertight);
        assert!((m.volume().unwrap() - 4.0).abs() < 1e-6);
        let u = boolean(&a, &b, BooleanKind::Union).unwrap();
        assert!((u.volume().unwrap() - 12.0).abs() < 1e-6);
        let d = boolean(&a, &b, BooleanKind::Difference).unwrap();
        assert!((d.volume().unwrap() - 4.0).abs() < 1e-6);
    }

    #[test]
    fn inclusion_exclusion_on_curved_operands() {
        let s = make_primitive(&PrimitiveKind::UvSphere { segments: 24, rings: 12 }).unwrap();
        let c = make_primitive(&PrimitiveKind::Cylinder { segments: 20 })
            .unwrap()
            .transformed(&SimilarityTransform::new(
                Vec3::new(0.4, 0.1, 0.0),
                nalgebra::UnitQuaternion::from_euler_angles(0.3, 0.5, 0.0),
                Vec3::new(0.5, 0.5, 1.5),
            ));
        let u = boolean(&s, &c, BooleanKind::Union).unwrap();
        let i = boolean(&s, &c, BooleanKind::Intersection).unwrap();
        let lhs = u.volume().unwrap() + i.volume().unwrap();
        let rhs = s.volume().unwrap() + c.volume().unwrap();
        assert!((lhs - rhs).abs() < 1e-6 * rhs, "{lhs} {rhs}");
        let d = boolean(&s, &c, BooleanKind::Difference).unwrap();
        assert!((d.volume().unwrap() - (s.volume().unwrap() - i.volume().unwrap())).abs() < 1e-6 * rhs);
    }

    #[test]
    fn cap_is_flipped_away() {
        // bipyramid over A W B P with W on AB; the top side uses a cap
        let v = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(0.5, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.5, 1.0, 0.0),
            Point3::new(0.5, 0.3, 1.0),
            Point3::new(0.5, 0.3, -1.0),
        ];
        let (a, w, b, p, q, r) = (0, 1, 2, 3, 4, 5);
        let tris = vec![
            [a, b, q],
            [a, w, b],
            [b, p, q],
            [p, a, q],
            [w, a, r],
            [b, w, r],
            [p, b, r],
            [a, p, r],
        ];
        let m = Mesh::new(v, tris);
        assert!(!is_clean(&m));
        let out = remove_slivers(&m, 1.0);
        assert!(is_clean(&out));
        assert_eq!(out.triangles.len(), 8);
        let expect = Mesh::new(
            m.vertices.clone(),
            vec![[a, w, q], [w, b, q], [b, p, q], [p, a, q], [w, a, r], [b, w, r], [p, b, r], [a, p, r]],
        );
        assert!((out.volume().unwrap() - expect.volume().unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rejects_open_operands() {
        let mut a = cube();
        a.triangles.pop();
        let a = Mesh::new(a.vertices, a.triangles);
        assert_eq!(
            boolean(&a, &cube(), BooleanKind::Union),
            Err(GeometryError::NonWatertightInput)
        );
    }
}
