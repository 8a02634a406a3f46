//! The five canonical primitives, watertight and outward-wound.

use std::f64::consts::{PI, TAU};

use super::mesh::Mesh;
use super::GeometryError;
use crate::dsl::PrimitiveKind;
use crate::math::Point3;

pub fn make_primitive(kind: &PrimitiveKind) -> Result<Mesh, GeometryError> {
    match *kind {
        PrimitiveKind::Cube => Ok(cube()),
        PrimitiveKind::Cylinder { segments } => {
            check(segments)?;
            Ok(cylinder(segments as usize))
        }
        PrimitiveKind::Cone { segments } => {
            check(segments)?;
            Ok(cone(segments as usize))
        }
        PrimitiveKind::UvSphere { segments, rings } => {
            check(segments)?;
            check(rings)?;
            Ok(uv_sphere(segments as usize, rings as usize))
        }
        PrimitiveKind::Torus {
            major_segments,
            minor_segments,
            minor_radius,
        } => {
            check(major_segments)?;
            check(minor_segments)?;
            if !(minor_radius > 0.0 && minor_radius < 1.0) {
                return Err(GeometryError::InvalidInput(format!(
                    "torus minor radius {minor_radius} outside (0, 1)"
                )));
            }
            Ok(torus(major_segments as usize, minor_segments as usize, minor_radius))
        }
    }
}

fn check(n: u32) -> Result<(), GeometryError> {
    if n < 3 {
        Err(GeometryError::InvalidResolution(n))
    } else {
        Ok(())
    }
}

struct Builder {
    vertices: Vec<Point3>,
    triangles: Vec<[u32; 3]>,
    quads: Vec<[u32; 2]>,
}

impl Builder {
    fn new() -> Self {
        Self {
            vertices: Vec::new(),
            triangles: Vec::new(),
            quads: Vec::new(),
        }
    }

    fn v(&mut self, x: f64, y: f64, z: f64) -> u32 {
        self.vertices.push(Point3::new(x, y, z));
        (self.vertices.len() - 1) as u32
    }

    fn tri(&mut self, a: u32, b: u32, c: u32) {
        self.triangles.push([a, b, c]);
    }

    /// Counter-clockwise quad `a b c d`, split along `a c`.
    fn quad(&mut self, a: u32, b: u32, c: u32, d: u32) {
        let t = self.triangles.len() as u32;
        self.triangles.push([a, b, c]);
        self.triangles.push([a, c, d]);
        self.quads.push([t, t + 1]);
    }

    fn finish(self) -> Mesh {
        Mesh::with_quads(self.vertices, self.triangles, self.quads)
    }
}

/// `[-1,1]^3`, 8 vertices and 12 triangles.
pub fn cube() -> Mesh {
    let mut b = Builder::new();
    for i in 0..8 {
        let s = |bit: u32| if i & bit != 0 { 1.0 } else { -1.0 };
        b.v(s(1), s(2), s(4));
    }
    b.quad(0, 2, 3, 1);
    b.quad(4, 5, 7, 6);
    b.quad(0, 1, 5, 4);
    b.quad(2, 6, 7, 3);
    b.quad(0, 4, 6, 2);
    b.quad(1, 3, 7, 5);
    b.finish()
}

fn ring(b: &mut Builder, n: usize, radius: f64, z: f64) -> u32 {
    let first = b.vertices.len() as u32;
    for i in 0..n {
        let a = TAU * i as f64 / n as f64;
        b.v(radius * a.cos(), radius * a.sin(), z);
    }
    first
}

pub fn cylinder(n: usize) -> Mesh {
    let mut b = Builder::new();
    let bot = ring(&mut b, n, 1.0, -1.0);
    let top = ring(&mut b, n, 1.0, 1.0);
    let cb = b.v(0.0, 0.0, -1.0);
    let ct = b.v(0.0, 0.0, 1.0);
    let n32 = n as u32;
    for i in 0..n32 {
        let j = (i + 1) % n32;
        b.quad(bot + i, bot + j, top + j, top + i);
        b.tri(ct, top + i, top + j);
        b.tri(cb, bot + j, bot + i);
    }
    b.finish()
}

pub fn cone(n: usize) -> Mesh {
    let mut b = Builder::new();
    let bot = ring(&mut b, n, 1.0, -1.0);
    let cb = b.v(0.0, 0.0, -1.0);
    let apex = b.v(0.0, 0.0, 1.0);
    let n32 = n as u32;
    for i in 0..n32 {
        let j = (i + 1) % n32;
        b.tri(bot + i, bot + j, apex);
        b.tri(cb, bot + j, bot + i);
    }
    b.finish()
}

pub fn uv_sphere(segments: usize, rings: usize) -> Mesh {
    let mut b = Builder::new();
    let south = b.v(0.0, 0.0, -1.0);
    let mut starts = Vec::with_capacity(rings - 1);
    for k in 1..rings {
        let polar = PI * k as f64 / rings as f64;
        starts.push(ring(&mut b, segments, polar.sin(), -polar.cos()));
    }
    let north = b.v(0.0, 0.0, 1.0);
    let s = segments as u32;
    for i in 0..s {
        let j = (i + 1) % s;
        b.tri(south, starts[0] + j, starts[0] + i);
        for w in starts.windows(2) {
            b.quad(w[0] + i, w[0] + j, w[1] + j, w[1] + i);
        }
        let last = starts[starts.len() - 1];
        b.tri(north, last + i, last + j);
    }
    b.finish()
}

pub fn torus(major: usize, minor: usize, minor_radius: f64) -> Mesh {
    let mut b = Builder::new();
    for i in 0..major {
        let phi = TAU * i as f64 / major as f64;
        for j in 0..minor {
            let theta = TAU * j as f64 / minor as f64;
            let rho = 1.0 + minor_radius * theta.cos();
            b.v(rho * phi.cos(), rho * phi.sin(), minor_radius * theta.sin());
        }
    }
    let (ma, mi) = (major as u32, minor as u32);
    let idx = |i: u32, j: u32| (i % ma) * mi + (j % mi);
    for i in 0..ma {
        for j in 0..mi {
            b.quad(idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
        }
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_valid(m: &Mesh) {
        assert!(m.watertight);
        assert!(m.degenerate_triangles(1e-12).is_empty());
        assert_eq!(m.duplicate_vertex_count(1e-9), 0);
        assert!(m.signed_volume() > 0.0);
    }

    #[test]
    fn cube_counts() {
        let c = cube();
        assert_eq!(c.vertices.len(), 8);
        assert_eq!(c.triangles.len(), 12);
        assert_eq!(c.volume().unwrap(), 8.0);
        assert_valid(&c);
    }

    #[test]
    fn cylinder_volume_is_inscribed_prism() {
        let m = make_primitive(&PrimitiveKind::Cylinder { segments: 64 }).unwrap();
        assert_valid(&m);
        // polygon area (n/2) sin(2 pi / n) times height 2
        let expected = 32.0 * (PI / 32.0).sin() * 2.0;
        assert!((m.volume().unwrap() - expected).abs() < 1e-9);
        assert!((expected - 6.2731).abs() < 1e-4);
    }

    #[test]
    fn sphere_volume_close_to_analytic() {
        let m = make_primitive(&PrimitiveKind::UvSphere { segments: 64, rings: 64 }).unwrap();
        assert_valid(&m);
        let v = m.volume().unwrap();
        let exact = 4.0 * PI / 3.0;
        assert!((v - exact).abs() / exact < 0.005, "{v}");
    }

    #[test]
    fn cone_and_torus_valid() {
        let c = make_primitive(&PrimitiveKind::Cone { segments: 32 }).unwrap();
        assert_valid(&c);
        let area = 16.0 * (TAU / 32.0).sin();
        assert!((c.volume().unwrap() - area * 2.0 / 3.0).abs() < 1e-9);
        let t = make_primitive(&PrimitiveKind::default_for("torus").unwrap()).unwrap();
        assert_valid(&t);
    }

    #[test]
    fn low_resolution_rejected() {
        assert_eq!(
            make_primitive(&PrimitiveKind::Cylinder { segments: 2 }),
            Err(GeometryError::InvalidResolution(2))
        );
    }
}
