//! Sweeps of a section along a trajectory, and solids of revolution.

use super::curves::{eval_section, eval_trajectory};
use super::mesh::Mesh;
use super::triangulate::triangulate;
use super::GeometryError;
use crate::dsl::{ScaleProfile, SectionSpec, TrajectorySpec};
use crate::math::{Point2, Point3, Vec2};

/// Minimum triangle area accepted in constructed meshes.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

pub(crate) struct RingMesh {
    pub vertices: Vec<Point3>,
    pub triangles: Vec<[u32; 3]>,
    pub quads: Vec<[u32; 2]>,
}

impl RingMesh {
    pub fn new() -> Self {
        Self {
            vertices: Vec::new(),
            triangles: Vec::new(),
            quads: Vec::new(),
        }
    }

    pub fn quad(&mut self, a: u32, b: u32, c: u32, d: u32) {
        let t = self.triangles.len() as u32;
        self.triangles.push([a, b, c]);
        self.triangles.push([a, c, d]);
        self.quads.push([t, t + 1]);
    }

    /// Stitches ring `r0` to ring `r1` (each `k` vertices, starting at the
    /// given offsets) with quads `(a_i, a_i+1, b_i+1, b_i)`.
    pub fn stitch(&mut self, r0: u32, r1: u32, k: u32) {
        for i in 0..k {
            let j = (i + 1) % k;
            self.quad(r0 + i, r0 + j, r1 + j, r1 + i);
        }
    }

    /// Adds cap triangles of a CCW 2D polygon mapped to ring `r`.
    pub fn cap(&mut self, r: u32, tris: &[[usize; 3]], flip: bool) {
        for t in tris {
            let [a, b, c] = t.map(|i| r + i as u32);
            self.triangles.push(if flip { [a, c, b] } else { [a, b, c] });
        }
    }

    pub fn finish(self) -> Result<Mesh, GeometryError> {
        let m = Mesh::with_quads(self.vertices, self.triangles, self.quads);
        check_nondegenerate(&m)?;
        Ok(m)
    }
}

pub(crate) fn check_nondegenerate(m: &Mesh) -> Result<(), GeometryError> {
    let bad = m.degenerate_triangles(MIN_TRIANGLE_AREA);
    if bad.is_empty() {
        Ok(())
    } else {
        Err(GeometryError::DegenerateMesh(format!(
            "{} triangles with area <= {MIN_TRIANGLE_AREA:e}",
            bad.len()
        )))
    }
}

/// Sweeps `section` along `trajectory`, the section lying in each frame's
/// normal/binormal plane scaled by `profile` at the normalized arc length.
pub fn sweep(
    section: &SectionSpec,
    trajectory: &TrajectorySpec,
    profile: &ScaleProfile,
    section_resolution: u32,
    path_resolution: u32,
) -> Result<Mesh, GeometryError> {
    let sec = eval_section(section, section_resolution)?;
    let field = eval_trajectory(trajectory, path_resolution)?;
    let k = sec.len() as u32;
    let mut rm = RingMesh::new();
    for f in &field.samples {
        let s = profile.eval(f.arc_length / field.length);
        for p in &sec {
            rm.vertices.push(f.place(s * p.x, s * p.y, 0.0));
        }
    }
    let rings = field.samples.len() as u32;
    for r in 0..rings - 1 {
        rm.stitch(r * k, (r + 1) * k, k);
    }
    if field.closed {
        rm.stitch((rings - 1) * k, 0, k);
    } else {
        let tris = triangulate(&sec)?;
        rm.cap(0, &tris, true);
        rm.cap((rings - 1) * k, &tris, false);
    }
    rm.finish()
}

/// Revolves `section` about the in-plane line `axis_origin + t axis_direction`
/// by `sweep_angle` degrees. The axis becomes local `z`.
pub fn revolve(
    section: &SectionSpec,
    axis_origin: &Point2,
    axis_direction: &Vec2,
    sweep_angle: f64,
    section_resolution: u32,
    steps: u32,
) -> Result<Mesh, GeometryError> {
    if steps < 3 {
        return Err(GeometryError::InvalidResolution(steps));
    }
    if !(sweep_angle > 0.0 && sweep_angle <= 360.0) {
        return Err(GeometryError::InvalidInput(format!("sweep angle {sweep_angle} outside (0, 360]")));
    }
    let d = axis_direction.try_normalize(0.0).ok_or(GeometryError::SectionCrossesAxis)?;
    let sec = eval_section(section, section_resolution)?;
    let mut prof: Vec<Point2> = sec
        .iter()
        .map(|p| {
            let q = p - axis_origin;
            Point2::new(d.x * q.y - d.y * q.x, d.dot(&q))
        })
        .collect();
    let all_pos = prof.iter().all(|p| p.x > 1e-12);
    let all_neg = prof.iter().all(|p| p.x < -1e-12);
    if !(all_pos || all_neg) {
        return Err(GeometryError::SectionCrossesAxis);
    }
    for p in &mut prof {
        p.x = p.x.abs();
    }
    if super::curves::signed_area(&prof) < 0.0 {
        prof[1..].reverse();
    }
    let full = sweep_angle >= 360.0;
    let total = sweep_angle.to_radians();
    let rings = if full { steps } else { steps + 1 };
    let k = prof.len() as u32;
    let mut rm = RingMesh::new();
    for j in 0..rings {
        let a = total * j as f64 / steps as f64;
        let (s, c) = a.sin_cos();
        for p in &prof {
            rm.vertices.push(Point3::new(p.x * c, p.x * s, p.y));
        }
    }
    let mut band = |r0: u32, r1: u32| {
        for i in 0..k {
            let i1 = (i + 1) % k;
            rm.quad(r0 + i, r1 + i, r1 + i1, r0 + i1);
        }
    };
    for j in 0..rings - 1 {
        band(j * k, (j + 1) * k);
    }
    if full {
        band((rings - 1) * k, 0);
    } else {
        let tris = triangulate(&prof)?;
        rm.cap(0, &tris, false);
        rm.cap((rings - 1) * k, &tris, true);
    }
    rm.finish()
}
