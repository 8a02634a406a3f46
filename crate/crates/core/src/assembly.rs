//! Object programs from parts: canonicalization, retargeting of part code
//! back to world space, spatial ordering and acceptance of fitted parts.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{print_program, retarget_statement, PartStatement, ShapeProgram};
use crate::geometry::{execute_shape, Mesh};
use crate::math::{Aabb, Point3, SimilarityTransform, TransformError, Vec3};
use crate::metrics::chamfer_points;
use crate::metrics::tri_box_overlap;
use crate::pointcloud::{normalizing_transform, sample_surface, NormalizeMode, PointCloud};
use crate::sampler::quantize_transform;

/// Ordering grid cells per axis.
pub const GRID: usize = 32;
/// A fitted part is accepted when its Chamfer distance is strictly below
/// this value.
pub const PART_FIT_THRESHOLD: f64 = 5e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssemblyError {
    #[error("part {0} has no triangles")]
    EmptyMesh(usize),
    #[error("part {0} has zero extent")]
    DegenerateExtent(usize),
    #[error("part {0} has no inferred code")]
    MissingCode(usize),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartInstance {
    /// World-space geometry.
    pub mesh: Mesh,
    pub semantic_label: String,
    /// Code in the part's canonical space.
    pub inferred_code: Option<PartStatement>,
}

impl PartInstance {
    pub fn new(mesh: Mesh, label: impl Into<String>) -> Self {
        Self {
            mesh,
            semantic_label: label.into(),
            inferred_code: None,
        }
    }
}

/// Grid cell, compared as `(z, x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CharacteristicCell {
    pub iz: usize,
    pub ix: usize,
    pub iy: usize,
}

/// Maps the part's vertices into `[-1, 1]^3` (longest edge spanning it).
/// Returns the canonical mesh and the world-to-canonical transform.
pub fn canonicalize_part(p: &PartInstance) -> Result<(Mesh, SimilarityTransform), AssemblyError> {
    canonicalize_part_with(p, NormalizeMode::Aabb)
}

pub fn canonicalize_part_with(p: &PartInstance, mode: NormalizeMode) -> Result<(Mesh, SimilarityTransform), AssemblyError> {
    if p.mesh.is_empty() {
        return Err(AssemblyError::EmptyMesh(0));
    }
    let t = normalizing_transform(&p.mesh.vertices, mode).map_err(|_| AssemblyError::DegenerateExtent(0))?;
    Ok((p.mesh.transformed(&t), t))
}

/// Moves canonical-space code back to world space given the
/// world-to-canonical transform `t`.
pub fn decanonicalize_code(s: &PartStatement, t: &SimilarityTransform) -> Result<PartStatement, TransformError> {
    retarget_statement(s, &t.inverse()?)
}

/// Lower and upper cell index touched on one axis by `[lo, hi]`.
fn axis_cells(lo: f64, hi: f64, origin: f64, size: f64) -> (usize, usize) {
    if !(size > 0.0) {
        return (0, 0);
    }
    let n = GRID as f64;
    let a = ((lo - origin) / size).floor().clamp(0.0, n - 1.0);
    let b = ((hi - origin) / size).floor().clamp(0.0, n - 1.0);
    (a as usize, b as usize)
}

fn min_cell(m: &Mesh, object_bbox: &Aabb, open: bool) -> Option<CharacteristicCell> {
    let ext = object_bbox.extent();
    let size = ext / GRID as f64;
    // axes of zero extent collapse to a single slab
    let cell_size = Vec3::from_fn(|k, _| if size[k] > 0.0 { size[k] } else { 1.0 });
    let half = cell_size / 2.0;
    let o = object_bbox.min;
    let mut best: Option<CharacteristicCell> = None;
    for i in 0..m.triangles.len() {
        let tri = m.triangle(i);
        let bb = Aabb::from_points(&tri);
        let (z0, z1) = axis_cells(bb.min.z, bb.max.z, o.z, size.z);
        let (x0, x1) = axis_cells(bb.min.x, bb.max.x, o.x, size.x);
        let (y0, y1) = axis_cells(bb.min.y, bb.max.y, o.y, size.y);
        'cells: for iz in z0..=z1 {
            for ix in x0..=x1 {
                for iy in y0..=y1 {
                    let c = CharacteristicCell { iz, ix, iy };
                    if best.is_some_and(|b| c >= b) {
                        break 'cells;
                    }
                    let center = Point3::new(
                        o.x + (ix as f64 + 0.5) * cell_size.x,
                        o.y + (iy as f64 + 0.5) * cell_size.y,
                        o.z + (iz as f64 + 0.5) * cell_size.z,
                    );
                    let center = Point3::from(Vec3::from_fn(|k, _| if size[k] > 0.0 { center[k] } else { o[k] }));
                    let h = Vec3::from_fn(|k, _| if size[k] > 0.0 { half[k] } else { 0.5 });
                    if tri_box_overlap(&center, &h, &tri, open) {
                        best = Some(c);
                        break 'cells;
                    }
                }
            }
        }
    }
    best
}

/// Among the cells of the `GRID^3` division of `object_bbox` whose interior
/// meets the part's surface, the least in `(z, x, y)` order. A part lying
/// entirely on cell faces falls back to touching cells.
pub fn characteristic_cell(p: &PartInstance, object_bbox: &Aabb) -> Result<CharacteristicCell, AssemblyError> {
    if p.mesh.is_empty() {
        return Err(AssemblyError::EmptyMesh(0));
    }
    min_cell(&p.mesh, object_bbox, true)
        .or_else(|| min_cell(&p.mesh, object_bbox, false))
        .ok_or(AssemblyError::EmptyMesh(0))
}

/// Box containing every part.
pub fn object_bbox(parts: &[PartInstance]) -> Aabb {
    parts.iter().fold(Aabb::empty(), |b, p| b.union(&p.mesh.bbox()))
}

/// Permutation listing parts bottom to top, then left to right, then front
/// to back; ties keep input order.
pub fn order_parts(parts: &[PartInstance], object_bbox: &Aabb) -> Result<Vec<usize>, AssemblyError> {
    let cells: Vec<CharacteristicCell> = parts
        .par_iter()
        .enumerate()
        .map(|(i, p)| characteristic_cell(p, object_bbox).map_err(|_| AssemblyError::EmptyMesh(i)))
        .collect::<Result<_, _>>()?;
    let mut order: Vec<usize> = (0..parts.len()).collect();
    order.sort_by_key(|&i| cells[i]);
    Ok(order)
}

/// Header plus one decanonicalized statement per part, in the given order.
/// Numbers are rounded as printed, so the program survives a text round
/// trip unchanged.
pub fn assemble_object_program(
    parts: &[PartInstance],
    object_name: &str,
    category: &str,
) -> Result<ShapeProgram, AssemblyError> {
    let mut program = ShapeProgram::new(object_name, category);
    for (i, p) in parts.iter().enumerate() {
        let code = p.inferred_code.as_ref().ok_or(AssemblyError::MissingCode(i))?;
        let (_, t) = canonicalize_part(p).map_err(|e| match e {
            AssemblyError::EmptyMesh(_) => AssemblyError::EmptyMesh(i),
            _ => AssemblyError::DegenerateExtent(i),
        })?;
        let mut world = decanonicalize_code(code, &t)?;
        world.shape.transform = quantize_transform(&world.shape.transform);
        program.push_part(p.semantic_label.clone(), world.shape);
    }
    Ok(program)
}

/// Part-fit acceptance rule.
pub fn accept_cd(cd: f64) -> bool {
    cd < PART_FIT_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartFit {
    pub accepted: bool,
    pub cd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Executes `predicted` (canonical space), samples it with the point count
/// and seed of `gt` and accepts iff the Chamfer distance is below [`PART_FIT_THRESHOLD`].
pub fn accept_part_fit(gt: &PointCloud, predicted: &PartStatement) -> PartFit {
    let reject = |reason: String| PartFit {
        accepted: false,
        cd: None,
        reason: Some(reason),
    };
    let mesh = match execute_shape(&predicted.shape) {
        Ok(m) => m,
        Err(e) => return reject(format!("execution failed: {e}")),
    };
    let pc = match sample_surface(&mesh, gt.len().max(1), gt.provenance.seed) {
        Ok(pc) => pc,
        Err(e) => return reject(format!("sampling failed: {e}")),
    };
    match chamfer_points(&gt.points, &pc.points) {
        Ok(cd) => PartFit {
            accepted: accept_cd(cd),
            cd: Some(cd),
            reason: (!accept_cd(cd)).then(|| format!("chamfer distance {cd:.3e} >= {PART_FIT_THRESHOLD:e}")),
        },
        Err(e) => reject(e.to_string()),
    }
}

/// Canonical-space ground-truth cloud for a part.
pub fn canonical_cloud(p: &PartInstance, points: usize, seed: u64) -> Result<PointCloud, AssemblyError> {
    let (m, _) = canonicalize_part(p)?;
    sample_surface(&m, points, seed).map_err(|_| AssemblyError::EmptyMesh(0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartEntry {
    pub label: String,
    /// World-to-canonical transform.
    pub transform: SimilarityTransform,
    /// Canonical-space code.
    pub code: String,
}

/// Object dataset record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub object_name: String,
    pub category: String,
    pub parts: Vec<PartEntry>,
    pub program_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartOutcome {
    /// Position in the input list.
    pub input_index: usize,
    pub label: String,
    pub cell: CharacteristicCell,
    pub fit: PartFit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    /// Program over the accepted parts in spatial order.
    pub program: ShapeProgram,
    /// Every part in spatial order.
    pub parts: Vec<PartOutcome>,
    pub record: ObjectRecord,
}

impl Assembly {
    pub fn all_accepted(&self) -> bool {
        self.parts.iter().all(|p| p.fit.accepted)
    }

    pub fn rejected(&self) -> Vec<&PartOutcome> {
        self.parts.iter().filter(|p| !p.fit.accepted).collect()
    }
}

/// Full pipeline: order the parts, check each inferred code against the
/// part's canonical cloud (`fit_points` points, seed `fit_seed`), and
/// assemble the accepted ones.
pub fn assemble_object(
    parts: &[PartInstance],
    object_name: &str,
    category: &str,
    fit_points: usize,
    fit_seed: u64,
) -> Result<Assembly, AssemblyError> {
    for (i, p) in parts.iter().enumerate() {
        if p.mesh.is_empty() {
            return Err(AssemblyError::EmptyMesh(i));
        }
        if p.inferred_code.is_none() {
            return Err(AssemblyError::MissingCode(i));
        }
    }
    let bb = object_bbox(parts);
    let order = order_parts(parts, &bb)?;
    let fits: Vec<Result<(CharacteristicCell, PartFit, SimilarityTransform), AssemblyError>> = order
        .par_iter()
        .map(|&i| {
            let p = &parts[i];
            let cell = characteristic_cell(p, &bb).map_err(|_| AssemblyError::EmptyMesh(i))?;
            let (cm, t) = canonicalize_part(p).map_err(|_| AssemblyError::DegenerateExtent(i))?;
            let gt = sample_surface(&cm, fit_points, fit_seed).map_err(|_| AssemblyError::EmptyMesh(i))?;
            let fit = accept_part_fit(&gt, p.inferred_code.as_ref().expect("checked"));
            Ok((cell, fit, t))
        })
        .collect();
    let mut outcomes = Vec::with_capacity(parts.len());
    let mut accepted = Vec::new();
    let mut entries = Vec::new();
    for (&i, r) in order.iter().zip(fits) {
        let (cell, fit, t) = r?;
        let p = &parts[i];
        if fit.accepted {
            accepted.push(p.clone());
            entries.push(PartEntry {
                label: p.semantic_label.clone(),
                transform: t,
                code: crate::dsl::print_shape(&p.inferred_code.as_ref().expect("checked").shape),
            });
        }
        outcomes.push(PartOutcome {
            input_index: i,
            label: p.semantic_label.clone(),
            cell,
            fit,
        });
    }
    let program = assemble_object_program(&accepted, object_name, category)?;
    let record = ObjectRecord {
        object_name: object_name.to_string(),
        category: category.to_string(),
        parts: entries,
        program_text: print_program(&program),
    };
    Ok(Assembly {
        program,
        parts: outcomes,
        record,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{parse_program, Shape, ShapeOp};
    use crate::geometry::primitives::cube;
    use crate::metrics::chamfer_points;

    fn cube_at(min: Vec3, size: f64) -> Mesh {
        // unit cube spans [-1, 1]
        cube().transformed(&SimilarityTransform {
            location: min + Vec3::new(size, size, size) / 2.0,
            rotation: [1.0, 0.0, 0.0, 0.0],
            scale: Vec3::new(size, size, size) / 2.0,
        })
    }

    #[test]
    fn canonical_part_is_identity() {
        let p = PartInstance::new(cube(), "box");
        let (m, t) = canonicalize_part(&p).unwrap();
        assert!(t.is_identity());
        assert_eq!(m.vertices, cube().vertices);
    }

    #[test]
    fn scaled_shifted_cube() {
        let world = cube_at(Vec3::new(2.0, 3.0, 4.0), 0.5);
        let p = PartInstance::new(world.clone(), "box");
        let (m, t) = canonicalize_part(&p).unwrap();
        assert!((t.scale.x - 4.0).abs() < 1e-12);
        let back = m.transformed(&t.inverse().unwrap());
        for (a, b) in back.vertices.iter().zip(&world.vertices) {
            assert!((a - b).norm() < 1e-9);
        }
        assert_eq!(chamfer_points(&back.vertices, &world.vertices).unwrap() < 1e-20, true);
    }

    #[test]
    fn decanonicalize_matches_world_part() {
        let src = "# object: o\n# part_0: leg\ncreate_primitive(kind=\"cylinder\", location=(0.3, -1.2, 0.5), rotation=(0.9, 0.1, 0.3, 0.3), scale=(0.1, 0.2, 0.7))\n";
        let prog = parse_program(src).unwrap();
        let world = execute_shape(&prog.parts[0].shape).unwrap();
        let p = PartInstance::new(world.clone(), "leg");
        let (_, t) = canonicalize_part(&p).unwrap();
        let canon_code = retarget_statement(&prog.parts[0], &t).unwrap();
        let back = decanonicalize_code(&canon_code, &t).unwrap();
        let m = execute_shape(&back.shape).unwrap();
        for (a, b) in m.vertices.iter().zip(&world.vertices) {
            assert!((a - b).norm() < 1e-9);
        }
        let ident = decanonicalize_code(&prog.parts[0], &SimilarityTransform::identity()).unwrap();
        assert_eq!(ident, prog.parts[0]);
    }

    #[test]
    fn cell_of_corner_part() {
        let obj = Aabb::new(Point3::origin(), Point3::new(32.0, 32.0, 32.0));
        let p = PartInstance::new(cube_at(Vec3::zeros(), 1.0), "c");
        assert_eq!(characteristic_cell(&p, &obj).unwrap(), CharacteristicCell { iz: 0, ix: 0, iy: 0 });
        let q = PartInstance::new(cube_at(Vec3::new(3.0, 7.0, 5.0), 1.0), "c");
        assert_eq!(characteristic_cell(&q, &obj).unwrap(), CharacteristicCell { iz: 5, ix: 3, iy: 7 });
        let moved = Aabb::new(Point3::new(10.0, 10.0, 10.0), Point3::new(42.0, 42.0, 42.0));
        let q2 = PartInstance::new(q.mesh.translated(&Vec3::new(10.0, 10.0, 10.0)), "c");
        assert_eq!(characteristic_cell(&q2, &moved).unwrap(), characteristic_cell(&q, &obj).unwrap());
    }

    #[test]
    fn seat_before_back_and_legs_by_x_then_y() {
        let seat = PartInstance::new(cube_at(Vec3::new(0.0, 0.0, 4.0), 4.0), "seat");
        let back = PartInstance::new(cube_at(Vec3::new(0.0, 0.0, 8.0), 4.0), "back");
        let legs: Vec<PartInstance> = [(3.0, 3.0), (0.0, 3.0), (3.0, 0.0), (0.0, 0.0)]
            .iter()
            .map(|&(x, y)| PartInstance::new(cube_at(Vec3::new(x, y, 0.0), 1.0), "leg"))
            .collect();
        let mut parts = vec![back, seat];
        parts.extend(legs);
        let bb = object_bbox(&parts);
        let order = order_parts(&parts, &bb).unwrap();
        assert_eq!(order, vec![5, 3, 4, 2, 1, 0]);
    }

    #[test]
    fn assemble_and_fit() {
        let src = "# object: o\n# part_0: a\ncreate_primitive(kind=\"cube\", location=(0, 0, 3), rotation=(1, 0, 0, 0), scale=(1, 1, 1))\n# part_1: b\ncreate_primitive(kind=\"uv_sphere\", location=(0, 0, 0), rotation=(1, 0, 0, 0), scale=(0.5, 0.5, 0.5))\n";
        let prog = parse_program(src).unwrap();
        let parts: Vec<PartInstance> = prog
            .parts
            .iter()
            .map(|s| {
                let mut p = PartInstance::new(execute_shape(&s.shape).unwrap(), s.name.clone());
                let (_, t) = canonicalize_part(&p).unwrap();
                p.inferred_code = Some(retarget_statement(s, &t).unwrap());
                p
            })
            .collect();
        let a = assemble_object(&parts, "o", "misc", 2048, 0).unwrap();
        assert!(a.all_accepted());
        assert_eq!(a.program.parts[0].name, "b");
        assert_eq!(a.program.parts[0].shape, prog.parts[1].shape);
        assert_eq!(a.program.parts[1].shape, prog.parts[0].shape);
        assert_eq!(parse_program(&print_program(&a.program)).unwrap(), a.program);
        let mut missing = parts.clone();
        missing[1].inferred_code = None;
        assert_eq!(assemble_object(&missing, "o", "", 16, 0).unwrap_err(), AssemblyError::MissingCode(1));
    }

    #[test]
    fn fit_threshold() {
        assert!(!accept_cd(PART_FIT_THRESHOLD));
        assert!(accept_cd(PART_FIT_THRESHOLD - 1e-12));
        let gt = sample_surface(&cube(), 1000, 3).unwrap();
        let same = PartStatement {
            name: "c".into(),
            index: 0,
            shape: Shape::new(ShapeOp::Primitive(crate::dsl::PrimitiveKind::Cube)),
        };
        let f = accept_part_fit(&gt, &same);
        assert!(f.accepted);
        assert_eq!(f.cd, Some(0.0));
        let mut big = same.clone();
        big.shape.transform = SimilarityTransform::uniform_scale(1.5);
        let f = accept_part_fit(&gt, &big);
        assert!(!f.accepted);
        assert!(f.cd.unwrap() > 0.1);
    }
}
