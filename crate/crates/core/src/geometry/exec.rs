use rayon::prelude::*;

use super::array::{array_1d, array_2d};
use super::bridge::{bridge_loops, resample_closed, MIN_BRIDGE_VERTICES};
use super::csg::boolean;
use super::curves::eval_section;
use super::fill::fill_grid;
use super::mesh::Mesh;
use super::primitives::make_primitive;
use super::sweep::{revolve, sweep};
use super::{ExecError, GeometryError};
use crate::dsl::{BridgeLoop, Shape, ShapeOp, ShapeProgram};
use crate::math::Point3;

/// Executes one shape: builds the op's mesh in local coordinates, then
/// applies the shape's transform.
pub fn execute_shape(shape: &Shape) -> Result<Mesh, GeometryError> {
    let local = match &shape.op {
        ShapeOp::Primitive(kind) => make_primitive(kind)?,
        ShapeOp::Translation(t) => sweep(
            &t.section,
            &t.trajectory,
            &t.profile,
            t.section_resolution,
            t.path_resolution,
        )?,
        ShapeOp::Revolve(r) => revolve(
            &r.section,
            &r.axis_origin,
            &r.axis_direction,
            r.sweep_angle,
            r.section_resolution,
            r.steps,
        )?,
        ShapeOp::BridgeLoop(b) => execute_bridge(b)?,
        ShapeOp::Boolean(b) => {
            if b.operands.len() < 2 {
                return Err(GeometryError::InvalidInput("boolean needs at least 2 operands".into()));
            }
            let mut acc = execute_shape(&b.operands[0])?;
            for o in &b.operands[1..] {
                let m = execute_shape(o)?;
                acc = boolean(&acc, &m, b.operation)?;
            }
            acc
        }
        ShapeOp::Array1D(a) => {
            let proto = execute_shape(&a.proto)?;
            array_1d(&proto, &a.trajectory, a.count)?
        }
        ShapeOp::Array2D(a) => {
            let proto = execute_shape(&a.proto)?;
            array_2d(&proto, &a.u, &a.v, a.counts, a.spacings)?
        }
        ShapeOp::FillGrid(f) => fill_grid(&f.boundary, f.thickness)?,
    };
    if shape.transform.is_identity() {
        Ok(local)
    } else {
        Ok(local.transformed(&shape.transform))
    }
}

fn execute_bridge(b: &BridgeLoop) -> Result<Mesh, GeometryError> {
    let mut loops = Vec::with_capacity(b.loops.len());
    for l in &b.loops {
        let pts = eval_section(&l.section, b.section_resolution)?;
        let pts3: Vec<Point3> = pts.iter().map(|p| Point3::new(p.x, p.y, 0.0)).collect();
        loops.push(l.transform.apply_points(&pts3));
    }
    let k = loops.iter().map(|l| l.len()).max().unwrap_or(0).max(MIN_BRIDGE_VERTICES);
    let loops: Vec<Vec<Point3>> = loops.iter().map(|l| resample_closed(l, k)).collect();
    bridge_loops(&loops, b.cap_start, b.cap_end)
}

/// Executes every part, in parallel, returning `(part name, mesh)` in
/// program order. The first failing part (by index) aborts.
pub fn execute_program(p: &ShapeProgram) -> Result<Vec<(String, Mesh)>, ExecError> {
    let results: Vec<Result<Mesh, GeometryError>> = p.parts.par_iter().map(|s| execute_shape(&s.shape)).collect();
    results
        .into_iter()
        .zip(&p.parts)
        .map(|(r, part)| {
            r.map(|m| (part.name.clone(), m)).map_err(|source| ExecError {
                part_index: part.index,
                source,
            })
        })
        .collect()
}
