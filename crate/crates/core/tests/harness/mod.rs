//! Shared drivers for the suites that also run in the acceptance target.
#![allow(dead_code)]

use crate::oracles::{self, iou, parity_occupancy, SampleGrid};
use shapeforge::assembly::{assemble_object, canonicalize_part, PartInstance};
use shapeforge::dsl::{retarget_statement, BooleanKind, ShapeOp};
use shapeforge::metrics::{chamfer_points, evaluate_meshes, EvalProtocol};
use shapeforge::sampler::{sample_object, sample_part, Family, FamilyConfig, Ranges};
use shapeforge::{execute_program, execute_shape, sample_surface, Aabb, Mesh};

fn combine(op: BooleanKind, acc: &mut [bool], next: &[bool]) {
    for (a, b) in acc.iter_mut().zip(next) {
        *a = match op {
            BooleanKind::Union => *a || *b,
            BooleanKind::Intersection => *a && *b,
            BooleanKind::Difference => *a && !*b,
        };
    }
}

/// IoU between the executed boolean of sampler record `seed` and the same
/// boolean applied to its operands' occupancy, sampled at `n^3` points.
pub fn boolean_corpus_iou(seed: u64, n: usize) -> f64 {
    let rec = sample_part(Family::Boolean, seed, &Ranges::default()).unwrap();
    let shape = &rec.program.parts[0].shape;
    let ShapeOp::Boolean(op) = &shape.op else {
        panic!("seed {seed} is not a boolean");
    };
    let operands: Vec<Mesh> = op
        .operands
        .iter()
        .map(|o| execute_shape(o).unwrap().transformed(&shape.transform))
        .collect();
    let result = execute_shape(shape).unwrap();
    let frame = operands.iter().fold(Aabb::empty(), |b, m| b.union(&m.bbox())).padded(0.02);
    let g = SampleGrid::new(&frame, n);
    let mut expected = parity_occupancy(&operands[0], &g);
    for m in &operands[1..] {
        combine(op.operation, &mut expected, &parity_occupancy(m, &g));
    }
    iou(&expected, &parity_occupancy(&result, &g))
}

#[derive(Debug, Clone)]
pub struct RoundTrip {
    pub parts: usize,
    pub max_part_cd: f64,
    pub object_cd: f64,
    pub all_accepted: bool,
    pub order_matches: bool,
    pub labels_kept: bool,
}

/// Splits a sampled object into parts, feeds the ground-truth code back as
/// canonical-space inferred code and compares the assembled program with
/// the original.
pub fn assembly_round_trip(seed: u64, part_range: (usize, usize)) -> RoundTrip {
    let obj = sample_object(seed, part_range, &FamilyConfig::defaults()).unwrap();
    let world = execute_program(&obj.program).unwrap();
    let parts: Vec<PartInstance> = world
        .iter()
        .zip(&obj.program.parts)
        .map(|((label, m), stmt)| {
            let mut p = PartInstance::new(m.clone(), label.clone());
            let (_, t) = canonicalize_part(&p).unwrap();
            p.inferred_code = Some(retarget_statement(stmt, &t).unwrap());
            p
        })
        .collect();
    let asm = assemble_object(&parts, &obj.program.object_name, &obj.program.object_category, 4096, 0).unwrap();
    let rebuilt = execute_program(&asm.program).unwrap();
    let order: Vec<usize> = asm.parts.iter().map(|o| o.input_index).collect();
    let meshes: Vec<Mesh> = world.iter().map(|(_, m)| m.clone()).collect();
    let mut max_part_cd: f64 = 0.0;
    let mut labels_kept = rebuilt.len() == world.len();
    for (k, (label, m)) in rebuilt.iter().enumerate() {
        let orig = &world[order[k]];
        labels_kept &= *label == orig.0;
        let a = sample_surface(&orig.1, 4096, 7).unwrap();
        let b = sample_surface(m, 4096, 7).unwrap();
        max_part_cd = max_part_cd.max(chamfer_points(&a.points, &b.points).unwrap());
    }
    let gt = Mesh::concat(&meshes);
    let report = evaluate_meshes(&gt, &rebuilt, &EvalProtocol::default()).unwrap();
    RoundTrip {
        parts: world.len(),
        max_part_cd,
        object_cd: report.cd.unwrap(),
        all_accepted: asm.all_accepted(),
        order_matches: order == oracles::brute_order(&meshes),
        labels_kept,
    }
}
