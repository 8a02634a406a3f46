//! Fixed inputs shared by the benchmarks.

use shapeforge::sampler::{sample_object, sample_part, Family, FamilyConfig, Ranges};
use shapeforge::{execute_program, print_program, Mesh, ShapeProgram};

/// One sampled part per family, as program text.
pub fn part_programs() -> Vec<(Family, String)> {
    Family::ALL
        .into_iter()
        .map(|f| {
            let rec = sample_part(f, 17, &Ranges::default()).expect("fixture samples");
            (f, print_program(&rec.program))
        })
        .collect()
}

/// A multi-part object and its merged mesh.
pub fn object(parts: usize) -> (ShapeProgram, Mesh) {
    let obj = sample_object(42, (parts, parts), &FamilyConfig::defaults()).expect("fixture object");
    let meshes: Vec<Mesh> = execute_program(&obj.program)
        .expect("fixture executes")
        .into_iter()
        .map(|(_, m)| m)
        .collect();
    (obj.program, Mesh::concat(&meshes))
}
