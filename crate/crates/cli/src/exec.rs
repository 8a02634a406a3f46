use std::path::Path;

use serde::{Deserialize, Serialize};
use shapeforge::assembly::{canonicalize_part, PartInstance};
use shapeforge::dsl::{print_shape, retarget_statement};
use shapeforge::execute_program;
use shapeforge::geometry::mesh::Mesh;

use crate::failure::Failure;
use crate::files::{load_program, slug, write_bytes, write_json, write_mesh};
use crate::MeshFormat;

/// `parts.json` in an assembly input directory.
#[derive(Debug, Serialize, Deserialize)]
pub struct PartsFile {
    #[serde(default)]
    pub object: Option<String>,
    #[serde(default)]
    pub category: Option<String>,
    pub parts: Vec<PartsFileEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PartsFileEntry {
    pub label: String,
    /// OBJ or PLY path relative to the directory.
    pub mesh: String,
    /// Path of a file holding one canonical-space statement.
    pub code: String,
}

pub fn run(path: &Path, format: MeshFormat, per_part: bool, out: &Path, assembly_dir: Option<&Path>) -> Result<(), Failure> {
    let program = load_program(path)?;
    let parts = execute_program(&program).map_err(|e| Failure::exec(format!("{}: {e}", path.display())))?;
    let stem = slug(&program.object_name);
    if per_part {
        for (i, (name, m)) in parts.iter().enumerate() {
            let file = out.join(format!("{stem}_{i:02}_{}.{}", slug(name), format.ext()));
            write_mesh(&file, m, format)?;
            println!("{}", file.display());
        }
    } else {
        let meshes: Vec<Mesh> = parts.iter().map(|(_, m)| m.clone()).collect();
        let file = out.join(format!("{stem}.{}", format.ext()));
        write_mesh(&file, &Mesh::concat(&meshes), format)?;
        println!("{}", file.display());
    }
    if let Some(dir) = assembly_dir {
        let mut entries = Vec::with_capacity(parts.len());
        for (i, ((name, m), stmt)) in parts.iter().zip(&program.parts).enumerate() {
            let inst = PartInstance::new(m.clone(), name.clone());
            let (_, t) = canonicalize_part(&inst).map_err(|e| Failure::exec(format!("part {i}: {e}")))?;
            let canon = retarget_statement(stmt, &t).map_err(|e| Failure::exec(format!("part {i}: {e}")))?;
            let mesh_file = format!("part_{i:02}.obj");
            let code_file = format!("part_{i:02}.code");
            write_mesh(&dir.join(&mesh_file), m, MeshFormat::Obj)?;
            write_bytes(&dir.join(&code_file), format!("{}\n", print_shape(&canon.shape)).as_bytes())?;
            entries.push(PartsFileEntry {
                label: name.clone(),
                mesh: mesh_file,
                code: code_file,
            });
        }
        let pf = PartsFile {
            object: Some(program.object_name.clone()),
            category: Some(program.object_category.clone()),
            parts: entries,
        };
        write_json(&dir.join("parts.json"), &pf)?;
        println!("{}", dir.join("parts.json").display());
    }
    Ok(())
}
