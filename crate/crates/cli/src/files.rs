use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use shapeforge::dsl::{parse_program, DslError};
use shapeforge::geometry::io::{read_obj, read_ply, write_obj, write_ply_mesh};
use shapeforge::geometry::mesh::Mesh;
use shapeforge::{execute_program, ShapeProgram};

use crate::failure::Failure;
use crate::MeshFormat;

pub fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

/// `path:line:col: message` for the first diagnostic.
pub fn dsl_message(path: &Path, e: &DslError) -> String {
    match e.first() {
        Some(d) => format!(
            "{}:{}:{}: {}",
            path.display(),
            d.span.start.line,
            d.span.start.column,
            d.message
        ),
        None => format!("{}: {e}", path.display()),
    }
}

pub fn load_program(path: &Path) -> Result<ShapeProgram, Failure> {
    let text = read_text(path)?;
    parse_program(&text).map_err(|e| Failure::config(dsl_message(path, &e)))
}

fn has_ext(path: &Path, ext: &str) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

pub fn is_mesh_path(path: &Path) -> bool {
    has_ext(path, "obj") || has_ext(path, "ply")
}

pub fn read_mesh(path: &Path) -> Result<Mesh, Failure> {
    let f = fs::File::open(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let r = if has_ext(path, "ply") {
        read_ply(BufReader::new(f)).map(|d| d.to_mesh())
    } else {
        read_obj(BufReader::new(f))
    };
    r.map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

pub fn write_mesh(path: &Path, m: &Mesh, format: MeshFormat) -> Result<(), Failure> {
    let mut buf = Vec::new();
    let r = match format {
        MeshFormat::Obj => write_obj(m, &mut buf),
        MeshFormat::Ply => write_ply_mesh(m, &mut buf, &[]),
    };
    r.map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    write_bytes(path, &buf)
}

/// Executes every part of `p` and merges the results.
pub fn program_mesh(path: &Path, p: &ShapeProgram) -> Result<Mesh, Failure> {
    let parts = execute_program(p).map_err(|e| Failure::exec(format!("{}: {e}", path.display())))?;
    let meshes: Vec<Mesh> = parts.into_iter().map(|(_, m)| m).collect();
    Ok(Mesh::concat(&meshes))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut buf = BufWriter::new(Vec::new());
    serde_json::to_writer_pretty(&mut buf, value).map_err(|e| Failure::io(e.to_string()))?;
    buf.write_all(b"\n").map_err(|e| Failure::io(e.to_string()))?;
    let bytes = buf.into_inner().map_err(|e| Failure::io(e.to_string()))?;
    write_bytes(path, &bytes)
}

/// File-name-safe form of a label.
pub fn slug(s: &str) -> String {
    let out: String = s
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if out.is_empty() {
        "unnamed".into()
    } else {
        out
    }
}
