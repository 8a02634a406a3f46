use std::path::{Path, PathBuf};

use serde::Serialize;
use shapeforge::assembly::{assemble_object, AssemblyError, PartFit, PartInstance};
use shapeforge::dsl::{parse_shape, PartStatement};
use shapeforge::print_program;

use crate::exec::PartsFile;
use crate::failure::Failure;
use crate::files::{dsl_message, read_mesh, read_text, write_bytes, write_json};

pub struct Args {
    pub parts_dir: PathBuf,
    pub out: PathBuf,
    pub report: Option<PathBuf>,
    pub name: Option<String>,
    pub category: Option<String>,
    pub strict: bool,
    pub fit_points: usize,
    pub fit_seed: u64,
}

#[derive(Debug, Serialize)]
struct ReportPart {
    input_index: usize,
    label: String,
    /// Position in the assembled program, if accepted.
    position: Option<usize>,
    cell: Option<[usize; 3]>,
    #[serde(flatten)]
    fit: PartFit,
}

#[derive(Debug, Serialize)]
struct Report {
    object: String,
    category: String,
    accepted: usize,
    rejected: usize,
    parts: Vec<ReportPart>,
}

fn default_name(dir: &Path) -> String {
    dir.canonicalize()
        .ok()
        .and_then(|p| p.file_name().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "object".into())
}

pub fn run(args: Args) -> Result<(), Failure> {
    let index = args.parts_dir.join("parts.json");
    let pf: PartsFile = serde_json::from_str(&read_text(&index)?)
        .map_err(|e| Failure::config(format!("{}: {e}", index.display())))?;
    let name = args
        .name
        .clone()
        .or(pf.object.clone())
        .unwrap_or_else(|| default_name(&args.parts_dir));
    let category = args.category.clone().or(pf.category.clone()).unwrap_or_else(|| "object".into());

    let mut parts = Vec::new();
    let mut input_of = Vec::new();
    let mut report_parts = Vec::new();
    for (i, e) in pf.parts.iter().enumerate() {
        let mesh = read_mesh(&args.parts_dir.join(&e.mesh))?;
        let code_path = args.parts_dir.join(&e.code);
        let text = read_text(&code_path)?;
        match parse_shape(text.trim()) {
            Ok(shape) => {
                let mut p = PartInstance::new(mesh, e.label.clone());
                p.inferred_code = Some(PartStatement {
                    name: e.label.clone(),
                    index: i,
                    shape,
                });
                parts.push(p);
                input_of.push(i);
            }
            Err(err) => report_parts.push(ReportPart {
                input_index: i,
                label: e.label.clone(),
                position: None,
                cell: None,
                fit: PartFit {
                    accepted: false,
                    cd: None,
                    reason: Some(format!("code does not parse: {}", dsl_message(&code_path, &err))),
                },
            }),
        }
    }

    let assembly = assemble_object(&parts, &name, &category, args.fit_points, args.fit_seed).map_err(|e| {
        let e = match e {
            AssemblyError::EmptyMesh(i) => AssemblyError::EmptyMesh(input_of[i]),
            AssemblyError::DegenerateExtent(i) => AssemblyError::DegenerateExtent(input_of[i]),
            AssemblyError::MissingCode(i) => AssemblyError::MissingCode(input_of[i]),
            other => other,
        };
        Failure::exec(e.to_string())
    })?;
    let mut position = 0;
    for o in &assembly.parts {
        let pos = o.fit.accepted.then(|| {
            position += 1;
            position - 1
        });
        report_parts.push(ReportPart {
            input_index: input_of[o.input_index],
            label: o.label.clone(),
            position: pos,
            cell: Some([o.cell.iz, o.cell.ix, o.cell.iy]),
            fit: o.fit.clone(),
        });
    }
    report_parts.sort_by_key(|p| (p.position.is_none(), p.position, p.input_index));
    let rejected: Vec<String> = report_parts
        .iter()
        .filter(|p| !p.fit.accepted)
        .map(|p| {
            eprintln!(
                "rejected part {} ({}): {}",
                p.input_index,
                p.label,
                p.fit.reason.as_deref().unwrap_or("")
            );
            format!("{} ({})", p.input_index, p.label)
        })
        .collect();
    let report = Report {
        object: name,
        category,
        accepted: report_parts.len() - rejected.len(),
        rejected: rejected.len(),
        parts: report_parts,
    };
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.report.json", args.out.display())));
    write_json(&report_path, &report)?;
    if args.strict && report.rejected > 0 {
        return Err(Failure::acceptance(format!("rejected parts: {}", rejected.join(", "))));
    }
    write_bytes(&args.out, print_program(&assembly.program).as_bytes())?;
    println!("{} parts accepted, {} rejected", report.accepted, report.rejected);
    println!("{}", args.out.display());
    Ok(())
}
