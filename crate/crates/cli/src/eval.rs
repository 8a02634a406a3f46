use std::path::{Path, PathBuf};

use serde::Deserialize;
use rayon::prelude::*;
use shapeforge::dsl::parse_program;
use shapeforge::geometry::mesh::Mesh;
use shapeforge::metrics::{evaluate_reconstruction, reports_to_csv, EvalProtocol, EvalReport};

use crate::failure::Failure;
use crate::files::{dsl_message, is_mesh_path, load_program, program_mesh, read_mesh, read_text, write_bytes, write_json};

#[derive(Debug, Deserialize)]
struct BatchItem {
    gt: PathBuf,
    pred: PathBuf,
}

fn load_protocol(spec: &str) -> Result<EvalProtocol, Failure> {
    if spec == "default" {
        return Ok(EvalProtocol::default());
    }
    let p = Path::new(spec);
    let proto: EvalProtocol =
        serde_json::from_str(&read_text(p)?).map_err(|e| Failure::config(format!("{}: {e}", p.display())))?;
    proto.validate().map_err(|e| Failure::config(format!("{}: {e}", p.display())))?;
    Ok(proto)
}

fn load_gt(path: &Path) -> Result<Mesh, Failure> {
    if is_mesh_path(path) {
        read_mesh(path)
    } else {
        let p = load_program(path)?;
        program_mesh(path, &p)
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Scores one pair. Unreadable inputs are errors; a prediction that does
/// not parse or execute is reported as failed.
fn evaluate_pair(gt: &Path, pred: &Path, protocol: &EvalProtocol) -> Result<EvalReport, Failure> {
    let gt_mesh = load_gt(gt)?;
    let text = read_text(pred)?;
    Ok(match parse_program(&text) {
        Ok(p) => evaluate_reconstruction(&gt_mesh, &p, protocol),
        Err(e) => EvalReport::failed(&stem(pred), "", protocol, dsl_message(pred, &e)),
    })
}

pub fn run(
    gt: Option<PathBuf>,
    pred: Option<PathBuf>,
    batch: Option<PathBuf>,
    protocol: &str,
    out: &Path,
) -> Result<(), Failure> {
    let protocol = load_protocol(protocol)?;
    let pairs: Vec<(PathBuf, PathBuf)> = match batch {
        Some(b) => {
            let items: Vec<BatchItem> =
                serde_json::from_str(&read_text(&b)?).map_err(|e| Failure::config(format!("{}: {e}", b.display())))?;
            let base = b.parent().map(Path::to_path_buf).unwrap_or_default();
            items.into_iter().map(|i| (base.join(i.gt), base.join(i.pred))).collect()
        }
        None => vec![(gt.expect("clap requires gt"), pred.expect("clap requires pred"))],
    };
    let reports: Vec<EvalReport> = pairs
        .par_iter()
        .map(|(g, p)| evaluate_pair(g, p, &protocol))
        .collect::<Result<_, _>>()?;
    for r in &reports {
        match (r.cd, r.iou) {
            (Some(cd), Some(iou)) => println!("{}/{}  cd {cd:.6e}  iou {iou:.4}", r.category, r.object),
            _ => println!(
                "{}/{}  failed: {}",
                r.category,
                r.object,
                r.message.as_deref().unwrap_or("")
            ),
        }
    }
    write_json(&out.join("report.json"), &reports)?;
    write_bytes(&out.join("report.csv"), reports_to_csv(&reports).as_bytes())?;
    Ok(())
}
