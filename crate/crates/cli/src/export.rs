use std::path::PathBuf;

use shapeforge::config::RunConfig;
use shapeforge::geometry::io::write_ply_points;
use shapeforge::pointcloud::{augment, normalize_to_unit_cube, sample_surface};

use crate::failure::Failure;
use crate::files::{load_program, program_mesh, read_text, write_bytes};

pub struct Args {
    pub program: PathBuf,
    pub out: PathBuf,
    pub points: usize,
    pub seed: u64,
    pub normalize: bool,
    pub augment: bool,
    pub config: Option<PathBuf>,
}

pub fn run(args: Args) -> Result<(), Failure> {
    let cfg = match &args.config {
        Some(p) => RunConfig::from_json(&read_text(p)?).map_err(|e| Failure::config(format!("{}: {e}", p.display())))?,
        None => RunConfig::default(),
    };
    if args.points == 0 {
        return Err(Failure::config("--points must be >= 1"));
    }
    let program = load_program(&args.program)?;
    let mesh = program_mesh(&args.program, &program)?;
    let mut pc = sample_surface(&mesh, args.points, args.seed).map_err(|e| Failure::exec(e.to_string()))?;
    pc.provenance.source = program.object_name.clone();
    if args.normalize {
        pc = normalize_to_unit_cube(&pc).map_err(|e| Failure::exec(e.to_string()))?.0;
    }
    if args.augment {
        pc = augment(&pc, &cfg.augment, args.seed, Some(&mesh)).map_err(|e| Failure::exec(e.to_string()))?;
    }
    let mut buf = Vec::new();
    write_ply_points(&pc.points, &mut buf, &pc.ply_comments()).map_err(|e| Failure::io(e.to_string()))?;
    write_bytes(&args.out, &buf)?;
    println!("{} points -> {}", pc.len(), args.out.display());
    Ok(())
}
