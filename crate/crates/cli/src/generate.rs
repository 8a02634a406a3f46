use std::path::PathBuf;

use shapeforge::config::RunConfig;
use shapeforge::sampler::{generate_dataset, Family, FamilyConfig, SamplerError};

use crate::failure::Failure;
use crate::files::{read_text, write_bytes};

pub struct Args {
    pub config: Option<PathBuf>,
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub weights: Vec<String>,
    pub shard_size: Option<usize>,
    pub write_meshes: bool,
    pub write_clouds: bool,
    pub out: PathBuf,
}

fn apply_weight(cfg: &mut RunConfig, spec: &str) -> Result<(), Failure> {
    let (name, w) = spec
        .split_once('=')
        .ok_or_else(|| Failure::config(format!("--weight {spec}: expected FAMILY=WEIGHT")))?;
    let family: Family = name
        .trim()
        .parse()
        .map_err(|e| Failure::config(format!("--weight {spec}: {e}")))?;
    let weight: f64 = w
        .trim()
        .parse()
        .map_err(|_| Failure::config(format!("--weight {spec}: weight is not a number")))?;
    match cfg.families.iter_mut().find(|f| f.family == family) {
        Some(f) => f.weight = weight,
        None => cfg.families.push(FamilyConfig::new(family, weight)),
    }
    Ok(())
}

pub fn resolve_config(args: &Args) -> Result<RunConfig, Failure> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::from_json(&read_text(p)?).map_err(|e| Failure::config(format!("{}: {e}", p.display())))?,
        None => RunConfig::default(),
    };
    if let Some(c) = args.count {
        cfg.count = c;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(s) = args.shard_size {
        cfg.output.shard_size = s;
    }
    cfg.output.write_meshes |= args.write_meshes;
    cfg.output.write_clouds |= args.write_clouds;
    for w in &args.weights {
        apply_weight(&mut cfg, w)?;
    }
    cfg.threads = 0;
    cfg.validate().map_err(|e| Failure::config(e.to_string()))?;
    Ok(cfg)
}

pub fn run(args: Args) -> Result<(), Failure> {
    let cfg = resolve_config(&args)?;
    let manifest = generate_dataset(&cfg.families, cfg.count, cfg.seed, &args.out, &cfg.dataset_options()).map_err(
        |e| match e {
            SamplerError::InvalidConfig(m) => Failure::config(m),
            SamplerError::Io(m) => Failure::io(m),
            other => Failure::exec(other.to_string()),
        },
    )?;
    write_bytes(&args.out.join("config.json"), format!("{}\n", cfg.to_json()).as_bytes())?;
    let written: usize = manifest.shards.iter().map(|s| s.records).sum();
    println!("records  {written}/{}", manifest.count);
    for (f, n) in &manifest.family_counts {
        println!("  {f:<12} {n}");
    }
    for (s, n) in &manifest.split_counts {
        println!("  {:<12} {n}", s.name());
    }
    println!("failed   {}", manifest.failed.len());
    println!("shards   {}", manifest.shards.len());
    println!("config   {}", manifest.config_hash);
    println!("manifest {}", manifest.checksum);
    Ok(())
}
