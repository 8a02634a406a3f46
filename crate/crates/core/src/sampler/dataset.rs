//! Dataset layout: `manifest.json`, JSONL shards per split and optional
//! `meshes/` and `clouds/` PLY files named by record seed.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use super::{choose_family, record_mesh, sample_part, splitmix64, validate_families, Family, FamilyConfig, SampleRecord, SamplerError};
use crate::dsl::print_program;
use crate::geometry::io::{write_ply_mesh, write_ply_points};
use crate::math::Aabb;
use crate::pointcloud::sample_surface;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(&self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

/// 70 / 15 / 15 by a hash of the record seed.
pub fn split_of(seed: u64) -> Split {
    match splitmix64(seed ^ 0x5350_4C49_54) % 100 {
        0..70 => Split::Train,
        70..85 => Split::Val,
        _ => Split::Test,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetOptions {
    pub shard_size: usize,
    pub write_meshes: bool,
    pub write_clouds: bool,
    pub cloud_points: usize,
    /// Hash of the run configuration recorded in the manifest.
    pub config_hash: String,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        Self {
            shard_size: 1000,
            write_meshes: false,
            write_clouds: false,
            cloud_points: 4096,
            config_hash: String::new(),
        }
    }
}

/// One shard line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShardLine {
    pub seed: u64,
    pub family: Family,
    pub program_text: String,
    pub bbox: Aabb,
    pub metadata: Map<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShardInfo {
    pub file: String,
    pub split: Split,
    pub records: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub seed: u64,
    pub count: usize,
    pub config_hash: String,
    pub family_counts: BTreeMap<Family, usize>,
    pub split_counts: BTreeMap<Split, usize>,
    /// Records dropped after exhausting their attempts, by seed.
    pub failed: Vec<u64>,
    pub shards: Vec<ShardInfo>,
    /// SHA-256 of this manifest serialized with `checksum` and
    /// `created_at` emptied.
    pub checksum: String,
    /// Seconds since the Unix epoch; excluded from `checksum`.
    pub created_at: String,
}

impl DatasetManifest {
    pub fn compute_checksum(&self) -> String {
        let mut m = self.clone();
        m.checksum.clear();
        m.created_at.clear();
        let bytes = serde_json::to_vec(&m).expect("manifest serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn verify_checksum(&self) -> bool {
        self.checksum == self.compute_checksum()
    }
}

/// Seed of the `i`-th record of a run seeded with `seed`.
pub fn record_seed(seed: u64, i: usize) -> u64 {
    splitmix64(seed.wrapping_add(splitmix64(i as u64)))
}

/// Family of the `i`-th record.
pub fn record_family(families: &[FamilyConfig], record_seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(record_seed ^ 0x4641_4D49_4C59));
    choose_family(families, &mut rng)
}

struct Cleanup {
    created: Vec<PathBuf>,
    armed: bool,
}

impl Drop for Cleanup {
    fn drop(&mut self) {
        if self.armed {
            for p in self.created.iter().rev() {
                if p.is_dir() {
                    let _ = fs::remove_dir(p);
                } else {
                    let _ = fs::remove_file(p);
                }
            }
        }
    }
}

fn io_err(p: &Path, e: impl std::fmt::Display) -> SamplerError {
    SamplerError::Io(format!("{}: {e}", p.display()))
}

/// Generates `count` records in parallel and writes them in record order.
/// Every file created is removed again if any step fails.
pub fn generate_dataset(
    families: &[FamilyConfig],
    count: usize,
    seed: u64,
    out_dir: &Path,
    opts: &DatasetOptions,
) -> Result<DatasetManifest, SamplerError> {
    validate_families(families)?;
    if opts.shard_size == 0 {
        return Err(SamplerError::InvalidConfig("shard_size must be >= 1".into()));
    }
    let mut cleanup = Cleanup {
        created: Vec::new(),
        armed: true,
    };
    if !out_dir.exists() {
        fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
        cleanup.created.push(out_dir.to_path_buf());
    }
    let results: Vec<(u64, Result<SampleRecord, SamplerError>)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let rs = record_seed(seed, i);
            let fc = &families[record_family(families, rs)];
            (rs, sample_part(fc.family, rs, &fc.ranges))
        })
        .collect();

    let mut failed = Vec::new();
    let mut family_counts: BTreeMap<Family, usize> = BTreeMap::new();
    let mut split_counts: BTreeMap<Split, usize> = Split::ALL.iter().map(|s| (*s, 0)).collect();
    let mut by_split: BTreeMap<Split, Vec<&SampleRecord>> = BTreeMap::new();
    for (rs, r) in &results {
        match r {
            Ok(rec) => {
                *family_counts.entry(rec.family).or_default() += 1;
                let s = split_of(rec.seed);
                *split_counts.entry(s).or_default() += 1;
                by_split.entry(s).or_default().push(rec);
            }
            Err(SamplerError::InvalidConfig(m)) => return Err(SamplerError::InvalidConfig(m.clone())),
            Err(_) => failed.push(*rs),
        }
    }

    let mut shards = Vec::new();
    for split in Split::ALL {
        let Some(recs) = by_split.get(&split) else {
            continue;
        };
        for (n, chunk) in recs.chunks(opts.shard_size).enumerate() {
            let name = format!("parts-{}-{n:04}.jsonl", split.name());
            let path = out_dir.join(&name);
            let mut buf = Vec::new();
            for rec in chunk {
                let line = ShardLine {
                    seed: rec.seed,
                    family: rec.family,
                    program_text: print_program(&rec.program),
                    bbox: rec.bbox,
                    metadata: rec.metadata.clone(),
                };
                serde_json::to_writer(&mut buf, &line).map_err(|e| io_err(&path, e))?;
                buf.push(b'\n');
            }
            cleanup.created.push(path.clone());
            fs::write(&path, &buf).map_err(|e| io_err(&path, e))?;
            shards.push(ShardInfo {
                file: name,
                split,
                records: chunk.len(),
                sha256: hex::encode(Sha256::digest(&buf)),
            });
        }
    }

    if opts.write_meshes || opts.write_clouds {
        let ok: Vec<&SampleRecord> = results.iter().filter_map(|(_, r)| r.as_ref().ok()).collect();
        for (flag, dir) in [(opts.write_meshes, "meshes"), (opts.write_clouds, "clouds")] {
            let d = out_dir.join(dir);
            if flag && !d.exists() {
                fs::create_dir_all(&d).map_err(|e| io_err(&d, e))?;
                cleanup.created.push(d);
            }
        }
        let files: Vec<Result<Vec<PathBuf>, SamplerError>> = ok
            .par_iter()
            .map(|rec| write_record_files(rec, out_dir, opts))
            .collect();
        for f in files {
            cleanup.created.extend(f?);
        }
    }

    let mut manifest = DatasetManifest {
        format_version: FORMAT_VERSION,
        seed,
        count,
        config_hash: opts.config_hash.clone(),
        family_counts,
        split_counts,
        failed,
        shards,
        checksum: String::new(),
        created_at: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs().to_string())
            .unwrap_or_default(),
    };
    manifest.checksum = manifest.compute_checksum();
    let path = out_dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| io_err(&path, e))?;
    cleanup.created.push(path.clone());
    fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))?;
    cleanup.armed = false;
    Ok(manifest)
}

fn write_record_files(rec: &SampleRecord, out_dir: &Path, opts: &DatasetOptions) -> Result<Vec<PathBuf>, SamplerError> {
    let mut written = Vec::new();
    let mesh = record_mesh(rec).map_err(|e| SamplerError::Io(format!("seed {}: {e}", rec.seed)))?;
    let comments = vec![format!("source {} seed {}", rec.family.name(), rec.seed)];
    if opts.write_meshes {
        let p = out_dir.join("meshes").join(format!("{}.ply", rec.seed));
        let f = fs::File::create(&p).map_err(|e| io_err(&p, e))?;
        written.push(p.clone());
        let mut w = BufWriter::new(f);
        write_ply_mesh(&mesh, &mut w, &comments).map_err(|e| io_err(&p, e))?;
        w.flush().map_err(|e| io_err(&p, e))?;
    }
    if opts.write_clouds {
        let p = out_dir.join("clouds").join(format!("{}.ply", rec.seed));
        let mut pc = sample_surface(&mesh, opts.cloud_points, rec.seed).map_err(|e| io_err(&p, e))?;
        pc.provenance.source = rec.family.name().to_string();
        let f = fs::File::create(&p).map_err(|e| io_err(&p, e))?;
        written.push(p.clone());
        let mut w = BufWriter::new(f);
        write_ply_points(&pc.points, &mut w, &pc.ply_comments()).map_err(|e| io_err(&p, e))?;
        w.flush().map_err(|e| io_err(&p, e))?;
    }
    Ok(written)
}

/// Reads every shard line listed in a manifest, verifying checksums.
pub fn read_shards(dir: &Path, manifest: &DatasetManifest) -> Result<Vec<ShardLine>, SamplerError> {
    let mut out = Vec::new();
    for s in &manifest.shards {
        let p = dir.join(&s.file);
        let bytes = fs::read(&p).map_err(|e| io_err(&p, e))?;
        if hex::encode(Sha256::digest(&bytes)) != s.sha256 {
            return Err(io_err(&p, "checksum mismatch"));
        }
        for line in bytes.split(|b| *b == b'\n').filter(|l| !l.is_empty()) {
            out.push(serde_json::from_slice(line).map_err(|e| io_err(&p, e))?);
        }
    }
    Ok(out)
}
