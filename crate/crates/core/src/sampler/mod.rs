//! Seeded synthesis of single-part programs for every construction family,
//! multi-part objects built from them, and on-disk datasets.
//!
//! Randomness comes from ChaCha8 streams keyed by
//! `splitmix64(seed ^ splitmix64(family tag + attempt))`, so a record
//! depends only on its family and seed.

mod dataset;
mod families;
mod object;

pub use dataset::{generate_dataset, read_shards, record_family, record_seed, split_of, DatasetManifest, DatasetOptions, ShardInfo, ShardLine, Split, FORMAT_VERSION};
pub use object::{sample_object, ObjectSample};

use nalgebra::UnitQuaternion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::dsl::{quantize, PartStatement, Shape, ShapeOp, ShapeProgram};
use crate::geometry::{execute_shape, Mesh};
use crate::math::{orientation_from_direction, quat_to_array, Aabb, Point3, SimilarityTransform, Vec3};

/// Rejection-loop bound for placement.
pub const MAX_PLACEMENT_TRIES: usize = 1000;
/// Attempts (each with a fresh derived seed) before a geometric failure is
/// reported.
pub const MAX_ATTEMPTS: u64 = 64;
/// Slack on the `[-1, 1]^3` containment check.
pub const CONTAINMENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Primitive,
    Translation,
    BridgeLoop,
    Boolean,
    Array,
    FillGrid,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Primitive,
        Family::Translation,
        Family::BridgeLoop,
        Family::Boolean,
        Family::Array,
        Family::FillGrid,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Primitive => "primitive",
            Family::Translation => "translation",
            Family::BridgeLoop => "bridge_loop",
            Family::Boolean => "boolean",
            Family::Array => "array",
            Family::FillGrid => "fill_grid",
        }
    }

    fn tag(&self) -> u64 {
        *self as u64 + 1
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

/// Parameter ranges shared by the family builders; each family reads the
/// fields relevant to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Ranges {
    /// Exponent range for primitive per-axis scales `10^x`.
    pub log_scale: (f64, f64),
    /// Longest bounding-box edge after rescaling.
    pub longest_edge: (f64, f64),
    /// Instances per array axis.
    pub count: (u32, u32),
    /// Boolean operand count.
    pub operands: (u32, u32),
    /// Bridge loop count.
    pub loops: (u32, u32),
    /// Vertex count of polygon sections and fill boundaries.
    pub polygon_vertices: (u32, u32),
    /// End scale of tapered sweeps.
    pub taper: (f64, f64),
    /// Fill-grid plate thickness.
    pub thickness: (f64, f64),
    pub torus_minor_radius: f64,
    /// Probability that a translation-family part is a revolve.
    pub revolve_probability: f64,
}

impl Default for Ranges {
    fn default() -> Self {
        Self {
            log_scale: (-2.0, 2.0),
            longest_edge: (1.0, 2.0),
            count: (2, 8),
            operands: (2, 3),
            loops: (2, 4),
            polygon_vertices: (3, 8),
            taper: (0.3, 1.5),
            thickness: (0.02, 0.1),
            torus_minor_radius: 0.25,
            revolve_probability: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub family: Family,
    pub weight: f64,
    #[serde(default)]
    pub ranges: Ranges,
}

impl FamilyConfig {
    pub fn new(family: Family, weight: f64) -> Self {
        Self {
            family,
            weight,
            ranges: Ranges::default(),
        }
    }

    /// Weights in the ratio of the reference part corpus (in millions of
    /// pairs), with a small share for fill grids.
    pub fn defaults() -> Vec<FamilyConfig> {
        vec![
            FamilyConfig::new(Family::Primitive, 1.5),
            FamilyConfig::new(Family::Translation, 3.0),
            FamilyConfig::new(Family::BridgeLoop, 1.5),
            FamilyConfig::new(Family::Boolean, 1.5),
            FamilyConfig::new(Family::Array, 2.4),
            FamilyConfig::new(Family::FillGrid, 0.1),
        ]
    }
}

fn check_range<T: PartialOrd + Copy + std::fmt::Debug>(name: &str, r: (T, T)) -> Result<(), SamplerError> {
    if r.0 <= r.1 {
        Ok(())
    } else {
        Err(SamplerError::InvalidConfig(format!("{name}: empty range {r:?}")))
    }
}

impl Ranges {
    pub fn validate(&self) -> Result<(), SamplerError> {
        let finite = [
            self.log_scale.0,
            self.log_scale.1,
            self.longest_edge.0,
            self.longest_edge.1,
            self.taper.0,
            self.taper.1,
            self.thickness.0,
            self.thickness.1,
            self.torus_minor_radius,
            self.revolve_probability,
        ];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(SamplerError::InvalidConfig("ranges must be finite".into()));
        }
        check_range("log_scale", self.log_scale)?;
        check_range("longest_edge", self.longest_edge)?;
        check_range("count", self.count)?;
        check_range("operands", self.operands)?;
        check_range("loops", self.loops)?;
        check_range("polygon_vertices", self.polygon_vertices)?;
        check_range("taper", self.taper)?;
        check_range("thickness", self.thickness)?;
        if self.longest_edge.0 <= 0.0 || self.longest_edge.1 > 2.0 {
            return Err(SamplerError::InvalidConfig("longest_edge must lie in (0, 2]".into()));
        }
        if self.count.0 < 1 || self.operands.0 < 2 || self.loops.0 < 2 || self.polygon_vertices.0 < 3 {
            return Err(SamplerError::InvalidConfig(
                "count >= 1, operands >= 2, loops >= 2, polygon_vertices >= 3 required".into(),
            ));
        }
        if self.taper.0 <= 0.0 || self.thickness.0 <= 0.0 {
            return Err(SamplerError::InvalidConfig("taper and thickness must be positive".into()));
        }
        if !(self.torus_minor_radius > 0.0 && self.torus_minor_radius < 1.0) {
            return Err(SamplerError::InvalidConfig("torus_minor_radius must lie in (0, 1)".into()));
        }
        if !(0.0..=1.0).contains(&self.revolve_probability) {
            return Err(SamplerError::InvalidConfig("revolve_probability must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Checks weights (finite, non-negative, one positive, no duplicate
/// family) and every family's ranges.
pub fn validate_families(families: &[FamilyConfig]) -> Result<(), SamplerError> {
    let mut seen = Vec::new();
    for f in families {
        if !f.weight.is_finite() || f.weight < 0.0 {
            return Err(SamplerError::InvalidConfig(format!(
                "family {}: weight must be finite and >= 0, got {}",
                f.family, f.weight
            )));
        }
        if seen.contains(&f.family) {
            return Err(SamplerError::InvalidConfig(format!("family {} listed twice", f.family)));
        }
        seen.push(f.family);
        f.ranges.validate()?;
    }
    if !families.iter().any(|f| f.weight > 0.0) {
        return Err(SamplerError::InvalidConfig("at least one family weight must be positive".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error("invalid sampler config: {0}")]
    InvalidConfig(String),
    #[error("{family} seed {seed}: no placement inside [-1, 1]^3 after {MAX_PLACEMENT_TRIES} tries")]
    PlacementFailure { family: Family, seed: u64 },
    #[error("{family} seed {seed}: geometry failed on all {attempts} attempts, last: {last}")]
    GeometryFailure {
        family: Family,
        seed: u64,
        attempts: u64,
        last: String,
    },
    #[error("I/O error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub seed: u64,
    pub family: Family,
    pub program: ShapeProgram,
    pub bbox: Aabb,
    pub metadata: Map<String, Value>,
}

impl SampleRecord {
    pub fn statement(&self) -> &PartStatement {
        &self.program.parts[0]
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for `(family, seed, attempt)`.
pub fn record_rng(family: Family, seed: u64, attempt: u64) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64(family.tag().wrapping_mul(0x1_0000_0000).wrapping_add(attempt)));
    ChaCha8Rng::seed_from_u64(key)
}

pub(crate) fn q(x: f64) -> f64 {
    quantize(x)
}

pub(crate) fn uniform(rng: &mut ChaCha8Rng, r: (f64, f64)) -> f64 {
    if r.1 > r.0 {
        rng.random_range(r.0..r.1)
    } else {
        r.0
    }
}

pub(crate) fn uniform_u32(rng: &mut ChaCha8Rng, r: (u32, u32)) -> u32 {
    rng.random_range(r.0..=r.1)
}

pub(crate) fn unit_vector(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        if let Some(u) = v.try_normalize(1e-9) {
            return u;
        }
    }
}

/// Uniform direction and uniform roll.
pub(crate) fn random_orientation(rng: &mut ChaCha8Rng) -> UnitQuaternion<f64> {
    let dir = unit_vector(rng);
    let roll = rng.random_range(0.0..std::f64::consts::TAU);
    orientation_from_direction(&dir, roll)
}

/// Every field rounded as the printer would; the rotation is normalized
/// first.
pub fn quantize_transform(t: &SimilarityTransform) -> SimilarityTransform {
    let r = quat_to_array(&t.unit_rotation());
    SimilarityTransform {
        location: t.location.map(q),
        rotation: r.map(q),
        scale: t.scale.map(q),
    }
}

pub(crate) fn in_unit_box(bb: &Aabb) -> bool {
    let lim = 1.0 + CONTAINMENT_EPS;
    (0..3).all(|k| bb.min[k] >= -lim && bb.max[k] <= lim)
}

/// Result of the shared normalize-and-place step.
pub(crate) struct Placed {
    pub transform: SimilarityTransform,
    pub mesh: Mesh,
}

/// Orients `local` randomly, applies `per_axis`, rescales so the longest
/// box edge is a draw from `edge`, and places it uniformly inside
/// `[-1, 1]^3`. The transform is quantized before the containment check.
pub(crate) fn normalize_and_place(
    local: &Mesh,
    per_axis: Vec3,
    edge: (f64, f64),
    rng: &mut ChaCha8Rng,
    meta: &mut Map<String, Value>,
) -> Option<Placed> {
    let rot = random_orientation(rng);
    let oriented = SimilarityTransform::new(Vec3::zeros(), rot, per_axis);
    let bb0 = Aabb::from_points(&oriented.apply_points(&local.vertices));
    let e0 = bb0.longest_edge();
    if !(e0 > 0.0 && e0.is_finite()) {
        return None;
    }
    for tries in 0..MAX_PLACEMENT_TRIES {
        let target = uniform(rng, edge);
        let k = target / e0;
        let mut loc = Vec3::zeros();
        for a in 0..3 {
            let lo = -1.0 - k * bb0.min[a];
            let hi = 1.0 - k * bb0.max[a];
            loc[a] = if hi > lo { rng.random_range(lo..=hi) } else { 0.5 * (lo + hi) };
        }
        let t = quantize_transform(&SimilarityTransform::new(loc, rot, per_axis * k));
        let mesh = local.transformed(&t);
        let bb = mesh.bbox();
        let longest = bb.longest_edge();
        if in_unit_box(&bb) && (edge.0..=edge.1).contains(&longest) {
            meta.insert("target_edge".into(), json!(target));
            meta.insert("placement_tries".into(), json!(tries + 1));
            return Some(Placed { transform: t, mesh });
        }
    }
    None
}

/// One single-part program of `family`, executed and checked. Geometric
/// failures are retried with derived seeds; the attempt count and the
/// failure reasons are kept in the metadata.
pub fn sample_part(family: Family, seed: u64, ranges: &Ranges) -> Result<SampleRecord, SamplerError> {
    let mut failures = Vec::new();
    let mut placement_failed = false;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = record_rng(family, seed, attempt);
        let mut meta = Map::new();
        let built = families::build(family, &mut rng, ranges, &mut meta);
        let (op, local, per_axis) = match built {
            Ok(b) => b,
            Err(e) => {
                failures.push(Value::String(e));
                continue;
            }
        };
        let Some(placed) = normalize_and_place(&local, per_axis, ranges.longest_edge, &mut rng, &mut meta) else {
            placement_failed = true;
            failures.push(Value::String("placement".into()));
            continue;
        };
        if family == Family::Array {
            meta.insert("overlap".into(), json!(!placed.mesh.watertight));
        } else if !placed.mesh.watertight {
            failures.push(Value::String("not watertight".into()));
            continue;
        }
        meta.insert("attempts".into(), json!(attempt + 1));
        meta.insert("failures".into(), Value::Array(failures));
        meta.insert("vertices".into(), json!(placed.mesh.vertices.len()));
        meta.insert("triangles".into(), json!(placed.mesh.triangles.len()));
        let mut program = ShapeProgram::new("part", family.name());
        program.push_part(family.name(), Shape::with_transform(op, placed.transform));
        return Ok(SampleRecord {
            seed,
            family,
            program,
            bbox: placed.mesh.bbox(),
            metadata: meta,
        });
    }
    if placement_failed && failures.iter().all(|f| f == "placement") {
        return Err(SamplerError::PlacementFailure { family, seed });
    }
    Err(SamplerError::GeometryFailure {
        family,
        seed,
        attempts: MAX_ATTEMPTS,
        last: failures.last().and_then(|v| v.as_str()).unwrap_or("").to_string(),
    })
}

/// Primitive statement for `seed` with default ranges.
pub fn sample_primitive_params(seed: u64) -> Result<PartStatement, SamplerError> {
    Ok(sample_part(Family::Primitive, seed, &Ranges::default())?.program.parts[0].clone())
}

/// Executes a record's statement.
pub fn record_mesh(r: &SampleRecord) -> Result<Mesh, crate::geometry::GeometryError> {
    execute_shape(&r.program.parts[0].shape)
}

/// Draws a family index proportional to the weights.
pub fn choose_family(families: &[FamilyConfig], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = families.iter().map(|f| f.weight).sum();
    let mut u = rng.random::<f64>() * total;
    for (i, f) in families.iter().enumerate() {
        if f.weight <= 0.0 {
            continue;
        }
        if u < f.weight {
            return i;
        }
        u -= f.weight;
    }
    families.iter().rposition(|f| f.weight > 0.0).unwrap_or(0)
}

pub(crate) fn shape_op_mesh(op: &ShapeOp) -> Result<Mesh, String> {
    execute_shape(&Shape::new(op.clone())).map_err(|e| e.to_string())
}

pub(crate) fn p3(x: f64, y: f64, z: f64) -> Point3 {
    Point3::new(q(x), q(y), q(z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(splitmix64(0x9E37_79B9_7F4A_7C15), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn primitive_is_deterministic_and_contained() {
        for seed in 0..20 {
            let a = sample_part(Family::Primitive, seed, &Ranges::default()).unwrap();
            let b = sample_part(Family::Primitive, seed, &Ranges::default()).unwrap();
            assert_eq!(a, b);
            assert!(in_unit_box(&a.bbox));
            let e = a.bbox.longest_edge();
            assert!((1.0..=2.0).contains(&e), "{e}");
            assert_eq!(sample_primitive_params(seed).unwrap(), a.program.parts[0]);
        }
    }

    #[test]
    fn every_family_samples() {
        for f in Family::ALL {
            for seed in 0..4 {
                let r = sample_part(f, seed, &Ranges::default()).unwrap_or_else(|e| panic!("{e}"));
                let m = record_mesh(&r).unwrap();
                assert!(in_unit_box(&m.bbox()), "{f} {seed}");
                assert_eq!(m.bbox(), r.bbox);
            }
        }
    }

    #[test]
    fn invalid_weights() {
        let mut fams = FamilyConfig::defaults();
        fams[0].weight = -1.0;
        assert!(validate_families(&fams).is_err());
        let zero: Vec<FamilyConfig> = Family::ALL.iter().map(|f| FamilyConfig::new(*f, 0.0)).collect();
        assert!(validate_families(&zero).is_err());
        assert!(validate_families(&FamilyConfig::defaults()).is_ok());
    }
}
