use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{choose_family, quantize_transform, sample_part, splitmix64, Family, FamilyConfig, SamplerError};
use crate::dsl::{retarget_statement, ShapeProgram};
use crate::math::{SimilarityTransform, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSample {
    pub seed: u64,
    pub program: ShapeProgram,
    /// `(family, part seed)` per part, in program order.
    pub sources: Vec<(Family, u64)>,
}

/// A synthetic object of `parts.0..=parts.1` sampled parts, each shrunk by
/// a uniform factor and scattered in `[-2, 2]^3`.
pub fn sample_object(seed: u64, parts: (usize, usize), families: &[FamilyConfig]) -> Result<ObjectSample, SamplerError> {
    super::validate_families(families)?;
    if parts.0 == 0 || parts.0 > parts.1 {
        return Err(SamplerError::InvalidConfig("part count range must satisfy 1 <= lo <= hi".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ 0x6F62_6A65_6374));
    let n = rng.random_range(parts.0..=parts.1);
    let mut program = ShapeProgram::new(format!("object_{seed}"), "synthetic");
    let mut sources = Vec::with_capacity(n);
    for i in 0..n {
        let fc = &families[choose_family(families, &mut rng)];
        let part_seed = splitmix64(seed.wrapping_mul(4099).wrapping_add(i as u64));
        let rec = sample_part(fc.family, part_seed, &fc.ranges)?;
        let s = rng.random_range(0.3..0.7);
        let loc = Vec3::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        let t = SimilarityTransform {
            location: loc,
            rotation: [1.0, 0.0, 0.0, 0.0],
            scale: Vec3::new(s, s, s),
        };
        let mut stmt = retarget_statement(rec.statement(), &t)
            .map_err(|e| SamplerError::InvalidConfig(format!("retarget: {e}")))?;
        stmt.shape.transform = quantize_transform(&stmt.shape.transform);
        program.push_part(format!("{}_{i}", fc.family.name()), stmt.shape);
        sources.push((fc.family, part_seed));
    }
    Ok(ObjectSample { seed, program, sources })
}
