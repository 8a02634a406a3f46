//! Surface sampling, unit-cube normalization and augmentation of point
//! clouds.

use nalgebra::{Matrix3, SymmetricEigen, UnitQuaternion};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Mesh;
use crate::math::{quat_to_array, Aabb, Point3, SimilarityTransform, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PointCloudError {
    #[error("mesh has no triangles")]
    EmptyMesh,
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("point cloud has zero extent")]
    DegenerateExtent,
    #[error("invalid augmentation config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Point3>,
    pub provenance: Provenance,
    /// Maps the original coordinates to the current ones.
    pub applied_transform: Option<SimilarityTransform>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Self {
        Self {
            points,
            provenance: Provenance::default(),
            applied_transform: None,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bbox(&self) -> Aabb {
        Aabb::from_points(&self.points)
    }

    /// Applies `t` to every point and records it.
    pub fn transformed(&self, t: &SimilarityTransform) -> PointCloud {
        let applied = match &self.applied_transform {
            None => Some(*t),
            Some(prev) => prev.then(t).ok(),
        };
        PointCloud {
            points: t.apply_points(&self.points),
            provenance: self.provenance.clone(),
            applied_transform: applied,
        }
    }

    /// Provenance lines for PLY comments.
    pub fn ply_comments(&self) -> Vec<String> {
        let mut c = vec![
            format!("source {}", self.provenance.source),
            format!("seed {}", self.provenance.seed),
        ];
        if let Some(t) = &self.applied_transform {
            c.push(format!(
                "transform location {} {} {} rotation {} {} {} {} scale {} {} {}",
                t.location.x,
                t.location.y,
                t.location.z,
                t.rotation[0],
                t.rotation[1],
                t.rotation[2],
                t.rotation[3],
                t.scale.x,
                t.scale.y,
                t.scale.z
            ));
        }
        c
    }
}

/// Area-weighted triangle choice with uniform barycentric placement. The
/// `i`-th point picks its triangle at cumulative area `(i + u) / n` with
/// `u ~ U[0, 1)`, so per-triangle counts stay within one of expectation.
pub fn sample_surface(m: &Mesh, n: usize, seed: u64) -> Result<PointCloud, PointCloudError> {
    if m.triangles.is_empty() {
        return Err(PointCloudError::EmptyMesh);
    }
    let mut cum = Vec::with_capacity(m.triangles.len());
    let mut total = 0.0;
    for i in 0..m.triangles.len() {
        total += m.triangle_area(i);
        cum.push(total);
    }
    if !(total > 0.0) {
        return Err(PointCloudError::EmptyMesh);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    for k in 0..n {
        let u: f64 = (k as f64 + rng.random::<f64>()) / n as f64 * total;
        let i = cum.partition_point(|&c| c <= u).min(cum.len() - 1);
        let [a, b, c] = m.triangle(i);
        let r1: f64 = rng.random::<f64>().sqrt();
        let r2: f64 = rng.random();
        let p = a.coords * (1.0 - r1) + b.coords * (r1 * (1.0 - r2)) + c.coords * (r1 * r2);
        points.push(Point3::from(p));
    }
    Ok(PointCloud {
        points,
        provenance: Provenance {
            source: String::new(),
            seed,
        },
        applied_transform: None,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizeMode {
    /// Axis-aligned box, no rotation.
    #[default]
    Aabb,
    /// Principal axes of the points define the rotation.
    Pca,
}

/// Uniformly scales and translates so the bounding box is centered at the
/// origin with its longest edge spanning `[-1, 1]`. Returns the forward
/// transform; the output equals the transform applied to the input.
pub fn normalize_to_unit_cube(pc: &PointCloud) -> Result<(PointCloud, SimilarityTransform), PointCloudError> {
    normalize_with(pc, NormalizeMode::Aabb)
}

pub fn normalize_with(pc: &PointCloud, mode: NormalizeMode) -> Result<(PointCloud, SimilarityTransform), PointCloudError> {
    let t = normalizing_transform(&pc.points, mode)?;
    Ok((pc.transformed(&t), t))
}

/// Transform mapping `points` into `[-1, 1]^3` per `mode`.
pub fn normalizing_transform(points: &[Point3], mode: NormalizeMode) -> Result<SimilarityTransform, PointCloudError> {
    if points.is_empty() {
        return Err(PointCloudError::EmptyCloud);
    }
    let rot = match mode {
        NormalizeMode::Aabb => UnitQuaternion::identity(),
        NormalizeMode::Pca => principal_rotation(points),
    };
    let rotated: Vec<Point3> = points.iter().map(|p| rot * p).collect();
    let bb = Aabb::from_points(&rotated);
    let e = bb.longest_edge();
    if !(e > 0.0) || !e.is_finite() {
        return Err(PointCloudError::DegenerateExtent);
    }
    let s = 2.0 / e;
    let c = bb.center().coords;
    Ok(SimilarityTransform {
        location: -c * s,
        rotation: quat_to_array(&rot),
        scale: Vec3::new(s, s, s),
    })
}

/// Rotation taking the principal axes (descending variance) to `x, y, z`.
/// Axis signs are fixed so the third-moment skew along each axis is
/// non-negative, then the last axis is flipped if needed for a proper
/// rotation.
fn principal_rotation(points: &[Point3]) -> UnitQuaternion<f64> {
    let n = points.len() as f64;
    let mu = points.iter().map(|p| p.coords).sum::<Vec3>() / n;
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p.coords - mu;
        cov += d * d.transpose();
    }
    let eig = SymmetricEigen::new(cov / n);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut axes: Vec<Vec3> = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    for a in axes.iter_mut() {
        let skew: f64 = points.iter().map(|p| (p.coords - mu).dot(a).powi(3)).sum();
        if skew < 0.0 {
            *a = -*a;
        }
    }
    if axes[0].cross(&axes[1]).dot(&axes[2]) < 0.0 {
        axes[2] = -axes[2];
    }
    // rows are the new axes
    let m = Matrix3::from_rows(&[axes[0].transpose(), axes[1].transpose(), axes[2].transpose()]);
    UnitQuaternion::from_matrix(&m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    pub rotation: bool,
    pub scale_range: (f64, f64),
    pub point_count_range: (usize, usize),
    pub noise_sigma: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            rotation: true,
            scale_range: (0.8, 1.2),
            point_count_range: (4096, 16384),
            noise_sigma: 0.005,
        }
    }
}

impl AugmentConfig {
    /// No rotation, unit scale, no noise, exactly `n` points.
    pub fn identity(n: usize) -> Self {
        Self {
            rotation: false,
            scale_range: (1.0, 1.0),
            point_count_range: (n, n),
            noise_sigma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), PointCloudError> {
        let (lo, hi) = self.scale_range;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(PointCloudError::InvalidConfig("scale_range must satisfy 0 < lo <= hi".into()));
        }
        let (a, b) = self.point_count_range;
        if !(a >= 1 && a <= b && b <= 1 << 20) {
            return Err(PointCloudError::InvalidConfig(
                "point_count_range must satisfy 1 <= lo <= hi <= 2^20".into(),
            ));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(PointCloudError::InvalidConfig("noise_sigma must be >= 0".into()));
        }
        Ok(())
    }
}

/// Random rotation and scale, resampling to a random count and Gaussian
/// noise. When `source` is given and more points are needed than `pc` has,
/// the extra points are sampled from the mesh (mapped by the cloud's
/// applied transform); otherwise points are drawn with replacement.
pub fn augment(
    pc: &PointCloud,
    cfg: &AugmentConfig,
    seed: u64,
    source: Option<&Mesh>,
) -> Result<PointCloud, PointCloudError> {
    cfg.validate()?;
    if pc.is_empty() {
        return Err(PointCloudError::EmptyCloud);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.random_range(cfg.point_count_range.0..=cfg.point_count_range.1);
    let n = pc.len();
    let mut points: Vec<Point3> = if count <= n {
        let mut idx = index::sample(&mut rng, n, count).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| pc.points[i]).collect()
    } else if let Some(mesh) = source {
        let extra = sample_surface(mesh, count - n, rng.random())?;
        let t = pc.applied_transform.unwrap_or_default();
        let mut v = pc.points.clone();
        v.extend(t.apply_points(&extra.points));
        v
    } else {
        let mut v = pc.points.clone();
        v.extend((0..count - n).map(|_| pc.points[rng.random_range(0..n)]));
        v
    };
    let rot = if cfg.rotation {
        let q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(q[0], q[1], q[2], q[3]))
    } else {
        UnitQuaternion::identity()
    };
    let (lo, hi) = cfg.scale_range;
    let s = if hi > lo { rng.random_range(lo..=hi) } else { lo };
    let t = SimilarityTransform::new(Vec3::zeros(), rot, Vec3::new(s, s, s));
    if !t.is_identity() {
        points = t.apply_points(&points);
    }
    if cfg.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, cfg.noise_sigma).expect("sigma validated");
        for p in &mut points {
            for k in 0..3 {
                p[k] += normal.sample(&mut rng);
            }
        }
    }
    let applied = match (&pc.applied_transform, t.is_identity()) {
        (prev, true) => *prev,
        (None, false) => Some(t),
        (Some(prev), false) => prev.then(&t).ok(),
    };
    Ok(PointCloud {
        points,
        provenance: pc.provenance.clone(),
        applied_transform: applied,
    })
}
