//! Vector aliases, axis-aligned boxes and the similarity transform used for
//! part placement, canonicalization and code retargeting.

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Point3 = nalgebra::Point3<f64>;
pub type Vec2 = nalgebra::Vector2<f64>;
pub type Point2 = nalgebra::Point2<f64>;

/// Largest accepted deviation of a stored quaternion from unit length.
///
/// Program text carries six significant digits, so a printed unit
/// quaternion can be off by a few 1e-6. Execution always renormalizes.
pub const ROTATION_NORM_TOL: f64 = 1e-5;

/// Off-diagonal tolerance when deciding whether a per-axis scale commutes
/// with a rotation.
const AXIS_ALIGN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("anisotropic rescale of a rotated frame leaves the similarity class")]
    NonUniformRescaleOfRotated,
    #[error("transform is not invertible")]
    NonInvertible,
}

/// Placement `x -> R (S x) + L`: per-axis scale first, then rotation, then
/// translation. Rotation is a scalar-first quaternion `[w, x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityTransform {
    pub location: Vec3,
    pub rotation: [f64; 4],
    pub scale: Vec3,
}

impl Default for SimilarityTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl SimilarityTransform {
    pub fn identity() -> Self {
        Self {
            location: Vec3::zeros(),
            rotation: [1.0, 0.0, 0.0, 0.0],
            scale: Vec3::new(1.0, 1.0, 1.0),
        }
    }

    pub fn translation(v: Vec3) -> Self {
        Self {
            location: v,
            ..Self::identity()
        }
    }

    pub fn uniform_scale(s: f64) -> Self {
        Self {
            scale: Vec3::new(s, s, s),
            ..Self::identity()
        }
    }

    pub fn from_rotation(q: UnitQuaternion<f64>) -> Self {
        Self {
            rotation: quat_to_array(&q),
            ..Self::identity()
        }
    }

    pub fn new(location: Vec3, rotation: UnitQuaternion<f64>, scale: Vec3) -> Self {
        Self {
            location,
            rotation: quat_to_array(&rotation),
            scale,
        }
    }

    /// Normalized rotation. A zero quaternion maps to identity.
    pub fn unit_rotation(&self) -> UnitQuaternion<f64> {
        let [w, x, y, z] = self.rotation;
        let q = Quaternion::new(w, x, y, z);
        if q.norm() == 0.0 {
            UnitQuaternion::identity()
        } else {
            UnitQuaternion::from_quaternion(q)
        }
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        self.unit_rotation().to_rotation_matrix().into_inner()
    }

    pub fn rotation_norm(&self) -> f64 {
        self.rotation.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_uniform(&self) -> bool {
        let s = self.scale;
        (s.x - s.y).abs() <= AXIS_ALIGN_TOL * s.x.abs().max(s.y.abs())
            && (s.x - s.z).abs() <= AXIS_ALIGN_TOL * s.x.abs().max(s.z.abs())
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    /// Matrix `R S` of the linear part.
    pub fn linear(&self) -> Matrix3<f64> {
        self.rotation_matrix() * Matrix3::from_diagonal(&self.scale)
    }

    pub fn apply_point(&self, p: &Point3) -> Point3 {
        let r = self.rotation_matrix();
        Point3::from(r * p.coords.component_mul(&self.scale) + self.location)
    }

    /// Applies the transform to many points with one rotation-matrix build.
    pub fn apply_points(&self, pts: &[Point3]) -> Vec<Point3> {
        let r = self.rotation_matrix();
        pts.iter()
            .map(|p| Point3::from(r * p.coords.component_mul(&self.scale) + self.location))
            .collect()
    }

    /// Composition `outer ∘ self` (apply `self` first).
    ///
    /// Fails when `outer` scales anisotropically in a frame that `self`'s
    /// rotation does not align with.
    pub fn then(&self, outer: &SimilarityTransform) -> Result<SimilarityTransform, TransformError> {
        let r_in = self.rotation_matrix();
        let s_out = Matrix3::from_diagonal(&outer.scale);
        // R_out S_out R_in S_in = R_out R_in (R_in^T S_out R_in) S_in
        let conj = r_in.transpose() * s_out * r_in;
        let smax = outer.scale.amax();
        for i in 0..3 {
            for j in 0..3 {
                if i != j && conj[(i, j)].abs() > AXIS_ALIGN_TOL * smax {
                    return Err(TransformError::NonUniformRescaleOfRotated);
                }
            }
        }
        let new_scale = Vec3::new(conj[(0, 0)], conj[(1, 1)], conj[(2, 2)]).component_mul(&self.scale);
        let rot = outer.unit_rotation() * self.unit_rotation();
        let location = outer.rotation_matrix() * self.location.component_mul(&outer.scale) + outer.location;
        Ok(SimilarityTransform {
            location,
            rotation: quat_to_array(&rot),
            scale: new_scale,
        })
    }

    /// Inverse placement. Only defined in closed form when the scale is
    /// uniform or the rotation is trivial.
    pub fn inverse(&self) -> Result<SimilarityTransform, TransformError> {
        if self.scale.iter().any(|s| *s == 0.0 || !s.is_finite()) {
            return Err(TransformError::NonInvertible);
        }
        let inv_rot = self.unit_rotation().inverse();
        let inv_scale = self.scale.map(|s| 1.0 / s);
        if !self.is_uniform() && inv_rot.angle() > 0.0 {
            // x = S^-1 R^-1 (y - L) must be writable as R' S' y + L'.
            let probe = SimilarityTransform {
                location: Vec3::zeros(),
                rotation: quat_to_array(&inv_rot),
                scale: Vec3::new(1.0, 1.0, 1.0),
            };
            let scale_only = SimilarityTransform {
                scale: inv_scale,
                ..SimilarityTransform::identity()
            };
            let linear = probe.then(&scale_only)?;
            let location = -(linear.linear() * self.location);
            return Ok(SimilarityTransform { location, ..linear });
        }
        let location = -(inv_rot * self.location).component_mul(&inv_scale);
        Ok(SimilarityTransform {
            location,
            rotation: quat_to_array(&inv_rot),
            scale: inv_scale,
        })
    }
}

pub fn quat_to_array(q: &UnitQuaternion<f64>) -> [f64; 4] {
    [q.w, q.i, q.j, q.k]
}

/// Rotation taking `+z` onto `dir`, followed by a roll of `roll` radians
/// about `dir`.
pub fn orientation_from_direction(dir: &Vec3, roll: f64) -> UnitQuaternion<f64> {
    let z = Vector3::z();
    let align = UnitQuaternion::rotation_between(&z, dir).unwrap_or_else(|| {
        // antiparallel: half turn about x
        UnitQuaternion::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI)
    });
    align * UnitQuaternion::from_axis_angle(&Vector3::z_axis(), roll)
}

/// Right-handed orthonormal basis `(e1, e2)` spanning the plane orthogonal
/// to `n`. For `n = +z` this is `(+x, +y)`.
pub fn plane_basis(n: &Vec3) -> (Vec3, Vec3) {
    let n = n.normalize();
    let a = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (a - n * a.dot(&n)).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn new(min: Point3, max: Point3) -> Self {
        Self { min, max }
    }

    pub fn from_points<'a, I: IntoIterator<Item = &'a Point3>>(pts: I) -> Self {
        let mut b = Self::empty();
        for p in pts {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Point3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|i| self.min[i] > self.max[i])
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn center(&self) -> Point3 {
        nalgebra::center(&self.min, &self.max)
    }

    pub fn longest_edge(&self) -> f64 {
        self.extent().max()
    }

    pub fn overlaps(&self, other: &Aabb, eps: f64) -> bool {
        (0..3).all(|i| self.min[i] <= other.max[i] + eps && other.min[i] <= self.max[i] + eps)
    }

    pub fn contains_box(&self, other: &Aabb, eps: f64) -> bool {
        (0..3).all(|i| other.min[i] >= self.min[i] - eps && other.max[i] <= self.max[i] + eps)
    }

    /// Grows every side by `frac` of the longest edge.
    pub fn padded(&self, frac: f64) -> Aabb {
        let pad = self.longest_edge() * frac;
        let d = Vec3::new(pad, pad, pad);
        Aabb {
            min: self.min - d,
            max: self.max + d,
        }
    }
}
