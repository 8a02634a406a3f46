//! Section and trajectory evaluation, and rotation-minimizing frames.

use std::f64::consts::TAU;

use super::GeometryError;
use crate::dsl::{SectionSpec, TrajectorySpec};
use crate::math::{plane_basis, Point2, Point3, Vec2, Vec3};

/// Samples per curve span used when only checking a section for simplicity.
pub const DEFAULT_CHECK_SAMPLES: u32 = 64;

/// Evaluates a section to a counter-clockwise simple closed polyline (the
/// closing edge is implicit). `n` is the sample count of a circle, of an arc
/// and of every Bézier segment; rectangles and polygons keep their corners.
pub fn eval_section(s: &SectionSpec, n: u32) -> Result<Vec<Point2>, GeometryError> {
    if n < 3 {
        return Err(GeometryError::InvalidResolution(n));
    }
    let n = n as usize;
    let mut pts: Vec<Point2> = match s {
        SectionSpec::Rectangle { width, height } => {
            let (w, h) = (width / 2.0, height / 2.0);
            vec![
                Point2::new(-w, -h),
                Point2::new(w, -h),
                Point2::new(w, h),
                Point2::new(-w, h),
            ]
        }
        SectionSpec::Circle { radius } => (0..n)
            .map(|i| {
                let a = TAU * i as f64 / n as f64;
                Point2::new(radius * a.cos(), radius * a.sin())
            })
            .collect(),
        SectionSpec::Arc {
            radius,
            start_angle,
            end_angle,
            chord,
        } => {
            let (a0, a1) = (start_angle.to_radians(), end_angle.to_radians());
            let mut v: Vec<Point2> = (0..n)
                .map(|i| {
                    let a = a0 + (a1 - a0) * i as f64 / (n - 1) as f64;
                    Point2::new(radius * a.cos(), radius * a.sin())
                })
                .collect();
            if !chord {
                v.push(Point2::origin());
            }
            v
        }
        SectionSpec::Polygon { points } => points.clone(),
        SectionSpec::Bezier { points, closed } => bezier2_polyline(points, *closed, n)?,
    };
    dedup_closed(&mut pts);
    if pts.len() < 3 {
        return Err(GeometryError::InvalidInput("section has fewer than 3 distinct points".into()));
    }
    if !is_simple_polygon(&pts) {
        return Err(GeometryError::SelfIntersection);
    }
    let area = signed_area(&pts);
    let scale = extent2(&pts);
    if area.abs() <= 1e-12 * scale * scale {
        return Err(GeometryError::InvalidInput("section has zero area".into()));
    }
    if area < 0.0 {
        pts[1..].reverse();
    }
    Ok(pts)
}

fn bezier2_polyline(ctrl: &[Point2], closed: bool, n: usize) -> Result<Vec<Point2>, GeometryError> {
    let valid = if closed {
        ctrl.len() >= 3 && ctrl.len() % 3 == 0
    } else {
        ctrl.len() >= 4 && (ctrl.len() - 1) % 3 == 0
    };
    if !valid {
        return Err(GeometryError::InvalidInput("bad bezier control point count".into()));
    }
    let segs = if closed { ctrl.len() / 3 } else { (ctrl.len() - 1) / 3 };
    let mut out = Vec::with_capacity(segs * n + 1);
    for k in 0..segs {
        let p = |i: usize| ctrl[(3 * k + i) % ctrl.len()].coords;
        for j in 0..n {
            let t = j as f64 / n as f64;
            out.push(Point2::from(cubic(p(0), p(1), p(2), p(3), t)));
        }
    }
    if !closed {
        out.push(ctrl[ctrl.len() - 1]);
    }
    Ok(out)
}

fn cubic<V>(p0: V, p1: V, p2: V, p3: V, t: f64) -> V
where
    V: std::ops::Mul<f64, Output = V> + std::ops::Add<Output = V>,
{
    let u = 1.0 - t;
    p0 * (u * u * u) + p1 * (3.0 * u * u * t) + p2 * (3.0 * u * t * t) + p3 * (t * t * t)
}

fn cubic_deriv<V>(p0: V, p1: V, p2: V, p3: V, t: f64) -> V
where
    V: Copy + std::ops::Mul<f64, Output = V> + std::ops::Add<Output = V> + std::ops::Sub<Output = V>,
{
    let u = 1.0 - t;
    (p1 - p0) * (3.0 * u * u) + (p2 - p1) * (6.0 * u * t) + (p3 - p2) * (3.0 * t * t)
}

fn extent2(pts: &[Point2]) -> f64 {
    let (mut lo, mut hi) = (Vec2::repeat(f64::INFINITY), Vec2::repeat(f64::NEG_INFINITY));
    for p in pts {
        lo = lo.inf(&p.coords);
        hi = hi.sup(&p.coords);
    }
    (hi - lo).max().max(1e-300)
}

/// Drops consecutive duplicates, including a repeated closing point.
fn dedup_closed(pts: &mut Vec<Point2>) {
    if pts.is_empty() {
        return;
    }
    let tol = 1e-12 * extent2(pts);
    pts.dedup_by(|b, a| (*b - *a).norm() <= tol);
    while pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() <= tol {
        pts.pop();
    }
}

/// Shoelace area; positive for counter-clockwise order.
pub fn signed_area(pts: &[Point2]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        / 2.0
}

fn orient(a: &Point2, b: &Point2, c: &Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn sign(v: f64, eps: f64) -> i8 {
    if v > eps {
        1
    } else if v < -eps {
        -1
    } else {
        0
    }
}

fn on_segment(a: &Point2, b: &Point2, p: &Point2, eps: f64) -> bool {
    p.x >= a.x.min(b.x) - eps && p.x <= a.x.max(b.x) + eps && p.y >= a.y.min(b.y) - eps && p.y <= a.y.max(b.y) + eps
}

/// Closed-segment intersection with a collinearity tolerance.
pub fn segments_intersect(a: &Point2, b: &Point2, c: &Point2, d: &Point2, eps: f64) -> bool {
    let len_eps = eps.sqrt();
    let o1 = sign(orient(a, b, c), eps);
    let o2 = sign(orient(a, b, d), eps);
    let o3 = sign(orient(c, d, a), eps);
    let o4 = sign(orient(c, d, b), eps);
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    (o1 == 0 && on_segment(a, b, c, len_eps))
        || (o2 == 0 && on_segment(a, b, d, len_eps))
        || (o3 == 0 && on_segment(c, d, a, len_eps))
        || (o4 == 0 && on_segment(c, d, b, len_eps))
}

/// True when the closed polyline has no crossing, touching or backtracking
/// edges.
pub fn is_simple_polygon(pts: &[Point2]) -> bool {
    let n = pts.len();
    if n < 3 {
        return false;
    }
    let scale = extent2(pts);
    let eps = 1e-14 * scale * scale;
    let edge = |i: usize| (pts[i], pts[(i + 1) % n]);
    let boxes: Vec<(Vec2, Vec2)> = (0..n)
        .map(|i| {
            let (a, b) = edge(i);
            (a.coords.inf(&b.coords), a.coords.sup(&b.coords))
        })
        .collect();
    for i in 0..n {
        let (a, b) = edge(i);
        // adjacent edge folding back onto this one
        let c = pts[(i + 2) % n];
        if sign(orient(&a, &b, &c), eps) == 0 && (b - a).dot(&(c - b)) < 0.0 {
            return false;
        }
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (lo, hi) = (&boxes[i], &boxes[j]);
            if lo.0.x > hi.1.x || hi.0.x > lo.1.x || lo.0.y > hi.1.y || hi.0.y > lo.1.y {
                continue;
            }
            let (c, d) = edge(j);
            if segments_intersect(&a, &b, &c, &d, eps) {
                return false;
            }
        }
    }
    true
}

/// One sample of a moving frame. `(normal, binormal, tangent)` is a
/// right-handed orthonormal basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub position: Point3,
    pub tangent: Vec3,
    pub normal: Vec3,
    pub binormal: Vec3,
    /// Arc length from the start of the curve.
    pub arc_length: f64,
}

impl Frame {
    /// Maps local `(x, y, z)` to `position + x normal + y binormal + z tangent`.
    pub fn place(&self, x: f64, y: f64, z: f64) -> Point3 {
        self.position + self.normal * x + self.binormal * y + self.tangent * z
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameField {
    pub samples: Vec<Frame>,
    pub closed: bool,
    /// Total length, including the closing span of closed curves.
    pub length: f64,
}

/// Arc-length parameterized view of a trajectory.
enum Path {
    Circular {
        center: Point3,
        e1: Vec3,
        e2: Vec3,
        radius: f64,
        a0: f64,
        a1: f64,
        closed: bool,
    },
    Linear {
        points: Vec<Point3>,
        cum: Vec<f64>,
        closed: bool,
    },
    Bezier {
        ctrl: Vec<Point3>,
        /// `(arc length, global parameter)` lookup.
        lut: Vec<(f64, f64)>,
    },
}

const BEZIER_LUT_PER_SEGMENT: usize = 256;

impl Path {
    fn new(t: &TrajectorySpec) -> Result<Path, GeometryError> {
        let path = match t {
            TrajectorySpec::Line { start, end } => Path::linear(vec![*start, *end], false),
            TrajectorySpec::Polyline { points } => Path::linear(points.clone(), false),
            TrajectorySpec::Circle { center, axis, radius } => Path::circular(*center, axis, *radius, 0.0, TAU, true),
            TrajectorySpec::Arc {
                center,
                axis,
                radius,
                start_angle,
                end_angle,
            } => Path::circular(
                *center,
                axis,
                *radius,
                start_angle.to_radians(),
                end_angle.to_radians(),
                false,
            ),
            TrajectorySpec::Rectangle {
                center,
                axis,
                width,
                height,
            } => {
                if axis.norm() == 0.0 {
                    return Err(GeometryError::DegenerateTangent);
                }
                let (e1, e2) = plane_basis(axis);
                let (w, h) = (width / 2.0, height / 2.0);
                let c = |x: f64, y: f64| center + e1 * x + e2 * y;
                Path::linear(vec![c(-w, -h), c(w, -h), c(w, h), c(-w, h)], true)
            }
            TrajectorySpec::Bezier { points } => {
                if points.len() < 4 || (points.len() - 1) % 3 != 0 {
                    return Err(GeometryError::InvalidInput("bezier needs 3k+1 control points".into()));
                }
                let segs = (points.len() - 1) / 3;
                let mut lut = vec![(0.0, 0.0)];
                let mut prev = points[0];
                let mut s = 0.0;
                for k in 0..segs {
                    for j in 1..=BEZIER_LUT_PER_SEGMENT {
                        let u = j as f64 / BEZIER_LUT_PER_SEGMENT as f64;
                        let p = bezier3_point(points, k, u);
                        s += (p - prev).norm();
                        prev = p;
                        lut.push((s, k as f64 + u));
                    }
                }
                Path::Bezier {
                    ctrl: points.clone(),
                    lut,
                }
            }
        };
        if !(path.length() > 0.0) || !path.length().is_finite() {
            return Err(GeometryError::DegenerateTangent);
        }
        Ok(path)
    }

    fn linear(points: Vec<Point3>, closed: bool) -> Path {
        let n = points.len();
        let mut cum = vec![0.0];
        let segs = if closed { n } else { n.saturating_sub(1) };
        for i in 0..segs {
            let d = (points[(i + 1) % n] - points[i]).norm();
            cum.push(cum[i] + d);
        }
        Path::Linear { points, cum, closed }
    }

    fn circular(center: Point3, axis: &Vec3, radius: f64, a0: f64, a1: f64, closed: bool) -> Path {
        let (e1, e2) = if axis.norm() > 0.0 {
            plane_basis(axis)
        } else {
            (Vec3::zeros(), Vec3::zeros())
        };
        Path::Circular {
            center,
            e1,
            e2,
            radius,
            a0,
            a1,
            closed,
        }
    }

    fn closed(&self) -> bool {
        match self {
            Path::Circular { closed, .. } | Path::Linear { closed, .. } => *closed,
            Path::Bezier { .. } => false,
        }
    }

    fn length(&self) -> f64 {
        match self {
            Path::Circular { radius, a0, a1, .. } => radius * (a1 - a0).abs(),
            Path::Linear { cum, .. } => *cum.last().unwrap_or(&0.0),
            Path::Bezier { lut, .. } => lut[lut.len() - 1].0,
        }
    }

    /// Position and unit tangent at arc length `s`.
    fn eval(&self, s: f64) -> Result<(Point3, Vec3), GeometryError> {
        let (p, t) = match self {
            Path::Circular {
                center,
                e1,
                e2,
                radius,
                a0,
                a1,
                ..
            } => {
                let f = s / self.length();
                let a = a0 + (a1 - a0) * f;
                let p = center + (e1 * a.cos() + e2 * a.sin()) * *radius;
                let t = (-e1 * a.sin() + e2 * a.cos()) * (a1 - a0).signum();
                (p, t)
            }
            Path::Linear { points, cum, closed } => {
                let n = points.len();
                let segs = cum.len() - 1;
                let total = cum[segs];
                let tol = 1e-12 * total;
                let dir = |i: usize| {
                    let i = i % segs;
                    (points[(i + 1) % n] - points[i]).normalize()
                };
                let i = match cum.binary_search_by(|c| c.partial_cmp(&s).unwrap()) {
                    Ok(i) => i,
                    Err(i) => i.saturating_sub(1),
                }
                .min(segs - 1);
                let local = s - cum[i];
                let p = points[i] + dir(i) * local;
                let at_start = local.abs() <= tol;
                let at_end = (cum[i + 1] - s).abs() <= tol;
                let t = if at_start && (i > 0 || *closed) {
                    (dir(i + segs - 1) + dir(i)).normalize()
                } else if at_end && (i + 1 < segs || *closed) {
                    (dir(i) + dir(i + 1)).normalize()
                } else {
                    dir(i)
                };
                (p, t)
            }
            Path::Bezier { ctrl, lut } => {
                let u = lut_param(lut, s);
                let segs = (ctrl.len() - 1) / 3;
                let k = (u.floor() as usize).min(segs - 1);
                let local = u - k as f64;
                let p = bezier3_point(ctrl, k, local);
                let mut d = bezier3_deriv(ctrl, k, local);
                if d.norm() <= 1e-12 * self.length() {
                    let h = 1e-6;
                    let lo = (u - h).max(0.0);
                    let hi = (u + h).min(segs as f64);
                    let at = |g: f64| {
                        let k = (g.floor() as usize).min(segs - 1);
                        bezier3_point(ctrl, k, g - k as f64)
                    };
                    d = at(hi) - at(lo);
                }
                (p, d.normalize())
            }
        };
        if !t.iter().all(|c| c.is_finite()) || t.norm() < 0.5 {
            return Err(GeometryError::DegenerateTangent);
        }
        Ok((p, t))
    }

    /// Arc lengths of `m` samples. Polyline corners are always included.
    fn sample_arc_lengths(&self, m: usize) -> Vec<f64> {
        let total = self.length();
        let closed = self.closed();
        match self {
            Path::Linear { cum, .. } => {
                let segs = cum.len() - 1;
                let pieces = if closed { m } else { m - 1 };
                let mut out = Vec::new();
                for i in 0..segs {
                    let len = cum[i + 1] - cum[i];
                    let k = ((pieces as f64 * len / total).round() as usize).max(1);
                    for j in 0..k {
                        out.push(cum[i] + len * j as f64 / k as f64);
                    }
                }
                if !closed {
                    out.push(total);
                }
                out
            }
            _ => {
                let div = if closed { m } else { m - 1 };
                (0..m).map(|i| total * i as f64 / div as f64).collect()
            }
        }
    }
}

fn bezier3_point(ctrl: &[Point3], k: usize, t: f64) -> Point3 {
    let p = |i: usize| ctrl[3 * k + i].coords;
    Point3::from(cubic(p(0), p(1), p(2), p(3), t))
}

fn bezier3_deriv(ctrl: &[Point3], k: usize, t: f64) -> Vec3 {
    let p = |i: usize| ctrl[3 * k + i].coords;
    cubic_deriv(p(0), p(1), p(2), p(3), t)
}

fn lut_param(lut: &[(f64, f64)], s: f64) -> f64 {
    let i = lut.partition_point(|e| e.0 < s);
    if i == 0 {
        return lut[0].1;
    }
    if i >= lut.len() {
        return lut[lut.len() - 1].1;
    }
    let (s0, u0) = lut[i - 1];
    let (s1, u1) = lut[i];
    if s1 > s0 {
        u0 + (u1 - u0) * (s - s0) / (s1 - s0)
    } else {
        u1
    }
}

/// Frames at `m` samples of a trajectory. Closed curves return `m` distinct
/// samples without repeating the start.
pub fn eval_trajectory(t: &TrajectorySpec, m: u32) -> Result<FrameField, GeometryError> {
    if m < 2 {
        return Err(GeometryError::InvalidResolution(m));
    }
    let path = Path::new(t)?;
    let s = path.sample_arc_lengths(m as usize);
    frames_along(&path, &s)
}

/// Frames at `n` arc-length-equidistant points: open curves include both
/// ends, closed curves omit the repeated end. `n = 1` gives the start.
pub fn equidistant_frames(t: &TrajectorySpec, n: u32) -> Result<Vec<Frame>, GeometryError> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let path = Path::new(t)?;
    let total = path.length();
    let closed = path.closed();
    let div = if closed { n as f64 } else { (n - 1).max(1) as f64 };
    let targets: Vec<f64> = (0..n).map(|i| total * i as f64 / div).collect();
    // dense samples keep the transport accurate between targets
    let dense = path.sample_arc_lengths(256.max(8 * n as usize));
    let tol = 1e-9 * total;
    let mut all: Vec<(f64, Option<usize>)> = dense.into_iter().map(|s| (s, None)).collect();
    all.extend(targets.iter().enumerate().map(|(i, &s)| (s, Some(i))));
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(b.1.is_some().cmp(&a.1.is_some())));
    let mut merged: Vec<(f64, Vec<usize>)> = Vec::new();
    for (s, tag) in all {
        match merged.last_mut() {
            Some(last) if (s - last.0).abs() <= tol => {
                if let Some(i) = tag {
                    last.1.push(i);
                }
            }
            _ => merged.push((s, tag.into_iter().collect())),
        }
    }
    let s: Vec<f64> = merged.iter().map(|m| m.0).collect();
    let field = frames_along(&path, &s)?;
    let mut out = vec![field.samples[0]; n as usize];
    for (k, (_, tags)) in merged.iter().enumerate() {
        for &i in tags {
            out[i] = field.samples[k];
        }
    }
    Ok(out)
}

fn frames_along(path: &Path, s: &[f64]) -> Result<FrameField, GeometryError> {
    let total = path.length();
    let closed = path.closed();
    let mut pos = Vec::with_capacity(s.len());
    let mut tan = Vec::with_capacity(s.len());
    for &si in s {
        let (p, t) = path.eval(si)?;
        pos.push(p);
        tan.push(t);
    }
    let tol = 1e-12 * total.max(1e-300);
    for w in pos.windows(2) {
        if (w[1] - w[0]).norm() <= tol {
            return Err(GeometryError::DegenerateTangent);
        }
    }
    let t0 = tan[0];
    let mut r = initial_normal(&t0);
    let mut normals = Vec::with_capacity(pos.len());
    normals.push(r);
    for i in 0..pos.len() - 1 {
        r = transport(&pos[i], &tan[i], &r, &pos[i + 1], &tan[i + 1]);
        normals.push(r);
    }
    if closed {
        let last = pos.len() - 1;
        let r_end = transport(&pos[last], &tan[last], &r, &pos[0], &t0);
        let phi = t0.dot(&r_end.cross(&normals[0])).atan2(r_end.dot(&normals[0]));
        for (i, n) in normals.iter_mut().enumerate() {
            let a = phi * s[i] / total;
            *n = rotate_about(n, &tan[i], a);
        }
    }
    let samples = (0..pos.len())
        .map(|i| {
            let t = tan[i];
            let n = (normals[i] - t * t.dot(&normals[i])).normalize();
            Frame {
                position: pos[i],
                tangent: t,
                normal: n,
                binormal: t.cross(&n),
                arc_length: s[i],
            }
        })
        .collect();
    Ok(FrameField {
        samples,
        closed,
        length: total,
    })
}

/// World `+z` projected off the tangent, or `+x` when parallel.
fn initial_normal(t: &Vec3) -> Vec3 {
    let z = Vec3::z();
    let p = z - t * t.dot(&z);
    if p.norm() > 1e-6 {
        return p.normalize();
    }
    let x = Vec3::x();
    (x - t * t.dot(&x)).normalize()
}

/// One double-reflection step.
fn transport(x0: &Point3, t0: &Vec3, r0: &Vec3, x1: &Point3, t1: &Vec3) -> Vec3 {
    let v1 = x1 - x0;
    let c1 = v1.dot(&v1);
    if c1 == 0.0 {
        return *r0;
    }
    let rl = r0 - v1 * (2.0 / c1 * v1.dot(r0));
    let tl = t0 - v1 * (2.0 / c1 * v1.dot(t0));
    let v2 = t1 - tl;
    let c2 = v2.dot(&v2);
    let r1 = if c2 <= 1e-30 { rl } else { rl - v2 * (2.0 / c2 * v2.dot(&rl)) };
    let r1 = r1 - t1 * t1.dot(&r1);
    let n = r1.norm();
    if n < 1e-12 {
        initial_normal(t1)
    } else {
        r1 / n
    }
}

fn rotate_about(v: &Vec3, axis: &Vec3, a: f64) -> Vec3 {
    let (s, c) = a.sin_cos();
    v * c + axis.cross(v) * s + axis * axis.dot(v) * (1.0 - c)
}
