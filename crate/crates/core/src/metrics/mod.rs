//! Chamfer distance, voxel IoU and reconstruction reports.

pub mod kdtree;
pub mod voxel;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::ShapeProgram;
use crate::geometry::{execute_program, Mesh};
use crate::math::{Aabb, Point3};
use crate::pointcloud::{normalizing_transform, sample_surface, NormalizeMode, PointCloud};
pub use kdtree::KdTree;
pub use voxel::{tri_box_overlap, voxel_iou, voxelize_solid, OccupancyGrid, VoxelMethod, DEFAULT_RESOLUTION};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("occupancy grids differ in resolution or frame")]
    FrameMismatch,
}

/// Mean squared distance from each point of `p` to its nearest point in `q`.
pub fn one_sided_l2(p: &[Point3], q: &[Point3]) -> Result<f64, MetricsError> {
    if p.is_empty() || q.is_empty() {
        return Err(MetricsError::EmptyCloud);
    }
    let tree = KdTree::build(q);
    let d: Vec<f64> = p.par_iter().with_min_len(1024).map(|x| tree.nearest_sq(x)).collect();
    Ok(d.iter().sum::<f64>() / p.len() as f64)
}

/// `mean_p min_q |p - q|^2 + mean_q min_p |q - p|^2`, exact.
pub fn chamfer_points(p: &[Point3], q: &[Point3]) -> Result<f64, MetricsError> {
    Ok(one_sided_l2(p, q)? + one_sided_l2(q, p)?)
}

pub fn chamfer_l2(p: &PointCloud, q: &PointCloud) -> Result<f64, MetricsError> {
    chamfer_points(&p.points, &q.points)
}

/// Sampling counts, seeds and voxel grid used by [`evaluate_reconstruction`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalProtocol {
    pub gt_points: usize,
    pub pred_points: usize,
    pub gt_seed: u64,
    pub pred_seed: u64,
    pub resolution: usize,
    /// IoU frame padding as a fraction of the normalized GT's longest edge.
    pub padding: f64,
    /// Points per predicted part for the per-part breakdown.
    pub part_points: usize,
}

impl Default for EvalProtocol {
    fn default() -> Self {
        Self {
            gt_points: 16384,
            pred_points: 100_000,
            gt_seed: 0,
            pred_seed: 1,
            resolution: DEFAULT_RESOLUTION,
            padding: 0.02,
            part_points: 2048,
        }
    }
}

impl EvalProtocol {
    pub fn validate(&self) -> Result<(), String> {
        if self.gt_points == 0 || self.pred_points == 0 || self.part_points == 0 {
            return Err("point counts must be >= 1".into());
        }
        if !(1..=512).contains(&self.resolution) {
            return Err(format!("resolution must be in 1..=512, got {}", self.resolution));
        }
        if !(self.padding.is_finite() && self.padding >= 0.0) {
            return Err("padding must be >= 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartReport {
    pub index: usize,
    pub label: String,
    pub triangles: usize,
    /// Mean squared distance from the part's samples to the GT cloud.
    pub to_gt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub object: String,
    pub category: String,
    pub status: EvalStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub cd: Option<f64>,
    pub iou: Option<f64>,
    pub parts: Vec<PartReport>,
    pub gt_points: usize,
    pub pred_points: usize,
    pub gt_seed: u64,
    pub pred_seed: u64,
    pub resolution: usize,
    pub padding: f64,
    pub voxel_fallback: bool,
    #[serde(skip)]
    pub runtime_ms: f64,
}

impl EvalReport {
    pub fn failed(object: &str, category: &str, protocol: &EvalProtocol, message: String) -> Self {
        Self {
            object: object.to_string(),
            category: category.to_string(),
            status: EvalStatus::Failed,
            message: Some(message),
            cd: None,
            iou: None,
            parts: Vec::new(),
            gt_points: protocol.gt_points,
            pred_points: protocol.pred_points,
            gt_seed: protocol.gt_seed,
            pred_seed: protocol.pred_seed,
            resolution: protocol.resolution,
            padding: protocol.padding,
            voxel_fallback: false,
            runtime_ms: 0.0,
        }
    }
}

/// Samples the GT and the executed prediction, maps both by the transform
/// normalizing the GT mesh into `[-1, 1]^3`, and reports Chamfer distance
/// and voxel IoU over the padded normalized GT box.
pub fn evaluate_reconstruction(gt_mesh: &Mesh, predicted: &ShapeProgram, protocol: &EvalProtocol) -> EvalReport {
    let start = Instant::now();
    let name = predicted.object_name.as_str();
    let cat = predicted.object_category.as_str();
    let parts = match execute_program(predicted) {
        Ok(p) => p,
        Err(e) => return EvalReport::failed(name, cat, protocol, e.to_string()),
    };
    let mut report = match evaluate_meshes(gt_mesh, &parts, protocol) {
        Ok(r) => r,
        Err(msg) => EvalReport::failed(name, cat, protocol, msg),
    };
    report.object = name.to_string();
    report.category = cat.to_string();
    report.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    report
}

/// As [`evaluate_reconstruction`] with the prediction already executed.
pub fn evaluate_meshes(gt_mesh: &Mesh, parts: &[(String, Mesh)], protocol: &EvalProtocol) -> Result<EvalReport, String> {
    let t = normalizing_transform(&gt_mesh.vertices, NormalizeMode::Aabb).map_err(|e| e.to_string())?;
    let gt_n = gt_mesh.transformed(&t);
    let part_meshes: Vec<Mesh> = parts.iter().map(|(_, m)| m.transformed(&t)).collect();
    let pred_n = Mesh::concat(&part_meshes);
    if pred_n.is_empty() {
        return Err("prediction has no triangles".into());
    }
    let gt_cloud = sample_surface(&gt_n, protocol.gt_points, protocol.gt_seed).map_err(|e| e.to_string())?;
    let pred_cloud = sample_surface(&pred_n, protocol.pred_points, protocol.pred_seed).map_err(|e| e.to_string())?;
    let cd = chamfer_l2(&gt_cloud, &pred_cloud).map_err(|e| e.to_string())?;

    let frame = gt_n.bbox().padded(protocol.padding);
    let gt_grid = voxelize_solid(&gt_n, protocol.resolution, &frame);
    let mut pred_grid = OccupancyGrid::new(protocol.resolution, frame);
    for m in &part_meshes {
        pred_grid.union_with(&voxelize_solid(m, protocol.resolution, &frame)).map_err(|e| e.to_string())?;
    }
    let iou = voxel_iou(&gt_grid, &pred_grid).map_err(|e| e.to_string())?;

    let tree = KdTree::build(&gt_cloud.points);
    let mut part_reports = Vec::with_capacity(parts.len());
    for (i, ((label, _), m)) in parts.iter().zip(&part_meshes).enumerate() {
        let to_gt = match sample_surface(m, protocol.part_points, protocol.pred_seed.wrapping_add(i as u64 + 1)) {
            Ok(pc) => pc.points.iter().map(|p| tree.nearest_sq(p)).sum::<f64>() / pc.len() as f64,
            Err(_) => 0.0,
        };
        part_reports.push(PartReport {
            index: i,
            label: label.clone(),
            triangles: m.triangles.len(),
            to_gt,
        });
    }
    Ok(EvalReport {
        object: String::new(),
        category: String::new(),
        status: EvalStatus::Ok,
        message: None,
        cd: Some(cd),
        iou: Some(iou),
        parts: part_reports,
        gt_points: protocol.gt_points,
        pred_points: protocol.pred_points,
        gt_seed: protocol.gt_seed,
        pred_seed: protocol.pred_seed,
        resolution: protocol.resolution,
        padding: protocol.padding,
        voxel_fallback: gt_grid.fallback_used || pred_grid.fallback_used,
        runtime_ms: 0.0,
    })
}

/// Evaluates many objects in parallel; output order follows input order.
pub fn evaluate_batch(items: &[(Mesh, ShapeProgram)], protocol: &EvalProtocol) -> Vec<EvalReport> {
    items
        .par_iter()
        .map(|(gt, p)| evaluate_reconstruction(gt, p, protocol))
        .collect()
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.9e}")).unwrap_or_default()
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    (m, var.sqrt())
}

/// One row per report, then `mean` and `std` rows per category and for
/// all objects (successful reports only).
pub fn reports_to_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from("category,object,cd,iou,status,gt_seed,pred_seed\n");
    for r in reports {
        let status = match r.status {
            EvalStatus::Ok => "ok",
            EvalStatus::Failed => "failed",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.category,
            r.object,
            fmt_opt(r.cd),
            fmt_opt(r.iou),
            status,
            r.gt_seed,
            r.pred_seed
        ));
    }
    let mut cats: Vec<&str> = reports.iter().map(|r| r.category.as_str()).collect();
    cats.sort_unstable();
    cats.dedup();
    let groups = cats
        .iter()
        .map(|c| (c.to_string(), reports.iter().filter(|r| r.category == *c).collect::<Vec<_>>()))
        .chain(std::iter::once(("all".to_string(), reports.iter().collect())));
    for (cat, rs) in groups {
        let ok: Vec<&&EvalReport> = rs.iter().filter(|r| r.status == EvalStatus::Ok).collect();
        let cds: Vec<f64> = ok.iter().filter_map(|r| r.cd).collect();
        let ious: Vec<f64> = ok.iter().filter_map(|r| r.iou).collect();
        let (cm, cs) = mean_std(&cds);
        let (im, is) = mean_std(&ious);
        out.push_str(&format!("{cat},mean,{cm:.9e},{im:.9e},aggregate,,\n"));
        out.push_str(&format!("{cat},std,{cs:.9e},{is:.9e},aggregate,,\n"));
    }
    out
}

/// Points sampled from `m`, for callers holding only a mesh.
pub fn mesh_cloud(m: &Mesh, n: usize, seed: u64) -> Option<Vec<Point3>> {
    sample_surface(m, n, seed).ok().map(|pc| pc.points)
}

/// Axis-aligned box of all parts.
pub fn parts_bbox(parts: &[(String, Mesh)]) -> Aabb {
    parts.iter().fold(Aabb::empty(), |b, (_, m)| b.union(&m.bbox()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;
    use crate::geometry::primitives::cube;

    fn brute(p: &[Point3], q: &[Point3]) -> f64 {
        let one = |a: &[Point3], b: &[Point3]| {
            a.iter()
                .map(|x| b.iter().map(|y| (x - y).norm_squared()).fold(f64::INFINITY, f64::min))
                .sum::<f64>()
                / a.len() as f64
        };
        one(p, q) + one(q, p)
    }

    #[test]
    fn chamfer_basics() {
        let p = vec![Point3::origin()];
        let q = vec![Point3::new(1.0, 0.0, 0.0)];
        assert_eq!(chamfer_points(&p, &q).unwrap(), 2.0);
        assert_eq!(chamfer_points(&p, &p).unwrap(), 0.0);
        assert_eq!(chamfer_points(&p, &[]), Err(MetricsError::EmptyCloud));
    }

    #[test]
    fn chamfer_matches_brute_force() {
        let a = sample_surface(&cube(), 700, 1).unwrap().points;
        let b = sample_surface(&cube().translated(&crate::math::Vec3::new(0.3, 0.0, 0.1)), 900, 2)
            .unwrap()
            .points;
        let fast = chamfer_points(&a, &b).unwrap();
        let slow = brute(&a, &b);
        assert!((fast - slow).abs() <= 1e-12 * slow);
    }

    #[test]
    fn self_evaluation_iou_and_report() {
        let src = "# object: box\n# category: misc\n# part_0: body\ncreate_primitive(kind=\"cube\", location=(0, 0, 0), rotation=(1, 0, 0, 0), scale=(0.5, 0.5, 0.5))\n";
        let prog = parse_program(src).unwrap();
        let gt = execute_program(&prog).unwrap().remove(0).1;
        let protocol = EvalProtocol {
            gt_points: 2000,
            pred_points: 4000,
            ..EvalProtocol::default()
        };
        let r = evaluate_reconstruction(&gt, &prog, &protocol);
        assert_eq!(r.status, EvalStatus::Ok);
        assert_eq!(r.iou, Some(1.0));
        assert!(r.cd.unwrap() < 1e-2);
        assert_eq!(r.parts.len(), 1);
        let csv = reports_to_csv(&[r]);
        assert_eq!(csv.lines().count(), 1 + 1 + 4);
    }

    #[test]
    fn failed_execution_is_reported() {
        let src = "# object: bad\n# part_0: a\nbridge_loop(loops=[create_curve(kind=\"circle\", radius=1, location=(0, 0, 0), rotation=(1, 0, 0, 0), scale=(1, 1, 1)), create_curve(kind=\"circle\", radius=1, location=(0, 0, 0), rotation=(1, 0, 0, 0), scale=(1, 1, 1))], location=(0, 0, 0), rotation=(1, 0, 0, 0), scale=(1, 1, 1))\n";
        let prog = parse_program(src).unwrap();
        let r = evaluate_reconstruction(&cube(), &prog, &EvalProtocol::default());
        assert_eq!(r.status, EvalStatus::Failed);
        assert!(r.cd.is_none());
    }
}
