//! Registration quality metrics.
//!
//! Chamfer and Hausdorff distances use plain (non-squared) Euclidean
//! distances and sum the two directed terms. Rotation error is measured on
//! extrinsic X-Y-Z Euler angles in degrees; dataset-level RMSE squares every
//! per-trial error, averages, and only then takes the root.

mod kdtree;

pub use kdtree::{KdTree, Neighbor};

use crate::error::{Error, Result};
use crate::geom::{euler_from_rotation_deg, Mat3, PointCloud, Vec3};

/// Exact nearest neighbor of `query` in an index built over a cloud.
pub fn nearest_neighbor(index: &KdTree, query: &Vec3) -> Neighbor {
    index.nearest(query)
}

fn check_pair(a: &PointCloud, b: &PointCloud) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("distance between clouds requires non-empty clouds"));
    }
    Ok(())
}

/// Nearest-neighbor distance from every point of `from` to `to`, in order.
pub fn directed_distances(from: &PointCloud, to: &KdTree) -> Vec<f64> {
    from.points().iter().map(|p| to.nearest_distance(p)).collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn max(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(0.0, f64::max)
}

/// Directed nearest-neighbor distances in both directions.
fn both_directions(a: &PointCloud, b: &PointCloud) -> (Vec<f64>, Vec<f64>) {
    let (ta, tb) = rayon::join(|| KdTree::build(a.points()), || KdTree::build(b.points()));
    rayon::join(|| directed_distances(a, &tb), || directed_distances(b, &ta))
}

pub fn chamfer(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    check_pair(a, b)?;
    let (ab, ba) = both_directions(a, b);
    Ok(mean(&ab) + mean(&ba))
}

pub fn hausdorff(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    check_pair(a, b)?;
    let (ab, ba) = both_directions(a, b);
    Ok(max(&ab) + max(&ba))
}

/// Chamfer and Hausdorff distances sharing one pair of index builds.
pub fn chamfer_hausdorff(a: &PointCloud, b: &PointCloud) -> Result<(f64, f64)> {
    check_pair(a, b)?;
    let (ab, ba) = both_directions(a, b);
    Ok((mean(&ab) + mean(&ba), max(&ab) + max(&ba)))
}

/// Wraps an angle difference in degrees into `(-180, 180]`.
pub fn wrap_degrees(d: f64) -> f64 {
    let w = d.rem_euclid(360.0);
    if w > 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Per-angle Euler errors between two rotations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerError {
    /// Wrapped X, Y, Z angle differences in degrees.
    pub diffs: [f64; 3],
    /// Either rotation hit the gimbal-lock branch of the decomposition.
    pub gimbal_lock: bool,
}

impl EulerError {
    pub fn squared_sum(&self) -> f64 {
        self.diffs.iter().map(|d| d * d).sum()
    }

    pub fn rmse(&self) -> f64 {
        (self.squared_sum() / 3.0).sqrt()
    }
}

pub fn euler_error(r_gt: &Mat3, r_pred: &Mat3) -> EulerError {
    let (gt, lock_gt) = euler_from_rotation_deg(r_gt);
    let (pred, lock_pred) = euler_from_rotation_deg(r_pred);
    EulerError {
        diffs: [0, 1, 2].map(|i| wrap_degrees(gt[i] - pred[i])),
        gimbal_lock: lock_gt || lock_pred,
    }
}

/// Root-mean-square of the three wrapped Euler angle errors, in degrees.
pub fn rmse_rotation(r_gt: &Mat3, r_pred: &Mat3) -> f64 {
    euler_error(r_gt, r_pred).rmse()
}

pub fn rmse_translation(t_gt: &Vec3, t_pred: &Vec3) -> f64 {
    (t_gt - t_pred).norm()
}

/// Dataset-level rotation RMSE: squared angle errors of all trials are pooled
/// before the root.
pub fn pooled_rmse_rotation(errors: &[EulerError]) -> f64 {
    if errors.is_empty() {
        return f64::NAN;
    }
    let total: f64 = errors.iter().map(EulerError::squared_sum).sum();
    (total / (3 * errors.len()) as f64).sqrt()
}

/// Dataset-level translation RMSE: root of the mean squared error norm.
pub fn pooled_rmse_translation(errors: &[f64]) -> f64 {
    if errors.is_empty() {
        return f64::NAN;
    }
    (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt()
}
