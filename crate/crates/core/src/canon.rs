//! Rotation-invariant coordinates from principal axes.
//!
//! A cloud is centered on its centroid and projected onto the eigenvectors of
//! `H = Σ p pᵀ`. Eigenvectors are only defined up to sign, so a frame comes
//! with eight sign constellations; the one matching a second cloud is picked
//! by the smallest Chamfer distance between projected coordinates.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{Mat3, PointCloud, Vec3};
use crate::linalg::symmetric_eigen3;
use crate::metrics::KdTree;

/// Relative eigenvalue gap below which a frame is flagged as unstable.
pub const NEAR_DEGENERATE_GAP: f64 = 1e-6;

/// Ratio `λ₂/λ₁` at or below which the covariance counts as rank ≤ 1.
pub const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalFrame {
    pub centroid: Vec3,
    /// Principal axes as columns.
    pub axes: Mat3,
    /// Descending, non-negative.
    pub eigenvalues: [f64; 3],
    /// Projected coordinates `Dᵀ(p − m)`, in input order.
    pub coords: PointCloud,
    /// Two eigenvalues are within `NEAR_DEGENERATE_GAP` (relative) of each other.
    pub near_degenerate: bool,
}

/// Unnormalized scatter matrix `Σ p pᵀ` of an already-centered cloud.
pub fn covariance(centered: &PointCloud) -> Result<Mat3> {
    if centered.is_empty() {
        return Err(Error::invalid("covariance of an empty cloud"));
    }
    Ok(centered
        .points()
        .iter()
        .fold(Mat3::zeros(), |acc, p| acc + p * p.transpose()))
}

/// Flips each column so its largest-magnitude entry is positive (first such
/// entry on exact ties).
fn fix_column_signs(axes: &mut Mat3) {
    for j in 0..3 {
        let mut col = axes.column_mut(j);
        let mut pivot = 0;
        for i in 1..3 {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
    }
}

pub fn pca_frame(cloud: &PointCloud) -> Result<CanonicalFrame> {
    if cloud.len() < 3 {
        return Err(Error::DegenerateGeometry(format!(
            "principal axes need at least 3 points, got {}",
            cloud.len()
        )));
    }
    let centroid = cloud.centroid();
    let centered = cloud.map_points(|p| p - centroid);
    let h = covariance(&centered)?;
    let eig = symmetric_eigen3(&h);
    let [l1, l2, l3] = eig.values;
    if l1 <= 0.0 || l2 <= RANK_TOL * l1 {
        return Err(Error::DegenerateGeometry(format!(
            "rank-deficient covariance (eigenvalues {l1:e}, {l2:e}, {l3:e}); points are collinear or coincident"
        )));
    }
    let near_degenerate =
        (l1 - l2) < NEAR_DEGENERATE_GAP * l1 || (l2 - l3.max(0.0)) < NEAR_DEGENERATE_GAP * l1;

    let mut axes = eig.vectors;
    fix_column_signs(&mut axes);
    let dt = axes.transpose();
    Ok(CanonicalFrame {
        centroid,
        axes,
        eigenvalues: [l1, l2, l3.max(0.0)],
        coords: centered.map_points(|p| dt * p),
        near_degenerate,
    })
}

/// Column signs of constellation `index`: bit 2 is the first axis, bit 0 the
/// last, set bit means flipped. Index 0 is `+++`, 1 is `++−`, 2 is `+−+`.
pub fn constellation_signs(index: usize) -> Vec3 {
    assert!(index < 8, "constellation index {index} out of range");
    Vec3::from_fn(|k, _| if (index >> (2 - k)) & 1 == 1 { -1.0 } else { 1.0 })
}

/// The frame with the column signs of constellation `index` applied.
pub fn constellation(frame: &CanonicalFrame, index: usize) -> CanonicalFrame {
    let signs = constellation_signs(index);
    let mut axes = frame.axes;
    for j in 0..3 {
        axes.column_mut(j).scale_mut(signs[j]);
    }
    CanonicalFrame {
        centroid: frame.centroid,
        axes,
        eigenvalues: frame.eigenvalues,
        coords: frame.coords.map_points(|c| c.component_mul(&signs)),
        near_degenerate: frame.near_degenerate,
    }
}

/// All eight sign constellations, in binary-counter order.
pub fn sign_constellations(frame: &CanonicalFrame) -> Vec<CanonicalFrame> {
    (0..8).map(|i| constellation(frame, i)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disambiguation {
    pub index: usize,
    pub chamfer: f64,
    /// Chamfer distance for every constellation.
    pub all: [f64; 8],
}

/// Picks the constellation of `frame2` whose coordinates are closest (Chamfer)
/// to those of `frame1`. Ties go to the lowest index.
pub fn disambiguate(frame1: &CanonicalFrame, frame2: &CanonicalFrame) -> Disambiguation {
    let c1 = frame1.coords.points();
    let c2 = frame2.coords.points();
    let (t1, t2) = rayon::join(|| KdTree::build(c1), || KdTree::build(c2));

    // A sign flip is an isometry, so constellation j of C2 is queried by
    // flipping the query instead of rebuilding the index.
    let scores: Vec<f64> = (0..8usize)
        .into_par_iter()
        .map(|j| {
            let s = constellation_signs(j);
            let forward: f64 = c1.iter().map(|c| t2.nearest_distance(&c.component_mul(&s))).sum();
            let backward: f64 = c2.iter().map(|c| t1.nearest_distance(&c.component_mul(&s))).sum();
            forward / c1.len() as f64 + backward / c2.len() as f64
        })
        .collect();

    let mut all = [0.0; 8];
    all.copy_from_slice(&scores);
    let mut index = 0;
    for j in 1..8 {
        if all[j] < all[index] {
            index = j;
        }
    }
    Disambiguation {
        index,
        chamfer: all[index],
        all,
    }
}

/// Maps frame coordinates back to world space: `D·c + m`.
pub fn reproject(frame: &CanonicalFrame, coords: &PointCloud) -> PointCloud {
    coords.map_points(|c| frame.axes * c + frame.centroid)
}
