//! Moment embeddings of invariant point features.
//!
//! For a cloud `P`, per-point features `F` and weight functions `w_1..w_D`
//! with `w_j(0) = 0`, the embedding matrix is
//! `M[i][j] = Σ_p p_i · w_j(F(p))` (3 × D). If `P₂ = R·P₁` and `F` is
//! rotation-invariant, `M(P₂) = R·M(P₁)` column by column. Dividing by `|P|`
//! gives the moment vectors.

use nalgebra::{Dyn, OMatrix, U3};

use crate::error::{Error, Result};
use crate::geom::{PointCloud, Vec3};
use crate::linalg::order_free_sum;

pub type Matrix3xD = OMatrix<f64, U3, Dyn>;

/// Lowest bin edge of a quantile bank; keeps `w_j(0) = 0`.
pub const BIN_FLOOR: f64 = 1e-9;

/// Default number of quantile bins.
pub const DEFAULT_BINS: usize = 16;

/// N × K per-point feature values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureValues {
    values: Vec<f64>,
    channels: usize,
}

impl FeatureValues {
    pub fn new(values: Vec<f64>, channels: usize) -> Result<Self> {
        if channels == 0 {
            return Err(Error::invalid("feature values need at least one channel"));
        }
        if values.len() % channels != 0 {
            return Err(Error::invalid(format!(
                "{} values do not form rows of {channels} channels",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite feature value at flat index {i}")));
        }
        Ok(Self { values, channels })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let channels = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != channels) {
            return Err(Error::invalid("feature rows have different lengths"));
        }
        Self::new(rows.concat(), channels)
    }

    /// Every point gets the same value in a single channel.
    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n], 1)
    }

    pub fn rows(&self) -> usize {
        self.values.len() / self.channels
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.channels..(i + 1) * self.channels]
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.channels + k]
    }

    pub fn channel(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(k).step_by(self.channels).copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Rows reordered as `order`.
    pub fn select_rows(&self, order: &[usize]) -> Self {
        let values = order.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        Self {
            values,
            channels: self.channels,
        }
    }

    /// `Σ_p |F(p)_k|` per channel; for indicator features this is the occupancy.
    pub fn channel_mass(&self) -> Vec<f64> {
        (0..self.channels)
            .map(|k| order_free_sum(&mut self.channel(k).map(f64::abs).collect::<Vec<_>>()))
            .collect()
    }
}

/// A family of weight functions `w_1..w_D`, all vanishing at zero.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightBank {
    /// `w_j` is the indicator of `(edges[j-1], edges[j]]`.
    QuantileBins { edges: Vec<f64> },
    /// `w_j(x) = x^exponents[j]`.
    Power { exponents: Vec<f64> },
}

impl WeightBank {
    pub fn bins(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::Config("a bin bank needs at least two edges".into()));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::Config("non-finite bin edge".into()));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!("bin edges are not strictly increasing: {edges:?}")));
        }
        if edges[0] <= 0.0 {
            return Err(Error::Config(format!(
                "lowest bin edge must be positive so that w(0) = 0, got {}",
                edges[0]
            )));
        }
        Ok(Self::QuantileBins { edges })
    }

    pub fn power(exponents: Vec<f64>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::Config("a power bank needs at least one exponent".into()));
        }
        if exponents.iter().any(|e| !e.is_finite() || *e < 1.0) {
            return Err(Error::Config(format!("power exponents must be >= 1: {exponents:?}")));
        }
        Ok(Self::Power { exponents })
    }

    /// Exponents `1..=d`.
    pub fn default_power(d: usize) -> Result<Self> {
        Self::power((1..=d).map(|e| e as f64).collect())
    }

    /// Quantile bins over the pooled values of two feature sets.
    ///
    /// Interior edges sit at the 100·j/D percentiles, but each is moved to the
    /// midpoint of the widest gap between consecutive pooled values within a
    /// small window around the percentile rank. An edge therefore never lands
    /// on (or within rounding of) a sample, so a value and its rounded copy in
    /// the other cloud always fall in the same bin. The lowest edge is
    /// `BIN_FLOOR`, the highest the pooled maximum. Edges that would collide
    /// on tiny inputs are merged, so the bank may have fewer than `d` bins.
    pub fn pooled_quantile_bins(a: &[f64], b: &[f64], d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Config("bin count must be positive".into()));
        }
        let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        if pooled.is_empty() {
            return Err(Error::invalid("no values to derive bin edges from"));
        }
        if pooled.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite value in bin derivation"));
        }
        pooled.sort_unstable_by(f64::total_cmp);
        let n = pooled.len();
        let top = pooled[n - 1];
        if top <= BIN_FLOOR {
            return Err(Error::DegenerateGeometry("all feature values are zero".into()));
        }

        let window = (n / 200).max(1);
        let mut edges = vec![BIN_FLOOR];
        for j in 1..d {
            let target = (j as f64 / d as f64 * (n - 1) as f64).round() as usize;
            let lo = target.saturating_sub(window);
            let hi = (target + window).min(n.saturating_sub(2));
            let mut best: Option<(f64, usize)> = None;
            for i in lo..=hi.max(lo) {
                if i + 1 >= n {
                    break;
                }
                let gap = pooled[i + 1] - pooled[i];
                if best.is_none_or(|(g, _)| gap > g) {
                    best = Some((gap, i));
                }
            }
            if let Some((gap, i)) = best {
                let edge = 0.5 * (pooled[i] + pooled[i + 1]);
                if gap > 0.0 && edge > *edges.last().unwrap() && edge < top {
                    edges.push(edge);
                }
            }
        }
        edges.push(top);
        Self::bins(edges)
    }

    pub fn channels(&self) -> usize {
        match self {
            Self::QuantileBins { edges } => edges.len() - 1,
            Self::Power { exponents } => exponents.len(),
        }
    }

    pub fn weight(&self, j: usize, x: f64) -> f64 {
        match self {
            Self::QuantileBins { edges } => {
                if x > edges[j] && x <= edges[j + 1] {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Power { exponents } => {
                let e = exponents[j];
                if e.fract() == 0.0 {
                    x.powi(e as i32)
                } else {
                    x.signum() * x.abs().powf(e)
                }
            }
        }
    }
}

/// Distance of every point from the cloud centroid (one channel).
pub fn radial_feature(cloud: &PointCloud) -> Result<FeatureValues> {
    if cloud.is_empty() {
        return Err(Error::invalid("radial feature of an empty cloud"));
    }
    let m = cloud.centroid();
    FeatureValues::new(cloud.points().iter().map(|p| (p - m).norm()).collect(), 1)
}

/// Expands a single-channel feature into `bank.channels()` weighted channels.
pub fn apply_weights(features: &FeatureValues, bank: &WeightBank) -> Result<FeatureValues> {
    if features.channels() != 1 {
        return Err(Error::invalid(format!(
            "weights apply to a single feature channel, got {}",
            features.channels()
        )));
    }
    let d = bank.channels();
    let values = features
        .channel(0)
        .flat_map(|x| (0..d).map(move |j| bank.weight(j, x)))
        .collect();
    FeatureValues::new(values, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    Sum,
    Mean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UmeMatrix {
    pub matrix: Matrix3xD,
    pub normalization: Normalization,
}

impl UmeMatrix {
    pub fn column(&self, j: usize) -> Vec3 {
        self.matrix.column(j).into_owned()
    }

    pub fn columns(&self) -> Vec<Vec3> {
        (0..self.matrix.ncols()).map(|j| self.column(j)).collect()
    }
}

fn check_rows(cloud: &PointCloud, features: &FeatureValues) -> Result<()> {
    if cloud.len() != features.rows() {
        return Err(Error::invalid(format!(
            "{} feature rows for {} points",
            features.rows(),
            cloud.len()
        )));
    }
    if cloud.is_empty() {
        return Err(Error::invalid("embedding of an empty cloud"));
    }
    Ok(())
}

/// Embedding matrix `Σ_p p_i · features[p][j]`, optionally divided by `|P|`.
///
/// Each entry is reduced with an order-independent sum, so permuting the
/// points (with their feature rows) gives a bit-identical matrix.
pub fn ume_matrix(cloud: &PointCloud, features: &FeatureValues, normalization: Normalization) -> Result<UmeMatrix> {
    check_rows(cloud, features)?;
    let d = features.channels();
    let n = cloud.len();
    let mut matrix = Matrix3xD::zeros(d);
    let mut terms = vec![0.0; n];
    for j in 0..d {
        for i in 0..3 {
            for (t, (p, w)) in terms.iter_mut().zip(cloud.points().iter().zip(features.channel(j))) {
                *t = p[i] * w;
            }
            let s = order_free_sum(&mut terms);
            matrix[(i, j)] = match normalization {
                Normalization::Sum => s,
                Normalization::Mean => s / n as f64,
            };
        }
    }
    Ok(UmeMatrix {
        matrix,
        normalization,
    })
}

/// One first-moment vector `(1/|P|) Σ_p p · features[p][k]` per channel.
pub fn moment_vectors(cloud: &PointCloud, features: &FeatureValues) -> Result<Vec<Vec3>> {
    Ok(ume_matrix(cloud, features, Normalization::Mean)?.columns())
}

/// Smallest pairwise distance, by exhaustive comparison.
fn min_pairwise_distance(cloud: &PointCloud) -> f64 {
    let pts = cloud.points();
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            best = best.min((pts[i] - pts[j]).norm());
        }
    }
    best
}

/// Embedding of the ε-ball density `f_ε = Σ_p F(p)·1[B_ε(p)]`, divided by the
/// ball volume.
///
/// With disjoint balls, `w_j(f_ε)` equals `w_j(F(p))` on `B_ε(p)` and
/// `w_j(0) = 0` elsewhere, so each entry is a sum of ball first moments
/// `∫_{B_ε(p)} x_i dx = p_i · Vol(B_ε)` (the centered ball integrates to zero
/// by symmetry). `features` holds the already weighted values `w_j(F(p))`.
/// Intended as an independent check of [`ume_matrix`] with sum normalization;
/// the disjointness check is quadratic in the point count.
pub fn epsball_oracle(cloud: &PointCloud, features: &FeatureValues, eps: f64) -> Result<UmeMatrix> {
    check_rows(cloud, features)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Precondition(format!("ball radius must be positive, got {eps}")));
    }
    let min_dist = min_pairwise_distance(cloud);
    if eps >= 0.5 * min_dist {
        return Err(Error::Precondition(format!(
            "balls of radius {eps} intersect (minimum pairwise distance {min_dist})"
        )));
    }
    let volume = 4.0 / 3.0 * std::f64::consts::PI * eps.powi(3);
    let d = features.channels();
    let mut integral = Matrix3xD::zeros(d);
    for (k, p) in cloud.points().iter().enumerate() {
        let ball_first_moment = p * volume;
        for j in 0..d {
            let w = features.get(k, j);
            if w != 0.0 {
                for i in 0..3 {
                    integral[(i, j)] += ball_first_moment[i] * w;
                }
            }
        }
    }
    Ok(UmeMatrix {
        matrix: integral / volume,
        normalization: Normalization::Sum,
    })
}
