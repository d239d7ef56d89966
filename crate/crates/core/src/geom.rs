//! Point clouds, rigid transforms and the Euler-angle convention.
//!
//! Euler angles are extrinsic X-Y-Z in degrees: a point is rotated about the
//! world X axis first, then Y, then Z, so `R = Rz(γ)·Ry(β)·Rx(α)`.

use std::collections::HashSet;

use nalgebra::{Matrix3, Vector3};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::order_free_sum;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Tolerance used when validating rotation matrices.
pub const ROTATION_TOL: f64 = 1e-12;

/// An ordered set of 3D points with optional per-point correspondence ids.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec3>,
    ids: Option<Vec<usize>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        check_finite(&points)?;
        Ok(Self { points, ids: None })
    }

    /// Builds a cloud whose ids are `0..n`.
    pub fn with_sequential_ids(points: Vec<Vec3>) -> Result<Self> {
        let ids = (0..points.len()).collect();
        Self::with_ids(points, ids)
    }

    pub fn with_ids(points: Vec<Vec3>, ids: Vec<usize>) -> Result<Self> {
        check_finite(&points)?;
        if ids.len() != points.len() {
            return Err(Error::invalid(format!(
                "{} ids for {} points",
                ids.len(),
                points.len()
            )));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        if let Some(dup) = ids.iter().find(|id| !seen.insert(**id)) {
            return Err(Error::invalid(format!("duplicate point id {dup}")));
        }
        Ok(Self {
            points,
            ids: Some(ids),
        })
    }

    /// Internal constructor for outputs of operations that preserve the invariants.
    pub(crate) fn from_parts(points: Vec<Vec3>, ids: Option<Vec<usize>>) -> Self {
        debug_assert!(ids.as_ref().is_none_or(|ids| ids.len() == points.len()));
        Self { points, ids }
    }

    pub fn from_slice(points: &[[f64; 3]]) -> Result<Self> {
        Self::new(points.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn ids(&self) -> Option<&[usize]> {
        self.ids.as_deref()
    }

    pub fn into_points(self) -> Vec<Vec3> {
        self.points
    }

    /// Arithmetic mean of the points. Zero for an empty cloud.
    ///
    /// Independent of point order, bit for bit.
    pub fn centroid(&self) -> Vec3 {
        if self.points.is_empty() {
            return Vec3::zeros();
        }
        let n = self.points.len() as f64;
        let mut coord = Vec::with_capacity(self.points.len());
        Vec3::from_fn(|i, _| {
            coord.clear();
            coord.extend(self.points.iter().map(|p| p[i]));
            order_free_sum(&mut coord) / n
        })
    }

    /// Returns a cloud with `f` applied to every point; ids are kept.
    pub fn map_points(&self, f: impl Fn(&Vec3) -> Vec3) -> Self {
        Self::from_parts(self.points.iter().map(f).collect(), self.ids.clone())
    }

    /// Returns the points (and ids) at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let points = indices.iter().map(|&i| self.points[i]).collect();
        let ids = self
            .ids
            .as_ref()
            .map(|ids| indices.iter().map(|&i| ids[i]).collect());
        Self::from_parts(points, ids)
    }

    /// Point indices sorted lexicographically by coordinates (ties by id).
    ///
    /// Used to make order-sensitive floating point reductions independent of
    /// the input order.
    pub fn lexicographic_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.points.len()).collect();
        order.sort_by(|&a, &b| {
            let (pa, pb) = (&self.points[a], &self.points[b]);
            pa.x.total_cmp(&pb.x)
                .then(pa.y.total_cmp(&pb.y))
                .then(pa.z.total_cmp(&pb.z))
                .then_with(|| match &self.ids {
                    Some(ids) => ids[a].cmp(&ids[b]),
                    None => std::cmp::Ordering::Equal,
                })
        });
        order
    }
}

fn check_finite(points: &[Vec3]) -> Result<()> {
    match points.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
        Some(i) => Err(Error::invalid(format!("point {i} has a non-finite coordinate"))),
        None => Ok(()),
    }
}

/// A closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::invalid(format!("empty or non-finite interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub const fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.lo + (self.hi - self.lo) * rng.random::<f64>()
    }
}

/// Rotation `R` followed by translation `t`: `x ↦ R·x + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl RigidTransform {
    pub fn new(rotation: Mat3, translation: Vec3) -> Result<Self> {
        check_rotation(&rotation, ROTATION_TOL)?;
        if !translation.iter().all(|c| c.is_finite()) {
            return Err(Error::invalid("non-finite translation"));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Mat3::identity(),
            translation: Vec3::zeros(),
        }
    }

    pub fn from_rotation(rotation: Mat3) -> Result<Self> {
        Self::new(rotation, Vec3::zeros())
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self {
            rotation: Mat3::identity(),
            translation,
        }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }
}

/// Checks `RᵀR = I` elementwise and `det R = +1`, both within `tol`.
pub fn check_rotation(r: &Mat3, tol: f64) -> Result<()> {
    if !r.iter().all(|c| c.is_finite()) {
        return Err(Error::invalid("non-finite rotation entry"));
    }
    let off = (r.transpose() * r - Mat3::identity()).amax();
    if off > tol {
        return Err(Error::invalid(format!("rotation not orthogonal (max |RᵀR - I| = {off:e})")));
    }
    let det = r.determinant();
    if (det - 1.0).abs() > tol {
        return Err(Error::invalid(format!("rotation determinant {det} != 1")));
    }
    Ok(())
}

pub fn rot_x(deg: f64) -> Mat3 {
    let (s, c) = deg.to_radians().sin_cos();
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_y(deg: f64) -> Mat3 {
    let (s, c) = deg.to_radians().sin_cos();
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rot_z(deg: f64) -> Mat3 {
    let (s, c) = deg.to_radians().sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Rotation from extrinsic X-Y-Z Euler angles in degrees.
pub fn rotation_from_euler_deg(angles: [f64; 3]) -> Mat3 {
    rot_z(angles[2]) * rot_y(angles[1]) * rot_x(angles[0])
}

/// Extrinsic X-Y-Z Euler angles (degrees) of a rotation.
///
/// The second return value is `true` at gimbal lock (`|cos β| < 1e-9`); there
/// the X angle is set to zero and the whole in-plane rotation goes to Z.
pub fn euler_from_rotation_deg(r: &Mat3) -> ([f64; 3], bool) {
    let sin_b = (-r[(2, 0)]).clamp(-1.0, 1.0);
    let beta = sin_b.asin();
    let cos_b = (r[(2, 1)].powi(2) + r[(2, 2)].powi(2)).sqrt();
    if cos_b < 1e-9 {
        let gamma = (-r[(0, 1)]).atan2(r[(1, 1)]);
        ([0.0, beta.to_degrees(), gamma.to_degrees()], true)
    } else {
        let alpha = r[(2, 1)].atan2(r[(2, 2)]);
        let gamma = r[(1, 0)].atan2(r[(0, 0)]);
        ([alpha.to_degrees(), beta.to_degrees(), gamma.to_degrees()], false)
    }
}

/// Applies `t` to every point; ids are preserved in order.
pub fn apply_transform(cloud: &PointCloud, t: &RigidTransform) -> PointCloud {
    cloud.map_points(|p| t.apply(p))
}

/// Composition applying `second` first, then `first`.
pub fn compose(first: &RigidTransform, second: &RigidTransform) -> RigidTransform {
    RigidTransform {
        rotation: first.rotation * second.rotation,
        translation: first.rotation * second.translation + first.translation,
    }
}

pub fn invert(t: &RigidTransform) -> RigidTransform {
    let rt = t.rotation.transpose();
    RigidTransform {
        rotation: rt,
        translation: -(rt * t.translation),
    }
}

/// Draws a transform with three independent uniform Euler angles (degrees,
/// extrinsic X-Y-Z) and independent uniform translation components.
pub fn random_rigid<R: Rng + ?Sized>(
    rng: &mut R,
    euler_range_deg: Interval,
    trans_range: Interval,
) -> RigidTransform {
    let angles = [
        euler_range_deg.sample(rng),
        euler_range_deg.sample(rng),
        euler_range_deg.sample(rng),
    ];
    let translation = Vec3::new(
        trans_range.sample(rng),
        trans_range.sample(rng),
        trans_range.sample(rng),
    );
    RigidTransform {
        rotation: rotation_from_euler_deg(angles),
        translation,
    }
}

/// Result of [`normalize_unit_sphere`].
#[derive(Debug, Clone)]
pub struct Normalized {
    pub cloud: PointCloud,
    pub scale: f64,
    pub center: Vec3,
}

/// Centers the cloud on its centroid and scales it so the farthest point has
/// norm one. Coincident clouds keep scale 1.
pub fn normalize_unit_sphere(cloud: &PointCloud) -> Result<Normalized> {
    if cloud.is_empty() {
        return Err(Error::invalid("cannot normalize an empty cloud"));
    }
    let center = cloud.centroid();
    let centered = cloud.map_points(|p| p - center);
    let max_norm = centered
        .points()
        .iter()
        .map(|p| p.norm())
        .fold(0.0_f64, f64::max);
    let scale = if max_norm > 0.0 { max_norm } else { 1.0 };
    Ok(Normalized {
        cloud: centered.map_points(|p| p / scale),
        scale,
        center,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn full() -> (Interval, Interval) {
        (Interval::new(-180.0, 180.0).unwrap(), Interval::new(-0.5, 0.5).unwrap())
    }

    #[test]
    fn identity_transform_is_noop() {
        let c = PointCloud::from_slice(&[[1.0, 2.0, 3.0], [-1.0, 0.5, 0.0]]).unwrap();
        assert_eq!(apply_transform(&c, &RigidTransform::identity()), c);
    }

    #[test]
    fn axis_rotation_and_translation() {
        let c = PointCloud::from_slice(&[[1.0, 0.0, 0.0]]).unwrap();
        let r = apply_transform(&c, &RigidTransform::from_rotation(rot_z(90.0)).unwrap());
        assert!((r.points()[0] - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
        let t = apply_transform(&c, &RigidTransform::from_translation(Vec3::new(0.0, 0.0, -0.5)));
        assert_eq!(t.points()[0], Vec3::new(1.0, 0.0, -0.5));
    }

    #[test]
    fn ids_survive_transform() {
        let c = PointCloud::with_ids(vec![Vec3::x(), Vec3::y()], vec![7, 3]).unwrap();
        let out = apply_transform(&c, &RigidTransform::from_translation(Vec3::z()));
        assert_eq!(out.ids(), Some(&[7, 3][..]));
    }

    #[test]
    fn compose_and_invert() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (e, tr) = full();
        let t = random_rigid(&mut rng, e, tr);
        assert_eq!(compose(&t, &RigidTransform::identity()), t);
        let rz180 = compose(
            &RigidTransform::from_rotation(rot_z(90.0)).unwrap(),
            &RigidTransform::from_rotation(rot_z(90.0)).unwrap(),
        );
        assert!((rz180.rotation - rot_z(180.0)).amax() < 1e-15);
        let inv = invert(&RigidTransform::from_translation(Vec3::new(1.0, 2.0, 3.0)));
        assert_eq!(inv.translation, Vec3::new(-1.0, -2.0, -3.0));
        assert_eq!(invert(&RigidTransform::identity()), RigidTransform::identity());
    }

    #[test]
    fn invert_round_trip_over_many_seeds() {
        let (e, tr) = full();
        for seed in 0..1000 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = random_rigid(&mut rng, e, tr);
            let id = compose(&invert(&t), &t);
            assert!((id.rotation - Mat3::identity()).amax() < 1e-12);
            assert!(id.translation.amax() < 1e-12);
        }
    }

    #[test]
    fn random_rigid_zero_range_is_identity_and_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = random_rigid(&mut rng, Interval::point(0.0), Interval::point(0.0));
        assert_eq!(t, RigidTransform::identity());
        let (e, tr) = full();
        for _ in 0..100 {
            let t = random_rigid(&mut rng, e, tr);
            check_rotation(&t.rotation, ROTATION_TOL).unwrap();
        }
    }

    #[test]
    fn random_rigid_is_deterministic() {
        let (e, tr) = full();
        let a = random_rigid(&mut ChaCha8Rng::seed_from_u64(42), e, tr);
        let b = random_rigid(&mut ChaCha8Rng::seed_from_u64(42), e, tr);
        assert_eq!(a, b);
    }

    #[test]
    fn random_translation_mean_is_centered() {
        // Uniform on [-0.5, 0.5]: mean 0, std 1/sqrt(12).
        let (e, tr) = full();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 100_000;
        let mut sum = Vec3::zeros();
        for _ in 0..n {
            sum += random_rigid(&mut rng, e, tr).translation;
        }
        let bound = 3.0 * (1.0 / 12.0_f64).sqrt() / (n as f64).sqrt();
        for c in (sum / n as f64).iter() {
            assert!(c.abs() < bound, "{c} vs {bound}");
        }
    }

    #[test]
    fn euler_round_trip() {
        let angles = [10.0, -35.0, 170.0];
        let (back, gimbal) = euler_from_rotation_deg(&rotation_from_euler_deg(angles));
        assert!(!gimbal);
        for (a, b) in angles.iter().zip(back) {
            assert!((a - b).abs() < 1e-10);
        }
        let (_, gimbal) = euler_from_rotation_deg(&rotation_from_euler_deg([20.0, 90.0, 5.0]));
        assert!(gimbal);
    }

    #[test]
    fn normalize_examples() {
        let c = PointCloud::from_slice(&[[2.0, 0.0, 0.0], [-2.0, 0.0, 0.0]]).unwrap();
        let n = normalize_unit_sphere(&c).unwrap();
        assert_eq!(n.scale, 2.0);
        assert_eq!(n.center, Vec3::zeros());
        assert_eq!(n.cloud.points(), &[Vec3::x(), -Vec3::x()]);

        let single = PointCloud::from_slice(&[[5.0, 5.0, 5.0]]).unwrap();
        let n = normalize_unit_sphere(&single).unwrap();
        assert_eq!(n.scale, 1.0);
        assert_eq!(n.center, Vec3::new(5.0, 5.0, 5.0));
        assert_eq!(n.cloud.points(), &[Vec3::zeros()]);

        assert!(normalize_unit_sphere(&PointCloud::new(vec![]).unwrap()).is_err());
    }

    #[test]
    fn rejects_bad_clouds() {
        assert!(PointCloud::new(vec![Vec3::new(f64::NAN, 0.0, 0.0)]).is_err());
        assert!(PointCloud::with_ids(vec![Vec3::x(), Vec3::y()], vec![1, 1]).is_err());
        assert!(PointCloud::with_ids(vec![Vec3::x()], vec![1, 2]).is_err());
        assert!(RigidTransform::new(Mat3::identity() * 2.0, Vec3::zeros()).is_err());
        assert!(RigidTransform::new(-Mat3::identity(), Vec3::zeros()).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn cloud_strategy() -> impl Strategy<Value = Vec<[f64; 3]>> {
            prop::collection::vec(prop::array::uniform3(-10.0..10.0f64), 2..40)
        }

        proptest! {
            #[test]
            fn transform_preserves_pairwise_distances(pts in cloud_strategy(), seed in any::<u64>()) {
                let c = PointCloud::from_slice(&pts).unwrap();
                let (e, tr) = full();
                let t = random_rigid(&mut ChaCha8Rng::seed_from_u64(seed), e, tr);
                let out = apply_transform(&c, &t);
                for i in 0..c.len() {
                    for j in (i + 1)..c.len() {
                        let d0 = (c.points()[i] - c.points()[j]).norm();
                        let d1 = (out.points()[i] - out.points()[j]).norm();
                        prop_assert!((d0 - d1).abs() <= 1e-10 * d0.max(1.0));
                    }
                }
            }

            #[test]
            fn normalized_max_norm_is_one(pts in cloud_strategy()) {
                let c = PointCloud::from_slice(&pts).unwrap();
                let n = normalize_unit_sphere(&c).unwrap();
                let max = n.cloud.points().iter().map(|p| p.norm()).fold(0.0, f64::max);
                prop_assert!((max - 1.0).abs() < 1e-12 || n.scale == 1.0);
                prop_assert!(n.cloud.centroid().norm() < 1e-12);
            }
        }
    }
}
