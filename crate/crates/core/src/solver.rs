//! Closed-form rigid registration from moment vectors.
//!
//! Both clouds are reduced to their centroids; the rotation is then the
//! weighted least-squares rotation between corresponding moment vectors
//! (Kabsch/Horn via SVD), and the translation follows from the centroids.

use std::collections::BTreeSet;

use nalgebra::SVD;

use crate::canon::{self, CanonicalFrame, Disambiguation};
use crate::error::{Error, Result};
use crate::geom::{Mat3, PointCloud, RigidTransform, Vec3};
use crate::io::umef::UmefBundle;
use crate::ume::{self, FeatureValues, WeightBank, DEFAULT_BINS};

/// Singular-value ratio `s₂/s₁` at or below which a cross-covariance counts
/// as rank ≤ 1.
pub const HORN_RANK_TOL: f64 = 1e-10;

/// Moment vectors shorter than this fraction of the cloud's RMS radius carry
/// no direction and are dropped.
pub const MOMENT_FLOOR: f64 = 1e-12;

/// Fraction of `‖M₂‖_F` above which the moment residual raises a warning.
pub const RESIDUAL_WARNING: f64 = 0.1;

pub const MIN_EXTERNAL_FEATURES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DegeneracyFlag {
    /// A principal-axis frame has two nearly equal eigenvalues.
    NearDegenerateSpectrum,
    /// Some moment channels were empty or vanishing and got no weight.
    DroppedChannels,
    /// Moment residual exceeds `RESIDUAL_WARNING · ‖M₂‖_F`.
    HighResidual,
    /// Too few independent moment vectors for a unique rotation.
    RankDeficientMoments,
    /// ICP hit its iteration cap before converging.
    NotConverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationResult {
    /// Estimated map from the first cloud onto the second.
    pub transform: RigidTransform,
    /// Sign constellation chosen for the second cloud's frame, if frames were used.
    pub chosen_constellation: Option<usize>,
    /// Frobenius norm of `M₂ − R·M₁`; for ICP, the final RMS correspondence distance.
    pub residual: f64,
    pub flags: BTreeSet<DegeneracyFlag>,
    /// ICP iteration count.
    pub iterations: Option<usize>,
}

/// Rotation minimizing `Σ wᵢ‖vᵢ − R·uᵢ‖²` over SO(3).
///
/// With `K = Σ wᵢ vᵢ uᵢᵀ = A·S·Bᵀ`, the answer is
/// `R = A·diag(1, 1, det(A·Bᵀ))·Bᵀ`; the determinant term rules out reflections.
pub fn horn_rotation(u: &[Vec3], v: &[Vec3], weights: Option<&[f64]>) -> Result<Mat3> {
    if u.len() != v.len() {
        return Err(Error::invalid(format!("{} source vectors but {} targets", u.len(), v.len())));
    }
    if u.len() < 3 {
        return Err(Error::invalid(format!("rotation needs at least 3 vector pairs, got {}", u.len())));
    }
    if let Some(w) = weights {
        if w.len() != u.len() {
            return Err(Error::invalid(format!("{} weights for {} pairs", w.len(), u.len())));
        }
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::invalid("weights must be finite and non-negative"));
        }
    }
    let mut k = Mat3::zeros();
    for (i, (a, b)) in u.iter().zip(v).enumerate() {
        let w = weights.map_or(1.0, |w| w[i]);
        k += w * b * a.transpose();
    }
    let svd = SVD::new(k, true, true);
    let s = svd.singular_values;
    if !(s[0] > 0.0) || s[1] <= HORN_RANK_TOL * s[0] {
        return Err(Error::DegenerateCorrespondence {
            reason: format!("cross-covariance has rank <= 1 (singular values {:e}, {:e}, {:e})", s[0], s[1], s[2]),
            flags: vec![DegeneracyFlag::RankDeficientMoments],
        });
    }
    let (a, bt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let d = (a * bt).determinant().signum();
    Ok(a * Mat3::from_diagonal(&Vec3::new(1.0, 1.0, d)) * bt)
}

/// `t = m₂ − R·m₁`.
pub fn estimate_translation(rotation: &Mat3, m1: &Vec3, m2: &Vec3) -> Vec3 {
    m2 - rotation * m1
}

/// Weight functions used by [`register_ume`].
#[derive(Debug, Clone, PartialEq)]
pub enum BankConfig {
    /// Indicator bins at pooled radial quantiles of both clouds.
    PooledQuantile { bins: usize },
    /// Powers of the radial distance.
    Power { exponents: Vec<f64> },
}

impl Default for BankConfig {
    fn default() -> Self {
        Self::PooledQuantile { bins: DEFAULT_BINS }
    }
}

impl BankConfig {
    pub fn build(&self, radial1: &FeatureValues, radial2: &FeatureValues) -> Result<WeightBank> {
        match self {
            Self::PooledQuantile { bins } => {
                let a: Vec<f64> = radial1.channel(0).collect();
                let b: Vec<f64> = radial2.channel(0).collect();
                WeightBank::pooled_quantile_bins(&a, &b, *bins)
            }
            Self::Power { exponents } => WeightBank::power(exponents.clone()),
        }
    }
}

/// Principal-axis frames of a pair with the second frame's signs resolved.
///
/// Frames are computed on lexicographically sorted copies so the result does
/// not depend on input order; `coords` are handed back in input order.
#[derive(Debug, Clone)]
pub struct PairFrames {
    pub frame1: CanonicalFrame,
    /// Second frame, already in the chosen constellation.
    pub frame2: CanonicalFrame,
    pub disambiguation: Disambiguation,
}

fn inverse_permutation(order: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; order.len()];
    for (pos, &i) in order.iter().enumerate() {
        inv[i] = pos;
    }
    inv
}

pub fn pair_frames(p1: &PointCloud, p2: &PointCloud) -> Result<PairFrames> {
    let o1 = p1.lexicographic_order();
    let o2 = p2.lexicographic_order();
    let f1 = canon::pca_frame(&p1.select(&o1))?;
    let f2 = canon::pca_frame(&p2.select(&o2))?;
    let disambiguation = canon::disambiguate(&f1, &f2);
    let mut frame1 = f1;
    let mut frame2 = canon::constellation(&f2, disambiguation.index);
    frame1.coords = frame1.coords.select(&inverse_permutation(&o1));
    frame2.coords = frame2.coords.select(&inverse_permutation(&o2));
    Ok(PairFrames {
        frame1,
        frame2,
        disambiguation,
    })
}

struct MomentSolution {
    rotation: Mat3,
    translation: Vec3,
    residual: f64,
    flags: BTreeSet<DegeneracyFlag>,
}

fn rms_radius(centered: &PointCloud) -> f64 {
    let s: f64 = centered.points().iter().map(|p| p.norm_squared()).sum();
    (s / centered.len() as f64).sqrt()
}

/// Rotation and translation from corresponding feature moments of two clouds.
fn solve_from_moments(
    p1: &PointCloud,
    f1: &FeatureValues,
    p2: &PointCloud,
    f2: &FeatureValues,
    mut flags: BTreeSet<DegeneracyFlag>,
) -> Result<MomentSolution> {
    if f1.channels() != f2.channels() {
        return Err(Error::invalid(format!(
            "feature channel counts differ: {} vs {}",
            f1.channels(),
            f2.channels()
        )));
    }
    let m1 = p1.centroid();
    let m2 = p2.centroid();
    let c1 = p1.map_points(|p| p - m1);
    let c2 = p2.map_points(|p| p - m2);
    let u = ume::moment_vectors(&c1, f1)?;
    let v = ume::moment_vectors(&c2, f2)?;

    let floor1 = MOMENT_FLOOR * rms_radius(&c1);
    let floor2 = MOMENT_FLOOR * rms_radius(&c2);
    let weights: Vec<f64> = f1
        .channel_mass()
        .into_iter()
        .zip(f2.channel_mass())
        .zip(u.iter().zip(&v))
        .map(|((a, b), (uk, vk))| {
            if uk.norm() <= floor1 || vk.norm() <= floor2 {
                0.0
            } else {
                a.min(b)
            }
        })
        .collect();
    if weights.iter().any(|w| *w == 0.0) {
        flags.insert(DegeneracyFlag::DroppedChannels);
    }

    let rotation = match horn_rotation(&u, &v, Some(&weights)) {
        Ok(r) => r,
        Err(Error::DegenerateCorrespondence { reason, flags: extra }) => {
            flags.extend(extra);
            return Err(Error::DegenerateCorrespondence {
                reason,
                flags: flags.into_iter().collect(),
            });
        }
        Err(e) => return Err(e),
    };

    let residual = u
        .iter()
        .zip(&v)
        .map(|(a, b)| (b - rotation * a).norm_squared())
        .sum::<f64>()
        .sqrt();
    let scale = v.iter().map(|b| b.norm_squared()).sum::<f64>().sqrt();
    if residual > RESIDUAL_WARNING * scale {
        flags.insert(DegeneracyFlag::HighResidual);
    }
    Ok(MomentSolution {
        translation: estimate_translation(&rotation, &m1, &m2),
        rotation,
        residual,
        flags,
    })
}

fn frame_flags(frames: &PairFrames) -> BTreeSet<DegeneracyFlag> {
    let mut flags = BTreeSet::new();
    if frames.frame1.near_degenerate || frames.frame2.near_degenerate {
        flags.insert(DegeneracyFlag::NearDegenerateSpectrum);
    }
    flags
}

fn finish(solution: MomentSolution, constellation: usize) -> Result<RegistrationResult> {
    Ok(RegistrationResult {
        transform: RigidTransform::new(solution.rotation, solution.translation)?,
        chosen_constellation: Some(constellation),
        residual: solution.residual,
        flags: solution.flags,
        iterations: None,
    })
}

/// Closed-form registration of `p1` onto `p2` with radial invariant features.
///
/// Steps: principal-axis frames and 8-way sign disambiguation of both clouds;
/// distance-to-centroid features expanded through a weight bank shared by the
/// pair; moment vectors of the centered clouds; weighted Horn rotation with
/// channel weights `min(mass₁, mass₂)`; translation from the centroids.
/// The result does not depend on the point order of either input.
pub fn register_ume(p1: &PointCloud, p2: &PointCloud, bank: &BankConfig) -> Result<RegistrationResult> {
    for (name, p) in [("first", p1), ("second", p2)] {
        if p.len() < 4 {
            return Err(Error::invalid(format!("{name} cloud has {} points, need at least 4", p.len())));
        }
    }
    let frames = pair_frames(p1, p2)?;
    let flags = frame_flags(&frames);
    let (f1, f2) = radial_bank_features(p1, p2, bank)?;
    let solution = solve_from_moments(p1, &f1, p2, &f2, flags)?;
    finish(solution, frames.disambiguation.index)
}

/// Radial features of both clouds expanded through the pair's shared bank.
pub fn radial_bank_features(
    p1: &PointCloud,
    p2: &PointCloud,
    bank: &BankConfig,
) -> Result<(FeatureValues, FeatureValues)> {
    let r1 = ume::radial_feature(p1)?;
    let r2 = ume::radial_feature(p2)?;
    let bank = bank.build(&r1, &r2)?;
    Ok((ume::apply_weights(&r1, &bank)?, ume::apply_weights(&r2, &bank)?))
}

/// Registration with externally supplied canonical coordinates and features.
///
/// Bundle coordinates are mapped back to world space through each cloud's
/// principal-axis frame (the second frame in its disambiguated constellation),
/// and the bundle channels are used directly as invariant features.
pub fn register_with_external(
    p1: &PointCloud,
    p2: &PointCloud,
    b1: &UmefBundle,
    b2: &UmefBundle,
) -> Result<RegistrationResult> {
    for (name, p, b) in [("first", p1, b1), ("second", p2, b2)] {
        if p.len() != b.n_points() {
            return Err(Error::invalid(format!(
                "{name} bundle has {} rows for a cloud of {} points",
                b.n_points(),
                p.len()
            )));
        }
    }
    if b1.n_features() != b2.n_features() {
        return Err(Error::invalid(format!(
            "bundles carry {} and {} feature channels",
            b1.n_features(),
            b2.n_features()
        )));
    }
    if b1.n_features() < MIN_EXTERNAL_FEATURES {
        return Err(Error::InsufficientFeatures {
            got: b1.n_features(),
            need: MIN_EXTERNAL_FEATURES,
        });
    }
    let frames = pair_frames(p1, p2)?;
    let flags = frame_flags(&frames);
    let q1 = canon::reproject(&frames.frame1, &b1.coords);
    let q2 = canon::reproject(&frames.frame2, &b2.coords);
    let solution = solve_from_moments(&q1, &b1.features, &q2, &b2.features, flags)?;
    finish(solution, frames.disambiguation.index)
}

/// Bundles that echo each cloud's canonical coordinates together with the
/// radial bank features [`register_ume`] would use. Registering with them via
/// [`register_with_external`] reproduces the closed-form result; they are
/// also the starting point for learned features.
pub fn canonical_bundles(
    p1: &PointCloud,
    p2: &PointCloud,
    bank: &BankConfig,
) -> Result<(PairFrames, UmefBundle, UmefBundle)> {
    let frames = pair_frames(p1, p2)?;
    let (f1, f2) = radial_bank_features(p1, p2, bank)?;
    let b1 = UmefBundle::new(frames.frame1.coords.clone(), f1)?;
    let b2 = UmefBundle::new(frames.frame2.coords.clone(), f2)?;
    Ok((frames, b1, b2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{apply_transform, check_rotation, compose, random_rigid, rot_z, Interval};
    use crate::mesh::{sample_mesh, shapes};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn full_range() -> (Interval, Interval) {
        (Interval::new(-180.0, 180.0).unwrap(), Interval::new(-0.5, 0.5).unwrap())
    }

    fn blob(n: usize, seed: u64) -> PointCloud {
        let mesh = shapes::asymmetric_blob();
        sample_mesh(&mesh, n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
    }

    #[test]
    fn horn_examples() {
        let basis = [Vec3::x(), Vec3::y(), Vec3::z()];
        assert!((horn_rotation(&basis, &basis, None).unwrap() - Mat3::identity()).amax() < 1e-15);
        let rz = rot_z(90.0);
        let v: Vec<Vec3> = basis.iter().map(|u| rz * u).collect();
        assert!((horn_rotation(&basis, &v, None).unwrap() - rz).amax() < 1e-12);
    }

    #[test]
    fn horn_recovers_random_rotations() {
        let (e, _) = full_range();
        for seed in 0..1000 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = random_rigid(&mut rng, e, Interval::point(0.0)).rotation;
            let u: Vec<Vec3> = (0..8)
                .map(|_| Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)).normalize())
                .collect();
            let v: Vec<Vec3> = u.iter().map(|x| r * x).collect();
            let est = horn_rotation(&u, &v, None).unwrap();
            assert!((est - r).norm() < 1e-9, "seed {seed}");
            check_rotation(&est, 1e-12).unwrap();
        }
    }

    #[test]
    fn horn_never_returns_reflection() {
        // a mirrored target set would be fit best by a reflection
        let u = [Vec3::x(), Vec3::y(), Vec3::z(), Vec3::new(1.0, 1.0, 1.0)];
        let v: Vec<Vec3> = u.iter().map(|p| Vec3::new(p.x, p.y, -p.z)).collect();
        let r = horn_rotation(&u, &v, None).unwrap();
        check_rotation(&r, 1e-12).unwrap();
    }

    #[test]
    fn horn_rejects_degenerate_input() {
        let u = [Vec3::x(), Vec3::x() * 2.0, -Vec3::x()];
        assert!(matches!(
            horn_rotation(&u, &u, None),
            Err(Error::DegenerateCorrespondence { .. })
        ));
        assert!(horn_rotation(&[Vec3::x(); 2], &[Vec3::x(); 2], None).is_err());
        assert!(horn_rotation(&[Vec3::x(); 3], &[Vec3::x(); 4], None).is_err());
        let basis = [Vec3::x(), Vec3::y(), Vec3::z()];
        assert!(horn_rotation(&basis, &basis, Some(&[1.0, -1.0, 1.0])).is_err());
        assert!(horn_rotation(&basis, &basis, Some(&[0.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn translation_examples() {
        let id = Mat3::identity();
        let m = Vec3::new(0.2, -0.1, 3.0);
        assert_eq!(estimate_translation(&id, &m, &m), Vec3::zeros());
        assert_eq!(estimate_translation(&id, &Vec3::zeros(), &Vec3::new(0.5, 0.0, 0.0)), Vec3::new(0.5, 0.0, 0.0));
    }

    #[test]
    fn register_identical_clouds() {
        let p = blob(1024, 1);
        let r = register_ume(&p, &p, &BankConfig::default()).unwrap();
        assert!((r.transform.rotation - Mat3::identity()).amax() < 1e-9);
        assert!(r.transform.translation.amax() < 1e-9);
        assert_eq!(r.chosen_constellation, Some(0));
    }

    #[test]
    fn register_noise_free_pairs() {
        let (e, t) = full_range();
        for seed in 0..20 {
            let p1 = blob(1024, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let gt = random_rigid(&mut rng, e, t);
            let p2 = apply_transform(&p1, &gt);
            let r = register_ume(&p1, &p2, &BankConfig::default()).unwrap();
            assert!((r.transform.rotation - gt.rotation).norm() < 1e-9, "seed {seed}");
            assert!((r.transform.translation - gt.translation).norm() < 1e-10);
            assert!(r.residual < 1e-9);
            assert!(!r.flags.contains(&DegeneracyFlag::HighResidual));
        }
    }

    #[test]
    fn register_power_bank() {
        let (e, t) = full_range();
        let p1 = blob(1024, 3);
        let gt = random_rigid(&mut ChaCha8Rng::seed_from_u64(3), e, t);
        let p2 = apply_transform(&p1, &gt);
        let bank = BankConfig::Power { exponents: vec![1.0, 2.0, 3.0, 4.0] };
        let r = register_ume(&p1, &p2, &bank).unwrap();
        assert!((r.transform.rotation - gt.rotation).norm() < 1e-8);
    }

    #[test]
    fn register_is_order_invariant_exactly() {
        use rand::seq::SliceRandom;
        let (e, t) = full_range();
        let p1 = blob(700, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p2 = apply_transform(&blob(700, 5), &random_rigid(&mut rng, e, t));
        let a = register_ume(&p1, &p2, &BankConfig::default()).unwrap();
        let mut o1: Vec<usize> = (0..p1.len()).collect();
        let mut o2 = o1.clone();
        o1.shuffle(&mut rng);
        o2.shuffle(&mut rng);
        let b = register_ume(&p1.select(&o1), &p2.select(&o2), &BankConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn register_scale_covariance() {
        let (e, t) = full_range();
        let p1 = blob(800, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p2 = apply_transform(&blob(800, 7), &random_rigid(&mut rng, e, t));
        let s = 3.7;
        let a = register_ume(&p1, &p2, &BankConfig::default()).unwrap();
        let b = register_ume(&p1.map_points(|p| p * s), &p2.map_points(|p| p * s), &BankConfig::default()).unwrap();
        assert!((a.transform.rotation - b.transform.rotation).amax() < 1e-9);
        assert!((a.transform.translation * s - b.transform.translation).amax() < 1e-9);
    }

    #[test]
    fn register_rejects_tiny_and_degenerate() {
        let p = PointCloud::from_slice(&[[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        assert!(register_ume(&p, &p, &BankConfig::default()).is_err());
        let line = PointCloud::from_slice(&[[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(
            register_ume(&line, &line, &BankConfig::default()),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn echo_bundles_reproduce_closed_form() {
        let (e, t) = full_range();
        for seed in 0..5 {
            let p1 = blob(900, 10 + seed);
            let mut rng = ChaCha8Rng::seed_from_u64(20 + seed);
            let p2 = apply_transform(&blob(900, 30 + seed), &random_rigid(&mut rng, e, t));
            let closed = register_ume(&p1, &p2, &BankConfig::default()).unwrap();
            let (_, b1, b2) = canonical_bundles(&p1, &p2, &BankConfig::default()).unwrap();
            let ext = register_with_external(&p1, &p2, &b1, &b2).unwrap();
            assert!((closed.transform.rotation - ext.transform.rotation).amax() < 1e-9);
            assert!((closed.transform.translation - ext.transform.translation).amax() < 1e-9);
            assert_eq!(closed.chosen_constellation, ext.chosen_constellation);
        }
    }

    #[test]
    fn external_constant_features_are_rank_deficient() {
        let p = blob(500, 40);
        let (_, b1, b2) = canonical_bundles(&p, &p, &BankConfig::default()).unwrap();
        let constant = FeatureValues::new(vec![1.0; 500 * 3], 3).unwrap();
        let c1 = UmefBundle::new(b1.coords.clone(), constant.clone()).unwrap();
        let c2 = UmefBundle::new(b2.coords.clone(), constant).unwrap();
        match register_with_external(&p, &p, &c1, &c2) {
            Err(Error::DegenerateCorrespondence { flags, .. }) => {
                assert!(flags.contains(&DegeneracyFlag::RankDeficientMoments))
            }
            other => panic!("expected rank-deficient error, got {other:?}"),
        }
    }

    #[test]
    fn external_input_validation() {
        let p = blob(200, 41);
        let (_, b1, b2) = canonical_bundles(&p, &p, &BankConfig::default()).unwrap();
        let two = FeatureValues::new(vec![1.0; 400], 2).unwrap();
        let k2 = UmefBundle::new(b1.coords.clone(), two).unwrap();
        assert!(matches!(
            register_with_external(&p, &p, &k2, &k2),
            Err(Error::InsufficientFeatures { got: 2, need: 3 })
        ));
        let short = b1.select(&(0..100).collect::<Vec<_>>());
        assert!(matches!(register_with_external(&p, &p, &short, &b2), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn symmetric_alternative_is_a_valid_composition() {
        let p = blob(300, 50);
        let gt = compose(
            &RigidTransform::from_translation(Vec3::new(0.1, 0.0, 0.0)),
            &RigidTransform::from_rotation(rot_z(30.0)).unwrap(),
        );
        let r = register_ume(&p, &apply_transform(&p, &gt), &BankConfig::default()).unwrap();
        assert!((r.transform.rotation - gt.rotation).amax() < 1e-9);
    }
}
