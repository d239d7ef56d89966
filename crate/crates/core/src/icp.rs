//! Point-to-point ICP.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::geom::{compose, PointCloud, RigidTransform, Vec3};
use crate::metrics::KdTree;
use crate::solver::{estimate_translation, horn_rotation, DegeneracyFlag, RegistrationResult};

#[derive(Debug, Clone, PartialEq)]
pub struct IcpConfig {
    pub max_iterations: usize,
    /// Stop once an iteration lowers the mean squared correspondence error by less than this.
    pub convergence_tol: f64,
    pub init: RigidTransform,
}

impl Default for IcpConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            convergence_tol: 1e-8,
            init: RigidTransform::identity(),
        }
    }
}

impl IcpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::Config(format!(
                "convergence_tol must be positive, got {}",
                self.convergence_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcpOutcome {
    pub result: RegistrationResult,
    /// Mean squared correspondence error before each iteration's update, then the final value.
    pub mse_history: Vec<f64>,
    pub converged: bool,
}

fn correspondences(moved: &[Vec3], tree: &KdTree) -> (Vec<Vec3>, f64) {
    let mut sq = 0.0;
    let targets = moved
        .iter()
        .map(|p| {
            let nb = tree.nearest(p);
            sq += nb.distance * nb.distance;
            nb.point
        })
        .collect();
    (targets, sq / moved.len() as f64)
}

fn mean(points: &[Vec3]) -> Vec3 {
    points.iter().sum::<Vec3>() / points.len() as f64
}

/// Runs ICP and reports the full error trace.
pub fn icp_detailed(p1: &PointCloud, p2: &PointCloud, config: &IcpConfig) -> Result<IcpOutcome> {
    config.validate()?;
    if p1.is_empty() || p2.is_empty() {
        return Err(Error::invalid("ICP needs non-empty clouds"));
    }
    let tree = KdTree::build(p2.points());
    let source = p1.points();
    let mut transform = config.init;
    let mut moved: Vec<Vec3> = source.iter().map(|p| transform.apply(p)).collect();
    let (mut targets, mut mse) = correspondences(&moved, &tree);
    let mut history = vec![mse];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iterations {
        iterations += 1;
        // best rigid map from the current positions onto their matches
        let mc = mean(&moved);
        let mt = mean(&targets);
        let u: Vec<Vec3> = moved.iter().map(|p| p - mc).collect();
        let v: Vec<Vec3> = targets.iter().map(|p| p - mt).collect();
        let rotation = horn_rotation(&u, &v, None)?;
        let step = RigidTransform {
            rotation,
            translation: estimate_translation(&rotation, &mc, &mt),
        };
        transform = compose(&step, &transform);
        moved = source.iter().map(|p| transform.apply(p)).collect();
        let (next_targets, next_mse) = correspondences(&moved, &tree);
        let improvement = mse - next_mse;
        targets = next_targets;
        mse = next_mse;
        history.push(mse);
        if improvement < config.convergence_tol {
            converged = true;
            break;
        }
    }

    let mut flags = BTreeSet::new();
    if !converged {
        flags.insert(DegeneracyFlag::NotConverged);
    }
    Ok(IcpOutcome {
        result: RegistrationResult {
            transform,
            chosen_constellation: None,
            residual: mse.sqrt(),
            flags,
            iterations: Some(iterations),
        },
        mse_history: history,
        converged,
    })
}

pub fn icp(p1: &PointCloud, p2: &PointCloud, config: &IcpConfig) -> Result<RegistrationResult> {
    icp_detailed(p1, p2, config).map(|o| o.result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{apply_transform, rot_z};
    use crate::mesh::{sample_mesh, shapes};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn blob(n: usize) -> PointCloud {
        sample_mesh(&shapes::asymmetric_blob(), n, &mut ChaCha8Rng::seed_from_u64(11)).unwrap()
    }

    fn angle_rad(r: &crate::geom::Mat3) -> f64 {
        ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos()
    }

    #[test]
    fn identical_clouds_converge_immediately() {
        let p = blob(500);
        let out = icp_detailed(&p, &p, &IcpConfig::default()).unwrap();
        assert!(out.converged);
        assert_eq!(out.result.iterations, Some(1));
        assert!((out.result.transform.rotation - crate::geom::Mat3::identity()).amax() < 1e-12);
    }

    #[test]
    fn small_rotation_is_recovered() {
        let p = blob(1000);
        let gt = RigidTransform::from_rotation(rot_z(5.0)).unwrap();
        let q = apply_transform(&p, &gt);
        let out = icp_detailed(&p, &q, &IcpConfig::default()).unwrap();
        let err = angle_rad(&(out.result.transform.rotation.transpose() * gt.rotation));
        assert!(err < 1e-6, "{err}");
        for w in out.mse_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
    }

    #[test]
    fn large_rotation_gets_stuck() {
        let p = blob(1000);
        let gt = RigidTransform::from_rotation(rot_z(170.0)).unwrap();
        let q = apply_transform(&p, &gt);
        let r = icp(&p, &q, &IcpConfig::default()).unwrap();
        let err = angle_rad(&(r.transform.rotation.transpose() * gt.rotation));
        assert!(err.to_degrees() > 30.0, "{}", err.to_degrees());
    }

    #[test]
    fn error_is_non_increasing_on_noisy_pairs() {
        let p = blob(800);
        let q = sample_mesh(&shapes::asymmetric_blob(), 700, &mut ChaCha8Rng::seed_from_u64(12)).unwrap();
        let q = apply_transform(&q, &RigidTransform::from_rotation(rot_z(40.0)).unwrap());
        let out = icp_detailed(&p, &q, &IcpConfig::default()).unwrap();
        for w in out.mse_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "{w:?}");
        }
    }

    #[test]
    fn config_validation_and_iteration_cap() {
        let p = blob(200);
        let bad = IcpConfig { max_iterations: 0, ..IcpConfig::default() };
        assert!(icp(&p, &p, &bad).is_err());
        let bad = IcpConfig { convergence_tol: 0.0, ..IcpConfig::default() };
        assert!(icp(&p, &p, &bad).is_err());
        let q = apply_transform(&p, &RigidTransform::from_rotation(rot_z(60.0)).unwrap());
        let one = IcpConfig { max_iterations: 1, ..IcpConfig::default() };
        let r = icp(&p, &q, &one).unwrap();
        assert_eq!(r.iterations, Some(1));
        assert!(r.flags.contains(&DegeneracyFlag::NotConverged));
    }
}
