//! Local ICP against the closed-form solver as the initial rotation grows.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use umereg::geom::{apply_transform, rotation_from_euler_deg, RigidTransform, Vec3};
use umereg::icp::{icp, IcpConfig};
use umereg::mesh::{sample_mesh, shapes};
use umereg::metrics::rmse_rotation;
use umereg::noise::zero_intersection;
use umereg::{register_ume, BankConfig};

fn main() -> umereg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let parent = sample_mesh(&shapes::asymmetric_blob(), 4096, &mut rng)?;
    let (p1, p2) = zero_intersection(&parent, &parent, &mut rng)?;
    println!("angle  icp_err_deg  icp_iters  ume_err_deg");
    for angle in [5.0, 30.0, 60.0, 90.0, 135.0, 170.0] {
        let gt = RigidTransform::new(rotation_from_euler_deg([angle, angle / 2.0, 0.0]), Vec3::new(0.05, 0.0, 0.0))?;
        let target = apply_transform(&p2, &gt);
        let a = icp(&p1, &target, &IcpConfig::default())?;
        let b = register_ume(&p1, &target, &BankConfig::default())?;
        println!(
            "{angle:>5}  {:>11.3}  {:>9}  {:>11.3}",
            rmse_rotation(&gt.rotation, &a.transform.rotation),
            a.iterations.unwrap_or(0),
            rmse_rotation(&gt.rotation, &b.transform.rotation)
        );
    }
    Ok(())
}
