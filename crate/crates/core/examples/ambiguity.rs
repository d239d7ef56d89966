//! A box has three mirror planes. After zero-intersection resampling, the pose
//! rotated 180 degrees about a box axis fits the data about as well as the
//! true pose, so no shape-only method can tell them apart. The last two
//! columns show where the closed-form solver lands; on this shape its
//! moments are too weak to reach either pose.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use umereg::geom::{apply_transform, compose, random_rigid, rot_z, Interval, RigidTransform, Vec3};
use umereg::mesh::{sample_mesh, shapes};
use umereg::metrics::{chamfer, rmse_rotation};
use umereg::noise::zero_intersection;
use umereg::{register_ume, BankConfig};

fn main() -> umereg::Result<()> {
    let cuboid = shapes::cuboid(Vec3::new(2.0, 1.0, 0.5));
    let flip = RigidTransform::from_rotation(rot_z(180.0))?;
    println!("seed  gap     flipped  flip_err_deg  ume_chamfer  ume_err_deg");
    for seed in 0..6 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parent = sample_mesh(&cuboid, 2048, &mut rng)?;
        let gt = random_rigid(&mut rng, Interval::new(-180.0, 180.0)?, Interval::new(-0.5, 0.5)?);
        let (q1, q2) = zero_intersection(&parent, &parent, &mut rng)?;
        let q2 = apply_transform(&q2, &gt);
        let alt = compose(&gt, &flip);
        let r = register_ume(&q1, &q2, &BankConfig::default())?;
        println!(
            "{seed:>4}  {:.4}  {:.4}   {:>12.1}  {:>11.4}  {:>11.1}",
            chamfer(&apply_transform(&q1, &gt), &q2)?,
            chamfer(&apply_transform(&q1, &alt), &q2)?,
            rmse_rotation(&gt.rotation, &alt.rotation),
            chamfer(&apply_transform(&q1, &r.transform), &q2)?,
            rmse_rotation(&gt.rotation, &r.transform.rotation)
        );
    }
    Ok(())
}
