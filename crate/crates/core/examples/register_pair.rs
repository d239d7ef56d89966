//! Sample a shape, move it, and recover the motion in closed form.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use umereg::geom::{apply_transform, random_rigid, Interval};
use umereg::mesh::{sample_mesh, shapes};
use umereg::metrics::{chamfer, rmse_rotation};
use umereg::{register_ume, BankConfig};

fn main() -> umereg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let source = sample_mesh(&shapes::asymmetric_blob(), 2048, &mut rng)?;
    let gt = random_rigid(&mut rng, Interval::new(-180.0, 180.0)?, Interval::new(-0.5, 0.5)?);
    let target = apply_transform(&source, &gt);

    let result = register_ume(&source, &target, &BankConfig::default())?;
    let aligned = apply_transform(&source, &result.transform);

    println!("constellation {:?}", result.chosen_constellation);
    println!("flags {:?}", result.flags);
    println!("rotation error {:.3e} deg", rmse_rotation(&gt.rotation, &result.transform.rotation));
    println!("translation error {:.3e}", (gt.translation - result.transform.translation).norm());
    println!("chamfer after alignment {:.3e}", chamfer(&aligned, &target)?);
    Ok(())
}
