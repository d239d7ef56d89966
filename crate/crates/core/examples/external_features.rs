//! Round trip through UMEF bundles: export canonical coordinates with
//! features, read them back, and register from the bundles alone. Any
//! external feature extractor can replace the echoed radial bank.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use umereg::geom::{apply_transform, rotation_from_euler_deg, RigidTransform, Vec3};
use umereg::io::{read_umef, write_umef};
use umereg::mesh::{sample_mesh, shapes};
use umereg::solver::canonical_bundles;
use umereg::{register_ume, register_with_external, BankConfig};

fn main() -> umereg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let p1 = sample_mesh(&shapes::asymmetric_blob(), 1500, &mut rng)?;
    let t = RigidTransform::new(rotation_from_euler_deg([-70.0, 20.0, 160.0]), Vec3::new(0.0, 0.3, 0.1))?;
    let p2 = apply_transform(&p1, &t);

    let (frames, b1, b2) = canonical_bundles(&p1, &p2, &BankConfig::default())?;
    println!("constellation {} with {} feature channels", frames.disambiguation.index, b1.n_features());

    let dir = std::env::temp_dir().join(format!("umereg-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    write_umef(&b1, dir.join("p1.umef"))?;
    write_umef(&b2, dir.join("p2.umef"))?;
    let ext = register_with_external(&p1, &p2, &read_umef(dir.join("p1.umef"))?, &read_umef(dir.join("p2.umef"))?)?;
    std::fs::remove_dir_all(&dir)?;

    let closed = register_ume(&p1, &p2, &BankConfig::default())?;
    println!(
        "external vs built-in rotation difference {:.3e}",
        (ext.transform.rotation - closed.transform.rotation).norm()
    );
    println!("residual {:.3e}, flags {:?}", ext.residual, ext.flags);
    Ok(())
}
