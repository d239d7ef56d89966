//! PCA frames of two poses of one shape, and the Chamfer score of every sign
//! constellation of the second frame.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use umereg::canon::{constellation_signs, disambiguate, pca_frame};
use umereg::geom::{apply_transform, rotation_from_euler_deg, RigidTransform, Vec3};
use umereg::mesh::{sample_mesh, shapes};

fn main() -> umereg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p1 = sample_mesh(&shapes::asymmetric_blob(), 1024, &mut rng)?;
    let t = RigidTransform::new(rotation_from_euler_deg([30.0, -120.0, 75.0]), Vec3::new(0.2, 0.0, -0.1))?;
    let p2 = apply_transform(&p1, &t);

    let f1 = pca_frame(&p1)?;
    let f2 = pca_frame(&p2)?;
    println!("eigenvalues {:?}", f1.eigenvalues);
    println!("near degenerate: {}", f1.near_degenerate);

    let d = disambiguate(&f1, &f2);
    for (j, c) in d.all.iter().enumerate() {
        let s = constellation_signs(j);
        let mark = if j == d.index { "  <-" } else { "" };
        println!("{j}  signs ({:+.0} {:+.0} {:+.0})  chamfer {c:.3e}{mark}", s.x, s.y, s.z);
    }
    Ok(())
}
