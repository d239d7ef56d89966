//! Rotation equivariance of the moment embedding: rotating the centered cloud
//! rotates every column of the embedding matrix.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use umereg::geom::{rotation_from_euler_deg, PointCloud};
use umereg::mesh::{sample_mesh, shapes};
use umereg::ume::{apply_weights, radial_feature, ume_matrix, Normalization, WeightBank};

fn main() -> umereg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let raw = sample_mesh(&shapes::asymmetric_blob(), 4096, &mut rng)?;
    let c = raw.centroid();
    let p = raw.map_points(|x| x - c);
    let r = rotation_from_euler_deg([10.0, 50.0, -140.0]);
    let q: PointCloud = p.map_points(|x| r * x);

    let (fp, fq) = (radial_feature(&p)?, radial_feature(&q)?);
    // edges come from both clouds, so the top edge covers either maximum
    let rp: Vec<f64> = fp.channel(0).collect();
    let rq: Vec<f64> = fq.channel(0).collect();
    let bank = WeightBank::pooled_quantile_bins(&rp, &rq, 8)?;
    println!("{} channels", bank.channels());

    let up = ume_matrix(&p, &apply_weights(&fp, &bank)?, Normalization::Mean)?;
    let uq = ume_matrix(&q, &apply_weights(&fq, &bank)?, Normalization::Mean)?;
    let residual = (r * &up.matrix - &uq.matrix).norm() / up.matrix.norm();
    println!("relative residual |R U(P) - U(RP)| / |U(P)| = {residual:.3e}");
    for (j, col) in up.columns().iter().enumerate() {
        println!("column {j}: [{:+.4} {:+.4} {:+.4}]", col.x, col.y, col.z);
    }
    Ok(())
}
