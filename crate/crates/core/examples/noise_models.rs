//! What each noise model does to a pair of identical clouds.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use umereg::mesh::{sample_mesh, shapes};
use umereg::metrics::chamfer;
use umereg::noise::NoiseSpec;

fn main() -> umereg::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let parent = sample_mesh(&shapes::asymmetric_blob(), 2000, &mut rng)?;
    let specs = [
        NoiseSpec::None,
        NoiseSpec::Bernoulli { q1: 0.6, q2: 0.4 },
        NoiseSpec::ZeroIntersection,
        NoiseSpec::Awgn { sigma: 0.01 },
    ];
    for spec in specs {
        let (a, b) = spec.apply(&parent, &parent, &mut rng)?;
        let shared = match (a.ids(), b.ids()) {
            (Some(ia), Some(ib)) => {
                let ia: BTreeSet<_> = ia.iter().collect();
                ib.iter().filter(|i| ia.contains(i)).count().to_string()
            }
            _ => "-".into(),
        };
        println!(
            "{spec:?}: |P1| = {}, |P2| = {}, shared ids = {shared}, chamfer = {:.4}",
            a.len(),
            b.len(),
            chamfer(&a, &b)?
        );
    }
    Ok(())
}
