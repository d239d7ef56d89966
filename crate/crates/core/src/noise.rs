//! Observation models applied to a corresponding pair of clouds.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geom::{PointCloud, Vec3};

/// Redraws allowed before an empty Bernoulli sample becomes an error.
pub const MAX_RESAMPLE_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseSpec {
    None,
    /// Keep each point of cloud `i` independently with probability `q_i`.
    Bernoulli { q1: f64, q2: f64 },
    /// Split a `2N` parent into complementary halves.
    ZeroIntersection,
    /// Gaussian perturbation of the second cloud; `sigma` is a standard deviation.
    Awgn { sigma: f64 },
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Bernoulli { q1, q2 } => {
                for q in [q1, q2] {
                    if !(q > 0.0 && q <= 1.0) {
                        return Err(Error::invalid(format!("keep probability {q} outside (0, 1]")));
                    }
                }
            }
            Self::Awgn { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => {
                return Err(Error::invalid(format!("sigma must be finite and >= 0, got {sigma}")));
            }
            _ => {}
        }
        Ok(())
    }

    /// Applies the model to a pair in correspondence.
    pub fn apply<R: Rng + ?Sized>(
        &self,
        p1: &PointCloud,
        p2: &PointCloud,
        rng: &mut R,
    ) -> Result<(PointCloud, PointCloud)> {
        self.validate()?;
        match *self {
            Self::None => Ok((p1.clone(), p2.clone())),
            Self::Bernoulli { q1, q2 } => bernoulli_noise(p1, p2, q1, q2, rng),
            Self::ZeroIntersection => zero_intersection(p1, p2, rng),
            Self::Awgn { sigma } => Ok((p1.clone(), awgn(p2, sigma, rng)?)),
        }
    }
}

fn check_correspondence(p1: &PointCloud, p2: &PointCloud) -> Result<()> {
    let (Some(a), Some(b)) = (p1.ids(), p2.ids()) else {
        return Err(Error::invalid("noise models need clouds carrying point ids"));
    };
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return Err(Error::invalid("clouds are not in correspondence (id sets differ)"));
    }
    Ok(())
}

fn bernoulli_keep<R: Rng + ?Sized>(cloud: &PointCloud, q: f64, rng: &mut R, what: &'static str) -> Result<PointCloud> {
    for _ in 0..MAX_RESAMPLE_ATTEMPTS {
        let keep: Vec<usize> = (0..cloud.len()).filter(|_| rng.random_bool(q)).collect();
        if !keep.is_empty() {
            return Ok(cloud.select(&keep));
        }
    }
    Err(Error::ResampleExhausted {
        attempts: MAX_RESAMPLE_ATTEMPTS,
        what: what.to_string(),
    })
}

/// Independent per-point thinning; ids are kept, so survivors of both clouds
/// still identify their correspondences.
pub fn bernoulli_noise<R: Rng + ?Sized>(
    p1: &PointCloud,
    p2: &PointCloud,
    q1: f64,
    q2: f64,
    rng: &mut R,
) -> Result<(PointCloud, PointCloud)> {
    NoiseSpec::Bernoulli { q1, q2 }.validate()?;
    check_correspondence(p1, p2)?;
    let a = bernoulli_keep(p1, q1, rng, "first cloud")?;
    let b = bernoulli_keep(p2, q2, rng, "second cloud")?;
    Ok((a, b))
}

/// A uniform half of the ids goes to the first cloud, the rest to the second.
pub fn zero_intersection<R: Rng + ?Sized>(
    parent1: &PointCloud,
    parent2: &PointCloud,
    rng: &mut R,
) -> Result<(PointCloud, PointCloud)> {
    check_correspondence(parent1, parent2)?;
    let n2 = parent1.len();
    if n2 % 2 != 0 {
        return Err(Error::invalid(format!("zero-intersection needs an even parent size, got {n2}")));
    }
    let mut ids1: Vec<usize> = parent1.ids().unwrap().to_vec();
    ids1.sort_unstable();
    let mut in_first = vec![false; n2];
    for k in index::sample(rng, n2, n2 / 2) {
        in_first[k] = true;
    }
    let chosen = |id: usize| in_first[ids1.binary_search(&id).unwrap()];
    let pick = |cloud: &PointCloud, want: bool| -> Vec<usize> {
        let ids = cloud.ids().unwrap();
        (0..cloud.len()).filter(|&i| chosen(ids[i]) == want).collect()
    };
    Ok((parent1.select(&pick(parent1, true)), parent2.select(&pick(parent2, false))))
}

/// Adds `N(0, sigma²)` to every coordinate. No clipping.
pub fn awgn<R: Rng + ?Sized>(cloud: &PointCloud, sigma: f64, rng: &mut R) -> Result<PointCloud> {
    NoiseSpec::Awgn { sigma }.validate()?;
    if sigma == 0.0 {
        return Ok(cloud.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let points = cloud
        .points()
        .iter()
        .map(|p| {
            let (x, y, z) = (normal.sample(rng), normal.sample(rng), normal.sample(rng));
            p + Vec3::new(x, y, z)
        })
        .collect();
    Ok(PointCloud::from_parts(points, cloud.ids().map(<[usize]>::to_vec)))
}
