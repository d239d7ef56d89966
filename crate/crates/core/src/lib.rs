//! Closed-form rigid registration of point clouds via moment embeddings.
//!
//! The pipeline: principal-axis frames with sign disambiguation
//! ([`canon`]), rotation-invariant features expanded into moment vectors
//! ([`ume`]), and a weighted Horn/Kabsch solve for the rotation
//! ([`solver`]). Around it sit noise models, metrics, an ICP baseline, file
//! formats and a benchmark harness.
//!
//! ```
//! use rand::SeedableRng;
//! use umereg::geom::{apply_transform, rotation_from_euler_deg, RigidTransform, Vec3};
//! use umereg::mesh::{sample_mesh, shapes};
//! use umereg::solver::{register_ume, BankConfig};
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
//! let p1 = sample_mesh(&shapes::asymmetric_blob(), 1024, &mut rng).unwrap();
//! let gt = RigidTransform::new(rotation_from_euler_deg([40.0, -75.0, 160.0]), Vec3::new(0.1, 0.2, -0.3)).unwrap();
//! let p2 = apply_transform(&p1, &gt);
//! let r = register_ume(&p1, &p2, &BankConfig::default()).unwrap();
//! assert!((r.transform.rotation - gt.rotation).norm() < 1e-9);
//! ```

pub mod bench;
pub mod canon;
pub mod error;
pub mod geom;
pub mod icp;
pub mod io;
pub mod linalg;
pub mod mesh;
pub mod metrics;
pub mod noise;
pub mod solver;
pub mod ume;

pub use error::{Error, Result};
pub use geom::{PointCloud, RigidTransform};
pub use solver::{register_ume, register_with_external, BankConfig, RegistrationResult};
