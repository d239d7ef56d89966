//! File formats: geometry input, UMEF feature bundles, transform JSON.

pub mod formats;
pub mod transform_json;
pub mod umef;

pub use formats::{load_cloud, load_geometry, write_xyz, Format, Geometry};
pub use transform_json::{read_transform, write_transform};
pub use umef::{read_umef, write_umef, UmefBundle};
