//! Write a mesh as OFF, load it back, area-sample it and save the samples as XYZ.
//! Pass a path to an .off/.ply/.xyz file to use it instead.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use umereg::geom::{normalize_unit_sphere, Vec3};
use umereg::io::formats::format_off;
use umereg::io::{load_geometry, write_xyz, Format, Geometry};
use umereg::mesh::{sample_mesh, shapes};

fn main() -> umereg::Result<()> {
    let dir = std::env::temp_dir();
    let path = match std::env::args().nth(1) {
        Some(p) => p.into(),
        None => {
            let p = dir.join("umereg-box.off");
            std::fs::write(&p, format_off(&shapes::cuboid(Vec3::new(2.0, 1.0, 0.5))))?;
            p
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cloud = match load_geometry(&path, Format::from_path(&path)?)? {
        Geometry::Mesh(mesh) => {
            println!("{}: mesh, {} faces, area {:.4}", path.display(), mesh.faces.len(), mesh.area());
            sample_mesh(&mesh, 5000, &mut rng)?
        }
        Geometry::Cloud(cloud) => {
            println!("{}: cloud", path.display());
            cloud
        }
    };
    let unit = normalize_unit_sphere(&cloud)?;
    println!("{} points, center {:?}, scale {:.4}", unit.cloud.len(), unit.center, unit.scale);
    let out = dir.join("umereg-samples.xyz");
    write_xyz(&unit.cloud, &out)?;
    println!("wrote {}", out.display());
    Ok(())
}
