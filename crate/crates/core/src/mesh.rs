//! Triangle meshes, area-weighted surface sampling and a few procedural shapes.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::{PointCloud, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}

impl Mesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        if let Some(i) = vertices.iter().position(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::invalid(format!("vertex {i} has a non-finite coordinate")));
        }
        if let Some(f) = faces.iter().find(|f| f.iter().any(|&i| i >= vertices.len())) {
            return Err(Error::invalid(format!(
                "face {f:?} indexes past {} vertices",
                vertices.len()
            )));
        }
        Ok(Self { vertices, faces })
    }

    pub fn triangle(&self, f: usize) -> [Vec3; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_areas(&self) -> Vec<f64> {
        (0..self.faces.len())
            .map(|f| {
                let [a, b, c] = self.triangle(f);
                0.5 * (b - a).cross(&(c - a)).norm()
            })
            .collect()
    }

    pub fn area(&self) -> f64 {
        self.triangle_areas().iter().sum()
    }
}

/// Uniform point on a triangle from two uniforms in [0, 1).
pub fn triangle_point(tri: &[Vec3; 3], r1: f64, r2: f64) -> Vec3 {
    let s = r1.sqrt();
    tri[0] * (1.0 - s) + tri[1] * (s * (1.0 - r2)) + tri[2] * (s * r2)
}

/// Draws `n` points uniformly from the surface, with ids `0..n`.
pub fn sample_mesh<R: Rng + ?Sized>(mesh: &Mesh, n: usize, rng: &mut R) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::invalid("sample size must be positive"));
    }
    let mut cdf = mesh.triangle_areas();
    let mut acc = 0.0;
    for a in cdf.iter_mut() {
        acc += *a;
        *a = acc;
    }
    if !(acc > 0.0) {
        return Err(Error::invalid("mesh has zero surface area"));
    }
    let last = cdf.len() - 1;
    let points = (0..n)
        .map(|_| {
            let u = rng.random::<f64>() * acc;
            // skips zero-area faces since their cdf entry equals the previous one
            let f = cdf.partition_point(|&c| c <= u).min(last);
            triangle_point(&mesh.triangle(f), rng.random(), rng.random())
        })
        .collect();
    PointCloud::with_sequential_ids(points)
}

pub mod shapes {
    use super::*;

    /// Latitude-longitude sphere with radius `radius(u)` along unit direction `u`.
    pub fn radial_sphere(stacks: usize, slices: usize, radius: impl Fn(&Vec3) -> f64) -> Mesh {
        let mut vertices = vec![Vec3::z() * radius(&Vec3::z())];
        for i in 1..stacks {
            let theta = std::f64::consts::PI * i as f64 / stacks as f64;
            for j in 0..slices {
                let phi = std::f64::consts::TAU * j as f64 / slices as f64;
                let u = Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos());
                vertices.push(u * radius(&u));
            }
        }
        vertices.push(-Vec3::z() * radius(&-Vec3::z()));
        let south = vertices.len() - 1;
        let ring = |i: usize, j: usize| 1 + (i - 1) * slices + j % slices;

        let mut faces = Vec::new();
        for j in 0..slices {
            faces.push([0, ring(1, j), ring(1, j + 1)]);
            faces.push([south, ring(stacks - 1, j + 1), ring(stacks - 1, j)]);
        }
        for i in 1..stacks - 1 {
            for j in 0..slices {
                faces.push([ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)]);
                faces.push([ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)]);
            }
        }
        Mesh { vertices, faces }
    }

    /// Stretched sphere with four Gaussian bumps of different sizes.
    /// It has no rotational or mirror symmetry and a well separated spectrum.
    pub fn asymmetric_blob() -> Mesh {
        let bumps: [(Vec3, f64, f64); 4] = [
            (Vec3::new(1.0, 0.3, 0.2), 0.45, 0.08),
            (Vec3::new(-0.4, 1.0, 0.5), 0.3, 0.12),
            (Vec3::new(0.2, -0.6, 1.0), 0.25, 0.05),
            (Vec3::new(-0.7, -0.5, -0.6), 0.35, 0.1),
        ];
        let bumps = bumps.map(|(a, h, w)| (a.normalize(), h, w));
        let stretch = Vec3::new(1.3, 1.0, 0.75);
        let mut mesh = radial_sphere(64, 128, |u| {
            1.0 + bumps
                .iter()
                .map(|(a, h, w)| h * (-(1.0 - u.dot(a)) / w).exp())
                .sum::<f64>()
        });
        for v in mesh.vertices.iter_mut() {
            *v = v.component_mul(&stretch);
        }
        mesh
    }

    /// Axis-aligned box centred at the origin. Invariant under 180° about each axis.
    pub fn cuboid(size: Vec3) -> Mesh {
        let h = size / 2.0;
        let vertices = (0..8)
            .map(|i| {
                Vec3::new(
                    if i & 1 == 0 { -h.x } else { h.x },
                    if i & 2 == 0 { -h.y } else { h.y },
                    if i & 4 == 0 { -h.z } else { h.z },
                )
            })
            .collect();
        let quads = [
            [0, 2, 3, 1],
            [4, 5, 7, 6],
            [0, 1, 5, 4],
            [2, 6, 7, 3],
            [0, 4, 6, 2],
            [1, 3, 7, 5],
        ];
        let faces = quads
            .iter()
            .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
            .collect();
        Mesh { vertices, faces }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn single_triangle_samples_stay_inside() {
        let tri = [Vec3::new(0.0, 0.0, 1.0), Vec3::new(2.0, 0.0, 1.0), Vec3::new(0.0, 1.0, 1.0)];
        let mesh = Mesh::new(tri.to_vec(), vec![[0, 1, 2]]).unwrap();
        let cloud = sample_mesh(&mesh, 1000, &mut rng(1)).unwrap();
        for p in cloud.points() {
            assert!((p.z - 1.0).abs() < 1e-12);
            assert!(p.x >= -1e-12 && p.y >= -1e-12 && p.x / 2.0 + p.y <= 1.0 + 1e-12);
        }
        assert_eq!(cloud.ids().unwrap(), (0..1000).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn area_weighted_face_choice() {
        // areas 3 : 1
        let v = vec![
            Vec3::zeros(),
            Vec3::new(3.0, 0.0, 0.0),
            Vec3::new(0.0, 2.0, 0.0),
            Vec3::new(10.0, 0.0, 0.0),
            Vec3::new(11.0, 0.0, 0.0),
            Vec3::new(10.0, 2.0, 0.0),
        ];
        let mesh = Mesh::new(v, vec![[0, 1, 2], [3, 4, 5]]).unwrap();
        let n = 100_000;
        let cloud = sample_mesh(&mesh, n, &mut rng(2)).unwrap();
        let first = cloud.points().iter().filter(|p| p.x < 5.0).count() as f64;
        let sd = (n as f64 * 0.75 * 0.25).sqrt();
        assert!((first - 0.75 * n as f64).abs() < 3.0 * sd, "{first}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let mesh = shapes::cuboid(Vec3::new(1.0, 2.0, 3.0));
        let a = sample_mesh(&mesh, 500, &mut rng(3)).unwrap();
        let b = sample_mesh(&mesh, 500, &mut rng(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_area_is_rejected() {
        let v = vec![Vec3::zeros(), Vec3::x(), Vec3::x() * 2.0];
        let mesh = Mesh::new(v, vec![[0, 1, 2]]).unwrap();
        assert!(sample_mesh(&mesh, 10, &mut rng(4)).is_err());
        let empty = Mesh::new(vec![], vec![]).unwrap();
        assert!(sample_mesh(&empty, 10, &mut rng(4)).is_err());
        assert!(Mesh::new(vec![Vec3::zeros()], vec![[0, 0, 1]]).is_err());
    }

    #[test]
    fn zero_area_faces_are_never_chosen() {
        let v = vec![Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::x() * 2.0];
        let mesh = Mesh::new(v, vec![[0, 1, 3], [0, 1, 2], [0, 1, 3]]).unwrap();
        let cloud = sample_mesh(&mesh, 2000, &mut rng(5)).unwrap();
        assert!(cloud.points().iter().all(|p| p.x + p.y <= 1.0 + 1e-12));
    }

    #[test]
    fn procedural_shapes_are_closed() {
        let cube = shapes::cuboid(Vec3::new(1.0, 1.0, 1.0));
        assert!((cube.area() - 6.0).abs() < 1e-12);
        let sphere = shapes::radial_sphere(64, 128, |_| 1.0);
        let exact = 4.0 * std::f64::consts::PI;
        assert!((sphere.area() - exact).abs() < 0.01 * exact);
        // every edge of a closed surface is shared by exactly two faces
        for mesh in [cube, sphere, shapes::asymmetric_blob()] {
            let mut edges = std::collections::HashMap::new();
            for f in &mesh.faces {
                for k in 0..3 {
                    let (a, b) = (f[k], f[(k + 1) % 3]);
                    *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
                }
            }
            assert!(edges.values().all(|&c| c == 2));
        }
    }

    #[test]
    fn cuboid_faces_point_outward() {
        let m = shapes::cuboid(Vec3::new(2.0, 1.0, 0.5));
        for f in 0..m.faces.len() {
            let [a, b, c] = m.triangle(f);
            let n = (b - a).cross(&(c - a));
            assert!(n.dot(&((a + b + c) / 3.0)) > 0.0);
        }
    }
}
