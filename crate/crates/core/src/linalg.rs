//! Small dense linear algebra helpers.

use crate::geom::{Mat3, Vec3};

/// Eigen-decomposition of a symmetric 3×3 matrix.
#[derive(Debug, Clone, Copy)]
pub struct SymmetricEigen3 {
    /// Eigenvalues in descending order.
    pub values: [f64; 3],
    /// Unit eigenvectors as columns, matching `values`.
    pub vectors: Mat3,
    pub sweeps: usize,
}

pub const JACOBI_TOL: f64 = 1e-14;
pub const JACOBI_MAX_SWEEPS: usize = 50;

/// Cyclic Jacobi iteration on a symmetric 3×3 matrix.
///
/// Sweeps over the three off-diagonal pairs until the off-diagonal Frobenius
/// norm falls below `JACOBI_TOL` times the matrix norm, or `JACOBI_MAX_SWEEPS`
/// is reached. Only the upper triangle of `m` is read.
pub fn symmetric_eigen3(m: &Mat3) -> SymmetricEigen3 {
    let mut a = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            a[i][j] = if i <= j { m[(i, j)] } else { m[(j, i)] };
        }
    }
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let scale = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();

    let mut sweeps = 0;
    while sweeps < JACOBI_MAX_SWEEPS {
        let off = (2.0 * (a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2))).sqrt();
        if off <= JACOBI_TOL * scale || off == 0.0 {
            break;
        }
        sweeps += 1;
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq == 0.0 {
                continue;
            }
            // Rotation angle zeroing a[p][q] (Numerical Recipes form).
            let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;

            let r = 3 - p - q;
            let app = a[p][p];
            let aqq = a[q][q];
            a[p][p] = app - t * apq;
            a[q][q] = aqq + t * apq;
            a[p][q] = 0.0;
            a[q][p] = 0.0;
            let arp = a[r][p];
            let arq = a[r][q];
            a[r][p] = c * arp - s * arq;
            a[p][r] = a[r][p];
            a[r][q] = s * arp + c * arq;
            a[q][r] = a[r][q];

            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]).then(i.cmp(&j)));
    let values = order.map(|i| a[i][i]);
    let columns = order.map(|i| Vec3::new(v[0][i], v[1][i], v[2][i]).normalize());
    SymmetricEigen3 {
        values,
        vectors: Mat3::from_columns(&columns),
        sweeps,
    }
}

/// Sum of `terms` that does not depend on their order.
///
/// The terms are sorted before a compensated (Neumaier) summation, so any
/// permutation of the same multiset yields a bit-identical result.
pub fn order_free_sum(terms: &mut [f64]) -> f64 {
    terms.sort_unstable_by(f64::total_cmp);
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in terms.iter() {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
