use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use super::curvature::CurvatureBundle;

/// Clustering tolerance for multiplicity patterns, relative to `1 + max|r|`.
pub const CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RicciSpectrum {
    /// Eigenvalues of the Ricci operator, descending.
    pub eigenvalues: [f64; 4],
    /// Cluster sizes, descending.
    pub pattern: Vec<usize>,
}

/// Cluster sizes of `values` (any order), sorted descending.
pub fn multiplicity_pattern(values: &[f64], tol: f64) -> Vec<usize> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    let scale = 1.0 + v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut sizes = Vec::new();
    let mut run = 0;
    for i in 0..v.len() {
        run += 1;
        if i + 1 == v.len() || (v[i] - v[i + 1]).abs() > tol * scale {
            sizes.push(run);
            run = 0;
        }
    }
    sizes.sort_by(|a, b| b.cmp(a));
    sizes
}

pub fn ricci_spectrum(bundle: &CurvatureBundle) -> RicciSpectrum {
    let rf = bundle.frame.tensor2(&bundle.ricci);
    let m = Matrix4::from_fn(|i, j| 0.5 * (rf[i][j] + rf[j][i]));
    let eig = m.symmetric_eigen();
    let mut ev: [f64; 4] = std::array::from_fn(|i| eig.eigenvalues[i]);
    ev.sort_by(|a, b| b.total_cmp(a));
    RicciSpectrum {
        eigenvalues: ev,
        pattern: multiplicity_pattern(&ev, CLUSTER_TOL),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn patterns() {
        assert_eq!(multiplicity_pattern(&[0.0; 4], CLUSTER_TOL), vec![4]);
        assert_eq!(multiplicity_pattern(&[1.0, -1.0, 1.0, -1.0], CLUSTER_TOL), vec![2, 2]);
        assert_eq!(multiplicity_pattern(&[2.0, 3.0, 2.0, 2.0 + 1e-9], CLUSTER_TOL), vec![3, 1]);
        assert_eq!(multiplicity_pattern(&[-6.0, -8.0, -10.0, -12.0], CLUSTER_TOL), vec![1, 1, 1, 1]);
    }
}
