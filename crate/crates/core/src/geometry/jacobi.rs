use crate::error::{Error, Result};
use crate::{Mat4, Vec4, DIM};

use super::curvature::CurvatureBundle;
use super::frame::{self, matmul};

/// Jacobi operator `λ_X(Y) = R(Y,X)X`, its covariant derivative along `X`,
/// and their commutator. Matrices are coordinate (1,1) operators `A[l][j]`.
#[derive(Debug, Clone)]
pub struct JacobiPackage {
    pub direction: Vec4,
    pub lambda: Mat4,
    pub lambda_prime: Mat4,
    /// `λ'_X ∘ λ_X − λ_X ∘ λ'_X`.
    pub commutator: Mat4,
    /// The same three operators in the bundle's orthonormal frame.
    pub lambda_frame: Mat4,
    pub lambda_prime_frame: Mat4,
    pub commutator_frame: Mat4,
}

pub fn jacobi_package(bundle: &CurvatureBundle, x: &Vec4) -> Result<JacobiPackage> {
    let n2 = frame::inner(&bundle.g, x, x);
    if (n2 - 1.0).abs() > 1e-12 {
        return Err(Error::Argument(format!("direction is not unit: g(X,X) = {n2}")));
    }
    let rm = &bundle.riemann_mixed;
    let dr = bundle.nabla_riemann_mixed();
    let mut lambda = [[0.0; DIM]; DIM];
    let mut lambda_prime = [[0.0; DIM]; DIM];
    for l in 0..DIM {
        for j in 0..DIM {
            let mut s = 0.0;
            let mut sp = 0.0;
            for a in 0..DIM {
                for b in 0..DIM {
                    let xx = x[a] * x[b];
                    s += rm[l][j][a][b] * xx;
                    for m in 0..DIM {
                        sp += dr[m][l][j][a][b] * x[m] * xx;
                    }
                }
            }
            lambda[l][j] = s;
            lambda_prime[l][j] = sp;
        }
    }
    let ab = matmul(&lambda_prime, &lambda);
    let ba = matmul(&lambda, &lambda_prime);
    let commutator: Mat4 = std::array::from_fn(|i| std::array::from_fn(|j| ab[i][j] - ba[i][j]));
    let f = &bundle.frame;
    Ok(JacobiPackage {
        direction: *x,
        lambda_frame: f.operator(&bundle.g, &lambda),
        lambda_prime_frame: f.operator(&bundle.g, &lambda_prime),
        commutator_frame: f.operator(&bundle.g, &commutator),
        lambda,
        lambda_prime,
        commutator,
    })
}

fn symmetric_part_residual(m: &Mat4, sign: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            worst = worst.max((m[i][j] - sign * m[j][i]).abs());
        }
    }
    worst
}

impl JacobiPackage {
    pub fn lambda_norm(&self) -> f64 {
        frame::frobenius2(&self.lambda_frame)
    }

    pub fn lambda_prime_norm(&self) -> f64 {
        frame::frobenius2(&self.lambda_prime_frame)
    }

    pub fn commutator_norm(&self) -> f64 {
        frame::frobenius2(&self.commutator_frame)
    }

    /// Relative failure of `λ_X` and `λ'_X` to be self-adjoint.
    pub fn self_adjoint_residual(&self) -> f64 {
        let a = symmetric_part_residual(&self.lambda_frame, 1.0) / (1.0 + self.lambda_norm());
        let b = symmetric_part_residual(&self.lambda_prime_frame, 1.0) / (1.0 + self.lambda_prime_norm());
        a.max(b)
    }

    /// Relative failure of `L_X` to be skew-adjoint.
    pub fn skew_residual(&self) -> f64 {
        symmetric_part_residual(&self.commutator_frame, -1.0)
            / (1.0 + self.lambda_norm() * self.lambda_prime_norm())
    }

    /// `|λ_X(X)|`, coordinate max-norm.
    pub fn kernel_residual(&self) -> f64 {
        (0..DIM)
            .map(|l| (0..DIM).map(|j| self.lambda[l][j] * self.direction[j]).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }
}
