use crate::{Mat4, Tensor4, DIM};

use super::curvature::CurvatureBundle;
use super::frame;

/// `R` minus its Ricci and scalar parts, in the same index layout as `riemann`.
pub fn weyl_from_parts(riemann: &Tensor4, ricci: &Mat4, scalar: f64, g: &Mat4) -> Tensor4 {
    let mut w = *riemann;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    let gg = g[j][k] * g[i][l] - g[i][k] * g[j][l];
                    let rg = ricci[j][k] * g[i][l] - ricci[i][k] * g[j][l] + g[j][k] * ricci[i][l]
                        - g[i][k] * ricci[j][l];
                    w[i][j][k][l] -= -scalar / 6.0 * gg + 0.5 * rg;
                }
            }
        }
    }
    w
}

pub fn weyl(bundle: &CurvatureBundle) -> Tensor4 {
    bundle.weyl
}

/// Index pairs spanning Λ² of the orthonormal frame.
const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (2, 3), (3, 1), (1, 2)];

fn levi_civita(a: usize, b: usize, c: usize, d: usize) -> f64 {
    let p = [a, b, c, d];
    for i in 0..DIM {
        for j in i + 1..DIM {
            if p[i] == p[j] {
                return 0.0;
            }
        }
    }
    let mut sign = 1.0;
    for i in 0..DIM {
        for j in i + 1..DIM {
            if p[i] > p[j] {
                sign = -sign;
            }
        }
    }
    sign
}

type Mat6 = [[f64; 6]; 6];

fn mat6_mul(a: &Mat6, b: &Mat6) -> Mat6 {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..6).map(|k| a[i][k] * b[k][j]).sum()))
}

/// Weyl tensor split by the Hodge star on 2-forms, coordinate orientation.
#[derive(Debug, Clone)]
pub struct SelfDualSplit {
    /// Frame components of `W⁺`.
    pub plus: Tensor4,
    /// Frame components of `W⁻`.
    pub minus: Tensor4,
    pub norm_plus: f64,
    pub norm_minus: f64,
    /// `max |⋆⋆ − 1|` on frame 2-forms.
    pub star_square_residual: f64,
}

fn to_tensor(m: &Mat6) -> Tensor4 {
    let mut t = [[[[0.0; DIM]; DIM]; DIM]; DIM];
    for (p, &(a, b)) in PAIRS.iter().enumerate() {
        for (q, &(c, d)) in PAIRS.iter().enumerate() {
            let v = m[p][q];
            t[a][b][c][d] = v;
            t[b][a][c][d] = -v;
            t[a][b][d][c] = -v;
            t[b][a][d][c] = v;
        }
    }
    t
}

pub fn weyl_selfdual_split(bundle: &CurvatureBundle) -> SelfDualSplit {
    let wf = bundle.frame.tensor4(&bundle.weyl);
    let m: Mat6 = std::array::from_fn(|p| {
        std::array::from_fn(|q| {
            let (a, b) = PAIRS[p];
            let (c, d) = PAIRS[q];
            wf[a][b][c][d]
        })
    });
    // (⋆ω)_cd = ½ ε_abcd ω^ab
    let star: Mat6 = std::array::from_fn(|q| {
        std::array::from_fn(|p| {
            let (a, b) = PAIRS[p];
            let (c, d) = PAIRS[q];
            levi_civita(a, b, c, d)
        })
    });
    let s2 = mat6_mul(&star, &star);
    let mut star_square_residual: f64 = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            let id = if i == j { 1.0 } else { 0.0 };
            star_square_residual = star_square_residual.max((s2[i][j] - id).abs());
        }
    }
    let proj = |sign: f64| -> Mat6 {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| 0.5 * ((if i == j { 1.0 } else { 0.0 }) + sign * star[i][j]))
        })
    };
    let (pp, pm) = (proj(1.0), proj(-1.0));
    let mp = mat6_mul(&pp, &mat6_mul(&m, &pp));
    let mm = mat6_mul(&pm, &mat6_mul(&m, &pm));
    let plus = to_tensor(&mp);
    let minus = to_tensor(&mm);
    SelfDualSplit {
        norm_plus: frame::frobenius4(&plus),
        norm_minus: frame::frobenius4(&minus),
        plus,
        minus,
        star_square_residual,
    }
}
