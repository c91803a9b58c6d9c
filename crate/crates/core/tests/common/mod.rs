#![allow(dead_code)]

use confflat::geometry::{frame, MetricChart};
use confflat::jet::Jet3;
use confflat::{Mat4, Tensor4, DIM};

pub fn one() -> Jet3 {
    Jet3::constant(1.0)
}

pub fn flat() -> MetricChart {
    MetricChart::diagonal("flat", |_| Ok([one(); DIM]), |_| Ok(()))
}

/// `dx₁² + e^{2x₁}(dx₂² + dx₃² + dx₄²)`, the hyperbolic 4-space.
pub fn hyperbolic() -> MetricChart {
    MetricChart::diagonal(
        "H4",
        |x| {
            let e = (x[0] * 2.0).exp();
            Ok([one(), e, e, e])
        },
        |_| Ok(()),
    )
}

/// Conformal factor `(1 + (k/4)(u² + v²))⁻²` of a surface of curvature `k`.
fn surface(k: f64, u: Jet3, v: Jet3) -> Jet3 {
    (one() + (u * u + v * v) * (0.25 * k)).powi(-2)
}

/// Product of two surfaces of constant curvature `k1` and `k2`.
pub fn surface_product(k1: f64, k2: f64) -> MetricChart {
    MetricChart::diagonal(
        format!("S({k1})xS({k2})"),
        move |x| {
            let a = surface(k1, x[0], x[1]);
            let b = surface(k2, x[2], x[3]);
            Ok([a, a, b, b])
        },
        |_| Ok(()),
    )
}

/// `e^{2u} g` for a chart `g` and a function `u` of the coordinates.
pub fn rescaled(g: MetricChart, u: fn(&[Jet3; DIM]) -> Jet3) -> MetricChart {
    MetricChart::new(
        format!("e^2u {}", g.label()),
        g.is_diagonal(),
        move |p| {
            let f = (u(&Jet3::coordinates(p)) * 2.0).exp();
            let m = g.components_unchecked(p)?;
            Ok(m.map(|row| row.map(|c| c * f)))
        },
        |_| Ok(()),
    )
}

/// A diagonal metric with no special structure.
pub fn generic_diagonal() -> MetricChart {
    MetricChart::diagonal(
        "generic",
        |x| Ok(std::array::from_fn(|i| one() + x[i] * x[i] + x[(i + 1) % DIM])),
        |_| Ok(()),
    )
}

pub fn max_abs4(t: &Tensor4) -> f64 {
    frame::max_abs4(t)
}

pub fn gap4(a: &Tensor4, b: &Tensor4) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    m = m.max((a[i][j][k][l] - b[i][j][k][l]).abs());
                }
            }
        }
    }
    m
}

/// `Σ T_abcd T^abcd` with indices raised by `g_inv`, square-rooted.
pub fn tensor_norm(t: &Tensor4, g_inv: &Mat4) -> f64 {
    let mut raised = *t;
    for slot in 0..4 {
        let src = raised;
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    for l in 0..DIM {
                        let idx = [i, j, k, l];
                        raised[i][j][k][l] = (0..DIM)
                            .map(|m| {
                                let mut q = idx;
                                q[slot] = m;
                                g_inv[idx[slot]][m] * src[q[0]][q[1]][q[2]][q[3]]
                            })
                            .sum();
                    }
                }
            }
        }
    }
    let mut s = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    s += t[i][j][k][l] * raised[i][j][k][l];
                }
            }
        }
    }
    s.sqrt()
}

pub fn det4(m: &Mat4) -> f64 {
    let mut a = *m;
    let mut det = 1.0;
    for k in 0..DIM {
        let p = (k..DIM).max_by(|&x, &y| a[x][k].abs().total_cmp(&a[y][k].abs())).unwrap();
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..DIM {
            let f = a[i][k] / a[k][k];
            for j in k..DIM {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    det
}

pub fn permutation_sign(p: [usize; DIM]) -> f64 {
    let mut s = 1.0;
    for i in 0..DIM {
        for j in i + 1..DIM {
            if p[i] == p[j] {
                return 0.0;
            }
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}
