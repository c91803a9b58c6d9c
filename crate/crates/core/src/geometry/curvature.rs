//! Levi-Civita connection and curvature from metric jets.
//!
//! Conventions: `R(X,Y) = [∇_X, ∇_Y] − ∇_[X,Y]`, `R(X,Y,Z,U) = g(R(X,Y)Z, U)`,
//! `ρ(Y,Z) = tr(X ↦ R(X,Y)Z)`. With these the unit sphere has positive Ricci
//! curvature and hyperbolic 4-space has Ricci eigenvalue −3.

use crate::error::{Error, Result};
use crate::jet::Jet3;
use crate::{Mat4, Point, Tensor3, Tensor4, Tensor5, Vec4, DIM};

use super::chart::{MetricChart, MetricJets};
use super::frame::{self, Frame};

pub type ChristoffelJets = [[[Jet3; DIM]; DIM]; DIM];

/// Point-local curvature data of a chart.
#[derive(Debug, Clone)]
pub struct CurvatureBundle {
    pub point: Point,
    /// Metric jets to order 3.
    pub metric_jets: MetricJets,
    /// Inverse metric jets to order 3.
    pub inverse_jets: MetricJets,
    /// `Γ^k_ij` at index `[k][i][j]`; orders ≤ 2 are exact.
    pub christoffel: ChristoffelJets,
    /// Ricci jets; orders ≤ 1 are exact.
    pub ricci_jets: [[Jet3; DIM]; DIM],
    /// Scalar curvature jet; orders ≤ 1 are exact.
    pub scalar_jet: Jet3,
    pub g: Mat4,
    pub g_inv: Mat4,
    /// `R_ijkl` values, fully covariant.
    pub riemann: Tensor4,
    /// `R^l_ijk` at index `[l][i][j][k]`: coefficient of ∂_l in `R(∂_i,∂_j)∂_k`.
    pub riemann_mixed: Tensor4,
    pub ricci: Mat4,
    pub scalar: f64,
    /// `∂_m s`.
    pub ds: Vec4,
    /// `(∇_m ρ)_jk` at `[m][j][k]`.
    pub nabla_ricci: Tensor3,
    /// `(∇_m R)_ijkl` at `[m][i][j][k][l]`.
    pub nabla_riemann: Tensor5,
    /// Weyl tensor, `R` minus its Ricci/scalar part.
    pub weyl: Tensor4,
    pub frame: Frame,
}

fn jet_matmul(a: &MetricJets, b: &MetricJets, order: usize) -> MetricJets {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            (0..DIM)
                .map(|k| a[i][k].mul_to_order(&b[k][j], order))
                .sum()
        })
    })
}

/// Jet-valued inverse of a jet matrix via the terminating Neumann series.
pub fn inverse_jets(g: &MetricJets, point: &Point) -> Result<MetricJets> {
    let g0: Mat4 = std::array::from_fn(|i| std::array::from_fn(|j| g[i][j].value()));
    let g0_inv = frame::inverse(&g0).ok_or_else(|| Error::Geometry {
        point: *point,
        reason: "singular metric".into(),
    })?;
    let g0_inv_j: MetricJets =
        std::array::from_fn(|i| std::array::from_fn(|j| Jet3::constant(g0_inv[i][j])));
    // M = -g0⁻¹ (g - g0), nilpotent beyond order 3
    let mut dev = *g;
    for row in dev.iter_mut() {
        for x in row.iter_mut() {
            *x = *x - x.value();
        }
    }
    let m: MetricJets = jet_matmul(&g0_inv_j, &dev, 3).map(|r| r.map(|x| -x));
    let m2 = jet_matmul(&m, &m, 3);
    let m3 = jet_matmul(&m2, &m, 3);
    let mut series = m;
    for i in 0..DIM {
        for j in 0..DIM {
            series[i][j] = series[i][j] + m2[i][j] + m3[i][j];
            if i == j {
                series[i][j] = series[i][j] + 1.0;
            }
        }
    }
    Ok(jet_matmul(&series, &g0_inv_j, 3))
}

/// Christoffel symbols `Γ^k_ij` as jets exact through order 2.
pub fn christoffel_jets(g: &MetricJets, g_inv: &MetricJets) -> ChristoffelJets {
    let dg: [[[Jet3; DIM]; DIM]; DIM] =
        std::array::from_fn(|a| std::array::from_fn(|b| std::array::from_fn(|c| g[b][c].derivative(a))));
    // first kind: Γ_{l,ij} = ½ (∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    let mut first = [[[Jet3::zero(); DIM]; DIM]; DIM];
    for l in 0..DIM {
        for i in 0..DIM {
            for j in i..DIM {
                let v = (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]).scale(0.5);
                first[l][i][j] = v;
                first[l][j][i] = v;
            }
        }
    }
    let mut gamma = [[[Jet3::zero(); DIM]; DIM]; DIM];
    for k in 0..DIM {
        for i in 0..DIM {
            for j in i..DIM {
                let v: Jet3 = (0..DIM)
                    .map(|l| g_inv[k][l].mul_to_order(&first[l][i][j], 2))
                    .sum();
                gamma[k][i][j] = v;
                gamma[k][j][i] = v;
            }
        }
    }
    gamma
}

/// Christoffel symbols of `chart` at `point`, exact through order 2.
pub fn christoffel(chart: &MetricChart, point: &Point) -> Result<ChristoffelJets> {
    let g = chart.metric_at(point)?;
    let g_inv = inverse_jets(&g, point)?;
    Ok(christoffel_jets(&g, &g_inv))
}

/// Full curvature bundle of `chart` at `point`.
pub fn curvature_bundle(chart: &MetricChart, point: &Point) -> Result<CurvatureBundle> {
    let g = chart.metric_at(point)?;
    CurvatureBundle::from_metric_jets(g, point)
}

impl CurvatureBundle {
    pub fn from_metric_jets(metric_jets: MetricJets, point: &Point) -> Result<Self> {
        let inverse_jets = inverse_jets(&metric_jets, point)?;
        let gamma = christoffel_jets(&metric_jets, &inverse_jets);

        // R^l_ijk = ∂_i Γ^l_jk − ∂_j Γ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik, to order 1
        let mut r_mixed_j = [[[[Jet3::zero(); DIM]; DIM]; DIM]; DIM];
        for l in 0..DIM {
            for i in 0..DIM {
                for j in i + 1..DIM {
                    for k in 0..DIM {
                        let mut v = gamma[l][j][k].derivative(i) - gamma[l][i][k].derivative(j);
                        for m in 0..DIM {
                            v += gamma[l][i][m].mul_to_order(&gamma[m][j][k], 1)
                                - gamma[l][j][m].mul_to_order(&gamma[m][i][k], 1);
                        }
                        let v = v.truncate(1);
                        r_mixed_j[l][i][j][k] = v;
                        r_mixed_j[l][j][i][k] = -v;
                    }
                }
            }
        }

        let mut r_j = [[[[Jet3::zero(); DIM]; DIM]; DIM]; DIM];
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    for l in 0..DIM {
                        r_j[i][j][k][l] = (0..DIM)
                            .map(|m| r_mixed_j[m][i][j][k].mul_to_order(&metric_jets[m][l], 1))
                            .sum();
                    }
                }
            }
        }

        let ricci_jets: [[Jet3; DIM]; DIM] = std::array::from_fn(|j| {
            std::array::from_fn(|k| (0..DIM).map(|i| r_mixed_j[i][i][j][k]).sum())
        });
        let mut scalar_jet = Jet3::zero();
        for j in 0..DIM {
            for k in 0..DIM {
                scalar_jet += inverse_jets[j][k].mul_to_order(&ricci_jets[j][k], 1);
            }
        }

        let val2 = |m: &MetricJets| -> Mat4 { std::array::from_fn(|i| std::array::from_fn(|j| m[i][j].value())) };
        let g = val2(&metric_jets);
        let g_inv = val2(&inverse_jets);
        let ricci = val2(&ricci_jets);
        let scalar = scalar_jet.value();
        let ds = scalar_jet.gradient();
        let gam: Tensor3 = std::array::from_fn(|k| {
            std::array::from_fn(|i| std::array::from_fn(|j| gamma[k][i][j].value()))
        });
        let riemann: Tensor4 = r_j.map(|a| a.map(|b| b.map(|c| c.map(|x| x.value()))));
        let riemann_mixed: Tensor4 = r_mixed_j.map(|a| a.map(|b| b.map(|c| c.map(|x| x.value()))));

        let mut nabla_ricci = [[[0.0; DIM]; DIM]; DIM];
        for m in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    let mut v = ricci_jets[j][k].d(m);
                    for a in 0..DIM {
                        v -= gam[a][m][j] * ricci[a][k] + gam[a][m][k] * ricci[j][a];
                    }
                    nabla_ricci[m][j][k] = v;
                }
            }
        }

        let mut nabla_riemann = [[[[[0.0; DIM]; DIM]; DIM]; DIM]; DIM];
        for m in 0..DIM {
            for i in 0..DIM {
                for j in 0..DIM {
                    for k in 0..DIM {
                        for l in 0..DIM {
                            let mut v = r_j[i][j][k][l].d(m);
                            for a in 0..DIM {
                                v -= gam[a][m][i] * riemann[a][j][k][l]
                                    + gam[a][m][j] * riemann[i][a][k][l]
                                    + gam[a][m][k] * riemann[i][j][a][l]
                                    + gam[a][m][l] * riemann[i][j][k][a];
                            }
                            nabla_riemann[m][i][j][k][l] = v;
                        }
                    }
                }
            }
        }

        let weyl = super::weyl::weyl_from_parts(&riemann, &ricci, scalar, &g);
        let frame = Frame::coordinate(&g);

        Ok(CurvatureBundle {
            point: *point,
            metric_jets,
            inverse_jets,
            christoffel: gamma,
            ricci_jets,
            scalar_jet,
            g,
            g_inv,
            riemann,
            riemann_mixed,
            ricci,
            scalar,
            ds,
            nabla_ricci,
            nabla_riemann,
            weyl,
            frame,
        })
    }

    /// Christoffel values `Γ^k_ij`.
    pub fn christoffel_values(&self) -> Tensor3 {
        std::array::from_fn(|k| {
            std::array::from_fn(|i| std::array::from_fn(|j| self.christoffel[k][i][j].value()))
        })
    }

    /// Frame Frobenius norm of the Riemann tensor.
    pub fn riemann_norm(&self) -> f64 {
        frame::frobenius4(&self.frame.tensor4(&self.riemann))
    }

    pub fn weyl_norm_raw(&self) -> f64 {
        frame::frobenius4(&self.frame.tensor4(&self.weyl))
    }

    /// `‖W‖ / (1 + ‖R‖)` in an orthonormal frame.
    pub fn weyl_norm(&self) -> f64 {
        self.weyl_norm_raw() / (1.0 + self.riemann_norm())
    }

    pub fn ricci_norm(&self) -> f64 {
        frame::frobenius2(&self.frame.tensor2(&self.ricci))
    }

    pub fn nabla_ricci_norm(&self) -> f64 {
        frame::frobenius3(&self.frame.tensor3(&self.nabla_ricci))
    }

    /// `(∇_m R)^l_ijk`, last index raised.
    pub fn nabla_riemann_mixed(&self) -> Tensor5 {
        let mut out = [[[[[0.0; DIM]; DIM]; DIM]; DIM]; DIM];
        for m in 0..DIM {
            for i in 0..DIM {
                for j in 0..DIM {
                    for k in 0..DIM {
                        for l in 0..DIM {
                            out[m][l][i][j][k] = (0..DIM)
                                .map(|c| self.g_inv[l][c] * self.nabla_riemann[m][i][j][k][c])
                                .sum();
                        }
                    }
                }
            }
        }
        out
    }

    /// Largest violation of the pair symmetries of `R_ijkl`, relative to `1 + max|R|`.
    pub fn symmetry_residual(&self) -> f64 {
        let r = &self.riemann;
        let mut worst: f64 = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    for l in 0..DIM {
                        let x = r[i][j][k][l];
                        worst = worst
                            .max((x + r[j][i][k][l]).abs())
                            .max((x + r[i][j][l][k]).abs())
                            .max((x - r[k][l][i][j]).abs());
                    }
                }
            }
        }
        worst / (1.0 + frame::max_abs4(r))
    }

    /// First Bianchi identity `R_ijkl + R_jkil + R_kijl = 0`, relative.
    pub fn bianchi_residual(&self) -> f64 {
        let r = &self.riemann;
        let mut worst: f64 = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    for l in 0..DIM {
                        worst = worst.max((r[i][j][k][l] + r[j][k][i][l] + r[k][i][j][l]).abs());
                    }
                }
            }
        }
        worst / (1.0 + frame::max_abs4(r))
    }

    /// Divergence of the Einstein tensor `ρ − (s/2) g`, relative to `1 + ‖∇ρ‖`.
    pub fn einstein_divergence_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..DIM {
            let mut div = -0.5 * self.ds[j];
            for m in 0..DIM {
                for i in 0..DIM {
                    div += self.g_inv[m][i] * self.nabla_ricci[m][i][j];
                }
            }
            worst = worst.max(div.abs());
        }
        let scale = 1.0 + self.nabla_ricci_norm() + frame::norm(&self.g_inv, &self.ds);
        worst / scale
    }

    /// Largest metric trace of the Weyl tensor, relative to `1 + ‖R‖`.
    pub fn weyl_trace_residual(&self) -> f64 {
        let w = &self.frame.tensor4(&self.weyl);
        let mut worst: f64 = 0.0;
        for b in 0..DIM {
            for c in 0..DIM {
                // every contraction over a pair of slots
                let t: [f64; 6] = [
                    (0..DIM).map(|a| w[a][a][b][c]).sum(),
                    (0..DIM).map(|a| w[a][b][a][c]).sum(),
                    (0..DIM).map(|a| w[a][b][c][a]).sum(),
                    (0..DIM).map(|a| w[b][a][a][c]).sum(),
                    (0..DIM).map(|a| w[b][a][c][a]).sum(),
                    (0..DIM).map(|a| w[b][c][a][a]).sum(),
                ];
                for x in t {
                    worst = worst.max(x.abs());
                }
            }
        }
        worst / (1.0 + self.riemann_norm())
    }

    /// Sectional curvature of the plane spanned by `u`, `v`.
    pub fn sectional(&self, u: &Vec4, v: &Vec4) -> f64 {
        let mut k = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                for a in 0..DIM {
                    for b in 0..DIM {
                        k += self.riemann[i][j][a][b] * u[i] * v[j] * v[a] * u[b];
                    }
                }
            }
        }
        let uu = frame::inner(&self.g, u, u);
        let vv = frame::inner(&self.g, v, v);
        let uv = frame::inner(&self.g, u, v);
        k / (uu * vv - uv * uv)
    }
}
