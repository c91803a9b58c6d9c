//! Conditions specific to diagonal charts `g = Σ μ_i² dx_i²`, written in the
//! logarithms `ν_i = ln μ_i`.

use crate::error::{Error, Result};
use crate::geometry::{curvature_bundle, ricci_spectrum, MetricChart};
use crate::jet::Jet3;
use crate::{Mat4, Point, Tensor3, DIM};

/// Stäckel residual below which the diagonal checks apply.
pub const STACKEL_GATE: f64 = 1e-7;

/// `ν_i = ½ ln g_ii` as jets.
pub fn nu_jets(chart: &MetricChart, point: &Point) -> Result<[Jet3; DIM]> {
    if !chart.is_diagonal() {
        return Err(Error::Argument(format!("chart `{}` is not diagonal", chart.label())));
    }
    let g = chart.metric_at(point)?;
    Ok(std::array::from_fn(|i| g[i][i].ln_unchecked().scale(0.5)))
}

/// Largest violation of the Stäckel system at `point` (not normalized).
pub fn stackel_residual(chart: &MetricChart, point: &Point) -> Result<f64> {
    let nu = nu_jets(chart, point)?;
    let d = |i: usize, j: usize| nu[i].d(j);
    let mut worst: f64 = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            if j == i {
                continue;
            }
            worst = worst.max((nu[i].partial(&[i, j]) + 2.0 * d(i, j) * d(j, i)).abs());
            for k in 0..DIM {
                if k == i || k == j {
                    continue;
                }
                worst = worst
                    .max((d(i, j) * d(j, k) + d(i, k) * d(k, j) - d(i, j) * d(i, k)).abs())
                    .max(nu[i].partial(&[j, k]).abs());
            }
        }
    }
    Ok(worst)
}

/// Curvature of a diagonal chart evaluated directly from the `ν` jets.
#[derive(Debug, Clone)]
pub struct DiagonalRiemann {
    /// `[i][j]`: the `∂_i` component of `R(∂_i,∂_j)∂_j`, `i ≠ j`.
    pub rijij: Mat4,
    /// `[i][k][j]`: the `∂_i` component of `R(∂_i,∂_j)∂_k`, for distinct `i, j, k`.
    pub rkij: Tensor3,
    /// Metric coefficients `μ_i²`.
    pub mu2: [f64; DIM],
}

impl DiagonalRiemann {
    /// Sectional curvature of the coordinate plane `(i, j)`.
    pub fn sectional(&self, i: usize, j: usize) -> f64 {
        self.rijij[i][j] / self.mu2[j]
    }
}

pub fn diagonal_riemann(chart: &MetricChart, point: &Point) -> Result<DiagonalRiemann> {
    let nu = nu_jets(chart, point)?;
    let g = chart.metric_at(point)?;
    let mu2: [f64; DIM] = std::array::from_fn(|i| g[i][i].value());
    let d = |i: usize, j: usize| nu[i].d(j);
    let dd = |i: usize, j: usize, k: usize| nu[i].partial(&[j, k]);
    let mut rijij = [[0.0; DIM]; DIM];
    let mut rkij = [[[0.0; DIM]; DIM]; DIM];
    for i in 0..DIM {
        for j in 0..DIM {
            if i == j {
                continue;
            }
            let mut s = (d(i, j) * d(j, j) - d(i, j).powi(2) - dd(i, j, j)) / mu2[j]
                + (d(j, i) * d(i, i) - d(j, i).powi(2) - dd(j, i, i)) / mu2[i];
            for k in 0..DIM {
                if k == i || k == j {
                    continue;
                }
                s -= d(i, k) * d(j, k) / mu2[k];
                rkij[i][k][j] = -dd(i, j, k) + d(i, j) * d(j, k) + d(i, k) * d(k, j) - d(i, j) * d(i, k);
            }
            rijij[i][j] = mu2[j] * s;
        }
    }
    Ok(DiagonalRiemann { rijij, rkij, mu2 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalChecks {
    /// Conformal flatness criterion on sectional curvatures, over `1 + ‖R‖`.
    pub d1: f64,
    /// The same combination, not normalized.
    pub d1_raw: f64,
    /// P-space criterion in terms of the eigenvalue functions `r_i`.
    pub p1: f64,
}

/// Conformal-flatness and P-space criteria for diagonal Stäckel charts with
/// four distinct Ricci eigenvalues.
pub fn diagonal_condition_checks(chart: &MetricChart, point: &Point) -> Result<DiagonalChecks> {
    let st = stackel_residual(chart, point)?;
    if st >= STACKEL_GATE {
        return Err(Error::NotApplicable(format!("Stäckel residual {st:e} at {point:?}")));
    }
    let bundle = curvature_bundle(chart, point)?;
    let spec = ricci_spectrum(&bundle);
    if spec.pattern.len() != DIM {
        return Err(Error::NotApplicable(format!(
            "Ricci eigenvalues not distinct at {point:?}: pattern {:?}",
            spec.pattern
        )));
    }
    let dr = diagonal_riemann(chart, point)?;
    let k = |a: usize, b: usize| dr.sectional(a, b);
    let mut d1_raw: f64 = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            for kk in 0..DIM {
                for l in 0..DIM {
                    let p = [i, j, kk, l];
                    if (0..DIM).any(|a| (a + 1..DIM).any(|b| p[a] == p[b])) {
                        continue;
                    }
                    d1_raw = d1_raw.max((k(i, l) + k(kk, j) - k(i, kk) - k(j, l)).abs());
                }
            }
        }
    }

    // r_j = ρ_jj / g_jj, valid because ρ is diagonal on Stäckel charts
    let nu = nu_jets(chart, point)?;
    let r: [Jet3; DIM] = std::array::from_fn(|j| {
        bundle.ricci_jets[j][j].mul_to_order(&bundle.metric_jets[j][j].recip_unchecked(), 1)
    });
    let mut p1: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            scale = scale.max(r[j].d(i).abs());
            if i == j {
                continue;
            }
            let xi_rj = r[j].d(i);
            p1 = p1
                .max((2.0 / 3.0 * r[i].d(i) - xi_rj).abs())
                .max((xi_rj - 4.0 * (r[i].value() - r[j].value()) * nu[j].d(i)).abs());
        }
    }
    Ok(DiagonalChecks {
        d1: d1_raw / (1.0 + bundle.riemann_norm()),
        d1_raw,
        p1: p1 / (1.0 + scale),
    })
}
