//! Independent cross-checks: finite-difference partials of metric components
//! and a Weyl tensor assembled from the Schouten tensor.

use crate::error::{Error, Result};
use crate::geometry::MetricChart;
use crate::jet::{exponents_of, NCOEF};
use crate::{Mat4, Point, Tensor4, DIM};

/// Base finite-difference step.
pub const FD_STEP: f64 = 1e-3;

/// Finite-difference estimates of the metric partials `∂^α g_ij`, `|α| ≤ order`.
#[derive(Debug, Clone)]
pub struct FdPartials {
    pub order: usize,
    /// `(α, ∂^α g)` in jet slot order.
    pub entries: Vec<([usize; DIM], Mat4)>,
}

impl FdPartials {
    pub fn get(&self, alpha: [usize; DIM]) -> Option<&Mat4> {
        self.entries.iter().find(|(a, _)| *a == alpha).map(|(_, m)| m)
    }
}

/// Central-difference weights `(offset in steps, weight·h^k)` for `d^k/dx^k`.
fn stencil(k: usize) -> &'static [(i32, f64)] {
    match k {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        _ => unreachable!("order above three"),
    }
}

fn metric_values(chart: &MetricChart, p: &Point) -> Result<Mat4> {
    let g = chart.components_unchecked(p)?;
    Ok(std::array::from_fn(|i| std::array::from_fn(|j| g[i][j].value())))
}

fn central(chart: &MetricChart, point: &Point, alpha: [usize; DIM], h: f64) -> Result<Mat4> {
    let mut acc = [[0.0; DIM]; DIM];
    let mut rec = |offsets: [i32; DIM], weight: f64| -> Result<()> {
        let q: Point = std::array::from_fn(|i| point[i] + offsets[i] as f64 * h);
        let g = metric_values(chart, &q)?;
        for i in 0..DIM {
            for j in 0..DIM {
                acc[i][j] += weight * g[i][j];
            }
        }
        Ok(())
    };
    for &(o0, w0) in stencil(alpha[0]) {
        for &(o1, w1) in stencil(alpha[1]) {
            for &(o2, w2) in stencil(alpha[2]) {
                for &(o3, w3) in stencil(alpha[3]) {
                    rec([o0, o1, o2, o3], w0 * w1 * w2 * w3)?;
                }
            }
        }
    }
    let scale = h.powi(alpha.iter().sum::<usize>() as i32);
    Ok(acc.map(|row| row.map(|v| v / scale)))
}

/// Central-difference partials of every metric component up to `order`,
/// optionally with one Richardson level (`2h` and `h`).
///
/// The point must lie in the chart domain together with its `±4·step`
/// neighbours along every axis.
pub fn fd_partials(chart: &MetricChart, point: &Point, order: usize, step: f64, richardson: bool) -> Result<FdPartials> {
    if order > 3 {
        return Err(Error::Argument(format!("finite differences support order ≤ 3, got {order}")));
    }
    if !(step > 0.0) {
        return Err(Error::Argument(format!("step must be positive, got {step}")));
    }
    for i in 0..DIM {
        for s in [-4.0, 4.0] {
            let mut q = *point;
            q[i] += s * step;
            if let Err(reason) = chart.check_domain(&q) {
                return Err(Error::Argument(format!(
                    "point {point:?} is within 4·step of the domain boundary: {reason}"
                )));
            }
        }
    }
    let mut entries = Vec::new();
    for slot in 0..NCOEF {
        let alpha = exponents_of(slot);
        if alpha.iter().sum::<usize>() > order {
            continue;
        }
        let fine = central(chart, point, alpha, step)?;
        let m = if richardson {
            let coarse = central(chart, point, alpha, 2.0 * step)?;
            std::array::from_fn(|i| std::array::from_fn(|j| (4.0 * fine[i][j] - coarse[i][j]) / 3.0))
        } else {
            fine
        };
        entries.push((alpha, m));
    }
    Ok(FdPartials { order, entries })
}

/// Largest relative gap between the chart's jets and finite differences at
/// `point`; each order is scaled by `1 + max|∂^α g|` over that order.
pub fn fd_jet_gap(chart: &MetricChart, point: &Point, step: f64, richardson: bool) -> Result<f64> {
    let fd = fd_partials(chart, point, 3, step, richardson)?;
    let jets = chart.components_unchecked(point)?;
    let mut worst: f64 = 0.0;
    for order in 0..=3 {
        let rows: Vec<_> = fd.entries.iter().filter(|(a, _)| a.iter().sum::<usize>() == order).collect();
        let mut scale: f64 = 1.0;
        for (a, _) in &rows {
            for row in &jets {
                for g in row {
                    scale = scale.max(g.partial_exp(*a).abs());
                }
            }
        }
        for (a, m) in rows {
            for i in 0..DIM {
                for j in 0..DIM {
                    worst = worst.max((m[i][j] - jets[i][j].partial_exp(*a)).abs() / scale);
                }
            }
        }
    }
    Ok(worst)
}

/// Weyl tensor `R − P ⊙ g` with `P = (ρ − s g/6)/2` the Schouten tensor and
/// `⊙` the Kulkarni–Nomizu product, built index by index.
pub fn brute_force_weyl(riemann: &Tensor4, ricci: &Mat4, scalar: f64, g: &Mat4) -> Tensor4 {
    let schouten: Mat4 = std::array::from_fn(|i| std::array::from_fn(|j| 0.5 * (ricci[i][j] - scalar / 6.0 * g[i][j])));
    let mut w = [[[[0.0; DIM]; DIM]; DIM]; DIM];
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    let kn = schouten[i][l] * g[j][k] + schouten[j][k] * g[i][l]
                        - schouten[i][k] * g[j][l]
                        - schouten[j][l] * g[i][k];
                    w[i][j][k][l] = riemann[i][j][k][l] - kn;
                }
            }
        }
    }
    w
}
