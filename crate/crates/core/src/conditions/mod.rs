//! Residual functionals for the geometric conditions a chart is tested against.
//!
//! Every residual is evaluated on frame components in an orthonormal frame and
//! divided by `1 + (size of the dominant term)`.

mod diagonal;

pub use diagonal::{diagonal_condition_checks, diagonal_riemann, nu_jets, stackel_residual, DiagonalChecks, DiagonalRiemann};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::frame::{self, Frame};
use crate::geometry::{jacobi_package, CurvatureBundle, MetricChart};
use crate::{Mat4, Tensor3, Vec4, DIM};

/// Seed used for direction and frame sampling unless overridden.
pub const DEFAULT_SEED: u64 = 20_240_917;
/// Random unit directions added to the frame directions in the P test.
pub const RANDOM_DIRECTIONS: usize = 16;
/// Random orthonormal frames added to the coordinate frame in the quadratic P test.
pub const RANDOM_FRAMES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSet {
    pub weyl_norm: f64,
    pub cotton: f64,
    pub q_general: f64,
    pub q_explicit: f64,
    pub p_commutator: f64,
    pub p_quadratic: f64,
    pub codazzi: f64,
    pub killing: f64,
    pub nabla_ricci: f64,
    /// `None` when the chart is not diagonal.
    pub stackel: Option<f64>,
}

impl ResidualSet {
    /// Every residual evaluated at one bundle of `chart`.
    pub fn evaluate(chart: &MetricChart, bundle: &CurvatureBundle, seed: u64) -> Result<Self> {
        let (q_general, q_explicit) = q_residual(bundle);
        let dirs = default_directions(bundle, seed);
        let (p_commutator, p_quadratic) = p_residual(bundle, &dirs, seed)?;
        let (codazzi, killing, nabla_ricci) = class_residuals(bundle);
        let stackel = if chart.is_diagonal() {
            Some(stackel_residual(chart, &bundle.point)?)
        } else {
            None
        };
        Ok(ResidualSet {
            weyl_norm: bundle.weyl_norm(),
            cotton: cotton_residual(bundle),
            q_general,
            q_explicit,
            p_commutator,
            p_quadratic,
            codazzi,
            killing,
            nabla_ricci,
            stackel,
        })
    }
}

fn max_abs3(t: &Tensor3) -> f64 {
    t.iter().flatten().flatten().fold(0.0, |m, x| m.max(x.abs()))
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// `(q_general, q_explicit)`: the Q-space equation in its general form at
/// `n = 4` and in its expanded form.
pub fn q_residual(bundle: &CurvatureBundle) -> (f64, f64) {
    let f = &bundle.frame;
    let scale = 1.0 + bundle.nabla_ricci_norm();

    let dr = f.tensor3(&bundle.nabla_ricci);
    let ds = f.covector(&bundle.ds);
    let explicit: Tensor3 = std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            std::array::from_fn(|c| {
                dr[a][b][c]
                    - 2.0 / 9.0 * ds[a] * delta(b, c)
                    - 1.0 / 18.0 * ds[b] * delta(a, c)
                    - 1.0 / 18.0 * ds[c] * delta(a, b)
            })
        })
    });

    // ∇(ρ − s g/(2n−2)) − (n−2)/(2(n+2)(n−1)) ds⊙g, in coordinates,
    // with (ds⊙g)(X,Y,Z) = X(s)g(Y,Z) + Y(s)g(X,Z) + Z(s)g(X,Y)
    let n = DIM as f64;
    let c1 = 1.0 / (2.0 * n - 2.0);
    let c2 = (n - 2.0) / (2.0 * (n + 2.0) * (n - 1.0));
    let g = &bundle.g;
    let ds_c = &bundle.ds;
    let general_coord: Tensor3 = std::array::from_fn(|x| {
        std::array::from_fn(|y| {
            std::array::from_fn(|z| {
                let sym = ds_c[x] * g[y][z] + ds_c[y] * g[x][z] + ds_c[z] * g[x][y];
                bundle.nabla_ricci[x][y][z] - c1 * ds_c[x] * g[y][z] - c2 * sym
            })
        })
    });
    let general = f.tensor3(&general_coord);
    (max_abs3(&general) / scale, max_abs3(&explicit) / scale)
}

/// Cotton-type identity implied by vanishing Weyl curvature in dimension 4.
pub fn cotton_residual(bundle: &CurvatureBundle) -> f64 {
    let f = &bundle.frame;
    let dr = f.tensor3(&bundle.nabla_ricci);
    let ds = f.covector(&bundle.ds);
    let mut worst: f64 = 0.0;
    for x in 0..DIM {
        for y in 0..DIM {
            for z in 0..DIM {
                let v = dr[x][y][z] - dr[y][x][z] - (ds[x] * delta(y, z) - ds[y] * delta(x, z)) / 6.0;
                worst = worst.max(v.abs());
            }
        }
    }
    worst / (1.0 + bundle.nabla_ricci_norm())
}

/// `(codazzi, killing, nabla_ricci)`.
pub fn class_residuals(bundle: &CurvatureBundle) -> (f64, f64, f64) {
    let dr = bundle.frame.tensor3(&bundle.nabla_ricci);
    let norm = frame::frobenius3(&dr);
    let mut codazzi: f64 = 0.0;
    let mut killing: f64 = 0.0;
    for x in 0..DIM {
        for y in 0..DIM {
            for z in 0..DIM {
                codazzi = codazzi.max((dr[x][y][z] - dr[y][x][z]).abs());
                killing = killing.max((dr[x][y][z] + dr[y][z][x] + dr[z][x][y]).abs());
            }
        }
    }
    (
        codazzi / (1.0 + norm),
        killing / (1.0 + norm),
        norm / (1.0 + bundle.ricci_norm()),
    )
}

fn random_vector(rng: &mut ChaCha8Rng) -> Vec4 {
    loop {
        let v: Vec4 = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-2 && n2 <= 1.0 {
            return v;
        }
    }
}

/// The four frame vectors followed by seeded random unit vectors, all
/// unit length with respect to the metric at the bundle's point.
pub fn default_directions(bundle: &CurvatureBundle, seed: u64) -> Vec<Vec4> {
    let mut out: Vec<Vec4> = bundle.frame.e.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_DIRECTIONS {
        let c = random_vector(&mut rng);
        let v: Vec4 = std::array::from_fn(|i| (0..DIM).map(|a| c[a] * bundle.frame.e[a][i]).sum());
        out.push(frame::normalize(&bundle.g, &v));
    }
    out
}

fn permutations() -> Vec<[usize; DIM]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..DIM {
        for b in 0..DIM {
            for c in 0..DIM {
                for d in 0..DIM {
                    let p = [a, b, c, d];
                    if (0..DIM).all(|i| (i + 1..DIM).all(|j| p[i] != p[j])) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

fn quadratic_form_residual(rho: &Mat4, dr: &Tensor3) -> f64 {
    let mut worst: f64 = 0.0;
    for [x, y, z, u] in permutations() {
        let v = (rho[y][y] - rho[z][z]) * dr[x][y][z] + (dr[x][z][z] - dr[x][y][y]) * rho[y][z]
            + rho[y][u] * dr[x][z][u]
            - rho[z][u] * dr[x][y][u];
        worst = worst.max(v.abs());
    }
    worst
}

/// `(p_commutator, p_quadratic)` over `directions` and over the coordinate
/// frame plus seeded random orthonormal frames.
pub fn p_residual(bundle: &CurvatureBundle, directions: &[Vec4], seed: u64) -> Result<(f64, f64)> {
    let mut commutator: f64 = 0.0;
    for x in directions {
        let j = jacobi_package(bundle, x)?;
        let r = j.commutator_norm() / (1.0 + j.lambda_norm() * j.lambda_prime_norm());
        commutator = commutator.max(r);
    }

    let scale = 1.0 + bundle.ricci_norm() * bundle.nabla_ricci_norm();
    let mut frames = vec![bundle.frame];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    for _ in 0..RANDOM_FRAMES {
        let vs: [Vec4; DIM] = std::array::from_fn(|_| random_vector(&mut rng));
        frames.push(Frame::from_vectors(&bundle.g, &vs));
    }
    let mut quadratic: f64 = 0.0;
    for f in &frames {
        let rho = f.tensor2(&bundle.ricci);
        let dr = f.tensor3(&bundle.nabla_ricci);
        quadratic = quadratic.max(quadratic_form_residual(&rho, &dr));
    }
    Ok((commutator, quadratic / scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::curvature_bundle;
    use crate::jet::Jet3;

    fn round_sphere_chart() -> MetricChart {
        MetricChart::diagonal(
            "sphere",
            |x| {
                let r2: Jet3 = x.iter().map(|&xi| xi * xi).sum();
                let c = (1.0 + r2 * 0.25).powi(-2);
                Ok([c; DIM])
            },
            |_| Ok(()),
        )
    }

    #[test]
    fn space_form_residuals_vanish() {
        let chart = round_sphere_chart();
        let b = curvature_bundle(&chart, &[0.3, -0.1, 0.2, 0.5]).unwrap();
        let r = ResidualSet::evaluate(&chart, &b, DEFAULT_SEED).unwrap();
        for v in [r.weyl_norm, r.cotton, r.q_general, r.q_explicit, r.p_commutator, r.p_quadratic, r.codazzi, r.killing, r.nabla_ricci] {
            assert!(v < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations().len(), 24);
    }

    #[test]
    fn directions_are_unit_and_reproducible() {
        let chart = round_sphere_chart();
        let b = curvature_bundle(&chart, &[0.3, -0.1, 0.2, 0.5]).unwrap();
        let d1 = default_directions(&b, 7);
        let d2 = default_directions(&b, 7);
        assert_eq!(d1, d2);
        assert_eq!(d1.len(), DIM + RANDOM_DIRECTIONS);
        for d in &d1 {
            assert!((frame::inner(&b.g, d, d) - 1.0).abs() < 1e-13);
        }
    }
}
