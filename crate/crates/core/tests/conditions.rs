mod common;

use common::*;
use confflat::catalog::{box_points, build_family, Family, FamilySpec, FamilyTag, BOX_MARGIN};
use confflat::classify::classify_default;
use confflat::conditions::*;
use confflat::geometry::{curvature_bundle, ricci_spectrum, CurvatureBundle};
use confflat::{Error, Point, DIM};

fn bundles(fam: &Family, n: usize) -> Vec<(Point, CurvatureBundle, ResidualSet)> {
    box_points(&fam.sample_box, [n; 4], BOX_MARGIN)
        .into_iter()
        .map(|p| {
            let b = curvature_bundle(&fam.chart, &p).unwrap();
            let r = ResidualSet::evaluate(&fam.chart, &b, DEFAULT_SEED).unwrap();
            (p, b, r)
        })
        .collect()
}

fn default_family(tag: FamilyTag) -> Family {
    build_family(&FamilySpec::new(tag)).unwrap()
}

#[test]
fn two_forms_of_the_q_equation_agree() {
    for tag in FamilyTag::ALL {
        for (_, _, r) in bundles(&default_family(tag), 3) {
            assert!((r.q_general - r.q_explicit).abs() < 1e-12 * (1.0 + r.q_explicit), "{}: {r:?}", tag.name());
        }
    }
}

/// Residuals on a 3⁴ grid, or `None` when the chart is not conformally
/// flat there. Some non-flat charts have Weyl zeros on hypersurfaces (S2
/// along x4 − x3 = x3 − x2), so flatness is judged over the whole grid.
fn conformally_flat_grid(tag: FamilyTag) -> Option<Vec<ResidualSet>> {
    let rs: Vec<_> = bundles(&default_family(tag), 3).into_iter().map(|(_, _, r)| r).collect();
    rs.iter().all(|r| r.weyl_norm < 1e-8).then_some(rs)
}

#[test]
fn p_formulations_agree_on_conformally_flat_charts() {
    let mut seen = 0;
    for tag in FamilyTag::ALL {
        for r in conformally_flat_grid(tag).unwrap_or_default() {
            seen += 1;
            assert_eq!(r.p_quadratic < 1e-7, r.p_commutator < 1e-7, "{}: {r:?}", tag.name());
        }
    }
    assert!(seen > 500);
}

#[test]
fn conformally_flat_q_spaces_are_p_spaces() {
    for tag in FamilyTag::ALL {
        for (_, _, r) in bundles(&default_family(tag), 3) {
            if r.weyl_norm < 1e-8 && r.q_explicit < 1e-7 {
                assert!(r.p_commutator < 1e-6, "{}: {r:?}", tag.name());
            }
        }
    }
}

#[test]
fn cotton_identity_on_conformally_flat_charts() {
    let mut charts = 0;
    for tag in FamilyTag::ALL {
        if let Some(rs) = conformally_flat_grid(tag) {
            charts += 1;
            for r in rs {
                assert!(r.cotton < 1e-7, "{}: {r:?}", tag.name());
            }
        }
    }
    assert_eq!(charts, 13);
}

#[test]
fn generic_diagonal_metric_is_not_a_p_space() {
    let chart = generic_diagonal();
    let worst = box_points(&[[0.1, 0.9]; 4], [2; 4], 0.0)
        .iter()
        .map(|p| {
            let b = curvature_bundle(&chart, p).unwrap();
            ResidualSet::evaluate(&chart, &b, DEFAULT_SEED).unwrap().p_commutator
        })
        .fold(0.0, f64::max);
    assert!(worst > 1e-3, "{worst}");
}

#[test]
fn parallel_ricci_cases() {
    for (_, _, r) in bundles(&default_family(FamilyTag::R2b), 3) {
        assert!(r.nabla_ricci < 1e-7);
    }
    let vi = bundles(&default_family(FamilyTag::VI), 3);
    assert!(vi.iter().any(|(_, _, r)| r.nabla_ricci > 1e-3));
}

#[test]
fn constant_spectrum_iff_parallel_ricci_when_conformally_flat() {
    for tag in FamilyTag::ALL {
        let rep = classify_default(tag).unwrap();
        if rep.aggregates.weyl_norm.max >= 1e-8 {
            continue;
        }
        let constant = rep.aggregates.eigen_drift.max < 1e-7;
        let parallel = rep.aggregates.nabla_ricci.max < 1e-6;
        assert_eq!(constant, parallel, "{}", tag.name());
    }
}

#[test]
fn diagonal_criteria_on_polynomial_families() {
    for tag in [FamilyTag::VII, FamilyTag::VIII] {
        let fam = default_family(tag);
        for p in box_points(&fam.sample_box, [3; 4], BOX_MARGIN) {
            let c = diagonal_condition_checks(&fam.chart, &p).unwrap();
            assert!(c.d1 < 1e-8 && c.p1 < 1e-8, "{} at {p:?}: {c:?}", tag.name());
        }
    }
}

#[test]
fn sectional_criterion_tracks_the_weyl_tensor() {
    let mut checked = 0;
    for tag in FamilyTag::ALL {
        let fam = default_family(tag);
        if !fam.chart.is_diagonal() {
            continue;
        }
        for (p, b, r) in bundles(&fam, 3) {
            let c = match diagonal_condition_checks(&fam.chart, &p) {
                Ok(c) => c,
                Err(Error::NotApplicable(_)) => continue,
                Err(e) => panic!("{e}"),
            };
            checked += 1;
            assert_eq!(c.d1 < 1e-8, r.weyl_norm < 1e-8, "{} at {p:?}", tag.name());

            // the Ricci parts cancel, so the combination is a Weyl combination
            let w = b.frame.tensor4(&b.weyl);
            let k = |a: usize, c: usize| w[a][c][c][a];
            let mut worst: f64 = 0.0;
            for i in 0..DIM {
                for j in 0..DIM {
                    for kk in 0..DIM {
                        for l in 0..DIM {
                            if permutation_sign([i, j, kk, l]) != 0.0 {
                                worst = worst.max((k(i, l) + k(kk, j) - k(i, kk) - k(j, l)).abs());
                            }
                        }
                    }
                }
            }
            assert!((worst - c.d1_raw).abs() < 1e-9 * (1.0 + b.riemann_norm()), "{}: {worst} vs {}", tag.name(), c.d1_raw);
        }
    }
    assert!(checked > 300, "{checked}");
}

#[test]
fn diagonal_criteria_need_distinct_eigenvalues() {
    let fam = default_family(FamilyTag::I);
    let b = curvature_bundle(&fam.chart, &[0.1, 0.2, 0.3, 0.4]).unwrap();
    assert_eq!(ricci_spectrum(&b).pattern, vec![4]);
    assert!(matches!(
        diagonal_condition_checks(&fam.chart, &[0.1, 0.2, 0.3, 0.4]),
        Err(Error::NotApplicable(_))
    ));
}
