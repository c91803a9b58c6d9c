mod common;

use common::*;
use confflat::catalog::{build_family, random_spec, FamilyTag};
use confflat::classify::SampleGrid;
use confflat::geometry::curvature_bundle;
use confflat::oracle::{brute_force_weyl, fd_jet_gap, FD_STEP};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 100 draws of (family, parameters, grid point) over the whole catalog.
fn samples() -> Vec<(confflat::catalog::Family, confflat::Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    (0..100)
        .map(|k| {
            let tag = FamilyTag::ALL[k % FamilyTag::ALL.len()];
            // inadmissible draws are redrawn
            let fam = (0..50).find_map(|_| build_family(&random_spec(tag, &mut rng)).ok()).unwrap();
            let pts = SampleGrid::new(fam.sample_box, [4; 4]).points(&fam);
            let p = *pts.choose(&mut rng).unwrap();
            let jitter: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1e-3..1e-3));
            (fam, std::array::from_fn(|i| p[i] + jitter[i]))
        })
        .collect()
}

#[test]
fn jets_agree_with_finite_differences_across_the_catalog() {
    let mut worst: f64 = 0.0;
    for (fam, p) in samples() {
        let gap = fd_jet_gap(&fam.chart, &p, FD_STEP, true).unwrap();
        assert!(gap < 1e-5, "{} at {p:?}: {gap:e}", fam.chart.label());
        worst = worst.max(gap);
    }
    assert!(worst > 0.0);
}

#[test]
fn weyl_matches_the_brute_force_formula() {
    for (fam, p) in samples() {
        let b = curvature_bundle(&fam.chart, &p).unwrap();
        let w = brute_force_weyl(&b.riemann, &b.ricci, b.scalar, &b.g);
        let gap = gap4(&w, &b.weyl) / (1.0 + max_abs4(&b.riemann));
        assert!(gap < 1e-10, "{} at {p:?}: {gap:e}", fam.chart.label());
    }
}

#[test]
fn product_of_spheres_has_a_nonzero_weyl_tensor() {
    let chart = surface_product(1.0, 1.0);
    let b = curvature_bundle(&chart, &[0.2, -0.1, 0.3, 0.05]).unwrap();
    let w = brute_force_weyl(&b.riemann, &b.ricci, b.scalar, &b.g);
    assert!(b.weyl_norm() > 0.1, "{}", b.weyl_norm());
    assert!(gap4(&w, &b.weyl) < 1e-10 * (1.0 + max_abs4(&b.riemann)));
    // Einstein with |Rm|² = 8, |Ric|² = 4, s = 4, so |W|² = 8 − 2·4 + 16/3
    let expected = (16.0f64 / 3.0).sqrt();
    assert!((tensor_norm(&b.weyl, &b.g_inv) - expected).abs() < 1e-9, "{}", tensor_norm(&b.weyl, &b.g_inv));
}
