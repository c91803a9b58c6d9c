//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use confflat::catalog::*;
use confflat::classify::*;
use confflat::conditions::*;
use confflat::geometry::{curvature_bundle, ricci_spectrum, CurvatureBundle, MetricChart};
use confflat::jet::Jet3;
use confflat::oracle::{brute_force_weyl, fd_jet_gap, FD_STEP};
use confflat::{Point, Result, DIM};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

type Criterion<'a> = Box<dyn Fn() -> Result<Outcome> + 'a>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn default_grid(fam: &Family) -> Vec<Point> {
    SampleGrid::for_family(fam).points(fam)
}

fn catalog() -> Result<Vec<Family>> {
    FamilyTag::ALL.iter().map(|&t| build_family(&FamilySpec::new(t))).collect()
}

fn max_abs_gap(a: &confflat::Tensor4, b: &confflat::Tensor4) -> f64 {
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

fn weyl_gap(b: &CurvatureBundle) -> f64 {
    let w = brute_force_weyl(&b.riemann, &b.ricci, b.scalar, &b.g);
    let scale = 1.0 + max_abs_gap(&b.riemann, &[[[[0.0; DIM]; DIM]; DIM]; DIM]);
    max_abs_gap(&w, &b.weyl) / scale
}

fn identities(families: &[Family]) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for fam in families {
        for p in default_grid(fam) {
            let b = curvature_bundle(&fam.chart, &p)?;
            n += 1;
            worst = worst
                .max(b.symmetry_residual())
                .max(b.bianchi_residual())
                .max(b.einstein_divergence_residual())
                .max(b.weyl_trace_residual());
        }
    }
    outcome(worst < 1e-8, format!("{n} points, worst {worst:.1e}"))
}

fn diagonal_equivalence() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for tag in FamilyTag::STACKEL {
        let fam = build_family(&FamilySpec::new(tag))?;
        for p in default_grid(&fam) {
            let b = curvature_bundle(&fam.chart, &p)?;
            let d = diagonal_riemann(&fam.chart, &p)?;
            let scale = 1.0 + b.riemann_norm();
            for i in 0..DIM {
                for j in 0..DIM {
                    if i == j {
                        continue;
                    }
                    worst = worst.max((d.rijij[i][j] - b.riemann_mixed[i][i][j][j]).abs() / scale);
                    for k in (0..DIM).filter(|&k| k != i && k != j) {
                        worst = worst.max((d.rkij[i][k][j] - b.riemann_mixed[i][i][j][k]).abs() / scale);
                    }
                }
            }
        }
    }
    outcome(worst < 1e-10, format!("worst {worst:.1e}"))
}

fn classification_matrix() -> Result<Outcome> {
    use Verdict::*;
    let mut bad = Vec::new();
    for tag in FamilyTag::Q_FAMILIES {
        let v = classify_default(tag)?.verdicts;
        if (v.lcf, v.p, v.q) != (Satisfied, Satisfied, Satisfied) {
            bad.push(format!("{} {:?}", tag.name(), (v.lcf, v.p, v.q)));
        }
    }
    let fam = build_family(&FamilySpec::new(FamilyTag::III1).with_profile("f", "t^2 + 1"))?;
    let r = classify(&fam, &SampleGrid::for_family(&fam), &Tolerances::for_family(FamilyTag::III1), DEFAULT_SEED)?;
    let v = r.verdicts;
    if (v.lcf, v.p, v.q) != (Satisfied, Satisfied, Violated) || r.aggregates.q_explicit.max <= 1e-4 {
        bad.push(format!("III1 {:?} q {:.1e}", (v.lcf, v.p, v.q), r.aggregates.q_explicit.max));
    }
    outcome(bad.is_empty(), if bad.is_empty() { "10 rows match".to_string() } else { bad.join("; ") })
}

fn eigenvalues() -> Result<Outcome> {
    let vi = build_family(&FamilySpec::new(FamilyTag::VI).with_param("a", 1.0).with_param("b", 2.0))?;
    let s = ricci_spectrum(&curvature_bundle(&vi.chart, &[0.0, 0.2, -0.1, 0.3])?);
    let vi_gap = s.eigenvalues.iter().zip([-6.0, -8.0, -10.0, -12.0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let vii = build_family(&FamilySpec::new(FamilyTag::VII).with_param("a6", 4.0).with_param("a5", 0.0))?;
    let mut vii_gap: f64 = 0.0;
    for p in default_grid(&vii) {
        let b = curvature_bundle(&vii.chart, &p)?;
        let r: [f64; DIM] = std::array::from_fn(|i| b.ricci[i][i] / b.g[i][i]);
        for i in 0..DIM {
            for j in 0..DIM {
                vii_gap = vii_gap.max((r[i] - r[j] + 2.0 * (p[i] - p[j])).abs());
            }
        }
    }

    let cone = build_family(&FamilySpec::new(FamilyTag::III1).with_profile("f", "t").with_param("K_N", 1.0))?;
    let mut cone_max: f64 = 0.0;
    for p in default_grid(&cone) {
        let s = ricci_spectrum(&curvature_bundle(&cone.chart, &p)?);
        cone_max = s.eigenvalues.iter().fold(cone_max, |m, r| m.max(r.abs()));
    }
    outcome(
        vi_gap < 1e-6 && vii_gap < 1e-6 && cone_max < 1e-8,
        format!("VI {vi_gap:.1e}, VII {vii_gap:.1e}, III1 {cone_max:.1e}"),
    )
}

fn parallel_ricci_regression() -> Result<Outcome> {
    let mut nabla: f64 = 0.0;
    for tag in FamilyTag::PARALLEL_RICCI {
        nabla = nabla.max(classify_default(tag)?.aggregates.nabla_ricci.max);
    }
    let samples: Vec<f64> = (0..=20).map(|k| -0.3 + 0.03 * k as f64).collect();
    let mut unsquared: f64 = 0.0;
    let mut squared = f64::INFINITY;
    for (f, k_n, c) in [("1/(t + 1)", 1.0, 0.0), ("1/(exp(t) + exp(-t))", -4.0, 1.0)] {
        let (u, s) = f_equation_residuals(&ProfileFunction::closed(f)?, k_n, c, &samples)?;
        unsquared = unsquared.max(u);
        squared = squared.min(s);
    }
    outcome(
        nabla < 1e-7 && unsquared < 1e-9 && squared > 1e-2,
        format!("nabla_ricci {nabla:.1e}, unsquared {unsquared:.1e}, squared {squared:.1e}"),
    )
}

fn stackel_suite() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for tag in FamilyTag::STACKEL {
        let fam = build_family(&FamilySpec::new(tag))?;
        for p in default_grid(&fam) {
            worst = worst.max(stackel_residual(&fam.chart, &p)?);
        }
    }
    let one = Jet3::constant(1.0);
    let control = MetricChart::diagonal("control", move |x| Ok([one, one, (x[0] * x[1]).exp(), one]), |_| Ok(()));
    let mut control_gap: f64 = 0.0;
    for p in box_points(&[[-0.5, 0.5]; 4], [5; 4], 0.05) {
        control_gap = control_gap.max((stackel_residual(&control, &p)? - 0.5).abs());
    }
    outcome(worst < 1e-9 && control_gap < 1e-9, format!("worst {worst:.1e}, control off by {control_gap:.1e}"))
}

fn implication(families: &[Family]) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut charts: Vec<(Family, Vec<Point>)> = families.iter().map(|f| (f.clone(), default_grid(f))).collect();
    for tag in FamilyTag::ALL {
        let mut drawn = 0;
        while drawn < 50 {
            let Ok(fam) = build_family(&random_spec(tag, &mut rng)) else { continue };
            drawn += 1;
            let pts = SampleGrid::new(fam.sample_box, [2; DIM]).points(&fam);
            charts.push((fam, pts));
        }
    }
    let mut counter = Vec::new();
    let mut n = 0;
    for (fam, pts) in &charts {
        for p in pts {
            let b = curvature_bundle(&fam.chart, p)?;
            let r = ResidualSet::evaluate(&fam.chart, &b, DEFAULT_SEED)?;
            n += 1;
            if r.weyl_norm < 1e-8 && r.q_explicit < 1e-7 && r.p_commutator > 1e-6 {
                counter.push(format!("{} at {p:?}", fam.chart.label()));
            }
        }
    }
    outcome(counter.is_empty(), format!("{} charts, {n} points, {} counterexamples{}", charts.len(), counter.len(), counter.iter().map(|c| format!(" {c}")).collect::<String>()))
}

fn oracles(families: &[Family]) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut fd: f64 = 0.0;
    for k in 0..100 {
        let tag = FamilyTag::ALL[k % FamilyTag::ALL.len()];
        let fam = loop {
            if let Ok(f) = build_family(&random_spec(tag, &mut rng)) {
                break f;
            }
        };
        let p = *SampleGrid::new(fam.sample_box, [4; DIM]).points(&fam).choose(&mut rng).expect("grid points");
        let p: Point = std::array::from_fn(|i| p[i] + rng.gen_range(-1e-3..1e-3));
        fd = fd.max(fd_jet_gap(&fam.chart, &p, FD_STEP, true)?);
    }
    let mut weyl: f64 = 0.0;
    for fam in families {
        for p in default_grid(fam) {
            weyl = weyl.max(weyl_gap(&curvature_bundle(&fam.chart, &p)?));
        }
    }
    outcome(fd < 1e-5 && weyl < 1e-10, format!("fd {fd:.1e}, weyl {weyl:.1e}"))
}

fn determinism() -> Result<Outcome> {
    let mut differing = Vec::new();
    for tag in FamilyTag::ALL {
        let fam = build_family(&FamilySpec::new(tag))?;
        let grid = SampleGrid::new(fam.sample_box, [3; DIM]);
        let tol = Tolerances::for_family(tag);
        let a = report_json(&classify(&fam, &grid, &tol, DEFAULT_SEED)?)?;
        let b = report_json(&classify(&build_family(&FamilySpec::new(tag))?, &grid, &tol, DEFAULT_SEED)?)?;
        if a != b {
            differing.push(tag.name());
        }
    }
    outcome(differing.is_empty(), format!("differing: {differing:?}"))
}

fn main() {
    let start = Instant::now();
    let families = catalog().expect("catalog defaults build");
    let criteria: Vec<(&str, Criterion)> = vec![
        ("tensor identities", Box::new(|| identities(&families))),
        ("diagonal curvature equivalence", Box::new(diagonal_equivalence)),
        ("classification matrix", Box::new(classification_matrix)),
        ("closed-form eigenvalues", Box::new(eigenvalues)),
        ("parallel Ricci regression", Box::new(parallel_ricci_regression)),
        ("Stäckel suite", Box::new(stackel_suite)),
        ("LCF and Q imply P", Box::new(|| implication(&families))),
        ("oracle agreement", Box::new(|| oracles(&families))),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += !pass as usize;
        println!("{} {}. {name}: {detail} ({:.1}s)", if pass { "PASS" } else { "FAIL" }, k + 1, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {} of {} criteria pass in {:.1}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
