//! Grid sampling, residual aggregation and class verdicts for a family chart.

mod output;

pub use output::{report_csv, report_json, CSV_COLUMNS, SCHEMA_VERSION};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::{box_points, build_family, Family, FamilySpec, FamilyTag, SampleBox, BOX_MARGIN, PROFILE_TOL};
use crate::conditions::{ResidualSet, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::geometry::{curvature_bundle, multiplicity_pattern, ricci_spectrum, CLUSTER_TOL};
use crate::{Point, DIM};

/// Samples per coordinate unless overridden.
pub const DEFAULT_COUNT: usize = 5;

/// Verdict thresholds on normalized residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// A condition is satisfied when the largest residual is below this.
    pub satisfied: f64,
    /// A condition is violated when some residual exceeds this.
    pub violated: f64,
}

impl Tolerances {
    pub fn for_family(tag: FamilyTag) -> Self {
        Tolerances {
            satisfied: if tag.integration_limited() { 1e-6 } else { 1e-7 },
            violated: 1e-4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.satisfied) || !ok(self.violated) || self.satisfied > self.violated {
            return Err(Error::spec(
                "tolerances",
                format!("need 0 < satisfied ≤ violated, got {} and {}", self.satisfied, self.violated),
            ));
        }
        Ok(())
    }
}

/// Sampling lattice over a box, inset by `margin` of each width, keeping only
/// points whose `exclusion`-sized neighbourhood lies in the chart domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    #[serde(rename = "box")]
    pub sample_box: SampleBox,
    pub counts: [usize; DIM],
    pub margin: f64,
    pub exclusion: f64,
}

impl SampleGrid {
    pub fn new(sample_box: SampleBox, counts: [usize; DIM]) -> Self {
        SampleGrid {
            sample_box,
            counts,
            margin: BOX_MARGIN,
            exclusion: BOX_MARGIN,
        }
    }

    pub fn for_family(family: &Family) -> Self {
        Self::new(family.sample_box, [DEFAULT_COUNT; DIM])
    }

    /// Lattice points that survive the exclusion test, in lattice order.
    pub fn points(&self, family: &Family) -> Vec<Point> {
        let widths: [f64; DIM] = std::array::from_fn(|i| self.sample_box[i][1] - self.sample_box[i][0]);
        box_points(&self.sample_box, self.counts, self.margin)
            .into_iter()
            .filter(|p| {
                family.chart.in_domain(p)
                    && (0..DIM).all(|i| {
                        [-1.0, 1.0].iter().all(|s| {
                            let mut q = *p;
                            q[i] += s * self.exclusion * widths[i];
                            family.chart.in_domain(&q)
                        })
                    })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Satisfied,
    Violated,
    Indeterminate,
}

impl Verdict {
    pub fn from_max(max: f64, tol: &Tolerances) -> Self {
        if max < tol.satisfied {
            Verdict::Satisfied
        } else if max > tol.violated {
            Verdict::Violated
        } else {
            Verdict::Indeterminate
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Verdict::Satisfied => "✓",
            Verdict::Violated => "✗",
            Verdict::Indeterminate => "?",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub lcf: Verdict,
    pub p: Verdict,
    pub q: Verdict,
    pub class_b: Verdict,
    pub class_u: Verdict,
    pub parallel_ricci: Verdict,
    pub constant_eigenvalues: Verdict,
}

/// Everything evaluated at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub point: Point,
    pub residuals: ResidualSet,
    /// Ricci eigenvalues, descending.
    pub eigenvalues: [f64; 4],
    pub pattern: Vec<usize>,
    /// Largest change of any eigenvalue from the first grid point, over `1 + max|r|`.
    pub eigen_drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub max: f64,
    pub median: f64,
}

impl Aggregate {
    fn of(mut v: Vec<f64>) -> Self {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
        Aggregate { max: v[n - 1], median }
    }
}

/// Aggregates per residual, in [`ResidualSet`] field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub weyl_norm: Aggregate,
    pub cotton: Aggregate,
    pub q_general: Aggregate,
    pub q_explicit: Aggregate,
    pub p_commutator: Aggregate,
    pub p_quadratic: Aggregate,
    pub codazzi: Aggregate,
    pub killing: Aggregate,
    pub nabla_ricci: Aggregate,
    pub stackel: Option<Aggregate>,
    pub eigen_drift: Aggregate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    /// `[min, max]` of each eigenvalue (descending order) over the grid.
    pub ranges: [[f64; 2]; 4],
    /// Most frequent multiplicity pattern; ties go to the first seen.
    pub modal_pattern: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub tolerances: Tolerances,
    pub ode_tolerance: f64,
    pub cluster_tolerance: f64,
    pub grid: SampleGrid,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub schema_version: u32,
    pub chart: String,
    pub spec: FamilySpec,
    pub points: Vec<PointRecord>,
    pub aggregates: Aggregates,
    pub spectrum: SpectrumSummary,
    pub verdicts: Verdicts,
    pub provenance: Provenance,
}

fn evaluate_point(family: &Family, p: &Point, seed: u64) -> Result<(ResidualSet, [f64; 4], Vec<usize>)> {
    let bundle = curvature_bundle(&family.chart, p)?;
    let residuals = ResidualSet::evaluate(&family.chart, &bundle, seed)?;
    let spec = ricci_spectrum(&bundle);
    Ok((residuals, spec.eigenvalues, spec.pattern))
}

/// Evaluates every grid point of `family` and assembles the report.
pub fn classify(family: &Family, grid: &SampleGrid, tol: &Tolerances, seed: u64) -> Result<ConditionReport> {
    tol.validate()?;
    if grid.counts.contains(&0) {
        return Err(Error::Argument(format!("grid counts must be positive, got {:?}", grid.counts)));
    }
    let points = grid.points(family);
    if points.is_empty() {
        return Err(Error::Argument(format!(
            "no grid points of {} survive the domain exclusions",
            family.chart.label()
        )));
    }
    let evaluated: Vec<_> = points.par_iter().map(|p| evaluate_point(family, p, seed)).collect();
    let evaluated = evaluated.into_iter().collect::<Result<Vec<_>>>()?;

    let first = evaluated[0].1;
    let records: Vec<PointRecord> = points
        .iter()
        .zip(evaluated)
        .map(|(p, (residuals, eigenvalues, pattern))| {
            let scale = 1.0 + eigenvalues.iter().chain(&first).fold(0.0f64, |m, x| m.max(x.abs()));
            let drift = (0..4).map(|i| (eigenvalues[i] - first[i]).abs()).fold(0.0, f64::max) / scale;
            PointRecord {
                point: *p,
                residuals,
                eigenvalues,
                pattern,
                eigen_drift: drift,
            }
        })
        .collect();

    let agg = |f: &dyn Fn(&PointRecord) -> f64| Aggregate::of(records.iter().map(f).collect());
    let stackel = if records.iter().all(|r| r.residuals.stackel.is_some()) {
        Some(agg(&|r| r.residuals.stackel.unwrap_or(0.0)))
    } else {
        None
    };
    let aggregates = Aggregates {
        weyl_norm: agg(&|r| r.residuals.weyl_norm),
        cotton: agg(&|r| r.residuals.cotton),
        q_general: agg(&|r| r.residuals.q_general),
        q_explicit: agg(&|r| r.residuals.q_explicit),
        p_commutator: agg(&|r| r.residuals.p_commutator),
        p_quadratic: agg(&|r| r.residuals.p_quadratic),
        codazzi: agg(&|r| r.residuals.codazzi),
        killing: agg(&|r| r.residuals.killing),
        nabla_ricci: agg(&|r| r.residuals.nabla_ricci),
        stackel,
        eigen_drift: agg(&|r| r.eigen_drift),
    };

    let v = |a: &Aggregate| Verdict::from_max(a.max, tol);
    let verdicts = Verdicts {
        lcf: v(&aggregates.weyl_norm),
        p: v(&aggregates.p_commutator),
        q: v(&aggregates.q_explicit),
        class_b: v(&aggregates.codazzi),
        class_u: v(&aggregates.killing),
        parallel_ricci: v(&aggregates.nabla_ricci),
        constant_eigenvalues: v(&aggregates.eigen_drift),
    };
    check_consistency(family.chart.label(), &verdicts, aggregates.p_commutator.max)?;

    Ok(ConditionReport {
        schema_version: SCHEMA_VERSION,
        chart: family.chart.label().to_string(),
        spec: family.spec.clone(),
        spectrum: spectrum_summary(&records),
        points: records,
        aggregates,
        verdicts,
        provenance: Provenance {
            seed,
            tolerances: *tol,
            ode_tolerance: PROFILE_TOL,
            cluster_tolerance: CLUSTER_TOL,
            grid: *grid,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

/// A conformally flat Q-space is a P-space, so that verdict combination
/// means the residuals are wrong.
fn check_consistency(label: &str, v: &Verdicts, p_max: f64) -> Result<()> {
    if v.lcf == Verdict::Satisfied && v.q == Verdict::Satisfied && v.p != Verdict::Satisfied {
        return Err(Error::InternalConsistency(format!(
            "{label}: conformally flat Q-space with P verdict {:?} (max p_commutator {p_max:e})",
            v.p
        )));
    }
    Ok(())
}

fn spectrum_summary(records: &[PointRecord]) -> SpectrumSummary {
    let mut ranges = [[f64::INFINITY, f64::NEG_INFINITY]; 4];
    let mut counts: Vec<(Vec<usize>, usize)> = Vec::new();
    for r in records {
        for i in 0..4 {
            ranges[i][0] = ranges[i][0].min(r.eigenvalues[i]);
            ranges[i][1] = ranges[i][1].max(r.eigenvalues[i]);
        }
        match counts.iter_mut().find(|(p, _)| *p == r.pattern) {
            Some((_, n)) => *n += 1,
            None => counts.push((r.pattern.clone(), 1)),
        }
    }
    let best = counts.iter().map(|(_, n)| *n).max().unwrap_or(0);
    let modal_pattern = counts.into_iter().find(|(_, n)| *n == best).map(|(p, _)| p).unwrap_or_default();
    SpectrumSummary { ranges, modal_pattern }
}

/// Grid sample counts as written in a spec file: one count for every axis or
/// one per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridCounts {
    Uniform(usize),
    PerAxis([usize; DIM]),
}

impl GridCounts {
    pub fn counts(self) -> [usize; DIM] {
        match self {
            GridCounts::Uniform(n) => [n; DIM],
            GridCounts::PerAxis(c) => c,
        }
    }
}

/// Top-level run description: a family spec plus sampling and tolerance settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub family: FamilyTag,
    #[serde(default)]
    pub params: std::collections::BTreeMap<String, f64>,
    #[serde(default)]
    pub profiles: std::collections::BTreeMap<String, String>,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub sample_box: Option<SampleBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridCounts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

impl SpecFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::spec(field_of(&e), e.to_string()))
    }

    pub fn family_spec(&self) -> FamilySpec {
        FamilySpec {
            family: self.family,
            params: self.params.clone(),
            profiles: self.profiles.clone(),
            sample_box: self.sample_box,
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.unwrap_or_else(|| Tolerances::for_family(self.family))
    }

    pub fn grid(&self, family: &Family) -> Result<SampleGrid> {
        let counts = self.grid.map(GridCounts::counts).unwrap_or([DEFAULT_COUNT; DIM]);
        if counts.iter().any(|&n| n == 0 || n > 64) {
            return Err(Error::spec("grid", format!("counts must lie in 1..=64, got {counts:?}")));
        }
        Ok(SampleGrid::new(family.sample_box, counts))
    }

    /// Builds the family and classifies it on the configured grid.
    pub fn run(&self, seed: u64) -> Result<ConditionReport> {
        let family = build_family(&self.family_spec())?;
        let grid = self.grid(&family)?;
        classify(&family, &grid, &self.tolerances(), seed)
    }
}

fn field_of(e: &serde_json::Error) -> String {
    let msg = e.to_string();
    match msg.split('`').nth(1) {
        Some(name) if msg.starts_with("unknown field") || msg.starts_with("missing field") => name.to_string(),
        _ => format!("line {} column {}", e.line(), e.column()),
    }
}

/// Classifies the catalog default of `tag` on the default grid.
pub fn classify_default(tag: FamilyTag) -> Result<ConditionReport> {
    let family = build_family(&FamilySpec::new(tag))?;
    classify(&family, &SampleGrid::for_family(&family), &Tolerances::for_family(tag), DEFAULT_SEED)
}

/// Multiplicity pattern of a closed-form eigenvalue set.
pub fn closed_form_pattern(values: &[f64; 4]) -> Vec<usize> {
    multiplicity_pattern(values, CLUSTER_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(tag: FamilyTag) -> ConditionReport {
        let family = build_family(&FamilySpec::new(tag)).unwrap();
        let grid = SampleGrid::new(family.sample_box, [2; DIM]);
        classify(&family, &grid, &Tolerances::for_family(tag), DEFAULT_SEED).unwrap()
    }

    #[test]
    fn space_form_satisfies_everything() {
        let r = small(FamilyTag::I);
        let v = r.verdicts;
        for x in [v.lcf, v.p, v.q, v.parallel_ricci, v.constant_eigenvalues, v.class_b, v.class_u] {
            assert_eq!(x, Verdict::Satisfied);
        }
        assert_eq!(r.spectrum.modal_pattern, vec![4]);
    }

    #[test]
    fn q_without_p_is_an_internal_error() {
        use Verdict::*;
        let mut v = small(FamilyTag::VI).verdicts;
        assert!(check_consistency("x", &v, 0.0).is_ok());
        v.p = Indeterminate;
        assert!(matches!(check_consistency("x", &v, 1e-5), Err(Error::InternalConsistency(_))));
        v.q = Violated;
        assert!(check_consistency("x", &v, 1e-5).is_ok());
    }

    #[test]
    fn verdict_thresholds() {
        let t = Tolerances { satisfied: 1e-7, violated: 1e-4 };
        assert_eq!(Verdict::from_max(1e-8, &t), Verdict::Satisfied);
        assert_eq!(Verdict::from_max(1e-5, &t), Verdict::Indeterminate);
        assert_eq!(Verdict::from_max(1e-3, &t), Verdict::Violated);
    }

    #[test]
    fn aggregate_median() {
        assert_eq!(Aggregate::of(vec![3.0, 1.0, 2.0]), Aggregate { max: 3.0, median: 2.0 });
        assert_eq!(Aggregate::of(vec![4.0, 1.0, 2.0, 3.0]).median, 2.5);
    }

    #[test]
    fn spec_file_parses_grid_forms() {
        let a = SpecFile::parse(r#"{"family": "VI", "grid": 3}"#).unwrap();
        assert_eq!(a.grid, Some(GridCounts::Uniform(3)));
        let b = SpecFile::parse(r#"{"family": "VI", "grid": [2, 3, 1, 1], "params": {"a": 0.5}}"#).unwrap();
        assert_eq!(b.grid.unwrap().counts(), [2, 3, 1, 1]);
        match SpecFile::parse(r#"{"family": "VI", "gird": 3}"#) {
            Err(Error::Spec { field, .. }) => assert_eq!(field, "gird"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exclusion_drops_points_near_the_boundary() {
        // f = t vanishes at x1 = 0, inside the box
        let spec = FamilySpec::new(FamilyTag::R2a).with_profile("f", "t + 0.3").with_box([[0.0, 1.0]; 4]);
        let family = build_family(&spec).unwrap();
        let mut grid = SampleGrid::new([[-0.5, 1.0], [0.0, 1.0], [0.0, 1.0], [0.0, 1.0]], [7, 1, 1, 1]);
        grid.exclusion = 0.0;
        let all = grid.points(&family).len();
        grid.exclusion = 0.2;
        assert!(grid.points(&family).len() < all);
        assert!(grid.points(&family).iter().all(|p| p[0] > -0.3 + 0.2 * 1.5));
    }
}
