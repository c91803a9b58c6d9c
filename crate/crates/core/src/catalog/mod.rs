//! Constructors for the classified metric families and the separable
//! (Stäckel) charts, with parameter validation and closed-form Ricci
//! eigenvalues.

mod expr;
mod families;
mod profile;
mod random;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::MetricChart;
use crate::Point;

pub use expr::{Expr, Func};
pub use profile::{
    f_equation_residuals, solve_f_profile, solve_f_profile_squared, solve_mu_profile, solve_phi_profile,
    MuConstants, MuJets, MuPde, MuProfile, OdeProfile, ProfileFunction, PROFILE_TOL,
};
pub use random::random_spec;

/// Per-coordinate sampling intervals.
pub type SampleBox = [[f64; 2]; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FamilyTag {
    I,
    II,
    III1,
    III2,
    IV,
    V,
    VI,
    VII,
    VIII,
    IX,
    S1,
    S2,
    S3,
    S4,
    S5,
    S6,
    S7,
    S8,
    S9,
    S10,
    R2a,
    R2b,
    R2c,
}

use FamilyTag::*;

impl FamilyTag {
    pub const ALL: [FamilyTag; 23] = [
        I, II, III1, III2, IV, V, VI, VII, VIII, IX, S1, S2, S3, S4, S5, S6, S7, S8, S9, S10, R2a, R2b, R2c,
    ];

    /// Families of the LCF P-space classification.
    pub const P_FAMILIES: [FamilyTag; 9] = [I, II, III1, IV, V, VI, VII, VIII, IX];
    /// Families of the LCF Q-space classification.
    pub const Q_FAMILIES: [FamilyTag; 9] = [I, II, III2, IV, V, VI, VII, VIII, IX];
    pub const STACKEL: [FamilyTag; 10] = [S1, S2, S3, S4, S5, S6, S7, S8, S9, S10];
    pub const PARALLEL_RICCI: [FamilyTag; 3] = [R2a, R2b, R2c];

    pub fn name(self) -> &'static str {
        match self {
            I => "I",
            II => "II",
            III1 => "III1",
            III2 => "III2",
            IV => "IV",
            V => "V",
            VI => "VI",
            VII => "VII",
            VIII => "VIII",
            IX => "IX",
            S1 => "S1",
            S2 => "S2",
            S3 => "S3",
            S4 => "S4",
            S5 => "S5",
            S6 => "S6",
            S7 => "S7",
            S8 => "S8",
            S9 => "S9",
            S10 => "S10",
            R2a => "R2a",
            R2b => "R2b",
            R2c => "R2c",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            I => "space form, conformally flat chart",
            II => "product of surfaces with opposite constant curvatures",
            III1 => "warped product of a line and a 3-dimensional space form",
            III2 => "warped product B¹ ×_f N³ with F = 1/f solving F'' = 2K_N F³ + cF",
            IV => "warped product B² ×_f N², base curvature K(x)",
            V => "warped product B² ×_f N² built from the μ(x,y) profile PDE",
            VI => "metric built from φ with φ'² = φ⁴ + (a+b)φ² + ab",
            VII => "diagonal metric from a degree-6 polynomial",
            VIII => "warped product B³ ×_f N¹ from a degree-5 polynomial",
            IX => "diagonal metric from P(x) = (x−b)(a3x³+a2x²+a1x)",
            S1 => "separable: 1, η(x1), η(x1)ψ(x2), η(x1)φ(x2)",
            S2 => "separable: φ(x1) times Vandermonde factors in ξ(x2), ζ(x3), η(x4)",
            S3 => "separable: η(x1), x1ξ(x2), x1x2(φ(x3)+ψ(x4)) twice",
            S4 => "separable: φ(x1)+ψ(x2) twice, ξ(x3)+η(x4) twice",
            S5 => "separable: ξ(x1)−η(x2) twice, ξη(ψ(x3)+φ(x4)) twice",
            S6 => "separable: φ(x1), ψ(x1), x1(ξ(x3)+η(x4)) twice",
            S7 => "separable: 1, φ(x1), ψ(x1), η(x1)",
            S8 => "separable: φ_i(x_i) times the three coordinate differences",
            S9 => "separable: x2x3x4, φ_i(x_i) times two coordinate differences",
            S10 => "separable: |x3−b||x4−b|, x3x4, φ_i(x_i)|x3−x4|",
            R2a => "III with f = εsqrt(K_N)x + b (parallel Ricci)",
            R2b => "III with f = Ce^{ax} + De^{−ax}, K_N = −4CDa² (parallel Ricci)",
            R2c => "III with f = C sin(ax) + D cos(ax), K_N = a²(C²+D²) (parallel Ricci)",
        }
    }

    /// Named constants with their defaults.
    pub fn param_schema(self) -> &'static [(&'static str, f64)] {
        match self {
            I => &[("k", 1.0)],
            II => &[("K", 1.0)],
            III1 | R2a => &[("K_N", 1.0)],
            R2b => &[("K_N", -4.0)],
            R2c => &[("K_N", 2.0)],
            III2 => &[("K_N", 1.0), ("c", 1.0), ("F0", 1.0), ("F1", 0.0)],
            IV => &[("K_N", 1.0), ("c", 1.0), ("A", 1.0)],
            V => &[
                ("K_N", 1.0),
                ("c", 1.0),
                ("C", 0.0),
                ("e", 0.0),
                ("mu0", 0.5),
                ("y0", 0.0),
                ("sign", 1.0),
            ],
            VI => &[("a", 1.0), ("b", 2.0), ("q", 1.0), ("r", 1.0), ("phi0", 1.0), ("sign", 1.0)],
            VII => &[
                ("a0", -3335.0625),
                ("a1", 0.0),
                ("a2", 1864.75),
                ("a3", 0.0),
                ("a4", -179.0),
                ("a5", 0.0),
                ("a6", 4.0),
            ],
            VIII => &[
                ("a0", 0.0),
                ("a1", 5.625),
                ("a2", 1.4375),
                ("a3", -5.6875),
                ("a4", -0.5),
                ("a5", 1.0),
            ],
            IX => &[("b", 1.0), ("a1", -2.25), ("a2", -1.25), ("a3", 1.0)],
            S10 => &[("b", 1.0)],
            _ => &[],
        }
    }

    /// Free profile functions (expressions in `t`) with their defaults.
    pub fn profile_schema(self) -> &'static [(&'static str, &'static str)] {
        match self {
            III1 => &[("f", "t^2 + 1")],
            R2a => &[("f", "t + 1")],
            R2b => &[("f", "2*cosh(t)")],
            R2c => &[("f", "sin(t) + cos(t)")],
            IV => &[("K", "t"), ("alpha", "0")],
            V => &[("D", "t")],
            S1 => &[("eta", "exp(t)"), ("psi", "1 + t^2"), ("phi", "2 + t^2")],
            S2 => &[("phi", "exp(t)"), ("xi", "t"), ("zeta", "t"), ("eta", "t")],
            S3 => &[("eta", "1 + t^2"), ("xi", "1 + t^2"), ("phi", "1 + t^2"), ("psi", "1 + t^2")],
            S4 => &[("phi", "1 + t^2"), ("psi", "1 + t^2"), ("xi", "2 + t^2"), ("eta", "exp(t)")],
            S5 => &[("xi", "3 + t"), ("eta", "1 + t"), ("psi", "1 + t^2"), ("phi", "1 + t^2")],
            S6 => &[("phi", "1 + t^2"), ("psi", "exp(t)"), ("xi", "1 + t^2"), ("eta", "1 + t^2")],
            S7 => &[("phi", "exp(t)"), ("psi", "1 + t^2"), ("eta", "cosh(t)")],
            S8 => &[
                ("phi1", "1/(t^6 + 1)"),
                ("phi2", "1/(t^6 + 1)"),
                ("phi3", "1/(t^6 + 1)"),
                ("phi4", "1/(t^6 + 1)"),
            ],
            S9 => &[("phi2", "1/(t^5 + t)"), ("phi3", "1/(t^5 + t)"), ("phi4", "1/(t^5 + t)")],
            S10 => &[("phi3", "1/((t - 1)*(t^3 + t))"), ("phi4", "1/((t - 1)*(t^3 + t))")],
            _ => &[],
        }
    }

    pub fn default_box(self) -> SampleBox {
        let unit = [-0.5, 0.5];
        match self {
            III1 => [[0.5, 1.5], unit, unit, unit],
            III2 => [[-0.3, 0.3], unit, unit, unit],
            V => [[0.5, 1.5], [0.0, 0.5], unit, unit],
            VI => [[-0.2, 0.2], unit, unit, unit],
            VII | S8 => [[0.0, 1.0], [2.0, 3.0], [4.0, 5.0], [6.0, 7.0]],
            VIII | S9 => [[0.0, 1.0], [0.5, 1.0], [1.5, 2.0], [2.5, 3.0]],
            IX | S10 => [[0.0, 1.0], [0.0, 1.0], [1.5, 2.0], [2.5, 3.0]],
            S1 | S4 | S7 => [[0.0, 1.0]; 4],
            S2 => [[0.0, 1.0], [0.0, 1.0], [2.0, 3.0], [4.0, 5.0]],
            S3 => [[0.5, 1.5], [0.5, 1.5], [0.0, 1.0], [0.0, 1.0]],
            S5 => [[0.0, 1.0]; 4],
            S6 => [[0.5, 1.5], [0.0, 1.0], [0.0, 1.0], [0.0, 1.0]],
            _ => [unit; 4],
        }
    }

    /// Cluster sizes of the Ricci spectrum the family is classified by.
    pub fn expected_pattern(self) -> Option<Vec<usize>> {
        Some(match self {
            I => vec![4],
            II => vec![2, 2],
            III1 | III2 => vec![3, 1],
            IV | V => vec![2, 1, 1],
            VI | VII | VIII | IX => vec![1, 1, 1, 1],
            _ => return None,
        })
    }

    /// Families whose curvature accuracy is limited by profile integration.
    /// VI integrates too, but its φ equation is smooth enough that the
    /// residuals stay near rounding.
    pub fn integration_limited(self) -> bool {
        matches!(self, III2 | V)
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyTag::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::spec("family", format!("unknown family tag `{s}`")))
    }
}

/// A catalog entry: family tag, constants, profile functions and sampling box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: FamilyTag,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub profiles: BTreeMap<String, String>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub sample_box: Option<SampleBox>,
}

impl FamilySpec {
    pub fn new(family: FamilyTag) -> Self {
        FamilySpec {
            family,
            params: BTreeMap::new(),
            profiles: BTreeMap::new(),
            sample_box: None,
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn with_profile(mut self, name: &str, source: &str) -> Self {
        self.profiles.insert(name.to_string(), source.to_string());
        self
    }

    pub fn with_box(mut self, b: SampleBox) -> Self {
        self.sample_box = Some(b);
        self
    }

    /// Every parameter with defaults filled in.
    pub fn resolved_params(&self) -> BTreeMap<String, f64> {
        let mut out: BTreeMap<String, f64> =
            self.family.param_schema().iter().map(|(k, v)| (k.to_string(), *v)).collect();
        out.extend(self.params.iter().map(|(k, v)| (k.clone(), *v)));
        out
    }

    /// Every profile with defaults filled in.
    pub fn resolved_profiles(&self) -> BTreeMap<String, String> {
        let mut out: BTreeMap<String, String> =
            self.family.profile_schema().iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        out.extend(self.profiles.iter().map(|(k, v)| (k.clone(), v.clone())));
        out
    }

    pub fn sample_box(&self) -> SampleBox {
        self.sample_box.unwrap_or_else(|| self.family.default_box())
    }

    /// Rejects unknown keys, non-finite values and empty boxes.
    pub fn validate(&self) -> Result<()> {
        let schema = self.family.param_schema();
        for (k, v) in &self.params {
            if !schema.iter().any(|(n, _)| n == k) {
                let known: Vec<&str> = schema.iter().map(|(n, _)| *n).collect();
                return Err(Error::spec(
                    format!("params.{k}"),
                    format!("unknown parameter for family {}; expected one of {known:?}", self.family),
                ));
            }
            if !v.is_finite() {
                return Err(Error::spec(format!("params.{k}"), "value must be finite"));
            }
        }
        let pschema = self.family.profile_schema();
        for (k, src) in &self.profiles {
            let known = pschema.iter().any(|(n, _)| n == k) || (self.family == V && k == "mu_pde");
            if !known {
                return Err(Error::spec(
                    format!("profiles.{k}"),
                    format!("unknown profile for family {}", self.family),
                ));
            }
            if k != "mu_pde" {
                Expr::parse(src).map_err(|e| Error::spec(format!("profiles.{k}"), e.to_string()))?;
            }
        }
        for (i, [lo, hi]) in self.sample_box().iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::spec(format!("box[{i}]"), format!("need lo < hi, got [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

type EigenFn = dyn Fn(&Point) -> Result<[f64; 4]> + Send + Sync;

/// A constructed family: the chart, its sampling box and its closed-form
/// Ricci eigenvalues where the classification provides them.
#[derive(Clone)]
pub struct Family {
    pub spec: FamilySpec,
    pub chart: MetricChart,
    pub sample_box: SampleBox,
    eigen: Option<Arc<EigenFn>>,
    pub profile: Option<ProfileFunction>,
    pub mu: Option<MuProfile>,
}

impl fmt::Debug for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Family")
            .field("spec", &self.spec)
            .field("chart", &self.chart)
            .field("sample_box", &self.sample_box)
            .finish()
    }
}

impl Family {
    pub fn tag(&self) -> FamilyTag {
        self.spec.family
    }

    pub fn has_closed_form(&self) -> bool {
        self.eigen.is_some()
    }
}

/// Number of samples per coordinate in the construction-time positivity scan.
pub const SCAN_COUNT: usize = 5;
/// Fraction of the box width kept clear of the box boundary when sampling.
pub const BOX_MARGIN: f64 = 0.05;

/// Interior points of `b`: `n` per coordinate on the box shrunk by `margin`.
pub fn box_points(b: &SampleBox, counts: [usize; 4], margin: f64) -> Vec<Point> {
    let axes: Vec<Vec<f64>> = (0..4)
        .map(|i| {
            let [lo, hi] = b[i];
            let m = margin * (hi - lo);
            let (lo, hi) = (lo + m, hi - m);
            let n = counts[i].max(1);
            if n == 1 {
                vec![0.5 * (lo + hi)]
            } else {
                (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
            }
        })
        .collect();
    let mut out = Vec::new();
    for &a in &axes[0] {
        for &b in &axes[1] {
            for &c in &axes[2] {
                for &d in &axes[3] {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    out
}

/// Builds the chart of `spec`, checking its constraints on the sampling box.
pub fn build_family(spec: &FamilySpec) -> Result<Family> {
    spec.validate()?;
    let family = families::construct(spec)?;
    for p in box_points(&family.sample_box, [SCAN_COUNT; 4], BOX_MARGIN) {
        if let Err(reason) = family.chart.check_domain(&p) {
            return Err(Error::construction(reason, Some(p)));
        }
        if let Err(e) = family.chart.metric_at(&p) {
            let reason = match e {
                Error::Geometry { reason, .. } => reason,
                other => other.to_string(),
            };
            return Err(Error::construction(reason, Some(p)));
        }
    }
    Ok(family)
}

/// Closed-form Ricci eigenvalues at `point`, sorted descending.
pub fn closed_form_eigenvalues(family: &Family, point: &Point) -> Result<[f64; 4]> {
    let f = family
        .eigen
        .as_ref()
        .ok_or_else(|| Error::NotApplicable(format!("family {} has no closed-form eigenvalues", family.tag())))?;
    let mut ev = f(point)?;
    ev.sort_by(|a, b| b.total_cmp(a));
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        for t in FamilyTag::ALL {
            assert_eq!(t.name().parse::<FamilyTag>().unwrap(), t);
            let json = serde_json::to_string(&t).unwrap();
            assert_eq!(json, format!("\"{}\"", t.name()));
        }
        assert!("X".parse::<FamilyTag>().is_err());
    }

    #[test]
    fn unknown_parameter_is_a_spec_error() {
        let s = FamilySpec::new(VI).with_param("z", 1.0);
        assert!(matches!(s.validate(), Err(Error::Spec { .. })));
    }

    #[test]
    fn box_points_stay_inside() {
        let b = [[0.0, 1.0], [2.0, 3.0], [4.0, 5.0], [6.0, 7.0]];
        let pts = box_points(&b, [5; 4], 0.05);
        assert_eq!(pts.len(), 625);
        assert_eq!(pts[0], [0.05, 2.05, 4.05, 6.05]);
        assert!((pts[624][3] - 6.95).abs() < 1e-15);
    }
}
