use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use super::ConditionReport;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Pretty JSON with every float written to 17 significant digits.
struct FixedPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FixedPrecision<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn report_json(report: &ConditionReport) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedPrecision(PrettyFormatter::new()));
    report
        .serialize(&mut ser)
        .map_err(|e| Error::InternalConsistency(format!("report serialization: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub const CSV_COLUMNS: [&str; 22] = [
    "index",
    "x1",
    "x2",
    "x3",
    "x4",
    "weyl_norm",
    "cotton",
    "q_general",
    "q_explicit",
    "p_commutator",
    "p_quadratic",
    "codazzi",
    "killing",
    "nabla_ricci",
    "stackel",
    "r1",
    "r2",
    "r3",
    "r4",
    "pattern",
    "eigen_drift",
    "chart",
];

/// One row per grid point with every residual and the Ricci spectrum.
pub fn report_csv(report: &ConditionReport) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    let f = |v: f64| format!("{v:.16e}");
    for (n, p) in report.points.iter().enumerate() {
        let r = &p.residuals;
        let mut row = vec![n.to_string()];
        row.extend(p.point.iter().map(|&x| f(x)));
        row.extend(
            [
                r.weyl_norm,
                r.cotton,
                r.q_general,
                r.q_explicit,
                r.p_commutator,
                r.p_quadratic,
                r.codazzi,
                r.killing,
                r.nabla_ricci,
            ]
            .map(f),
        );
        row.push(r.stackel.map(f).unwrap_or_default());
        row.extend(p.eigenvalues.map(f));
        row.push(p.pattern.iter().map(|k| k.to_string()).collect::<Vec<_>>().join("-"));
        row.push(f(p.eigen_drift));
        row.push(report.chart.clone());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use super::*;

    #[test]
    fn json_round_trip_and_precision() {
        let family = build_family(&FamilySpec::new(FamilyTag::II)).unwrap();
        let grid = SampleGrid::new(family.sample_box, [2, 1, 1, 1]);
        let report = classify(&family, &grid, &Tolerances::for_family(FamilyTag::II), 7).unwrap();
        let text = report_json(&report).unwrap();
        assert!(text.contains("\"schema_version\": 1"));
        assert!(text.contains("e-1") || text.contains("e0"));
        let back: ConditionReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        let csv = report_csv(&report);
        assert_eq!(csv.lines().count(), 1 + report.points.len());
        assert!(csv.lines().all(|l| l.split(',').count() == CSV_COLUMNS.len()));
    }
}
