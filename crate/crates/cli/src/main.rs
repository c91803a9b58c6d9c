//! `confflat`: build catalog charts, classify them, and run oracle cross-checks.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use confflat::catalog::{build_family, closed_form_eigenvalues, Family, FamilyTag};
use confflat::classify::{report_csv, report_json, GridCounts, SampleGrid, SpecFile, Tolerances};
use confflat::conditions::DEFAULT_SEED;
use confflat::geometry::{curvature_bundle, ricci_spectrum};
use confflat::oracle::{brute_force_weyl, fd_jet_gap, FD_STEP};
use confflat::{Error, Point, Result};

/// Environment variable overriding the worker thread count.
const THREADS_VAR: &str = "CONFFLAT_THREADS";

const FD_BOUND: f64 = 1e-5;
const WEYL_BOUND: f64 = 1e-10;

#[derive(Parser)]
#[command(name = "confflat", version, about = "Curvature checks for conformally flat 4-metric families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print every catalog family with its parameters and profile functions.
    List,
    /// Build a chart and validate its constraints on the sampling box.
    Check(Source),
    /// Classify a chart on a sampling grid and write the report.
    Classify(ClassifyArgs),
    /// Compare jets with finite differences and the Weyl tensor with the Schouten construction.
    Verify(VerifyArgs),
    /// Print the computed Ricci spectrum next to the closed form.
    Eigen(EigenArgs),
}

#[derive(Args)]
struct Source {
    /// Spec file (JSON with keys family, params, profiles, box, grid, tolerances).
    spec: Option<PathBuf>,
    /// Use the catalog default of this family instead of a spec file.
    #[arg(long, conflicts_with = "spec")]
    family: Option<String>,
}

impl Source {
    fn load(&self) -> Result<SpecFile> {
        match (&self.spec, &self.family) {
            (Some(path), _) => {
                let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                SpecFile::parse(&text)
            }
            (None, Some(tag)) => SpecFile::parse(&format!("{{\"family\": {}}}", serde_json::to_string(tag).unwrap())),
            (None, None) => Err(Error::Argument("give a spec file or --family".into())),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    source: Source,
    /// Samples per coordinate (1..=64), overriding the spec file.
    #[arg(long)]
    grid: Option<usize>,
    /// Seed for the random directions and frames.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Satisfied threshold, overriding the spec file.
    #[arg(long)]
    satisfied: Option<f64>,
    /// Violated threshold, overriding the spec file.
    #[arg(long)]
    violated: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Output path; standard output when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: Source,
    /// Samples per coordinate.
    #[arg(long, default_value_t = 2)]
    grid: usize,
}

#[derive(Args)]
struct EigenArgs {
    #[command(flatten)]
    source: Source,
    /// Evaluation point `x1,x2,x3,x4`; the first grid point when omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    point: Option<Vec<f64>>,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InternalConsistency(_) => 2,
        Error::Io(_) => 3,
        _ => 1,
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| (1..=1024).contains(&n))
        .ok_or_else(|| Error::Argument(format!("{THREADS_VAR} must be an integer in 1..=1024, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Argument(format!("thread pool: {e}")))
}

fn list() -> String {
    let mut out = String::new();
    for tag in FamilyTag::ALL {
        out += &format!("{:<5} {}\n", tag.name(), tag.description());
        for (k, v) in tag.param_schema() {
            out += &format!("      param   {k} = {v}\n");
        }
        for (k, v) in tag.profile_schema() {
            out += &format!("      profile {k}(t) = {v}\n");
        }
        let b = tag.default_box();
        out += &format!("      box     {b:?}\n");
    }
    out
}

fn check(spec: &SpecFile) -> Result<String> {
    let family = build_family(&spec.family_spec())?;
    Ok(format!(
        "ok: {} satisfies its constraints on {:?}\n",
        family.chart.label(),
        family.sample_box
    ))
}

fn run_classify(args: &ClassifyArgs) -> Result<String> {
    let mut spec = args.source.load()?;
    if let Some(n) = args.grid {
        spec.grid = Some(GridCounts::Uniform(n));
    }
    if args.satisfied.is_some() || args.violated.is_some() {
        let base = spec.tolerances();
        spec.tolerances = Some(Tolerances {
            satisfied: args.satisfied.unwrap_or(base.satisfied),
            violated: args.violated.unwrap_or(base.violated),
        });
    }
    let report = spec.run(args.seed)?;
    let text = match args.format {
        Format::Json => report_json(&report)?,
        Format::Csv => report_csv(&report),
    };
    match &args.output {
        Some(path) => {
            fs::write(path, &text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let v = report.verdicts;
            Ok(format!(
                "{}: LCF {} P {} Q {} parallel-Ricci {} ({} points) -> {}\n",
                report.chart,
                v.lcf.symbol(),
                v.p.symbol(),
                v.q.symbol(),
                v.parallel_ricci.symbol(),
                report.points.len(),
                path.display()
            ))
        }
        None => Ok(text),
    }
}

fn sample_points(family: &Family, n: usize) -> Result<Vec<Point>> {
    if !(1..=64).contains(&n) {
        return Err(Error::Argument(format!("grid must lie in 1..=64, got {n}")));
    }
    let pts = SampleGrid::new(family.sample_box, [n; 4]).points(family);
    if pts.is_empty() {
        return Err(Error::Argument("no admissible sample points".into()));
    }
    Ok(pts)
}

fn verify(args: &VerifyArgs) -> Result<String> {
    let spec = args.source.load()?;
    let family = build_family(&spec.family_spec())?;
    let pts = sample_points(&family, args.grid)?;
    let (mut fd, mut weyl) = (0.0f64, 0.0f64);
    for p in &pts {
        fd = fd.max(fd_jet_gap(&family.chart, p, FD_STEP, true)?);
        let b = curvature_bundle(&family.chart, p)?;
        let w = brute_force_weyl(&b.riemann, &b.ricci, b.scalar, &b.g);
        let scale = 1.0 + b.riemann_norm();
        for (x, y) in w.iter().flatten().flatten().flatten().zip(b.weyl.iter().flatten().flatten().flatten()) {
            weyl = weyl.max((x - y).abs() / scale);
        }
    }
    let line = format!(
        "{}: {} points, jets vs finite differences {fd:.3e} (bound {FD_BOUND:e}), Weyl vs Schouten construction {weyl:.3e} (bound {WEYL_BOUND:e})\n",
        family.chart.label(),
        pts.len()
    );
    if fd > FD_BOUND || weyl > WEYL_BOUND {
        return Err(Error::InternalConsistency(line.trim_end().to_string()));
    }
    Ok(line)
}

fn eigen(args: &EigenArgs) -> Result<String> {
    let spec = args.source.load()?;
    let family = build_family(&spec.family_spec())?;
    let p: Point = match &args.point {
        Some(v) => v
            .as_slice()
            .try_into()
            .map_err(|_| Error::Argument(format!("--point needs 4 coordinates, got {}", v.len())))?,
        None => sample_points(&family, 5)?[0],
    };
    let computed = ricci_spectrum(&curvature_bundle(&family.chart, &p)?);
    let closed = closed_form_eigenvalues(&family, &p).ok();
    let mut out = format!("{} at {p:?}\n{:>4} {:>24} {:>24}\n", family.chart.label(), "i", "computed", "closed form");
    for i in 0..4 {
        let c = closed.map(|c| format!("{:.16e}", c[i])).unwrap_or_else(|| "-".into());
        out += &format!("{:>4} {:>24.16e} {c:>24}\n", i + 1, computed.eigenvalues[i]);
    }
    out += &format!("pattern {:?}\n", computed.pattern);
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::List => Ok(list()),
        Command::Check(src) => src.load().and_then(|s| check(&s)),
        Command::Classify(a) => run_classify(a),
        Command::Verify(a) => verify(a),
        Command::Eigen(a) => eigen(a),
    });
    match result {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
                // a closed pipe downstream is not our failure
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    eprintln!("confflat: {}", Error::Io(format!("stdout: {e}")));
                    ExitCode::from(3)
                }
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("confflat: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes_by_error_kind() {
        assert_eq!(exit_code(&Error::InternalConsistency("x".into())), 2);
        assert_eq!(exit_code(&Error::Io("x".into())), 3);
        assert_eq!(exit_code(&Error::construction("a ≠ b", None)), 1);
        assert_eq!(exit_code(&Error::Argument("x".into())), 1);
    }

    #[test]
    fn family_flag_builds_a_spec() {
        let src = Source { spec: None, family: Some("VIII".into()) };
        assert_eq!(src.load().unwrap().family, FamilyTag::VIII);
        let src = Source { spec: None, family: Some("X".into()) };
        assert!(src.load().is_err());
        let src = Source { spec: None, family: None };
        assert!(matches!(src.load(), Err(Error::Argument(_))));
    }

    #[test]
    fn point_flag_takes_negative_coordinates() {
        let cli = Cli::try_parse_from(["confflat", "eigen", "--family", "I", "--point", "-0.1,0.2,-0.3,0"]).unwrap();
        let Command::Eigen(a) = cli.command else { panic!() };
        assert_eq!(a.point.unwrap(), vec![-0.1, 0.2, -0.3, 0.0]);
    }

    #[test]
    fn list_shows_schemas() {
        let text = list();
        assert_eq!(text.lines().filter(|l| !l.starts_with(' ')).count(), FamilyTag::ALL.len());
        assert!(text.contains("param   a6"));
    }

    #[test]
    fn sample_grid_bounds() {
        let family = build_family(&confflat::catalog::FamilySpec::new(FamilyTag::I)).unwrap();
        assert!(sample_points(&family, 0).is_err());
        assert!(sample_points(&family, 65).is_err());
        assert_eq!(sample_points(&family, 2).unwrap().len(), 16);
    }
}
