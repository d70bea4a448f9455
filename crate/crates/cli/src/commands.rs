use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use medax::fields::{GridSpec, PointSet2};
use medax::lowtrans::LowerTransformBackend;
use medax::mam::{mam_from_dist2, set_dist2, suplevel_mask, MamParams};
use medax::oracles::SetInput;
use medax::verify::{run_suite, Suite, SuiteReport, VerifyOptions};
use serde::{Deserialize, Serialize};

use crate::io;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "medax", version, about = "Multiscale medial axis maps of point sets and masks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Squared distance transform of a point set or mask.
    Edt(EdtArgs),
    /// Multiscale medial axis map M_lambda.
    Mam(MamArgs),
    /// Run verification suites against closed forms and bounds.
    Verify(VerifyArgs),
}

/// `--grid x0,y0,h,nx,ny`, checked only for syntax at parse time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridArg {
    pub x0: f64,
    pub y0: f64,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
}

impl std::str::FromStr for GridArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 5 {
            return Err(format!("expected x0,y0,h,nx,ny, got {s:?}"));
        }
        let real = |t: &str| t.parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
        let int = |t: &str| t.parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
        Ok(GridArg { x0: real(parts[0])?, y0: real(parts[1])?, h: real(parts[2])?, nx: int(parts[3])?, ny: int(parts[4])? })
    }
}

impl GridArg {
    pub fn spec(&self) -> Result<GridSpec, CliError> {
        Ok(GridSpec::new(self.x0, self.y0, self.h, self.nx, self.ny)?)
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Point set (.csv, "x,y" per line) or mask (.pgm, nonzero = member).
    pub input: PathBuf,
    /// Sampling grid "x0,y0,h,nx,ny". Required for CSV input; for PGM input it
    /// must match the image size and defaults to the unit lattice at the origin.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<GridArg>,
}

#[derive(Debug, Args)]
pub struct EdtArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output field file (MMAF1).
    #[arg(long)]
    pub out_field: PathBuf,
    /// Optional 8-bit rendering.
    #[arg(long)]
    pub out_pgm: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Opening,
    Iterative,
}

#[derive(Debug, Args)]
pub struct MamArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value = "opening")]
    pub backend: BackendArg,
    /// Level for the suplevel mask written by --out-mask.
    #[arg(long, allow_hyphen_values = true)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub out_field: PathBuf,
    /// Mask of trusted cells with M_lambda >= threshold, as PGM. Cells whose
    /// value depends on where the grid was cut off are left out.
    #[arg(long, requires = "threshold")]
    pub out_mask: Option<PathBuf>,
    /// Min-max normalized 8-bit rendering of M_lambda, with a sidecar JSON.
    #[arg(long)]
    pub out_pgm: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suite to run; all suites when omitted.
    #[arg(long, value_parser = parse_suite)]
    pub suite: Option<Suite>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Stopping tolerance of the iterative backend in the backends suite.
    #[arg(long, allow_hyphen_values = true)]
    pub iter_tol: Option<f64>,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: medax::Error| e.to_string())
}

/// Top-level object of `verify --report`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub iterative_tol: Option<f64>,
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Edt(a) => cmd_edt(&a),
        Command::Mam(a) => cmd_mam(&a),
        Command::Verify(a) => cmd_verify(&a).and_then(|r| {
            if r.passed {
                Ok(())
            } else {
                let failed: Vec<String> = r
                    .suites
                    .iter()
                    .flat_map(|s| &s.criteria)
                    .filter(|c| !c.passed)
                    .map(|c| format!("criterion {}", c.id))
                    .collect();
                Err(CliError::Verification(failed.join(", ")))
            }
        }),
    }
}

fn load_set(a: &InputArgs) -> Result<(SetInput, GridSpec), CliError> {
    let ext = a.input.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("csv") => {
            let bytes = io::read_bytes(&a.input)?;
            let text = String::from_utf8(bytes).map_err(|_| CliError::Parse("CSV is not UTF-8".into()))?;
            let pts: PointSet2 = io::parse_points_csv(&text)?;
            let grid = a
                .grid
                .ok_or_else(|| CliError::BadParameter("--grid is required for CSV input".into()))?
                .spec()?;
            if pts.is_empty() {
                return Err(CliError::EmptySet);
            }
            Ok((SetInput::Points(pts), grid))
        }
        Some("pgm") => {
            let pgm = io::decode_pgm(&io::read_bytes(&a.input)?)?;
            let grid = a.grid.map(|g| g.spec()).transpose()?;
            let mask = io::pgm_to_mask(&pgm, grid)?;
            if !mask.any() {
                return Err(CliError::EmptySet);
            }
            let spec = *mask.spec();
            Ok((SetInput::Mask(mask), spec))
        }
        _ => Err(CliError::Parse(format!("{}: expected a .csv or .pgm input", a.input.display()))),
    }
}

pub fn cmd_edt(a: &EdtArgs) -> Result<(), CliError> {
    let (k, spec) = load_set(&a.input)?;
    let d2 = set_dist2(&k, spec)?;
    io::write_field(&a.out_field, &d2)?;
    if let Some(p) = &a.out_pgm {
        io::write_rendering(p, &d2)?;
    }
    eprintln!("dist2: {}x{} grid, max {:.6e}", spec.nx, spec.ny, d2.max());
    Ok(())
}

pub fn cmd_mam(a: &MamArgs) -> Result<(), CliError> {
    if !(a.lambda > 0.0 && a.lambda.is_finite()) {
        return Err(CliError::BadParameter(format!("--lambda must be > 0, got {}", a.lambda)));
    }
    if let Some(t) = a.threshold {
        if !t.is_finite() {
            return Err(CliError::BadParameter(format!("--threshold must be finite, got {t}")));
        }
    }
    let (k, spec) = load_set(&a.input)?;
    let backend = match a.backend {
        BackendArg::Opening => LowerTransformBackend::opening(),
        BackendArg::Iterative => LowerTransformBackend::iterative(),
    };
    let params = MamParams::new(a.lambda).with_backend(backend);
    let d2 = set_dist2(&k, spec)?;
    let res = mam_from_dist2(d2, &params)?;
    io::write_field(&a.out_field, &res.m_field)?;
    if let (Some(p), Some(t)) = (&a.out_mask, a.threshold) {
        let mask = suplevel_mask(&res.m_field, t).and(&res.trusted)?;
        io::write_mask_pgm(p, &mask)?;
    }
    if let Some(p) = &a.out_pgm {
        io::write_rendering(p, &res.m_field)?;
    }
    eprintln!(
        "M_lambda: lambda {}, max {:.6e}, trusted cells {} of {}",
        a.lambda,
        res.m_field.max(),
        res.trusted.count(),
        spec.len()
    );
    Ok(())
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<VerifyReport, CliError> {
    let mut iterative = LowerTransformBackend::iterative();
    if let Some(t) = a.iter_tol {
        if !(t > 0.0) {
            return Err(CliError::BadParameter(format!("--iter-tol must be > 0, got {t}")));
        }
        iterative = iterative.with_tol(t);
    }
    let opts = VerifyOptions { seed: a.seed, iterative };
    let suites: Vec<Suite> = match a.suite {
        Some(s) => vec![s],
        None => Suite::ALL.to_vec(),
    };
    let mut reports = Vec::new();
    for s in suites {
        let r = run_suite(s, &opts)?;
        for c in &r.criteria {
            let status = if c.passed { "PASS" } else { "FAIL" };
            eprintln!("[{status}] {} criterion {}: {}", r.suite, c.id, c.title);
            if let Some(w) = c.worst() {
                eprintln!("       worst: {} measured {:.6e} bound {:.6e} slack {:.3e}", w.name, w.measured, w.bound, w.slack);
            }
        }
        reports.push(r);
    }
    let report = VerifyReport {
        tool: "medax".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: a.seed,
        iterative_tol: a.iter_tol,
        passed: reports.iter().all(|r| r.passed),
        suites: reports,
    };
    if let Some(p) = &a.report {
        write_report(p, &report)?;
    }
    Ok(report)
}

fn write_report(path: &Path, r: &VerifyReport) -> Result<(), CliError> {
    let json = serde_json::to_vec_pretty(r).expect("report serializes");
    io::write_bytes(path, &json)
}
