//! Command-line front end.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::calculus::{apply_calculus, riesz_projector, CalculusKind};
use crate::contour::{auto_contour, default_margin, Contour, DEFAULT_NODES};
use crate::error::{Error, Result};
use crate::identities::{self, reports_to_csv, IdentityReport};
use crate::operators::{s_spectrum, CommutingOperator};
use crate::qlinalg::QuatMatrix;
use crate::quat::{ImaginaryUnit, SpectralSphere};
use crate::slicefn::SlicePoly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "qfcalc", version, about = "Quaternionic functional calculi on the S-spectrum")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Operator file `{ "n": .., "T0": [[..]], .. }`.
    #[arg(long, global = true)]
    pub operator: Option<PathBuf>,
    /// Function file `{ "side": "left", "coeffs": [[w,x,y,z], ..] }`.
    #[arg(long, global = true)]
    pub function: Option<PathBuf>,
    #[arg(long, global = true, default_value = "s")]
    pub calculus: CalculusKind,
    /// Contour file, or `auto` to build circles around the spectrum.
    #[arg(long, global = true, default_value = "auto")]
    pub contour: String,
    /// Comma separated sphere indices (as listed by `spectrum`) enclosed by the
    /// projector contour. Defaults to all spheres.
    #[arg(long, global = true, value_delimiter = ',')]
    pub cluster: Option<Vec<usize>>,
    /// Nodes per circle; overrides the contour file when given.
    #[arg(long, global = true)]
    pub nodes: Option<usize>,
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the spheres of the S-spectrum.
    Spectrum,
    /// Evaluate a calculus on a stem.
    Apply,
    /// Riesz projector of the selected spheres.
    Projector,
    /// Check one named identity on seeded random inputs.
    Verify { name: String },
    /// Check every registered identity.
    Selftest,
}

/// A finished command: the document to emit and whether its checks passed.
pub struct Outcome {
    pub document: String,
    pub pass: bool,
}

/// JSON with every float written to 17 significant digits.
struct Exact;

impl serde_json::ser::Formatter for Exact {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Exact);
    value.serialize(&mut ser).map_err(|e| Error::Numeric(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Numeric(e.to_string()))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_operator(cfg: &RunConfig) -> Result<CommutingOperator> {
    let path = cfg.operator.as_deref().ok_or_else(|| Error::Parse("--operator is required".into()))?;
    CommutingOperator::from_json(&read(path)?)
}

fn load_function(cfg: &RunConfig) -> Result<SlicePoly> {
    let path = cfg.function.as_deref().ok_or_else(|| Error::Parse("--function is required".into()))?;
    SlicePoly::from_json(&read(path)?)
}

fn load_contour(cfg: &RunConfig, spectrum: &[SpectralSphere], selection: &[usize]) -> Result<Contour> {
    let c = if cfg.contour == "auto" {
        let nodes = cfg.nodes.unwrap_or(DEFAULT_NODES);
        auto_contour(spectrum, selection, default_margin(spectrum), ImaginaryUnit::e1(), nodes)?
    } else {
        Contour::from_json(&read(Path::new(&cfg.contour))?)?
    };
    match cfg.nodes {
        Some(n) => {
            let c = c.with_nodes(n);
            c.validate()?;
            Ok(c)
        }
        None => Ok(c),
    }
}

fn matrix_csv(m: &QuatMatrix) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Numeric(e.to_string());
    w.write_record(["row", "col", "w", "x", "y", "z"]).map_err(err)?;
    for (i, row) in m.rows().iter().enumerate() {
        for (j, q) in row.iter().enumerate() {
            let mut rec = vec![i.to_string(), j.to_string()];
            rec.extend([q.w, q.x, q.y, q.z].iter().map(|v| format!("{v:.16e}")));
            w.write_record(&rec).map_err(err)?;
        }
    }
    String::from_utf8(w.into_inner().map_err(|e| Error::Numeric(e.to_string()))?).map_err(|e| Error::Numeric(e.to_string()))
}

fn spectrum_csv(spheres: &[SpectralSphere]) -> Result<String> {
    let mut out = String::from("u,v,multiplicity\n");
    for s in spheres {
        out.push_str(&format!("{:.16e},{:.16e},{}\n", s.u, s.v, s.multiplicity));
    }
    Ok(out)
}

#[derive(Serialize)]
struct ApplyDoc<'a> {
    calculus: &'a str,
    nodes: usize,
    result: &'a QuatMatrix,
}

#[derive(Serialize)]
struct ProjectorDoc<'a> {
    calculus: &'a str,
    selection: &'a [usize],
    nodes: usize,
    projector: &'a QuatMatrix,
    idempotency_residual: f64,
    pass: bool,
}

fn reports(cfg: &RunConfig, reports: &[IdentityReport]) -> Result<String> {
    match cfg.format {
        Format::Json => to_json(&reports),
        Format::Csv => reports_to_csv(reports),
    }
}

/// Executes a parsed configuration.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    match &cfg.command {
        Command::Spectrum => {
            let sp = s_spectrum(&load_operator(cfg)?)?;
            let document = match cfg.format {
                Format::Json => to_json(&sp)?,
                Format::Csv => spectrum_csv(&sp)?,
            };
            Ok(Outcome { document, pass: true })
        }
        Command::Apply => {
            let t = load_operator(cfg)?;
            let f = load_function(cfg)?;
            let sp = s_spectrum(&t)?;
            let all: Vec<usize> = (0..sp.len()).collect();
            let c = load_contour(cfg, &sp, &all)?;
            let value = apply_calculus(cfg.calculus, &f, &t, &c)?;
            let document = match cfg.format {
                Format::Json => to_json(&ApplyDoc { calculus: cfg.calculus.name(), nodes: c.nodes, result: &value })?,
                Format::Csv => matrix_csv(&value)?,
            };
            Ok(Outcome { document, pass: true })
        }
        Command::Projector => {
            let t = load_operator(cfg)?;
            let sp = s_spectrum(&t)?;
            let selection = cfg.cluster.clone().unwrap_or_else(|| (0..sp.len()).collect());
            let c = load_contour(cfg, &sp, &selection)?;
            let p = riesz_projector(cfg.calculus, &t, &c)?;
            let residual = (&(&p * &p) - &p).norm();
            let pass = residual <= cfg.tol * p.norm().max(1.0);
            let document = match cfg.format {
                Format::Json => to_json(&ProjectorDoc {
                    calculus: cfg.calculus.name(),
                    selection: &selection,
                    nodes: c.nodes,
                    projector: &p,
                    idempotency_residual: residual,
                    pass,
                })?,
                Format::Csv => matrix_csv(&p)?,
            };
            Ok(Outcome { document, pass })
        }
        Command::Verify { name } => {
            let fam = identities::family(name)?;
            let op = match cfg.operator {
                Some(_) => Some(load_operator(cfg)?),
                None => None,
            };
            let trials = if fam.is_pointwise() { identities::POINTWISE_TRIALS } else { identities::INTEGRAL_TRIALS };
            let r = identities::verify_random(name, cfg.seed, trials, cfg.tol, op.as_ref())?;
            let pass = r.pass;
            let document = match cfg.format {
                Format::Json => to_json(&r)?,
                Format::Csv => reports_to_csv(std::slice::from_ref(&r))?,
            };
            Ok(Outcome { document, pass })
        }
        Command::Selftest => {
            let table = identities::verify_all(cfg.seed, cfg.tol);
            let pass = table.iter().all(|r| r.pass);
            Ok(Outcome { document: reports(cfg, &table)?, pass })
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) => 2,
        Error::Precondition(_)
        | Error::Geometry(_)
        | Error::Domain(_)
        | Error::DimensionMismatch { .. }
        | Error::Invariant(_) => 3,
        Error::Singular { .. } | Error::Divergence { .. } | Error::Numeric(_) => 4,
    }
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    error: &'a str,
    message: String,
}

fn report_error(e: &Error) -> i32 {
    let doc = to_json(&ErrorDoc { error: e.kind(), message: e.to_string() }).unwrap_or_default();
    let _ = io::stderr().write_all(doc.as_bytes());
    exit_code(e)
}

/// Parses `args`, runs the command and returns the process exit status:
/// 0 when every check passes, 1 when a check fails, 2 to 4 on errors.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            return report_error(&Error::Parse(e.to_string().trim_end().to_string()));
        }
    };
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => return report_error(&e),
    };
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &outcome.document).map_err(|e| Error::Parse(format!("{}: {e}", path.display()))),
        None => io::stdout().write_all(outcome.document.as_bytes()).map_err(|e| Error::Numeric(e.to_string())),
    };
    if let Err(e) = written {
        return report_error(&e);
    }
    if outcome.pass {
        0
    } else {
        1
    }
}
