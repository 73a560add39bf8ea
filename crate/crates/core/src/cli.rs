//! Command-line interface. Every command renders its whole output into a
//! [`Report`] so that the binary can write it atomically.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::Zero;
use serde_json::{json, Value};

use crate::complex::SimplicialComplex;
use crate::curvature::{
    chamber_curvature_3manifold, edge_curvature_3manifold, face_curvature_3manifold, facet_curvature,
    form_curvature, generating_identity_check, levitt_curvature, two_manifold_curvatures, CurvatureField,
};
use crate::dynamics::{
    default_c, dirac_distances, lax_deform_ode, lax_deform_qr_grid, GChoice, OdeConfig, Wave,
};
use crate::error::{Error, Result};
use crate::exact::fmt_ratio;
use crate::graph::{is_2manifold, is_2sphere, is_3manifold, whitney_complex, Graph};
use crate::io::read_complex;
use crate::morse::{index_expectation, ph_indices, random_k_function, KFunction};
use crate::spectral::{betti, dirac, heat_super_trace, hodge, hodge_power_super_trace, write_matrix_csv};
use crate::zoo;

/// Times at which `check` samples the wave curvature.
const CHECK_TIMES: [f64; 6] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];

#[derive(Debug, Parser)]
#[command(name = "curvekit", version, about = "Curvatures on k-simplices of simplicial complexes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Input {
    /// Named complex (homology_sphere, rp3, cp2, cross<d>, octahedron,
    /// icosahedron, triangle, cycle4, random:<n>,<m>,<seed>, ...)
    #[arg(long)]
    pub builtin: Option<String>,
    /// Facet file: one facet per line, or JSON {"facets": [...]}
    #[arg(long)]
    pub file: Option<PathBuf>,
}

impl Input {
    pub fn load(&self) -> Result<SimplicialComplex> {
        match (&self.builtin, &self.file) {
            (Some(name), None) => Ok(zoo::builtin(name)?.complex),
            (None, Some(path)) => read_complex(path),
            _ => Err(Error::InvalidArgument("exactly one of --builtin and --file is required".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DeformMethod {
    Qr,
    Ode,
    Wave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GArg {
    Identity,
    /// g(D) = -log(1 + cD)
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatrixKind {
    Dirac,
    Hodge,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// f-vector, Euler characteristic, Betti numbers, manifold type, covers
    Info {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// k-form curvature (exact) or wave curvature at time t
    Curvature {
        #[command(flatten)]
        input: Input,
        #[arg(short)]
        k: usize,
        #[arg(short, allow_negative_numbers = true)]
        t: Option<f64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the invariant suite; exits non-zero if any check fails
    Check {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo expectation of Poincaré-Hopf indices
    Sample {
        #[command(flatten)]
        input: Input,
        #[arg(short)]
        k: usize,
        #[arg(short = 'n', long, default_value_t = 2000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Wave curvature or isospectral deformation over a time grid (JSON lines)
    Deform {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "qr")]
        method: DeformMethod,
        #[arg(long, value_enum, default_value = "identity")]
        g: GArg,
        /// Coupling for g = -log(1 + cD); defaults to 1/(2 ceil |D|)
        #[arg(long)]
        c: Option<f64>,
        /// Comma-separated times, e.g. 0,0.5,1
        #[arg(long, value_parser = parse_time_grid, allow_hyphen_values = true)]
        t: TimeGrid,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 0.0)]
        c_imag: f64,
        /// Dimension for wave curvature
        #[arg(short, default_value_t = 0)]
        k: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Poincaré-Hopf indices of a random or user-supplied function on G_k
    Index {
        #[command(flatten)]
        input: Input,
        #[arg(short)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSON map {"v0,v1,..": value} over all k-simplices
        #[arg(long)]
        function: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Dump the Dirac or Hodge matrix as CSV
    Matrix {
        #[command(flatten)]
        input: Input,
        #[arg(value_enum)]
        which: MatrixKind,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

impl Command {
    pub fn output(&self) -> Option<&Path> {
        match self {
            Command::Info { output, .. }
            | Command::Curvature { output, .. }
            | Command::Check { output, .. }
            | Command::Sample { output, .. }
            | Command::Deform { output, .. }
            | Command::Index { output, .. }
            | Command::Matrix { output, .. } => output.as_deref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid(pub Vec<f64>);

pub fn parse_time_grid(s: &str) -> std::result::Result<TimeGrid, String> {
    if s.trim().is_empty() {
        return Err("time grid is empty".into());
    }
    s.split(',')
        .map(|p| match p.trim().parse::<f64>() {
            Ok(t) if t.is_finite() => Ok(t),
            _ => Err(format!("'{}' is not a finite time", p.trim())),
        })
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(TimeGrid)
}

/// Rendered output and whether everything requested succeeded.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub success: bool,
}

impl Report {
    fn ok(text: String) -> Self {
        Report { text, success: true }
    }
}

pub fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Info { input, format, .. } => cmd_info(&input.load()?, *format),
        Command::Curvature { input, k, t, format, .. } => cmd_curvature(&input.load()?, *k, *t, *format),
        Command::Check { input, seed, .. } => Ok(cmd_check(&input.load()?, *seed)),
        Command::Sample {
            input, k, samples, seed, ..
        } => {
            let g = input.load()?;
            Ok(Report::ok(index_expectation(&g, *k, *samples, *seed)?.to_json().to_string() + "\n"))
        }
        Command::Deform {
            input,
            method,
            g,
            c,
            t,
            dt,
            c_imag,
            k,
            ..
        } => cmd_deform(&input.load()?, *method, *g, *c, &t.0, *dt, *c_imag, *k),
        Command::Index {
            input, k, seed, function, ..
        } => cmd_index(&input.load()?, *k, *seed, function.as_deref()),
        Command::Matrix { input, which, .. } => {
            let g = input.load()?;
            let mut buf = Vec::new();
            match which {
                MatrixKind::Dirac => write_matrix_csv("dirac", &dirac(&g), &mut buf)?,
                MatrixKind::Hodge => write_matrix_csv("hodge", &hodge(&g), &mut buf)?,
            }
            Ok(Report::ok(String::from_utf8(buf).expect("ascii csv")))
        }
    }
}

/// Writes to `path` through a temporary sibling and a rename.
pub fn write_atomically(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn tuple<T: ToString>(xs: &[T]) -> String {
    let parts: Vec<String> = xs.iter().map(T::to_string).collect();
    format!("({})", parts.join(","))
}

/// Human-readable manifold type, judged on the clique complex of the
/// 1-skeleton.
pub fn classify(g: &SimplicialComplex) -> String {
    if g.is_empty() {
        return "empty".into();
    }
    let graph = Graph::one_skeleton(g);
    if !matches!(whitney_complex(&graph), Ok(w) if w == *g) {
        return "not a flag complex".into();
    }
    match g.dim() {
        Some(2) => {
            let check = is_2manifold(&graph);
            if !check.is_manifold {
                "flag complex, not a manifold".into()
            } else if is_2sphere(&graph) {
                "2-sphere".into()
            } else if check.has_boundary() {
                "2-manifold with boundary".into()
            } else {
                "2-manifold".into()
            }
        }
        Some(3) if is_3manifold(&graph) => "3-manifold".into(),
        _ => "flag complex, not a recognized manifold".into(),
    }
}

fn cmd_info(g: &SimplicialComplex, format: Format) -> Result<Report> {
    let f = g.f_vector().0;
    let b = betti(g).0;
    let covers: Vec<Value> = (0..g.dim().map_or(0, |q| q + 1))
        .map(|k| {
            let c = g.cover_status(k);
            json!({"k": k, "weak": c.weak, "strong": c.strong,
                   "witnesses": c.witnesses.iter().map(|s| s.vertices().to_vec()).collect::<Vec<_>>()})
        })
        .collect();
    let kind = classify(g);
    if format == Format::Json {
        let v = json!({"f_vector": f, "dim": g.dim(), "chi": g.euler_characteristic(),
                       "betti": b, "manifold": kind, "covers": covers});
        return Ok(Report::ok(v.to_string() + "\n"));
    }
    let mut out = String::new();
    writeln!(out, "f-vector: {}", tuple(&f)).unwrap();
    match g.dim() {
        Some(q) => writeln!(out, "dim: {q}").unwrap(),
        None => writeln!(out, "dim: none (empty complex)").unwrap(),
    }
    writeln!(out, "chi: {}", g.euler_characteristic()).unwrap();
    writeln!(out, "betti: {}", tuple(&b)).unwrap();
    writeln!(out, "manifold: {kind}").unwrap();
    for k in 0..covers.len() {
        let c = g.cover_status(k);
        writeln!(out, "cover k={k}: weak={} strong={}", c.weak, c.strong).unwrap();
    }
    Ok(Report::ok(out))
}

fn cmd_curvature(g: &SimplicialComplex, k: usize, t: Option<f64>, format: Format) -> Result<Report> {
    let chi = g.euler_characteristic();
    let Some(t) = t else {
        let field = form_curvature(g, k)?;
        let sum = fmt_ratio(&field.sum());
        return Ok(Report::ok(match format {
            Format::Json => {
                let mut v = field.to_json(chi);
                v["sum"] = json!(sum);
                v.to_string() + "\n"
            }
            _ => format!("{}# sum={sum} chi={chi}\n", field.to_csv()),
        }));
    };
    let field = Wave::new(g).curvature(k, t)?;
    let sum = field.sum();
    let err = (sum - chi as f64).abs();
    let simplices = g.grade(k);
    Ok(Report::ok(match format {
        Format::Json => {
            let values: Vec<Value> = simplices
                .iter()
                .zip(&field.values)
                .map(|(s, v)| json!({"simplex": s.vertices(), "value": v}))
                .collect();
            json!({"k": k, "t": t, "chi": chi, "sum": sum, "abs_error": err, "values": values}).to_string() + "\n"
        }
        _ => {
            let mut out = String::from("simplex;value\n");
            for (s, v) in simplices.iter().zip(&field.values) {
                let verts: Vec<String> = s.vertices().iter().map(|v| v.to_string()).collect();
                writeln!(out, "{};{v}", verts.join(" ")).unwrap();
            }
            writeln!(out, "# sum={sum} chi={chi} abs_error={err:e}").unwrap();
            out
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Skipped,
}

struct CheckLog {
    entries: Vec<Value>,
    failed: bool,
}

impl CheckLog {
    fn record(&mut self, name: String, status: Status, detail: impl Into<String>) {
        self.failed |= status == Status::Fail;
        let status = match status {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        };
        self.entries.push(json!({"name": name, "status": status, "detail": detail.into()}));
    }

    /// Cover violations skip a check; other errors fail it.
    fn record_result(&mut self, name: String, r: Result<String>) {
        match r {
            Ok(detail) => self.record(name, Status::Pass, detail),
            Err(e @ Error::CoverViolation { .. }) => self.record(name, Status::Skipped, e.to_string()),
            Err(e) => self.record(name, Status::Fail, e.to_string()),
        }
    }

    fn record_bool(&mut self, name: &str, ok: bool, detail: String) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.record(name.into(), status, detail);
    }
}

fn same_values(a: &CurvatureField, b: &CurvatureField) -> Result<String> {
    if a.simplices == b.simplices && a.values == b.values {
        Ok(format!("{} values agree", a.len()))
    } else {
        Err(Error::IdentityViolated(format!("{:?} and {:?} disagree", a.formula, b.formula)))
    }
}

fn cmd_check(g: &SimplicialComplex, seed: u64) -> Report {
    let mut log = CheckLog {
        entries: Vec::new(),
        failed: false,
    };
    let chi = g.euler_characteristic();
    let dims = g.dim().map_or(0, |q| q + 1);

    for k in 0..dims {
        log.record_result(
            format!("gauss_bonnet_k{k}"),
            form_curvature(g, k).map(|f| format!("sum {} = chi", fmt_ratio(&f.sum()))),
        );
    }

    let b = betti(g);
    log.record_bool(
        "euler_poincare",
        b.euler_characteristic() == chi,
        format!("betti {} chi {chi}", tuple(&b.0)),
    );

    let powers: Vec<i128> = (1..=4).map(|m| hodge_power_super_trace(g, m)).collect();
    log.record_bool(
        "mckean_singer_powers",
        powers.iter().all(Zero::is_zero),
        format!("str(L^m), m=1..4: {powers:?}"),
    );
    let heat: Vec<f64> = [0.1, 1.0, 10.0].iter().map(|&t| heat_super_trace(g, t)).collect();
    log.record_bool(
        "mckean_singer_heat",
        heat.iter().all(|h| (h - chi as f64).abs() < 1e-9),
        format!("str(exp(-tL)), t=0.1,1,10: {heat:?}"),
    );

    log.record_result(
        "levitt_vs_form".into(),
        levitt_curvature(g).and_then(|l| same_values(&l, &form_curvature(g, 0)?)),
    );
    if let Some(q) = g.dim() {
        if g.is_pure() {
            log.record_result(
                "facet_vs_form".into(),
                facet_curvature(g).and_then(|f| same_values(&f, &form_curvature(g, q)?)),
            );
        } else {
            log.record("facet_vs_form".into(), Status::Skipped, "complex is not pure");
        }
    }
    match classify(g).as_str() {
        "2-sphere" | "2-manifold" | "2-manifold with boundary" => {
            for k in 0..=2 {
                log.record_result(
                    format!("two_manifold_table_k{k}"),
                    two_manifold_curvatures(g, k).and_then(|t| same_values(&t.field, &form_curvature(g, k)?)),
                );
            }
        }
        "3-manifold" => {
            log.record_result(
                "three_manifold_edge".into(),
                edge_curvature_3manifold(g).and_then(|f| same_values(&f, &form_curvature(g, 1)?)),
            );
            log.record_result(
                "three_manifold_face".into(),
                face_curvature_3manifold(g).and_then(|f| same_values(&f, &form_curvature(g, 2)?)),
            );
            log.record_result(
                "three_manifold_chamber".into(),
                chamber_curvature_3manifold(g).and_then(|f| same_values(&f, &form_curvature(g, 3)?)),
            );
        }
        other => log.record("closed_forms".into(), Status::Skipped, other.to_string()),
    }

    let gen = generating_identity_check(g);
    log.record_bool(
        "generating_identity",
        gen.holds,
        format!("f' = {:?}, link sum = {:?}", gen.derivative, gen.link_sum),
    );

    for k in 0..dims {
        let r = g.require_strong_cover(k).and_then(|_| {
            let f = random_k_function(g, k, seed)?;
            let idx = ph_indices(g, k, &f)?;
            Ok(format!("sum {} = chi ({})", idx.sum(), f.provenance))
        });
        log.record_result(format!("poincare_hopf_k{k}"), r);
    }

    let wave = Wave::new(g);
    for k in 0..dims {
        let r = CHECK_TIMES
            .iter()
            .map(|&t| wave.curvature(k, t).map(|w| (w.sum() - chi as f64).abs()))
            .collect::<Result<Vec<f64>>>()
            .and_then(|errs| {
                let worst = errs.iter().copied().fold(0.0, f64::max);
                if worst < 1e-9 {
                    Ok(format!("max |sum - chi| = {worst:e}"))
                } else {
                    Err(Error::IdentityViolated(format!("max |sum - chi| = {worst:e}")))
                }
            });
        log.record_result(format!("wave_gauss_bonnet_k{k}"), r);
    }

    let ok = !log.failed;
    let v = json!({"ok": ok, "chi": chi, "checks": log.entries});
    Report {
        text: serde_json::to_string_pretty(&v).expect("json") + "\n",
        success: ok,
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_deform(
    g: &SimplicialComplex,
    method: DeformMethod,
    garg: GArg,
    c: Option<f64>,
    times: &[f64],
    dt: f64,
    c_imag: f64,
    k: usize,
) -> Result<Report> {
    let choice = match garg {
        GArg::Identity => GChoice::Identity,
        GArg::Log => GChoice::NegLogOnePlusCD {
            c: c.unwrap_or_else(|| default_c(g)),
        },
    };
    let mut out = String::new();
    match method {
        DeformMethod::Wave => {
            let wave = Wave::new(g);
            for &t in times {
                let mut v = wave.curvature(k, t)?.to_json();
                v["k"] = json!(k);
                writeln!(out, "{v}").unwrap();
            }
        }
        DeformMethod::Qr => {
            let dist = matches!(choice, GChoice::NegLogOnePlusCD { .. }).then(|| dirac_distances(g));
            for d in lax_deform_qr_grid(g, times, choice)? {
                writeln!(out, "{}", d.to_json(dist.as_deref())).unwrap();
            }
        }
        DeformMethod::Ode => {
            let cfg = OdeConfig { dt, g: choice, c_imag };
            for d in lax_deform_ode(g, times, cfg)? {
                writeln!(out, "{}", d.to_json(None)).unwrap();
            }
        }
    }
    Ok(Report::ok(out))
}

fn cmd_index(g: &SimplicialComplex, k: usize, seed: u64, function: Option<&Path>) -> Result<Report> {
    let f = match function {
        Some(path) => KFunction::from_json_map(g, k, &fs::read_to_string(path)?)?,
        None => random_k_function(g, k, seed)?,
    };
    let idx = ph_indices(g, k, &f)?;
    let values: Vec<Value> = idx
        .simplices
        .iter()
        .zip(&idx.indices)
        .map(|(s, i)| json!({"simplex": s.vertices(), "index": i}))
        .collect();
    let v = json!({"k": k, "function": f.provenance, "sum": idx.sum(),
                   "chi": g.euler_characteristic(), "indices": values});
    Ok(Report::ok(v.to_string() + "\n"))
}
