use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use teich::beltrami::{self, BeltramiField};
use teich::deform::{self, DeformationParam};
use teich::flatsurf::FlatSurface;
use teich::grid::GridDoc;
use teich::kslab::{self, families};
use teich::rat::{format_rational, parse_rational};
use teich::solve::{self, SolveError, TorusProblem};

use crate::svg;

#[derive(Parser)]
#[command(name = "teichctl", version, about = "Flat surfaces, stretch deformations and Beltrami solvers")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory for emitted files (default: $TEICHCTL_OUTDIR, then ".").
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Seed for randomized demos.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a surface JSON file and report genus, cone points and norm.
    Surface {
        #[arg(long)]
        input: PathBuf,
        /// Optional SVG rendering of the polygons.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Deform a surface: writes deformed.json, path.csv and overlay.svg.
    Deform {
        #[arg(long)]
        input: PathBuf,
        /// Deformation parameter in [0,1); decimal or fraction ("1/3").
        #[arg(long)]
        k: String,
        #[arg(long, default_value_t = 5)]
        steps: usize,
    },
    /// Emit only the deformation path CSV.
    Path {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: String,
        #[arg(long, default_value_t = 5)]
        steps: usize,
    },
    /// Dilatation of a parameter or of a sampled field.
    Dilatation {
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Solve the Beltrami equation on a torus field.
    SolveBeltrami {
        #[arg(long)]
        field: PathBuf,
        /// Expected grid size (power of two); must match the field file.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iter: usize,
        /// Solve the family t·ν for t in "t0:t1:steps".
        #[arg(long)]
        param_grid: Option<String>,
        /// Write residual-vs-iteration CSV here.
        #[arg(long)]
        residual_csv: Option<PathBuf>,
    },
    /// Cauchy–Riemann residuals of the deformed chart transitions.
    ChartsCheck {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: String,
        #[arg(long, default_value_t = 0.3)]
        radius: f64,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        /// Cone index (default: all cone points).
        #[arg(long)]
        cone: Option<usize>,
    },
    /// Projector-continuity demos: rotation | diagonal | planted.
    KslabDemo {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        /// CSV output path (default: <out-dir>/kslab.csv).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

pub enum ExitKind {
    Validation,
    Numerical,
}

pub struct CmdError {
    pub name: String,
    pub message: String,
    pub kind: ExitKind,
}

impl CmdError {
    fn validation(name: impl Into<String>, message: impl ToString) -> Self {
        Self { name: name.into(), message: message.to_string(), kind: ExitKind::Validation }
    }
}

macro_rules! from_named_error {
    ($ty:ty) => {
        impl From<$ty> for CmdError {
            fn from(e: $ty) -> Self {
                CmdError::validation(e.name(), e)
            }
        }
    };
}

from_named_error!(teich::FlatSurfError);
from_named_error!(teich::deform::DeformError);
from_named_error!(teich::beltrami::BeltramiError);
from_named_error!(teich::kslab::KsError);

impl From<SolveError> for CmdError {
    fn from(e: SolveError) -> Self {
        let kind = match e {
            SolveError::NoConvergence { .. } => ExitKind::Numerical,
            _ => ExitKind::Validation,
        };
        Self { name: e.name().to_string(), message: e.to_string(), kind }
    }
}

impl From<teich::flatsurf::SurfaceIoError> for CmdError {
    fn from(e: teich::flatsurf::SurfaceIoError) -> Self {
        match e {
            teich::flatsurf::SurfaceIoError::Surface(inner) => inner.into(),
            other => CmdError::validation("BadSurfaceJson", other),
        }
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::validation("Io", e)
    }
}

pub fn run(cli: &Cli) -> Result<(), CmdError> {
    match &cli.command {
        Command::Surface { input, svg } => cmd_surface(cli, input, svg.as_deref()),
        Command::Deform { input, k, steps } => cmd_deform(cli, input, k, *steps, true),
        Command::Path { input, k, steps } => cmd_deform(cli, input, k, *steps, false),
        Command::Dilatation { k, field } => cmd_dilatation(k.as_deref(), field.as_deref()),
        Command::SolveBeltrami { field, grid, tol, max_iter, param_grid, residual_csv } => {
            cmd_solve(cli, field, *grid, *tol, *max_iter, param_grid.as_deref(), residual_csv.as_deref())
        }
        Command::ChartsCheck { input, k, radius, h, cone } => {
            cmd_charts_check(input, k, *radius, *h, *cone)
        }
        Command::KslabDemo { family, d, delta, csv } => {
            cmd_kslab_demo(cli, family, *d, *delta, csv.as_deref())
        }
    }
}

fn out_dir(cli: &Cli) -> Result<PathBuf, CmdError> {
    let dir = cli
        .out_dir
        .clone()
        .or_else(|| std::env::var_os("TEICHCTL_OUTDIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn load_surface(path: &Path) -> Result<FlatSurface, CmdError> {
    let text = fs::read_to_string(path)?;
    Ok(FlatSurface::from_json_str(&text)?)
}

fn parse_k(text: &str) -> Result<DeformationParam, CmdError> {
    if let Ok(r) = parse_rational(text) {
        return Ok(DeformationParam::from_rational(r)?);
    }
    let v: f64 = text
        .parse()
        .map_err(|_| CmdError::validation("BadParam", format!("cannot parse k from {text:?}")))?;
    Ok(DeformationParam::new(v)?)
}

fn surface_report(surface: &FlatSurface) -> serde_json::Value {
    json!({
        "genus": surface.genus(),
        "validation_only_genus": surface.genus() < 2,
        "cones": surface
            .cone_points()
            .iter()
            .map(|c| json!({
                "class": c.class,
                "order": c.order,
                "angle": format!("{}π", c.angle_multiple()),
            }))
            .collect::<Vec<_>>(),
        "norm": surface.qd_norm(),
        "norm_exact": surface.qd_norm_exact().map(|r| format_rational(&r)),
        "translation_surface": surface.is_translation_surface(),
        "polygons": surface.polygons().len(),
        "vertex_classes": surface.vertex_classes().len(),
    })
}

fn cmd_surface(_cli: &Cli, input: &Path, svg_path: Option<&Path>) -> Result<(), CmdError> {
    let surface = load_surface(input)?;
    if let Some(path) = svg_path {
        fs::write(path, svg::render(&[("surface", &surface, "#1f77b4")]))?;
    }
    println!("{}", serde_json::to_string_pretty(&surface_report(&surface)).unwrap());
    Ok(())
}

fn modulus_cell(surface: &FlatSurface) -> String {
    match deform::torus_modulus(surface) {
        Ok(m) => format!("{}{}{}i", m.approx.re, if m.approx.im < 0.0 { "" } else { "+" }, m.approx.im),
        Err(_) => String::new(),
    }
}

fn path_csv(surface: &FlatSurface, k: &DeformationParam, steps: usize) -> Result<String, CmdError> {
    let base_norm = surface.qd_norm();
    let path = deform::teich_path(surface, k, steps)?;
    let mut csv = String::from("t,K,norm,norm_ratio,modulus\n");
    for sample in &path {
        let norm = sample.surface.qd_norm();
        writeln!(
            csv,
            "{},{},{},{},{}",
            sample.t,
            sample.dilatation,
            norm,
            norm / base_norm,
            modulus_cell(&sample.surface)
        )
        .unwrap();
    }
    Ok(csv)
}

fn cmd_deform(
    cli: &Cli,
    input: &Path,
    k_text: &str,
    steps: usize,
    full: bool,
) -> Result<(), CmdError> {
    let surface = load_surface(input)?;
    let k = parse_k(k_text)?;
    let dir = out_dir(cli)?;
    let csv = path_csv(&surface, &k, steps)?;
    fs::write(dir.join("path.csv"), &csv)?;
    let mut files = vec!["path.csv".to_string()];
    if full {
        let deformed = deform::deform_surface(&surface, &k);
        fs::write(dir.join("deformed.json"), deformed.to_json_string())?;
        fs::write(
            dir.join("overlay.svg"),
            svg::render(&[("input", &surface, "#7f7f7f"), ("deformed", &deformed, "#d62728")]),
        )?;
        files.push("deformed.json".to_string());
        files.push("overlay.svg".to_string());
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "k": k.value(),
            "dilatation": k.dilatation(),
            "steps": steps,
            "files": files,
            "out_dir": dir.display().to_string(),
        }))
        .unwrap()
    );
    Ok(())
}

fn cmd_dilatation(k_text: Option<&str>, field_path: Option<&Path>) -> Result<(), CmdError> {
    match (k_text, field_path) {
        (Some(text), None) => {
            let report = match parse_rational(text) {
                Ok(r) => {
                    let exact = beltrami::dilatation_exact(&r)?;
                    json!({
                        "sup_norm": teich::rat::rational_to_f64(&r),
                        "dilatation": teich::rat::rational_to_f64(&exact),
                        "dilatation_exact": format_rational(&exact),
                    })
                }
                Err(_) => {
                    let v: f64 = text.parse().map_err(|_| {
                        CmdError::validation("BadParam", format!("cannot parse {text:?}"))
                    })?;
                    let k = DeformationParam::new(v)?;
                    json!({ "sup_norm": v, "dilatation": k.dilatation() })
                }
            };
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(())
        }
        (None, Some(path)) => {
            let field = BeltramiField::from_json_str(&fs::read_to_string(path)?)?;
            let sup = field.sup_norm();
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "sup_norm": sup,
                    "dilatation": beltrami::dilatation_of_norm(sup),
                }))
                .unwrap()
            );
            Ok(())
        }
        _ => Err(CmdError::validation("BadParam", "pass exactly one of --k or --field")),
    }
}

fn solution_doc(sol: &solve::Solution, problem: &TorusProblem) -> serde_json::Value {
    json!({
        "c0": [sol.c0.re, sol.c0.im],
        "iterations": sol.iterations,
        "residual": sol.residual,
        "sup_norm": problem.field().sup_norm(),
        "lattice": [
            [problem.lattice().0.re, problem.lattice().0.im],
            [problem.lattice().1.re, problem.lattice().1.im],
        ],
        "u": GridDoc::pack(&sol.domain, &sol.u),
        "phi": GridDoc::pack(&sol.domain, &sol.phi),
    })
}

fn parse_param_grid(text: &str) -> Result<Vec<f64>, CmdError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CmdError::validation("BadParam", format!("param grid {text:?}, want t0:t1:steps"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let t0: f64 = parts[0].parse().map_err(|_| bad())?;
    let t1: f64 = parts[1].parse().map_err(|_| bad())?;
    let steps: usize = parts[2].parse().map_err(|_| bad())?;
    if steps < 2 {
        return Err(bad());
    }
    Ok((0..steps).map(|i| t0 + (t1 - t0) * i as f64 / (steps - 1) as f64).collect())
}

fn cmd_solve(
    cli: &Cli,
    field_path: &Path,
    grid: Option<usize>,
    tol: f64,
    max_iter: usize,
    param_grid: Option<&str>,
    residual_csv: Option<&Path>,
) -> Result<(), CmdError> {
    if !(tol > 0.0) {
        return Err(CmdError::validation("BadParam", format!("tol = {tol} must be positive")));
    }
    let field = BeltramiField::from_json_str(&fs::read_to_string(field_path)?)?;
    if let Some(n) = grid {
        if field.domain.nx != n || field.domain.ny != n {
            return Err(CmdError::validation(
                "BadParam",
                format!("--grid {n} does not match field grid {}×{}", field.domain.nx, field.domain.ny),
            ));
        }
    }
    let dir = out_dir(cli)?;
    match param_grid {
        None => {
            let problem = TorusProblem::new(field)?;
            let sol = solve::solve_torus(&problem, tol, max_iter)?;
            fs::write(
                dir.join("solution.json"),
                format!("{}\n", serde_json::to_string_pretty(&solution_doc(&sol, &problem)).unwrap()),
            )?;
            if let Some(path) = residual_csv {
                let mut csv = String::from("iteration,residual\n");
                for (i, r) in sol.residual_history.iter().enumerate() {
                    writeln!(csv, "{},{}", i + 1, r).unwrap();
                }
                fs::write(path, csv)?;
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "c0": [sol.c0.re, sol.c0.im],
                    "residual": sol.residual,
                    "iterations": sol.iterations,
                    "out_dir": dir.display().to_string(),
                }))
                .unwrap()
            );
        }
        Some(text) => {
            let ts = parse_param_grid(text)?;
            let problems: Result<Vec<TorusProblem>, SolveError> = ts
                .iter()
                .map(|&t| {
                    let scaled: Vec<Complex64> =
                        field.values().iter().map(|v| v * t).collect();
                    let f = BeltramiField::new(field.domain.clone(), scaled)?;
                    TorusProblem::new(f)
                })
                .collect();
            let problems = problems?;
            let report = solve::solve_family(&problems, tol, max_iter)?;
            if let Some(path) = residual_csv {
                let mut csv = String::from("t,iteration,residual\n");
                for (t, sol) in ts.iter().zip(&report.solutions) {
                    for (i, r) in sol.residual_history.iter().enumerate() {
                        writeln!(csv, "{},{},{}", t, i + 1, r).unwrap();
                    }
                }
                fs::write(path, csv)?;
            }
            let doc = json!({
                "ts": ts,
                "solutions": ts
                    .iter()
                    .zip(&report.solutions)
                    .map(|(t, s)| json!({
                        "t": t,
                        "c0": [s.c0.re, s.c0.im],
                        "iterations": s.iterations,
                        "residual": s.residual,
                    }))
                    .collect::<Vec<_>>(),
                "step_moduli": report.step_moduli,
                "max_modulus": report.max_modulus(),
            });
            fs::write(dir.join("family.json"), format!("{}\n", serde_json::to_string_pretty(&doc).unwrap()))?;
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "slices": ts.len(),
                    "max_modulus": report.max_modulus(),
                    "out_dir": dir.display().to_string(),
                }))
                .unwrap()
            );
        }
    }
    Ok(())
}

fn cmd_charts_check(
    input: &Path,
    k_text: &str,
    radius: f64,
    h: f64,
    cone_index: Option<usize>,
) -> Result<(), CmdError> {
    let surface = load_surface(input)?;
    let k = parse_k(k_text)?;
    let cones: Vec<usize> = match cone_index {
        Some(i) if i < surface.cone_points().len() => vec![i],
        Some(i) => {
            return Err(CmdError::validation(
                "BadParam",
                format!("cone index {i} out of range ({} cones)", surface.cone_points().len()),
            ))
        }
        None => (0..surface.cone_points().len()).collect(),
    };
    let mut reports = Vec::new();
    for i in cones {
        let cone = &surface.cone_points()[i];
        let r_h = deform::chart_transition_residual(&surface, &k, cone, radius, h)?;
        let r_half = deform::chart_transition_residual(&surface, &k, cone, radius, h / 2.0)?;
        reports.push(json!({
            "cone": i,
            "order": cone.order,
            "residual": r_h,
            "residual_half_step": r_half,
            "ratio": r_h / r_half,
        }));
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "k": k.value(),
            "radius": radius,
            "h": h,
            "cones": reports,
            "regular_overlap_residual": deform::regular_transition_residual(&surface, &k, h),
        }))
        .unwrap()
    );
    Ok(())
}

fn cmd_kslab_demo(
    cli: &Cli,
    family: &str,
    d: usize,
    delta: f64,
    csv_path: Option<&Path>,
) -> Result<(), CmdError> {
    if d < 2 {
        return Err(CmdError::validation("BadParam", "need d ≥ 2"));
    }
    let dir = out_dir(cli)?;
    let csv_path = csv_path.map(Path::to_path_buf).unwrap_or_else(|| dir.join("kslab.csv"));
    let mut csv = String::from("t,kernel_dim,deviation\n");
    let summary;
    match family {
        "rotation" => {
            let ts: Vec<f64> = (0..10).map(|i| 0.3 + i as f64 * delta).collect();
            let report = kslab::projector_continuity(&families::rotation_family(d, ts), None)?;
            writeln!(csv, "{},{},", report.ts[0], report.kernel_dim).unwrap();
            for (i, dev) in report.dev_f.iter().enumerate() {
                writeln!(csv, "{},{},{}", report.ts[i + 1], report.kernel_dim, dev).unwrap();
            }
            let want = 2f64.sqrt() * delta;
            let worst = report
                .dev_f
                .iter()
                .map(|dev| (dev / want - 1.0).abs())
                .fold(0.0, f64::max);
            summary = json!({
                "family": "rotation",
                "expected_step": want,
                "max_relative_error": worst,
                "pass": worst <= 0.1,
            });
        }
        "diagonal" => {
            let ts = vec![-delta, 0.0, delta];
            let fam = families::diagonal_crossing_family(d, ts.clone());
            let err = match kslab::projector_continuity(&fam, None) {
                Err(e @ kslab::KsError::KernelDimensionJump { .. }) => e,
                Ok(_) => {
                    return Err(CmdError {
                        name: "DemoFailed".into(),
                        message: "expected a kernel-dimension jump, none detected".into(),
                        kind: ExitKind::Numerical,
                    })
                }
                Err(other) => return Err(other.into()),
            };
            for (t, l) in ts.iter().zip(&fam.ops) {
                let pair = kslab::harmonic_projector(l, &fam.weight, None)?;
                writeln!(csv, "{},{},", t, pair.kernel_dim).unwrap();
            }
            summary = json!({
                "family": "diagonal",
                "jump": err.to_string(),
                "pass": true,
            });
        }
        "planted" => {
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let l = families::planted_psd(d, 2.min(d), &mut rng);
            let pair = kslab::harmonic_projector(&l, &DMatrix::identity(d, d), None)?;
            let residual = kslab::green_identity_residual(&pair, &l, 50, &mut rng);
            writeln!(csv, "0,{},{}", pair.kernel_dim, residual).unwrap();
            summary = json!({
                "family": "planted",
                "kernel_dim": pair.kernel_dim,
                "green_residual": residual,
                "pass": residual < 1e-11,
            });
        }
        other => {
            return Err(CmdError::validation(
                "BadParam",
                format!("unknown family {other:?} (rotation | diagonal | planted)"),
            ))
        }
    }
    fs::write(&csv_path, csv)?;
    let pass = summary["pass"].as_bool().unwrap_or(false);
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({
            "summary": summary,
            "csv": csv_path.display().to_string(),
        }))
        .unwrap()
    );
    if !pass {
        return Err(CmdError {
            name: "DemoFailed".into(),
            message: "demo acceptance check failed".into(),
            kind: ExitKind::Numerical,
        });
    }
    Ok(())
}
