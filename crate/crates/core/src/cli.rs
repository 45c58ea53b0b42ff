//! Command-line front end: `inspect`, `geodesic`, `fieldeq`, `emtensor`,
//! `quadrature` and `verify`.
//!
//! Exit codes: 0 success, 1 configuration error, 2 computation error,
//! 3 verification failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::catalog::{build_model, ChartPoint, FinslerModel, ModelDescriptor};
use crate::causal::{admissibility_report, Region};
use crate::dynamics::{averaged_conservation_check, em_density, vacuum_scalar_jet, KineticGas};
use crate::geodesics::{geodesic_invariants, integrate_geodesic, GeodesicError, GeodesicState, IntegratorConfig, Method};
use crate::geometry::GeometryBundle;
use crate::jets::TruncationOrder;
use crate::quadrature::{integrate_fiber, QuadConfig};
use crate::report::{fmt_float, to_json, write_csv, SCHEMA_VERSION};
use crate::verify::{default_suite, CheckReport, SuiteConfig};

pub const THREADS_ENV: &str = "FINSLER_LAB_THREADS";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Computation { message: String, point: Option<ChartPoint> },
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Computation { .. } => 2,
            CliError::Verification(_) => 3,
        }
    }

    fn at(point: &ChartPoint, e: impl std::fmt::Display) -> Self {
        CliError::Computation {
            message: e.to_string(),
            point: Some(*point),
        }
    }

    fn at_x(x: &[f64; 4], e: impl std::fmt::Display) -> Self {
        CliError::Computation {
            message: format!("at x = {x:?}: {e}"),
            point: None,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Computation { message, point: Some(p) } => {
                write!(f, "computation error at x = {:?}, v = {:?}: {message}", p.x, p.v)
            }
            CliError::Computation { message, point: None } => write!(f, "computation error {message}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Integrand {
    /// `∫ 1 dΣₓ⁺` over the configured cap.
    Volume,
    /// `∫ φ dΣₓ⁺` (needs `--gas`).
    Density,
}

#[derive(Parser, Debug)]
#[command(name = "finsler-lab", version, about = "Numerical laboratory for Finsler spacetimes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// Run configuration (JSON or TOML); flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Model descriptor (JSON or TOML).
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Gas descriptor (JSON or TOML).
    #[arg(long, global = true)]
    pub gas: Option<PathBuf>,
    /// Point list or grid file.
    #[arg(long, global = true, conflicts_with = "grid")]
    pub points: Option<PathBuf>,
    /// Inline grid: eight comma-separated axes, each `value` or `lo:hi:n`.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Position `x⁰,x¹,x²,x³`.
    #[arg(long, global = true, value_parser = parse_vec4, allow_hyphen_values = true)]
    pub x: Option<[f64; 4]>,
    /// Direction `ẋ⁰,ẋ¹,ẋ²,ẋ³` (defaults to the model's seed).
    #[arg(long, global = true, value_parser = parse_vec4, allow_hyphen_values = true)]
    pub v: Option<[f64; 4]>,
    /// Truncation orders `kx,kv`.
    #[arg(long, global = true, value_parser = parse_order)]
    pub order: Option<TruncationOrder>,
    /// Quadrature configuration (JSON or TOML).
    #[arg(long, global = true)]
    pub quad: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for sampled points (verify).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (falls back to FINSLER_LAB_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Geometric scalars of the bundle at each point.
    Inspect,
    /// Integrate a geodesic from `--x`, `--v`.
    Geodesic {
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// Fixed step (rk4) or initial step (rk45).
        #[arg(long)]
        step: Option<f64>,
        /// Maximum number of accepted steps.
        #[arg(long)]
        steps: Option<usize>,
        /// Stop at this affine parameter.
        #[arg(long)]
        s_end: Option<f64>,
        /// Local error tolerance (rk45).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Vacuum scalar `E` and, with a gas, the residual `E + κ²φ`.
    Fieldeq,
    /// Energy-momentum density and averaged conservation integrals.
    Emtensor {
        /// Fail with exit 3 if any conservation integral exceeds this.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Fiber integrals over the observer cap.
    Quadrature {
        #[arg(long, value_enum, default_value = "volume")]
        integrand: Integrand,
    },
    /// Run the default verification suite.
    Verify {
        /// Sampled points per check.
        #[arg(long)]
        samples: Option<usize>,
        /// Points for the finite-difference oracle.
        #[arg(long)]
        fd_samples: Option<usize>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rk4,
    Rk45,
}

fn parse_floats(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|c| c.trim().parse::<f64>().map_err(|e| format!("`{c}`: {e}")))
        .collect()
}

fn parse_vec4(s: &str) -> std::result::Result<[f64; 4], String> {
    let v = parse_floats(s)?;
    v.try_into().map_err(|v: Vec<f64>| format!("expected 4 components, got {}", v.len()))
}

fn parse_order(s: &str) -> std::result::Result<TruncationOrder, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|c| c.trim().parse::<usize>().map_err(|e| format!("`{c}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [kx, kv] => TruncationOrder::new(kx, kv).validate().map_err(|e| e.to_string()),
        _ => Err("expected `kx,kv`".into()),
    }
}

/// Cartesian grid over the 8 chart variables.
pub fn parse_grid(spec: &str) -> std::result::Result<Vec<ChartPoint>, String> {
    let axes: Vec<Vec<f64>> = spec
        .split(',')
        .map(|axis| {
            let parts = axis.trim().split(':').collect::<Vec<_>>();
            let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
            match parts[..] {
                [c] => Ok(vec![num(c)?]),
                [lo, hi, n] => {
                    let (lo, hi) = (num(lo)?, num(hi)?);
                    let n: usize = n.trim().parse().map_err(|e| format!("`{n}`: {e}"))?;
                    match n {
                        0 => Err("grid axis with 0 points".to_string()),
                        1 => Ok(vec![lo]),
                        _ => Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()),
                    }
                }
                _ => Err(format!("grid axis `{axis}` is neither `value` nor `lo:hi:n`")),
            }
        })
        .collect::<std::result::Result<_, _>>()?;
    if axes.len() != 8 {
        return Err(format!("grid needs 8 axes (x⁰..x³, ẋ⁰..ẋ³), got {}", axes.len()));
    }
    let mut points = vec![[0.0f64; 8]];
    for (k, axis) in axes.iter().enumerate() {
        points = points
            .iter()
            .flat_map(|p| {
                axis.iter().map(move |&c| {
                    let mut q = *p;
                    q[k] = c;
                    q
                })
            })
            .collect();
    }
    Ok(points
        .into_iter()
        .map(|z| ChartPoint::new([z[0], z[1], z[2], z[3]], [z[4], z[5], z[6], z[7]]))
        .collect())
}

/// Contents of a `--points` file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    List { points: Vec<ChartPoint> },
    Grid { grid: String },
}

impl PointSpec {
    pub fn expand(&self) -> std::result::Result<Vec<ChartPoint>, String> {
        match self {
            PointSpec::List { points } => Ok(points.clone()),
            PointSpec::Grid { grid } => parse_grid(grid),
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn parse_file<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    let is_toml = path.extension().is_some_and(|e| e == "toml");
    let parsed = if is_toml {
        toml::from_str(&text).map_err(|e| e.to_string())
    } else {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Optional fields of a `--config` file; paths are relative to the file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfigFile {
    pub model: Option<ModelDescriptor>,
    pub gas: Option<KineticGas>,
    pub order: Option<[usize; 2]>,
    pub quad: Option<QuadConfig>,
    pub integrator: Option<IntegratorConfig>,
    pub points: Option<Vec<ChartPoint>>,
    pub grid: Option<String>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// Validated run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub model: FinslerModel,
    pub gas: Option<KineticGas>,
    pub order: TruncationOrder,
    pub quad: QuadConfig,
    pub integrator: IntegratorConfig,
    pub points: Vec<ChartPoint>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn from_args(args: &CommonArgs) -> Result<Self> {
        let file: RunConfigFile = match &args.config {
            Some(p) => parse_file(p)?,
            None => RunConfigFile::default(),
        };
        let desc = match (&args.model, file.model) {
            (Some(p), _) => ModelDescriptor::load(p).map_err(CliError::Config)?,
            (None, Some(d)) => d,
            (None, None) => return Err(CliError::Config("no model given (use --model)".into())),
        };
        let model = build_model(&desc).map_err(|e| CliError::Config(e.to_string()))?;
        let gas = match &args.gas {
            Some(p) => Some(parse_file::<KineticGas>(p)?),
            None => file.gas,
        };
        if let Some(g) = &gas {
            g.validate().map_err(CliError::Config)?;
        }
        let order = match (args.order, file.order) {
            (Some(o), _) => o,
            (None, Some([kx, kv])) => TruncationOrder::new(kx, kv)
                .validate()
                .map_err(|e| CliError::Config(e.to_string()))?,
            (None, None) => TruncationOrder::default(),
        };
        let quad = match &args.quad {
            Some(p) => parse_file(p)?,
            None => file.quad.unwrap_or_default(),
        };
        quad.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let integrator = file.integrator.unwrap_or_default();
        let points = if let Some(p) = &args.points {
            parse_file::<PointSpec>(p)?.expand().map_err(CliError::Config)?
        } else if let Some(g) = &args.grid {
            parse_grid(g).map_err(CliError::Config)?
        } else if let Some(x) = args.x {
            vec![ChartPoint::new(x, args.v.unwrap_or(model.seed))]
        } else if let Some(p) = file.points {
            p
        } else if let Some(g) = &file.grid {
            parse_grid(g).map_err(CliError::Config)?
        } else {
            Vec::new()
        };
        let threads = args.threads.or(file.threads).or_else(|| {
            std::env::var(THREADS_ENV).ok().and_then(|s| s.trim().parse().ok())
        });
        if threads == Some(0) {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        Ok(Self {
            model,
            gas,
            order,
            quad,
            integrator,
            points,
            out: args.out.clone().or(file.out),
            format: args.format.or(file.format),
            seed: args.seed.or(file.seed).unwrap_or(0),
            threads,
        })
    }

    fn require_points(&self) -> Result<&[ChartPoint]> {
        if self.points.is_empty() {
            return Err(CliError::Config("no points given (use --points, --grid or --x)".into()));
        }
        Ok(&self.points)
    }

    fn require_gas(&self) -> Result<&KineticGas> {
        self.gas
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs --gas".into()))
    }

    /// Distinct positions of the configured points, in order.
    fn positions(&self) -> Result<Vec<[f64; 4]>> {
        let mut out: Vec<[f64; 4]> = Vec::new();
        for p in self.require_points()? {
            if !out.contains(&p.x) {
                out.push(p.x);
            }
        }
        Ok(out)
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'static str,
    command: &'a str,
    model: &'a str,
    reports: &'a [T],
}

/// Rendered output of one subcommand.
pub enum Output {
    Json(String),
    Csv(String),
}

impl Output {
    pub fn render(&self) -> &str {
        match self {
            Output::Json(t) | Output::Csv(t) => t,
        }
    }
}

fn emit_json<T: Serialize>(command: &str, model: &str, reports: &[T]) -> Result<Output> {
    if reports.is_empty() {
        return Err(CliError::Config("refusing to emit an empty report".into()));
    }
    Ok(Output::Json(to_json(&Envelope {
        schema: SCHEMA_VERSION,
        command,
        model,
        reports,
    })))
}

fn emit_csv(schema: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<Output> {
    if rows.is_empty() {
        return Err(CliError::Config("refusing to emit an empty report".into()));
    }
    let mut buf = Vec::new();
    write_csv(&mut buf, schema, header, rows).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(Output::Csv(String::from_utf8(buf).expect("CSV is UTF-8")))
}

fn point_columns(p: &ChartPoint) -> Vec<String> {
    p.x.iter().chain(p.v.iter()).map(|c| fmt_float(*c)).collect()
}

const POINT_HEADER: [&str; 8] = ["x0", "x1", "x2", "x3", "v0", "v1", "v2", "v3"];

fn par_points<T: Send>(
    points: &[ChartPoint],
    f: impl Fn(&ChartPoint) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    use rayon::prelude::*;
    points.par_iter().map(f).collect::<Vec<_>>().into_iter().collect()
}

#[derive(Serialize)]
struct InspectRow {
    x: [f64; 4],
    v: [f64; 4],
    l: f64,
    f: f64,
    epsilon: f64,
    det_g: f64,
    signature: [i8; 4],
    region: Region,
    spray: [f64; 4],
    r0: f64,
    e: Option<f64>,
}

fn inspect(cfg: &RunConfig) -> Result<Output> {
    if cfg.format == Some(Format::Csv) {
        return Err(CliError::Config("inspect emits JSON only".into()));
    }
    let with_e = cfg.order.max_x_order >= 2 && cfg.order.max_v_order >= 6;
    let rows = par_points(cfg.require_points()?, |pt| {
        let adm = admissibility_report(&cfg.model, pt);
        let b = GeometryBundle::new(&cfg.model, pt, cfg.order).map_err(|e| CliError::at(pt, e))?;
        let spray = b.spray().map_err(|e| CliError::at(pt, e))?.g.clone().map(|j| j.value());
        let r0 = b.curvature().map_err(|e| CliError::at(pt, e))?.r0.value();
        let e = if with_e {
            Some(vacuum_scalar_jet(&b).map_err(|e| CliError::at(pt, e))?.value())
        } else {
            None
        };
        Ok(InspectRow {
            x: pt.x,
            v: pt.v,
            l: b.l.value(),
            f: b.f.value(),
            epsilon: b.epsilon,
            det_g: b.det_g.value(),
            signature: adm.signature,
            region: adm.region,
            spray,
            r0,
            e,
        })
    })?;
    emit_json("inspect", &cfg.model.name, &rows)
}

#[derive(Serialize)]
struct GeodesicSummary {
    initial: GeodesicState,
    last: GeodesicState,
    drift: crate::geodesics::DriftReport,
}

fn geodesic(cfg: &RunConfig, integrator: IntegratorConfig) -> Result<Output> {
    let points = cfg.require_points()?;
    if points.len() != 1 {
        return Err(CliError::Config("geodesic needs exactly one initial point".into()));
    }
    let pt = points[0];
    let traj = integrate_geodesic(&cfg.model, GeodesicState::new(pt.x, pt.v), &integrator).map_err(|e| match e {
        GeodesicError::InvalidConfig(m) => CliError::Config(m),
        GeodesicError::LeftAdmissibleDomain { last, reason } => CliError::at(&ChartPoint::new(last.x, last.v), reason),
        other => CliError::at(&pt, other),
    })?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => Ok(Output::Csv(traj.to_csv())),
        Format::Json => {
            let drift = geodesic_invariants(&traj, &cfg.model).map_err(|e| CliError::at(&pt, e))?;
            let summary = GeodesicSummary {
                initial: traj.states[0],
                last: *traj.last(),
                drift,
            };
            emit_json("geodesic", &cfg.model.name, &[summary])
        }
    }
}

pub const FIELDEQ_SCHEMA: &str = "finsler-lab/fieldeq/1";

#[derive(Serialize)]
struct FieldEqRow {
    x: [f64; 4],
    v: [f64; 4],
    e: f64,
    phi: Option<f64>,
    residual: f64,
}

fn fieldeq(cfg: &RunConfig) -> Result<Output> {
    let rows = par_points(cfg.require_points()?, |pt| {
        let b = GeometryBundle::new(&cfg.model, pt, cfg.order).map_err(|e| CliError::at(pt, e))?;
        let e = vacuum_scalar_jet(&b).map_err(|e| CliError::at(pt, e))?.value();
        let phi = match &cfg.gas {
            Some(g) => Some(g.phi_jet(&b).map_err(|e| CliError::at(pt, e))?.value()),
            None => None,
        };
        let kappa_sq = cfg.gas.as_ref().map_or(0.0, |g| g.kappa_sq);
        Ok(FieldEqRow {
            x: pt.x,
            v: pt.v,
            e,
            phi,
            residual: e + kappa_sq * phi.unwrap_or(0.0),
        })
    })?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => emit_json("fieldeq", &cfg.model.name, &rows),
        Format::Csv => {
            let mut header = POINT_HEADER.to_vec();
            header.extend(["E", "phi", "residual"]);
            let rows = rows
                .iter()
                .map(|r| {
                    let mut cols = point_columns(&ChartPoint::new(r.x, r.v));
                    cols.push(fmt_float(r.e));
                    cols.push(r.phi.map(fmt_float).unwrap_or_default());
                    cols.push(fmt_float(r.residual));
                    cols
                })
                .collect();
            emit_csv(FIELDEQ_SCHEMA, &header, rows)
        }
    }
}

#[derive(Serialize)]
struct EmTensorRow {
    x: [f64; 4],
    /// `density[i][j] = 𝒯ⁱⱼ`
    density: [[f64; 4]; 4],
    density_errors: [[f64; 4]; 4],
    lorentzian: Option<[[f64; 4]; 4]>,
    conservation: Vec<f64>,
    conservation_errors: Vec<f64>,
    nodes: usize,
    pass: Option<bool>,
}

fn emtensor(cfg: &RunConfig, tol: Option<f64>) -> Result<(Output, bool)> {
    if cfg.format == Some(Format::Csv) {
        return Err(CliError::Config("emtensor emits JSON only".into()));
    }
    let gas = cfg.require_gas()?;
    let mut rows = Vec::new();
    for x in cfg.positions()? {
        let d = em_density(&cfg.model, gas, &x, &cfg.quad).map_err(|e| CliError::at_x(&x, e))?;
        let c = averaged_conservation_check(&cfg.model, gas, &x, &cfg.quad).map_err(|e| CliError::at_x(&x, e))?;
        let pass = tol.map(|t| c.values.iter().all(|v| v.abs() <= t));
        rows.push(EmTensorRow {
            x,
            density: d.density,
            density_errors: d.error_estimates,
            lorentzian: d.lorentzian,
            conservation: c.values,
            conservation_errors: c.error_estimates,
            nodes: c.nodes,
            pass,
        });
    }
    let failed = rows.iter().any(|r| r.pass == Some(false));
    Ok((emit_json("emtensor", &cfg.model.name, &rows)?, failed))
}

#[derive(Serialize)]
struct QuadratureRow {
    x: [f64; 4],
    integrand: &'static str,
    value: f64,
    error_estimate: f64,
    nodes: usize,
    quad: QuadConfig,
}

fn quadrature(cfg: &RunConfig, integrand: Integrand) -> Result<Output> {
    if cfg.format == Some(Format::Csv) {
        return Err(CliError::Config("quadrature emits JSON only".into()));
    }
    let gas = match integrand {
        Integrand::Density => Some(cfg.require_gas()?),
        Integrand::Volume => None,
    };
    let mut rows = Vec::new();
    for x in cfg.positions()? {
        let r = integrate_fiber(&cfg.model, &x, &cfg.quad, |x, v| match gas {
            Some(g) => Ok(vec![g.phi_value(&cfg.model, x, v)?]),
            None => Ok(vec![1.0]),
        })
        .map_err(|e| CliError::at_x(&x, e))?;
        rows.push(QuadratureRow {
            x,
            integrand: match integrand {
                Integrand::Volume => "volume",
                Integrand::Density => "density",
            },
            value: r.values[0],
            error_estimate: r.error_estimates[0],
            nodes: r.nodes,
            quad: cfg.quad,
        });
    }
    emit_json("quadrature", &cfg.model.name, &rows)
}

pub const VERIFY_SCHEMA: &str = "finsler-lab/verify/1";

fn verify(cfg: &RunConfig, suite: &SuiteConfig) -> Result<(Output, Vec<CheckReport>)> {
    let reports = default_suite(&cfg.model, suite).map_err(|e| CliError::Computation {
        message: e.to_string(),
        point: None,
    })?;
    let out = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => emit_json("verify", &cfg.model.name, &reports)?,
        Format::Csv => {
            let rows = reports
                .iter()
                .map(|r| {
                    vec![
                        r.name.clone(),
                        r.model.clone(),
                        fmt_float(r.max_abs_residual),
                        fmt_float(r.tolerance),
                        r.pass.to_string(),
                        r.samples.to_string(),
                        r.seed.to_string(),
                    ]
                })
                .collect();
            emit_csv(
                VERIFY_SCHEMA,
                &["name", "model", "max_abs_residual", "tolerance", "pass", "samples", "seed"],
                rows,
            )?
        }
    };
    Ok((out, reports))
}

fn integrator_from(cfg: &RunConfig, method: Option<MethodArg>, step: Option<f64>, steps: Option<usize>, s_end: Option<f64>, tol: Option<f64>) -> IntegratorConfig {
    let mut ic = cfg.integrator;
    if let Some(m) = method {
        ic.method = match m {
            MethodArg::Rk4 => Method::Rk4,
            MethodArg::Rk45 => Method::Rk45,
        };
    }
    if let Some(h) = step {
        ic.step = h;
    }
    if let Some(n) = steps {
        ic.max_steps = n;
    }
    if s_end.is_some() {
        ic.s_end = s_end;
    }
    if let Some(t) = tol {
        ic.tol = t;
    }
    ic
}

/// Result of a command: the report, where it goes, and whether a requested
/// check failed.
pub struct Outcome {
    pub output: Output,
    pub out: Option<PathBuf>,
    pub failure: Option<CliError>,
}

/// Executes a parsed command.
pub fn execute(cli: &Cli) -> Result<Outcome> {
    let cfg = RunConfig::from_args(&cli.common)?;
    let run = || -> Result<(Output, Option<CliError>)> {
        Ok(match &cli.command {
            Command::Inspect => (inspect(&cfg)?, None),
            Command::Geodesic {
                method,
                step,
                steps,
                s_end,
                tol,
            } => (
                geodesic(&cfg, integrator_from(&cfg, *method, *step, *steps, *s_end, *tol))?,
                None,
            ),
            Command::Fieldeq => (fieldeq(&cfg)?, None),
            Command::Emtensor { tol } => {
                let (out, failed) = emtensor(&cfg, *tol)?;
                let failure = failed.then(|| CliError::Verification("conservation integral above --tol".into()));
                (out, failure)
            }
            Command::Quadrature { integrand } => (quadrature(&cfg, *integrand)?, None),
            Command::Verify { samples, fd_samples } => {
                let defaults = SuiteConfig::default();
                let suite = SuiteConfig {
                    samples: samples.unwrap_or(defaults.samples),
                    fd_samples: fd_samples.unwrap_or(defaults.fd_samples),
                    seed: cfg.seed,
                };
                let (out, reports) = verify(&cfg, &suite)?;
                let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
                let failure = (!failed.is_empty()).then(|| CliError::Verification(failed.join(", ")));
                (out, failure)
            }
        })
    };
    let (output, failure) = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    Ok(Outcome {
        output,
        out: cfg.out.clone(),
        failure,
    })
}

/// Parses `argv`, runs the command, writes the report to `--out` or
/// `stdout`, and returns the process exit code.
pub fn run_command<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    let result = execute(&cli).and_then(|o| {
        let text = o.output.render();
        match &o.out {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display()))),
            None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Config(e.to_string())),
        }?;
        o.failure.map_or(Ok(()), Err)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "finsler-lab: {e}");
            e.exit_code()
        }
    }
}
