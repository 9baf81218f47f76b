//! `hausmet`: premeasure bounds, box-counting dimensions, Lipschitz
//! envelopes, planar degree, and the end-to-end consistency pipelines,
//! all emitting deterministic JSON reports with CSV side files.
//!
//! Exit status: 0 on success (and consistent/passing verdicts), 1 on a
//! failed verdict or computation error, 2 on usage errors.

mod config;
mod grammar;
mod output;

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};
use serde::Serialize;

use hausmet_core::cloud::{build_point_set, ShapeSpec};
use hausmet_core::covers::{box_counting_dimension, premeasure_upper};
use hausmet_core::degree::{
    box_param, circle_param, degree_1d, winding_degree_2d, BoundaryLoop, DegreeResult,
};
use hausmet_core::envelope::{coordinate_field, inf_convolution, lipschitz_check, ScalarField};
use hausmet_core::metric::{validate_metric, MetricSpec};
use hausmet_core::pipelines::{
    cantor_counterexample, snowflake_dimension_report, verify_theorem, TheoremConfig,
};

use config::FileConfig;
use grammar::{DomainSpec, FieldSpec, MapSpec};
use output::{emit_csv, emit_json};

const EXIT_OK: i32 = 0;
const EXIT_FAIL: i32 = 1;
const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "hausmet",
    version,
    about = "Hausdorff premeasures, Lipschitz envelopes, and planar degree under pluggable metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output path for the JSON report (stdout if omitted); CSV side
    /// files are written next to it
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Omit the metadata block so identical runs are byte-identical
    #[arg(long, action = ArgAction::SetTrue, global = true)]
    no_meta: bool,
    /// JSON config file supplying defaults; flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the metric axioms exhaustively on a sampled shape
    Validate {
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        shape: Option<String>,
        /// Violation tolerance
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Premeasure upper bound: sum of block diameters to the power s
    Measure {
        #[arg(long)]
        shape: Option<String>,
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Box-counting dimension over a range of refinement levels
    Dimension {
        #[arg(long)]
        shape: Option<String>,
        #[arg(long)]
        metric: Option<String>,
        /// Inclusive level range, e.g. 4..12
        #[arg(long)]
        levels: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Inf-convolution envelope of a field on a sampled shape
    Envelope {
        #[arg(long)]
        shape: Option<String>,
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
        /// Field to regularize: coord:<axis> or const:<v>
        #[arg(long)]
        field: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Topological degree of a named map over a domain boundary
    Degree {
        #[arg(long)]
        map: Option<String>,
        /// disk[:r], box:<lo>,<hi>:<lo>,<hi>, or interval:<a>,<b>
        #[arg(long)]
        domain: Option<String>,
        /// Target point, e.g. 0.1,0
        #[arg(long)]
        target: Option<String>,
        /// Initial boundary samples
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Full positivity replay: envelope, homotopy degree, preimages,
    /// and the premeasure ladder on a ball window
    #[command(name = "verify-theorem")]
    VerifyTheorem {
        #[arg(long)]
        metric: Option<String>,
        /// Ambient dimension (1 or 2)
        #[arg(long)]
        n: Option<usize>,
        /// Grid resolution (points per axis)
        #[arg(long)]
        grid: Option<usize>,
        /// Target point inside the half-radius ball (repeatable)
        #[arg(long)]
        target: Vec<String>,
        /// Window radius
        #[arg(long)]
        radius: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Cantor-pullback collapse: premeasure bounds 2^k 3^(-kn) -> 0
    Counterexample {
        /// Window dimension n
        #[arg(long)]
        n: Option<usize>,
        /// Deepest Cantor level
        #[arg(long)]
        level: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Dimension doubling under a snowflake metric with transport checks
    Snowflake {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        shape: Option<String>,
        #[arg(long)]
        levels: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

/// Errors carrying their exit code: usage problems exit 2, runtime and
/// verdict failures exit 1.
enum CliError {
    Usage(String),
    Run(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Run(_) => EXIT_FAIL,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Run(m) => m,
        }
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("hausmet: {}", e.message());
            std::process::exit(e.code());
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Validate { metric, shape, tol, common } => {
            let cfg = load_config(&common)?;
            let metric = need_metric(metric, &cfg)?;
            let shape = need_shape(shape, &cfg)?;
            let tol = tol.or(cfg.tol).unwrap_or(1e-9);
            let cloud = build_point_set(&shape).map_err(|e| CliError::Usage(e.to_string()))?;
            let report = validate_metric(&metric, &cloud, tol).map_err(run_err)?;
            let pass = report.pass;
            emit(&common, "validate", &report)?;
            Ok(if pass { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Measure { shape, metric, s, delta, common } => {
            let cfg = load_config(&common)?;
            let shape = need_shape(shape, &cfg)?;
            let metric = need_metric(metric, &cfg)?;
            let s = s.or(cfg.s).ok_or_else(|| CliError::Usage("missing --s".into()))?;
            let delta =
                delta.or(cfg.delta).ok_or_else(|| CliError::Usage("missing --delta".into()))?;
            if s < 0.0 {
                return usage(format!("exponent s must be >= 0, got {s}"));
            }
            if delta <= 0.0 {
                return usage(format!("delta must be positive, got {delta}"));
            }
            let estimate = premeasure_upper(&shape, &metric, s, delta).map_err(run_err)?;
            emit(&common, "measure", &estimate)?;
            Ok(EXIT_OK)
        }
        Command::Dimension { shape, metric, levels, common } => {
            let cfg = load_config(&common)?;
            let shape = need_shape(shape, &cfg)?;
            let metric = need_metric(metric, &cfg)?;
            let (lo, hi) = need_levels(levels, &cfg)?;
            let estimate = box_counting_dimension(&shape, &metric, lo, hi).map_err(run_err)?;
            let base = emit(&common, "dimension", &estimate)?;
            if let Some(base) = base {
                emit_csv(&base, "scales", &estimate.scales_csv()).map_err(CliError::Run)?;
            }
            Ok(EXIT_OK)
        }
        Command::Envelope { shape, metric, eps, field, common } => {
            let cfg = load_config(&common)?;
            let shape = need_shape(shape, &cfg)?;
            let metric = need_metric(metric, &cfg)?;
            let eps = eps.or(cfg.eps).ok_or_else(|| CliError::Usage("missing --eps".into()))?;
            if eps <= 0.0 {
                return usage(format!("eps must be positive, got {eps}"));
            }
            let field_spec = field
                .or(cfg.field)
                .map_or(Ok(FieldSpec::Coord(0)), |f| {
                    grammar::parse_field(&f).map_err(CliError::Usage)
                })?;
            let cloud = build_point_set(&shape).map_err(|e| CliError::Usage(e.to_string()))?;
            let field = match field_spec {
                FieldSpec::Coord(axis) => {
                    if axis >= cloud.dim() {
                        return usage(format!(
                            "axis {axis} out of range for a {}-dimensional shape",
                            cloud.dim()
                        ));
                    }
                    coordinate_field(&cloud, axis).map_err(run_err)?
                }
                FieldSpec::Const(v) => {
                    ScalarField::new(&cloud, "const", vec![v; cloud.len()]).map_err(run_err)?
                }
            };
            let envelope = inf_convolution(&field, &cloud, &metric, eps).map_err(run_err)?;
            let lipschitz_violation = lipschitz_check(&envelope, &cloud).map_err(run_err)?;
            #[derive(Serialize)]
            struct EnvelopeDoc {
                envelope: hausmet_core::envelope::EnvelopeResult,
                lipschitz_violation: f64,
            }
            emit(&common, "envelope", &EnvelopeDoc { envelope, lipschitz_violation })?;
            Ok(EXIT_OK)
        }
        Command::Degree { map, domain, target, samples, common } => {
            let cfg = load_config(&common)?;
            let domain_str = domain
                .or(cfg.domain)
                .ok_or_else(|| CliError::Usage("missing --domain".into()))?;
            let domain = grammar::parse_domain(&domain_str).map_err(CliError::Usage)?;
            let map_str =
                map.or(cfg.map).ok_or_else(|| CliError::Usage("missing --map".into()))?;
            let map = grammar::parse_map(&map_str, domain.dim()).map_err(CliError::Usage)?;
            let target_str =
                target.ok_or_else(|| CliError::Usage("missing --target".into()))?;
            let target = grammar::parse_floats(&target_str).map_err(CliError::Usage)?;
            let samples = samples.or(cfg.samples).unwrap_or(128);
            run_degree(domain, map, &target, samples, &common)
        }
        Command::VerifyTheorem { metric, n, grid, target, radius, common } => {
            let cfg = load_config(&common)?;
            let metric = need_metric(metric, &cfg)?;
            let n = n.or(cfg.n).ok_or_else(|| CliError::Usage("missing --n".into()))?;
            let grid = grid.or(cfg.grid).ok_or_else(|| CliError::Usage("missing --grid".into()))?;
            let targets: Option<Vec<Vec<f64>>> = if target.is_empty() {
                cfg.targets
            } else {
                Some(
                    target
                        .iter()
                        .map(|t| grammar::parse_floats(t))
                        .collect::<Result<_, _>>()
                        .map_err(CliError::Usage)?,
                )
            };
            let mut pipeline_cfg = TheoremConfig::new(metric, n, grid);
            pipeline_cfg.targets = targets;
            if let Some(r) = radius.or(cfg.radius) {
                pipeline_cfg.radius = r;
            }
            let report = verify_theorem(&pipeline_cfg).map_err(run_err)?;
            let consistent = report.consistent;
            let base = emit(&common, "verify-theorem", &report)?;
            if let Some(base) = base {
                emit_csv(&base, "deviation", &report.deviation_csv()).map_err(CliError::Run)?;
                emit_csv(&base, "ladder", &report.ladder_csv()).map_err(CliError::Run)?;
            }
            Ok(if consistent { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Counterexample { n, level, common } => {
            let cfg = load_config(&common)?;
            let n = n.or(cfg.n).ok_or_else(|| CliError::Usage("missing --n".into()))?;
            let level_str = level
                .or_else(|| cfg.level.map(|l| l.to_string()))
                .ok_or_else(|| CliError::Usage("missing --level".into()))?;
            let level_raw = level_str
                .parse::<i64>()
                .map_err(|_| CliError::Usage(format!("bad level '{level_str}'")))?;
            if level_raw < 0 {
                return usage("level must be >= 0");
            }
            let report = cantor_counterexample(n, level_raw as u32).map_err(run_err)?;
            let base = emit(&common, "counterexample", &report)?;
            if let Some(base) = base {
                emit_csv(&base, "bounds", &report.bounds_csv()).map_err(CliError::Run)?;
            }
            Ok(EXIT_OK)
        }
        Command::Snowflake { alpha, shape, levels, common } => {
            let cfg = load_config(&common)?;
            let alpha =
                alpha.or(cfg.alpha).ok_or_else(|| CliError::Usage("missing --alpha".into()))?;
            let shape = match shape {
                Some(s) => grammar::parse_shape(&s).map_err(CliError::Usage)?,
                None => cfg.shape.clone().unwrap_or(ShapeSpec::Grid {
                    bounds: vec![[0.0, 1.0]],
                    points_per_axis: 3,
                }),
            };
            let (lo, hi) = need_levels(levels, &cfg)?;
            let report = snowflake_dimension_report(alpha, &shape, lo, hi).map_err(run_err)?;
            let consistent = report.consistent;
            let base = emit(&common, "snowflake", &report)?;
            if let Some(base) = base {
                emit_csv(&base, "scales-euclidean", &report.euclidean.scales_csv())
                    .map_err(CliError::Run)?;
                emit_csv(&base, "scales-snowflake", &report.snowflake.scales_csv())
                    .map_err(CliError::Run)?;
            }
            Ok(if consistent { EXIT_OK } else { EXIT_FAIL })
        }
    }
}

fn run_degree(
    domain: DomainSpec,
    map: MapSpec,
    target: &[f64],
    samples: usize,
    common: &Common,
) -> Result<i32, CliError> {
    #[derive(Serialize)]
    struct DegreeDoc {
        domain: String,
        map: String,
        result: DegreeResult,
    }
    match (domain, map) {
        (DomainSpec::Interval { a, b }, MapSpec::OneD(map)) => {
            if target.len() != 1 {
                return usage("interval domains take a single-coordinate target");
            }
            let degree = degree_1d(map.eval(a), map.eval(b), target[0]).map_err(run_err)?;
            #[derive(Serialize)]
            struct Degree1dDoc {
                domain: String,
                degree: i32,
                target: f64,
                endpoint_images: [f64; 2],
            }
            emit(
                common,
                "degree",
                &Degree1dDoc {
                    domain: format!("interval:{a},{b}"),
                    degree,
                    target: target[0],
                    endpoint_images: [map.eval(a), map.eval(b)],
                },
            )?;
            Ok(EXIT_OK)
        }
        (DomainSpec::Interval { .. }, MapSpec::TwoD(_)) => {
            usage("interval domains need a 1D map")
        }
        (domain, MapSpec::OneD(_)) => {
            let _ = domain;
            usage("planar domains need a 2D map")
        }
        (domain, MapSpec::TwoD(map)) => {
            if target.len() != 2 {
                return usage("planar domains take an x,y target");
            }
            let z = [target[0], target[1]];
            let (param, desc): (Box<dyn Fn(f64) -> [f64; 2]>, String) = match domain {
                DomainSpec::Disk { radius } => {
                    (Box::new(circle_param([0.0, 0.0], radius)), format!("disk:{radius}"))
                }
                DomainSpec::Box { lo, hi } => {
                    (Box::new(box_param(lo, hi)), format!("box:{lo:?}:{hi:?}"))
                }
                DomainSpec::Interval { .. } => unreachable!("handled above"),
            };
            let loop_ = BoundaryLoop::sample(&param, &|x| map.eval(x), samples, &desc)
                .map_err(run_err)?;
            let refine = |t: f64| {
                let x = param(t);
                (x, map.eval(x))
            };
            let result = winding_degree_2d(&loop_, Some(&refine), z).map_err(run_err)?;
            let base = emit(
                common,
                "degree",
                &DegreeDoc { domain: desc, map: "named".into(), result },
            )?;
            if let Some(base) = base {
                emit_csv(&base, "loop", &loop_.to_csv()).map_err(CliError::Run)?;
            }
            Ok(EXIT_OK)
        }
    }
}

fn load_config(common: &Common) -> Result<FileConfig, CliError> {
    config::load(common.config.as_deref()).map_err(CliError::Usage)
}

fn need_metric(flag: Option<String>, cfg: &FileConfig) -> Result<MetricSpec, CliError> {
    match flag {
        Some(s) => grammar::parse_metric(&s).map_err(CliError::Usage),
        None => cfg
            .metric
            .clone()
            .ok_or_else(|| CliError::Usage("missing --metric".into())),
    }
}

fn need_shape(flag: Option<String>, cfg: &FileConfig) -> Result<ShapeSpec, CliError> {
    match flag {
        Some(s) => grammar::parse_shape(&s).map_err(CliError::Usage),
        None => cfg
            .shape
            .clone()
            .ok_or_else(|| CliError::Usage("missing --shape".into())),
    }
}

fn need_levels(flag: Option<String>, cfg: &FileConfig) -> Result<(u32, u32), CliError> {
    let s = flag
        .or_else(|| cfg.levels.clone())
        .ok_or_else(|| CliError::Usage("missing --levels".into()))?;
    grammar::parse_levels(&s).map_err(CliError::Usage)
}

fn emit<T: Serialize>(
    common: &Common,
    command: &str,
    report: &T,
) -> Result<Option<PathBuf>, CliError> {
    emit_json(command, report, common.out.as_deref(), common.no_meta).map_err(CliError::Run)
}

fn run_err(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}
