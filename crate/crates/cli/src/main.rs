//! `shallownet`: build, transform, fit, verify, and sweep single-hidden-layer
//! nets from the command line.
//!
//! Exit codes: 0 on success, 1 for internal failures (I/O, serialization),
//! 2 for precondition and budget failures, so scripts can tell "the method
//! honestly missed" from "the tool broke". Every file-writing command also
//! drops a run manifest next to its primary output (the output's extension
//! swapped for `manifest.json`) naming the invocation, its seeds, and every
//! artifact written.

// `!(x > 0.0)` style guards are used so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod io;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use chrono::Utc;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use shallownet::approx1d::{self, Target1D, BUILTIN_TARGETS};
use shallownet::fitnd::{self, FitConfig, SamplePlan};
use shallownet::measure::{self, L1Method, L1Report};
use shallownet::nets::Net;
use shallownet::surgery::{self, IndicatorBackend, IndicatorSpec};

#[derive(Debug)]
pub enum CliError {
    /// Bad input, unmet precondition, or an honestly missed budget.
    Precondition(String),
    /// The tool itself failed (I/O, serialization, broken invariant).
    Internal(String),
}

impl From<shallownet::Error> for CliError {
    fn from(e: shallownet::Error) -> Self {
        CliError::Precondition(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "shallownet",
    version,
    about = "Certified 1-D approximation, exact net surgery, indicator construction, and L1 measurement for single-hidden-layer nets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a net within an L1 budget of a 1-D target or indicator spec.
    Build(BuildArgs),
    /// Apply exact net surgery: expand, stack, or softmax-wrap.
    Transform(TransformArgs),
    /// Fit a softmax indicator net with random relu features.
    Fit(FitArgs),
    /// Measure a net's L1 error against a target or indicator spec.
    Verify(VerifyArgs),
    /// Batch build-and-measure runs over parameter grids, to CSV.
    Sweep(SweepArgs),
    /// Print the saturated-softmax error bounds for a class count.
    Bound(BoundArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EmitKind {
    /// The expanded relu net.
    Relu,
    /// The pre-expansion clipped-ramp net.
    Sigma1,
}

#[derive(Args)]
struct BuildArgs {
    /// Built-in target name (x, x2, sin2pi, sign, rsqrt) or a JSON samples
    /// file with fields `xs` and `ys`.
    #[arg(long, required_unless_present = "indicator", conflicts_with = "indicator")]
    target: Option<String>,
    /// Indicator spec JSON; builds the certified 1-D softmax construction.
    #[arg(long)]
    indicator: Option<PathBuf>,
    /// Total L1 error budget.
    #[arg(long)]
    eps: f64,
    /// Net output path; the certificate lands next to it with extension
    /// `cert.json`.
    #[arg(long)]
    out: PathBuf,
    /// Which activation to emit for target builds.
    #[arg(long, value_enum, default_value_t = EmitKind::Relu, conflicts_with = "indicator")]
    activation: EmitKind,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TransformOp {
    /// Rewrite a clipped-ramp net as a relu net of twice the width.
    Expand,
    /// Concatenate outputs of several nets over a shared input.
    Stack,
    /// Attach a softmax head (requires at least two outputs).
    SoftmaxWrap,
}

#[derive(Args)]
struct TransformArgs {
    /// Input net JSON.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    op: TransformOp,
    /// Further nets to stack after the input (stack only; repeatable).
    #[arg(long = "with")]
    with: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Re-evaluate input and output at 10^4 sampled points and require
    /// agreement within 1e-12.
    #[arg(long)]
    verify: bool,
    /// Seed for the verification sample.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FitArgs {
    /// Indicator spec JSON describing the target regions.
    #[arg(long)]
    spec: PathBuf,
    /// Per-class L1 budget the fit is scored against.
    #[arg(long)]
    eps: f64,
    /// Net output path; the report lands next to it with extension
    /// `report.json`.
    #[arg(long)]
    out: PathBuf,
    /// Number of random relu features.
    #[arg(long, default_value_t = 256)]
    hidden: usize,
    /// Hidden weight sampling scale.
    #[arg(long, default_value_t = 4.0)]
    scale: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ridge regularization for the output-weight solve.
    #[arg(long, default_value_t = 1e-8)]
    ridge: f64,
    /// Random training sample count.
    #[arg(long, default_value_t = 4096, conflicts_with = "grid_per_axis")]
    samples: usize,
    /// Train on a midpoint lattice with this many points per axis instead.
    #[arg(long)]
    grid_per_axis: Option<usize>,
    /// Monte-Carlo samples for the post-fit error estimate.
    #[arg(long, default_value_t = 10_000)]
    eval_samples: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Exact where available, adaptive quadrature otherwise.
    Auto,
    /// Closed-form piecewise-linear integration (1-D, exact targets only).
    Exact,
    /// Adaptive quadrature split at kinks and cuts (1-D).
    Adaptive,
    /// Midpoint-rule tensor grid.
    Grid,
    /// Seeded Monte Carlo with a 99% confidence halfwidth.
    Mc,
}

#[derive(Args)]
struct VerifyArgs {
    /// Net JSON to measure.
    #[arg(long)]
    net: PathBuf,
    /// 1-D target to compare against (name or samples file).
    #[arg(long, required_unless_present = "spec", conflicts_with = "spec")]
    target: Option<String>,
    /// Indicator spec JSON to compare against (per-class report).
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    method: Method,
    /// Pass threshold: exit 0 only if the measured value stays below it.
    #[arg(long)]
    eps: Option<f64>,
    /// Absolute tolerance for adaptive quadrature.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Grid resolution per axis.
    #[arg(long, default_value_t = 1000)]
    grid_res: usize,
    /// Monte-Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the report JSON here (it always prints to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated 1-D targets to build and measure, one row per
    /// (target, eps) pair.
    #[arg(long, value_delimiter = ',')]
    targets: Vec<String>,
    /// Comma-separated class counts; each adds equal-split indicator rows
    /// with measured error and bound columns.
    #[arg(long, value_delimiter = ',')]
    classes: Vec<usize>,
    /// Comma-separated error budgets.
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BoundArgs {
    /// Number of classes.
    #[arg(long)]
    classes: usize,
    /// Per-class error budget.
    #[arg(long)]
    eps: f64,
    /// Also write the bound JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build(args) => cmd_build(args),
        Command::Transform(args) => cmd_transform(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Bound(args) => cmd_bound(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Precondition(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("error (internal): {msg}");
            ExitCode::from(1)
        }
    }
}

/// Resolves a `--target` string: a registry name first, then a JSON samples
/// file (`{"xs": [...], "ys": [...]}`, optional `"name"`).
fn load_target(s: &str) -> Result<Target1D, CliError> {
    if BUILTIN_TARGETS.contains(&s) {
        return Ok(Target1D::builtin(s)?);
    }
    let path = Path::new(s);
    if path.exists() {
        #[derive(Deserialize)]
        struct Samples {
            #[serde(default)]
            name: Option<String>,
            xs: Vec<f64>,
            ys: Vec<f64>,
        }
        let samples: Samples = io::read_json(path)?;
        let name = samples.name.unwrap_or_else(|| {
            path.file_stem()
                .map(|st| st.to_string_lossy().into_owned())
                .unwrap_or_else(|| "samples".into())
        });
        return Ok(Target1D::from_samples(name, &samples.xs, &samples.ys)?);
    }
    Err(CliError::Precondition(format!(
        "target {s:?} is neither a built-in ({}) nor a readable samples file",
        BUILTIN_TARGETS.join(", ")
    )))
}

fn method_tag(method: L1Method) -> &'static str {
    match method {
        L1Method::ExactCpwl => "exact_cpwl",
        L1Method::AdaptiveQuadrature => "adaptive_quadrature",
        L1Method::GridQuadrature => "grid_quadrature",
        L1Method::MonteCarlo => "monte_carlo",
    }
}

fn cmd_build(args: &BuildArgs) -> Result<(), CliError> {
    let started = Utc::now();
    let cert_path = args.out.with_extension("cert.json");

    let certificate = if let Some(spec_path) = &args.indicator {
        let spec: IndicatorSpec = io::read_json(spec_path)?;
        let built =
            surgery::build_softmax_indicator_net(&spec, args.eps, &IndicatorBackend::Constructive1D)?;
        io::write_json(&args.out, &built.net)?;
        io::write_json(&cert_path, &built.certificate)?;
        built.certificate
    } else {
        let target = load_target(args.target.as_deref().unwrap())?;
        let built = approx1d::build_relu_approx_1d(&target, args.eps)?;
        let net = match args.activation {
            EmitKind::Relu => &built.relu_net,
            EmitKind::Sigma1 => &built.sigma1_net,
        };
        io::write_json(&args.out, net)?;
        io::write_json(&cert_path, &built.certificate)?;
        built.certificate
    };

    io::write_manifest(
        "build",
        BTreeMap::new(),
        &[&args.out, &cert_path],
        started,
        &args.out,
    )?;
    if !certificate.within_budget() {
        return Err(CliError::Precondition(format!(
            "budget missed: achieved {:e} against requested {:e} (artifacts written)",
            certificate.total_achieved, certificate.requested_eps
        )));
    }
    println!(
        "wrote {} and {} ({:?} total {:e} within eps {:e})",
        args.out.display(),
        cert_path.display(),
        certificate.mode,
        certificate.total_achieved,
        certificate.requested_eps
    );
    Ok(())
}

fn cmd_transform(args: &TransformArgs) -> Result<(), CliError> {
    let started = Utc::now();
    let input: Net = io::read_json(&args.input)?;
    let mut extra: Vec<Net> = Vec::new();
    for p in &args.with {
        extra.push(io::read_json(p)?);
    }
    if args.op != TransformOp::Stack && !extra.is_empty() {
        return Err(CliError::Precondition(
            "--with only applies to --op stack".into(),
        ));
    }

    let result = match args.op {
        TransformOp::Expand => surgery::sigma1_expand_to_relu(&input)?,
        TransformOp::Stack => {
            if extra.is_empty() {
                return Err(CliError::Precondition(
                    "stack needs at least one --with net".into(),
                ));
            }
            let mut all = vec![input.clone()];
            all.extend(extra.iter().cloned());
            surgery::stack_outputs(&all)?
        }
        TransformOp::SoftmaxWrap => input.clone().with_softmax_head()?,
    };

    if args.verify {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let d = result.input_dim();
        for trial in 0..10_000 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
            let (want, got): (Vec<f64>, Vec<f64>) = match args.op {
                TransformOp::Expand => (input.eval(&x)?, result.eval(&x)?),
                TransformOp::Stack => {
                    let mut want = input.eval(&x)?;
                    for n in &extra {
                        want.extend(n.eval(&x)?);
                    }
                    (want, result.eval(&x)?)
                }
                TransformOp::SoftmaxWrap => (input.eval_logits(&x)?, result.eval_logits(&x)?),
            };
            for (i, (u, v)) in want.iter().zip(&got).enumerate() {
                if (u - v).abs() > 1e-12 {
                    return Err(CliError::Internal(format!(
                        "transform verification failed at trial {trial}, output {i}: \
                         {u} vs {v} at x = {x:?}"
                    )));
                }
            }
        }
    }

    io::write_json(&args.out, &result)?;
    let mut seeds = BTreeMap::new();
    if args.verify {
        seeds.insert("verify".into(), args.seed);
    }
    io::write_manifest("transform", seeds, &[&args.out], started, &args.out)?;
    println!(
        "wrote {} ({} hidden units, {} outputs{})",
        args.out.display(),
        result.hidden_count(),
        result.output_count(),
        if args.verify {
            "; verified at 10000 points"
        } else {
            ""
        }
    );
    Ok(())
}

fn cmd_fit(args: &FitArgs) -> Result<(), CliError> {
    let started = Utc::now();
    let spec: IndicatorSpec = io::read_json(&args.spec)?;
    let plan = match args.grid_per_axis {
        Some(per_axis) => SamplePlan::Grid { per_axis },
        None => SamplePlan::Random { count: args.samples },
    };
    let cfg = FitConfig {
        hidden_count: args.hidden,
        weight_scale: args.scale,
        seed: args.seed,
        ridge: args.ridge,
        plan,
        eval_samples: args.eval_samples,
    };
    let outcome = fitnd::fit_indicator_softmax(&spec, args.eps, &cfg)?;

    io::write_json(&args.out, &outcome.net)?;
    let report_path = args.out.with_extension("report.json");
    io::write_json(&report_path, &outcome.report)?;
    let mut seeds = BTreeMap::new();
    seeds.insert("fit".into(), outcome.report.seed);
    seeds.insert("eval".into(), outcome.report.eval_seed);
    io::write_manifest(
        "fit",
        seeds,
        &[&args.out, &report_path],
        started,
        &args.out,
    )?;
    if !outcome.report.success {
        return Err(CliError::Precondition(format!(
            "fit missed eps: worst class {:e} not below {:e} (artifacts written)",
            outcome.report.max_class_l1, args.eps
        )));
    }
    println!(
        "wrote {} and {} (worst class {:e} below eps {:e})",
        args.out.display(),
        report_path.display(),
        outcome.report.max_class_l1,
        args.eps
    );
    Ok(())
}

/// Per-class verification report for `verify --spec`.
#[derive(Debug, Serialize)]
struct SpecReport {
    per_class: Vec<L1Report>,
    total: f64,
    max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    within_eps: Option<bool>,
}

/// `value + ci` is the number the pass/fail contract compares: the point
/// estimate alone for deterministic methods, the upper confidence edge for
/// Monte Carlo.
fn pessimistic(report: &L1Report) -> f64 {
    report.value + report.ci_halfwidth.unwrap_or(0.0)
}

fn to_pretty<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Internal(format!("cannot serialize report: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let started = Utc::now();
    let net: Net = io::read_json(&args.net)?;

    let (text, worst, used_mc) = if let Some(spec_path) = &args.spec {
        let spec: IndicatorSpec = io::read_json(spec_path)?;
        let method = match args.method {
            Method::Auto => {
                if spec.input_dim() == 1 {
                    Method::Adaptive
                } else {
                    Method::Mc
                }
            }
            m => m,
        };
        let per_class = match method {
            Method::Exact => {
                return Err(CliError::Precondition(
                    "softmax outputs are not piecewise linear; use adaptive, grid, or mc \
                     with --spec"
                        .into(),
                ))
            }
            Method::Adaptive => measure::softmax_vs_onehot_l1_1d(&net, &spec, args.tol)?,
            Method::Grid => measure::grid_l1_net_vs_onehot(&net, &spec, args.grid_res)?,
            Method::Mc => measure::mc_l1_net_vs_onehot(&net, &spec, args.samples, args.seed)?,
            Method::Auto => unreachable!(),
        };
        let total: f64 = per_class.iter().map(|r| r.value).sum();
        let max = per_class.iter().map(pessimistic).fold(0.0_f64, f64::max);
        let report = SpecReport {
            per_class,
            total,
            max,
            eps: args.eps,
            within_eps: args.eps.map(|e| max < e),
        };
        (to_pretty(&report)?, max, method == Method::Mc)
    } else {
        let target = load_target(args.target.as_deref().unwrap())?;
        if net.input_dim() != 1 || net.output_count() != 1 || net.softmax_head() {
            return Err(CliError::Precondition(format!(
                "--target verification needs a scalar 1-D net without a softmax head; \
                 this net has input_dim {}, {} outputs, softmax_head {}",
                net.input_dim(),
                net.output_count(),
                net.softmax_head()
            )));
        }
        let cpwl = measure::net_to_cpwl_1d(&net, 0)?;
        let method = match args.method {
            Method::Auto => {
                if target.exact_form().is_some() {
                    Method::Exact
                } else {
                    Method::Adaptive
                }
            }
            m => m,
        };
        let report = match method {
            Method::Exact => match target.exact_form() {
                Some(approx1d::ExactForm::Cpwl(f)) => measure::exact_l1_distance_1d(f, &cpwl),
                Some(approx1d::ExactForm::Step(s)) => measure::exact_l1_step_vs_cpwl(s, &cpwl),
                None => {
                    return Err(CliError::Precondition(format!(
                        "target {:?} has no exact piecewise form; use --method adaptive",
                        target.name()
                    )))
                }
            },
            Method::Adaptive => {
                let mut hints: Vec<f64> = cpwl.breakpoints().to_vec();
                hints.extend_from_slice(target.breakpoints());
                measure::quad_l1_distance_1d(
                    &|x| target.eval(x),
                    &|x| cpwl.value_at(x),
                    &hints,
                    args.tol,
                )?
            }
            Method::Grid => measure::grid_l1_distance(
                &|x| vec![target.eval(x[0])],
                &|x| vec![cpwl.value_at(x[0])],
                1,
                1,
                args.grid_res,
            )?
            .remove(0),
            Method::Mc => measure::mc_l1_distance(
                &|x| vec![target.eval(x[0])],
                &|x| vec![cpwl.value_at(x[0])],
                1,
                1,
                args.samples,
                args.seed,
            )?
            .remove(0),
            Method::Auto => unreachable!(),
        };
        let worst = pessimistic(&report);
        (to_pretty(&report)?, worst, method == Method::Mc)
    };

    print!("{text}");
    if let Some(out) = &args.out {
        io::write_atomic(out, text.as_bytes())?;
        let mut seeds = BTreeMap::new();
        if used_mc {
            seeds.insert("mc".into(), args.seed);
        }
        io::write_manifest("verify", seeds, &[out], started, out)?;
    }
    if let Some(eps) = args.eps {
        if !(worst < eps) {
            return Err(CliError::Precondition(format!(
                "measured value {worst:e} is not below eps {eps:e}"
            )));
        }
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let started = Utc::now();
    if args.eps.is_empty() {
        return Err(CliError::Precondition("--eps grid is empty".into()));
    }
    if args.targets.is_empty() && args.classes.is_empty() {
        return Err(CliError::Precondition(
            "nothing to sweep: give --targets and/or --classes".into(),
        ));
    }
    if let Some(&m) = args.classes.iter().find(|&&m| m < 2) {
        return Err(CliError::Precondition(format!(
            "class counts must be at least 2, got {m}"
        )));
    }
    if args.eps.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(CliError::Precondition(
            "every eps must be positive and finite".into(),
        ));
    }

    let mut wtr = csv::Writer::from_writer(Vec::new());
    let internal = |e: csv::Error| CliError::Internal(format!("csv write failed: {e}"));
    wtr.write_record([
        "target",
        "eps",
        "method",
        "value",
        "ci",
        "seconds",
        "status",
        "hidden_units",
        "closed_form",
        "tail_bound",
        "guarantee",
    ])
    .map_err(internal)?;

    let fmt = |v: f64| format!("{v:e}");
    for name in &args.targets {
        let target = load_target(name)?;
        for &eps in &args.eps {
            let clock = Instant::now();
            let row = sweep_target_row(&target, eps);
            let seconds = format!("{:.6}", clock.elapsed().as_secs_f64());
            let record = match row {
                Ok((hidden, report)) => {
                    let ci = report.ci_halfwidth.map(fmt).unwrap_or_default();
                    [
                        target.name().to_string(),
                        fmt(eps),
                        method_tag(report.method).to_string(),
                        fmt(report.value),
                        ci,
                        seconds,
                        "ok".into(),
                        hidden.to_string(),
                        String::new(),
                        String::new(),
                        String::new(),
                    ]
                }
                Err(shallownet::Error::BudgetInfeasible { achieved, .. }) => {
                    eprintln!(
                        "warning: {} at eps {eps:e} infeasible (best achievable {achieved:e})",
                        target.name()
                    );
                    [
                        target.name().to_string(),
                        fmt(eps),
                        String::new(),
                        fmt(achieved),
                        String::new(),
                        seconds,
                        "infeasible".into(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                    ]
                }
                Err(e) => {
                    eprintln!("warning: {} at eps {eps:e} failed: {e}", target.name());
                    [
                        target.name().to_string(),
                        fmt(eps),
                        String::new(),
                        String::new(),
                        String::new(),
                        seconds,
                        "error".into(),
                        String::new(),
                        String::new(),
                        String::new(),
                        String::new(),
                    ]
                }
            };
            wtr.write_record(&record).map_err(internal)?;
        }
    }

    for &m in &args.classes {
        let cuts: Vec<f64> = (1..m).map(|i| i as f64 / m as f64).collect();
        let labels: Vec<usize> = (0..m).collect();
        let spec = IndicatorSpec::new(1, m, vec![cuts], labels)?;
        for &eps in &args.eps {
            let clock = Instant::now();
            let row = sweep_indicator_row(&spec, eps);
            let seconds = format!("{:.6}", clock.elapsed().as_secs_f64());
            let bound = surgery::indicator_tail_bound(m, eps)?;
            let closed = surgery::indicator_error_closed_form(&measure::class_measures(&spec), eps)?
                .into_iter()
                .fold(0.0_f64, f64::max);
            let label = format!("indicator[m={m}]");
            let record = match row {
                Ok((hidden, worst)) => [
                    label,
                    fmt(eps),
                    "adaptive_quadrature".into(),
                    fmt(worst),
                    String::new(),
                    seconds,
                    "ok".into(),
                    hidden.to_string(),
                    fmt(closed),
                    fmt(bound.tail),
                    fmt(bound.guarantee),
                ],
                Err(e) => {
                    eprintln!("warning: indicator m={m} at eps {eps:e} failed: {e}");
                    [
                        label,
                        fmt(eps),
                        String::new(),
                        String::new(),
                        String::new(),
                        seconds,
                        "error".into(),
                        String::new(),
                        fmt(closed),
                        fmt(bound.tail),
                        fmt(bound.guarantee),
                    ]
                }
            };
            wtr.write_record(&record).map_err(internal)?;
        }
    }

    let bytes = wtr
        .into_inner()
        .map_err(|e| CliError::Internal(format!("csv write failed: {e}")))?;
    io::write_atomic(&args.out, &bytes)?;
    let mut seeds = BTreeMap::new();
    seeds.insert("sweep".into(), args.seed);
    io::write_manifest("sweep", seeds, &[&args.out], started, &args.out)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

/// Builds and exactly measures one (target, eps) sweep row.
fn sweep_target_row(target: &Target1D, eps: f64) -> shallownet::Result<(usize, L1Report)> {
    let built = approx1d::build_relu_approx_1d(target, eps)?;
    let cpwl = measure::net_to_cpwl_1d(&built.relu_net, 0)?;
    let report = match target.exact_form() {
        Some(approx1d::ExactForm::Cpwl(f)) => measure::exact_l1_distance_1d(f, &cpwl),
        Some(approx1d::ExactForm::Step(s)) => measure::exact_l1_step_vs_cpwl(s, &cpwl),
        None => {
            let mut hints: Vec<f64> = cpwl.breakpoints().to_vec();
            hints.extend_from_slice(target.breakpoints());
            measure::quad_l1_distance_1d(
                &|x| target.eval(x),
                &|x| cpwl.value_at(x),
                &hints,
                1e-10,
            )?
        }
    };
    Ok((built.relu_net.hidden_count(), report))
}

/// Builds the constructive indicator net and measures its worst class.
fn sweep_indicator_row(spec: &IndicatorSpec, eps: f64) -> shallownet::Result<(usize, f64)> {
    let built = surgery::build_softmax_indicator_net(spec, eps, &IndicatorBackend::Constructive1D)?;
    let reports = measure::softmax_vs_onehot_l1_1d(&built.net, spec, 1e-10)?;
    let worst = reports.iter().map(|r| r.value).fold(0.0_f64, f64::max);
    Ok((built.net.hidden_count(), worst))
}

#[derive(Debug, Serialize)]
struct BoundReport {
    class_count: usize,
    eps: f64,
    tail: f64,
    guarantee: f64,
}

fn cmd_bound(args: &BoundArgs) -> Result<(), CliError> {
    let started = Utc::now();
    let bound = surgery::indicator_tail_bound(args.classes, args.eps)?;
    let report = BoundReport {
        class_count: args.classes,
        eps: args.eps,
        tail: bound.tail,
        guarantee: bound.guarantee,
    };
    let text = to_pretty(&report)?;
    print!("{text}");
    if let Some(out) = &args.out {
        io::write_atomic(out, text.as_bytes())?;
        io::write_manifest("bound", BTreeMap::new(), &[out], started, out)?;
    }
    Ok(())
}
