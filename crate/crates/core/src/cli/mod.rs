//! The `mills` command-line interface.

mod output;
pub mod spec_file;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::analysis::{
    certify_reciprocal, complete_monotonicity_probe, test_fn_a, test_fn_b, x2_mills_prime, Certificate,
    CertifyConfig, ConditionOutcome, Route, StepRule, Verdict, CM_MAX_ORDER, DEFAULT_SLACK,
};
use crate::distributions::{make_custom_spec, make_gamma, make_normal_halfline, DistributionModel};
use crate::error::Error;
use crate::grid::linear_grid;
use crate::inequalities::{mills_h, random_chain_suite, ChainDirection, SuiteSummary};
use crate::specfun::ShapeParam;
use output::{jnum, num, table, Csv};

#[derive(Parser, Debug)]
#[command(
    name = "mills",
    version,
    about = "Mills ratios, reciprocal convexity certificates and mean-chain checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate f, survival, m, omega, omega', x^2 m', T_a and T_b at one point
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// Certify reciprocal convexity or concavity of the Mills ratio
    Certify {
        #[command(flatten)]
        common: Common,
    },
    /// Certify the gamma family over a range of shapes
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.25, allow_hyphen_values = true)]
        alpha_min: f64,
        #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
        alpha_max: f64,
        #[arg(long, default_value_t = 0.25, allow_hyphen_values = true)]
        alpha_step: f64,
    },
    /// Check the four-term mean chain on random pairs
    Chain {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Chain orientation; derived from the certificate when omitted
        #[arg(long, value_enum)]
        direction: Option<DirectionArg>,
        /// Function to test; h(x) = m(sqrt x)/sqrt x is the default for normal-h
        #[arg(long, value_enum)]
        function: Option<FunctionArg>,
        #[arg(long, default_value_t = 1e-2, allow_hyphen_values = true)]
        range_min: f64,
        #[arg(long, default_value_t = 50.0, allow_hyphen_values = true)]
        range_max: f64,
    },
    /// Finite-difference complete monotonicity test
    Cm {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5)]
        max_order: usize,
        /// Fixed difference step; max(1e-2, 0.01 x) when omitted
        #[arg(long, allow_hyphen_values = true)]
        step: Option<f64>,
        #[arg(long, value_enum)]
        function: Option<FunctionArg>,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, value_enum)]
    dist: Option<Dist>,
    /// Key-value description of a custom model (with --dist custom)
    #[arg(long)]
    spec_file: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    grid_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    grid_max: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SLACK, allow_hyphen_values = true)]
    slack: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Dist {
    NormalH,
    Gamma,
    Custom,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum DirectionArg {
    Convex,
    Concave,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FunctionArg {
    H,
    Mills,
}

impl FunctionArg {
    fn name(self) -> &'static str {
        match self {
            FunctionArg::H => "h",
            FunctionArg::Mills => "mills",
        }
    }
}

enum Failure {
    Usage(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Numeric(_) => 2,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Usage(m) => Failure::Usage(m),
            e @ Error::ModelConstruction { .. } => Failure::Usage(e.to_string()),
            e => Failure::Numeric(e.to_string()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Usage(msg.into()))
}

struct Grid {
    min: f64,
    max: f64,
    points: usize,
}

impl Common {
    fn grid(&self, default: (f64, f64, usize)) -> Outcome<Grid> {
        let g = Grid {
            min: self.grid_min.unwrap_or(default.0),
            max: self.grid_max.unwrap_or(default.1),
            points: self.grid_points.unwrap_or(default.2),
        };
        if !(g.min > 0.0 && g.min < g.max && g.max.is_finite()) {
            return usage(format!("grid needs 0 < grid-min < grid-max, got [{}, {}]", g.min, g.max));
        }
        if g.points < 3 {
            return usage(format!("grid-points must be at least 3, got {}", g.points));
        }
        Ok(g)
    }

    fn certify_config(&self) -> Outcome<CertifyConfig> {
        let d = CertifyConfig::default();
        let g = self.grid((d.grid_min, d.grid_max, d.grid_points))?;
        if !(self.slack >= 0.0 && self.slack.is_finite()) {
            return usage(format!("slack must be finite and >= 0, got {}", self.slack));
        }
        Ok(CertifyConfig {
            grid_min: g.min,
            grid_max: g.max,
            grid_points: g.points,
            slack: self.slack,
        })
    }

    fn shape(&self) -> Outcome<ShapeParam> {
        match self.alpha {
            Some(a) => ShapeParam::new(a).or_else(|_| usage(format!("alpha must be finite and > 0, got {a}"))),
            None => usage("--dist gamma needs --alpha"),
        }
    }

    fn model(&self) -> Outcome<DistributionModel> {
        let dist = self.dist.unwrap_or(Dist::NormalH);
        if dist != Dist::Gamma && self.alpha.is_some() {
            return usage("--alpha only applies to --dist gamma");
        }
        if dist != Dist::Custom && self.spec_file.is_some() {
            return usage("--spec-file only applies to --dist custom");
        }
        match dist {
            Dist::NormalH => Ok(make_normal_halfline()),
            Dist::Gamma => Ok(make_gamma(self.shape()?)),
            Dist::Custom => {
                let Some(path) = &self.spec_file else {
                    return usage("--dist custom needs --spec-file");
                };
                let src = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Numeric(format!("cannot read {}: {e}", path.display())))?;
                Ok(make_custom_spec(spec_file::parse_spec(&src)?)?)
            }
        }
    }

    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialise");
    s.push('\n');
    s
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports always serialise")
}

/// Value of an optional quantity; singular points are reported as NaN.
fn or_nan(r: crate::Result<f64>) -> Outcome<f64> {
    match r {
        Ok(v) => Ok(v),
        Err(Error::Singularity { .. }) => Ok(f64::NAN),
        Err(e) => Err(e.into()),
    }
}

fn cmd_eval(common: &Common, x: f64) -> Outcome<String> {
    if !(x > 0.0 && x.is_finite()) {
        return usage(format!("x must be finite and > 0, got {x} (use a small x such as 1e-12 near the origin)"));
    }
    let model = common.model()?;
    let fields: [(&str, f64); 9] = [
        ("x", x),
        ("f", model.density(x)?),
        ("survival", model.survival(x)?),
        ("m", model.mills(x)?),
        ("omega", model.omega(x)?),
        ("omega_prime", model.omega_prime(x)?),
        ("x2_mprime", x2_mills_prime(&model, x)?),
        ("t_a", or_nan(test_fn_a(&model, x))?),
        ("t_b", or_nan(test_fn_b(&model, x))?),
    ];
    Ok(match common.format(Format::Text) {
        Format::Json => {
            let mut obj = serde_json::Map::new();
            obj.insert("model".into(), json!(model.id().to_string()));
            for (k, v) in fields {
                obj.insert(k.into(), jnum(v));
            }
            pretty(&Value::Object(obj))
        }
        Format::Csv => {
            let mut header = vec!["model"];
            header.extend(fields.iter().map(|f| f.0));
            let mut csv = Csv::new(&header);
            let mut row = vec![model.id().to_string()];
            row.extend(fields.iter().map(|f| num(f.1)));
            csv.row(&row);
            csv.finish()
        }
        Format::Text => {
            let mut rows = vec![vec!["model".to_string(), model.id().to_string()]];
            rows.extend(fields.iter().map(|(k, v)| vec![k.to_string(), num(*v)]));
            table(&rows)
        }
    })
}

fn condition_result(outcome: &ConditionOutcome) -> String {
    match outcome {
        ConditionOutcome::Monotonicity(r) => r.direction.as_str().to_string(),
        ConditionOutcome::Limit(d) => if d.passed { "limit_zero" } else { "limit_not_zero" }.to_string(),
        ConditionOutcome::Failed { message } => format!("failed: {message}"),
    }
}

fn route_str(r: Option<Route>) -> &'static str {
    r.map(Route::as_str).unwrap_or("none")
}

fn render_certificate(c: &Certificate, format: Format) -> String {
    match format {
        Format::Json => pretty(&to_json(c)),
        Format::Csv => {
            let mut csv = Csv::new(&[
                "model",
                "verdict",
                "route",
                "attempt",
                "attempt_verdict",
                "condition",
                "passed",
                "result",
            ]);
            for a in &c.routes {
                for k in &a.conditions {
                    csv.row(&[
                        c.model.clone(),
                        c.verdict.as_str().into(),
                        route_str(c.route).into(),
                        a.route.as_str().into(),
                        a.verdict.map(Verdict::as_str).unwrap_or("none").into(),
                        k.name.into(),
                        k.passed.to_string(),
                        condition_result(&k.outcome),
                    ]);
                }
            }
            csv.finish()
        }
        Format::Text => {
            let mut rows = vec![
                vec!["model".to_string(), c.model.clone()],
                vec!["verdict".into(), c.verdict.as_str().into()],
                vec!["route".into(), route_str(c.route).into()],
                vec![
                    "grid".into(),
                    format!("{} log points on [{:e}, {:e}], slack {:e}", c.grid.points, c.grid.min, c.grid.max, c.grid.slack),
                ],
            ];
            for e in &c.excluded_intervals {
                rows.push(vec![
                    "excluded".into(),
                    format!("[{}, {}] around {} ({:?})", num(e.lo), num(e.hi), num(e.center), e.reason),
                ]);
            }
            for n in &c.notes {
                rows.push(vec!["note".into(), format!("{n:?}")]);
            }
            let mut out = table(&rows);
            for a in &c.routes {
                out.push_str(&format!(
                    "\n{}: {}\n",
                    a.route.as_str(),
                    a.verdict.map(Verdict::as_str).unwrap_or("no verdict")
                ));
                if let Some(r) = &a.reason {
                    out.push_str(&format!("  {r}\n"));
                }
                let rows: Vec<Vec<String>> = a
                    .conditions
                    .iter()
                    .map(|k| {
                        vec![
                            format!("  {}", k.name),
                            if k.passed { "pass" } else { "fail" }.into(),
                            condition_result(&k.outcome),
                        ]
                    })
                    .collect();
                out.push_str(&table(&rows));
            }
            out
        }
    }
}

fn cmd_certify(common: &Common) -> Outcome<String> {
    let model = common.model()?;
    let cert = certify_reciprocal(&model, &common.certify_config()?)?;
    Ok(render_certificate(&cert, common.format(Format::Text)))
}

fn direction_of(c: &Certificate, route: Route, name: &str) -> String {
    c.attempt(route)
        .and_then(|a| a.conditions.iter().find(|k| k.name == name))
        .map(|k| match &k.outcome {
            ConditionOutcome::Monotonicity(r) => r.direction.as_str().to_string(),
            _ => "failed".to_string(),
        })
        .unwrap_or_else(|| "none".into())
}

fn cmd_sweep(common: &Common, lo: f64, hi: f64, step: f64) -> Outcome<String> {
    if common.dist.is_some_and(|d| d != Dist::Gamma) || common.alpha.is_some() || common.spec_file.is_some() {
        return usage("sweep runs over the gamma family; use --alpha-min/--alpha-max/--alpha-step");
    }
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return usage(format!("sweep needs 0 < alpha-min <= alpha-max, got [{lo}, {hi}]"));
    }
    if !(step > 0.0 && step.is_finite()) {
        return usage(format!("alpha-step must be > 0, got {step}"));
    }
    let n = ((hi - lo) / step * (1.0 + 1e-12)).floor() as usize + 1;
    let config = common.certify_config()?;
    let certs = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = ShapeParam::new(lo + i as f64 * step)?;
            Ok((a.get(), certify_reciprocal(&make_gamma(a), &config)?))
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let rows: Vec<[String; 7]> = certs
        .iter()
        .map(|(a, c)| {
            [
                num(*a),
                c.verdict.as_str().into(),
                route_str(c.route).into(),
                direction_of(c, Route::PartA, "omega_ratio"),
                direction_of(c, Route::PartA, "test_fn_a"),
                direction_of(c, Route::PartB, "test_fn_b"),
                direction_of(c, Route::DirectProbe, "x2_mills_prime"),
            ]
        })
        .collect();
    const HEADER: [&str; 7] = [
        "alpha",
        "verdict",
        "route",
        "omega_ratio_direction",
        "Ta_direction",
        "Tb_direction",
        "x2mprime_direction",
    ];
    Ok(match common.format(Format::Csv) {
        Format::Csv => {
            let mut csv = Csv::new(&HEADER);
            for r in &rows {
                csv.row(r);
            }
            csv.finish()
        }
        Format::Json => {
            let items: Vec<Value> = certs
                .iter()
                .zip(&rows)
                .map(|((a, _), r)| {
                    let mut obj = serde_json::Map::new();
                    obj.insert("alpha".into(), jnum(*a));
                    for (k, v) in HEADER.iter().zip(r).skip(1) {
                        obj.insert((*k).into(), json!(v));
                    }
                    Value::Object(obj)
                })
                .collect();
            pretty(&json!({ "rows": items }))
        }
        Format::Text => {
            let mut t = vec![HEADER.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
            t.extend(certs.iter().zip(&rows).map(|((a, _), r)| {
                let mut row = r.to_vec();
                row[0] = format!("{a}");
                row
            }));
            table(&t)
        }
    })
}

fn pick_function(model: &DistributionModel, requested: Option<FunctionArg>) -> Outcome<FunctionArg> {
    match requested {
        Some(FunctionArg::H) if !model.is_normal_halfline() => usage("--function h is defined for --dist normal-h only"),
        Some(f) => Ok(f),
        None if model.is_normal_halfline() => Ok(FunctionArg::H),
        None => Ok(FunctionArg::Mills),
    }
}

fn eval_function(model: &DistributionModel, f: FunctionArg, x: f64) -> crate::Result<f64> {
    match f {
        FunctionArg::H => mills_h(x),
        FunctionArg::Mills => model.mills(x),
    }
}

fn render_chain(s: &SuiteSummary, model: &str, function: &str, source: &str, format: Format) -> String {
    match format {
        Format::Json => {
            let mut v = to_json(s);
            let obj = v.as_object_mut().expect("summary is an object");
            obj.insert("model".into(), json!(model));
            obj.insert("function".into(), json!(function));
            obj.insert("direction_source".into(), json!(source));
            pretty(&v)
        }
        Format::Csv => {
            let mut csv = Csv::new(&[
                "x",
                "y",
                "term_harmonic",
                "term_average",
                "term_arithmetic",
                "term_weighted",
                "direction",
                "verdict",
                "max_violation",
            ]);
            for r in &s.reports {
                csv.row(&[
                    num(r.x),
                    num(r.y),
                    num(r.term_harmonic),
                    num(r.term_average),
                    num(r.term_arithmetic),
                    num(r.term_weighted),
                    r.direction.as_str().into(),
                    r.verdict.as_str().into(),
                    num(r.max_violation),
                ]);
            }
            csv.finish()
        }
        Format::Text => {
            let w = &s.worst;
            table(&[
                vec!["model".into(), model.into()],
                vec!["function".into(), function.into()],
                vec!["direction".into(), format!("{} ({source})", s.direction.as_str())],
                vec!["seed".into(), s.seed.to_string()],
                vec!["range".into(), format!("[{:e}, {:e}]", s.range.0, s.range.1)],
                vec!["samples".into(), s.samples.to_string()],
                vec!["passes".into(), s.passes.to_string()],
                vec!["equalities".into(), s.equalities.to_string()],
                vec!["failures".into(), s.failures.to_string()],
                vec!["worst pair".into(), format!("x = {}, y = {}", num(w.x), num(w.y))],
                vec!["worst verdict".into(), w.verdict.as_str().into()],
                vec![
                    "worst terms".into(),
                    format!(
                        "{} {} {} {}",
                        num(w.term_harmonic),
                        num(w.term_average),
                        num(w.term_arithmetic),
                        num(w.term_weighted)
                    ),
                ],
                vec!["worst violation".into(), num(w.max_violation)],
            ])
        }
    }
}

struct ChainArgs {
    samples: usize,
    direction: Option<DirectionArg>,
    function: Option<FunctionArg>,
    range: (f64, f64),
}

fn cmd_chain(common: &Common, args: ChainArgs) -> Outcome<String> {
    if args.samples == 0 {
        return usage("--samples must be at least 1");
    }
    let (lo, hi) = args.range;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return usage(format!("chain range needs 0 < range-min <= range-max, got [{lo}, {hi}]"));
    }
    let model = common.model()?;
    let function = pick_function(&model, args.function)?;
    let (direction, source) = match (args.direction, function) {
        (Some(DirectionArg::Convex), _) => (ChainDirection::ConvexChain, "requested"),
        (Some(DirectionArg::Concave), _) => (ChainDirection::ConcaveChain, "requested"),
        (None, FunctionArg::H) => (ChainDirection::ConcaveChain, "known"),
        (None, FunctionArg::Mills) => {
            let cert = certify_reciprocal(&model, &common.certify_config()?)?;
            if cert.verdict.is_concave_family() {
                (ChainDirection::ConcaveChain, "certificate")
            } else if cert.verdict.is_convex_family() {
                (ChainDirection::ConvexChain, "certificate")
            } else {
                (ChainDirection::ConvexChain, "default")
            }
        }
    };
    let f = |x: f64| eval_function(&model, function, x);
    let summary = random_chain_suite(&f, direction, args.samples, common.seed, (lo, hi))?;
    Ok(render_chain(
        &summary,
        &model.id().to_string(),
        function.name(),
        source,
        common.format(Format::Text),
    ))
}

fn cmd_cm(common: &Common, max_order: usize, step: Option<f64>, function: Option<FunctionArg>) -> Outcome<String> {
    if !(1..=CM_MAX_ORDER).contains(&max_order) {
        return usage(format!("max-order must be between 1 and {CM_MAX_ORDER}, got {max_order}"));
    }
    let step = match step {
        None => StepRule::Adaptive,
        Some(h) if h > 0.0 && h.is_finite() => StepRule::Fixed(h),
        Some(h) => return usage(format!("step must be > 0, got {h}")),
    };
    let model = common.model()?;
    let function = pick_function(&model, function)?;
    let g = common.grid((0.1, 20.0, 30))?;
    let grid = linear_grid(g.min, g.max, g.points)?;
    let report = complete_monotonicity_probe(&|x| eval_function(&model, function, x), &grid, max_order, step)?;
    Ok(match common.format(Format::Text) {
        Format::Json => {
            let mut v = to_json(&report);
            let obj = v.as_object_mut().expect("report is an object");
            obj.insert("model".into(), json!(model.id().to_string()));
            obj.insert("function".into(), json!(function.name()));
            pretty(&v)
        }
        Format::Csv => {
            let mut csv = Csv::new(&["order", "passed", "min_signed_difference", "first_failure_x"]);
            for o in &report.orders {
                csv.row(&[
                    o.order.to_string(),
                    o.passed.to_string(),
                    num(o.min_signed_difference),
                    o.first_failure.map(num).unwrap_or_default(),
                ]);
            }
            csv.finish()
        }
        Format::Text => {
            let mut rows = vec![vec![
                "order".to_string(),
                "result".into(),
                "min signed difference".into(),
                "first failure".into(),
            ]];
            rows.extend(report.orders.iter().map(|o| {
                vec![
                    o.order.to_string(),
                    if o.passed { "pass" } else { "fail" }.into(),
                    num(o.min_signed_difference),
                    o.first_failure.map(num).unwrap_or_else(|| "-".into()),
                ]
            }));
            format!(
                "model {} function {}: {}\n{}",
                model.id(),
                function.name(),
                if report.passed { "pass" } else { "fail" },
                table(&rows)
            )
        }
    })
}

fn dispatch(cmd: &Command) -> Outcome<(String, Option<PathBuf>)> {
    let (text, common) = match cmd {
        Command::Eval { common, x } => (cmd_eval(common, *x)?, common),
        Command::Certify { common } => (cmd_certify(common)?, common),
        Command::Sweep {
            common,
            alpha_min,
            alpha_max,
            alpha_step,
        } => (cmd_sweep(common, *alpha_min, *alpha_max, *alpha_step)?, common),
        Command::Chain {
            common,
            samples,
            direction,
            function,
            range_min,
            range_max,
        } => (
            cmd_chain(
                common,
                ChainArgs {
                    samples: *samples,
                    direction: *direction,
                    function: *function,
                    range: (*range_min, *range_max),
                },
            )?,
            common,
        ),
        Command::Cm {
            common,
            max_order,
            step,
            function,
        } => (cmd_cm(common, *max_order, *step, *function)?, common),
    };
    Ok((text, common.out.clone()))
}

/// Runs the CLI and returns the process exit code: 0 on completion
/// (whatever the verdict), 1 on usage errors, 2 on numerical or I/O failure.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    1
                }
            };
        }
    };
    let result = dispatch(&cli.command).and_then(|(text, out)| {
        match out {
            Some(path) => std::fs::write(&path, text.as_bytes())
                .map_err(|e| Failure::Numeric(format!("cannot write {}: {e}", path.display()))),
            None => stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::Numeric(format!("cannot write output: {e}"))),
        }
    });
    match result {
        Ok(()) => 0,
        Err(f) => {
            let msg = match &f {
                Failure::Usage(m) => format!("usage error: {m}"),
                Failure::Numeric(m) => format!("error: {m}"),
            };
            let _ = writeln!(stderr, "{msg}");
            f.code()
        }
    }
}
