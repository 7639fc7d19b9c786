//! `fracbvp`: survival curves, samplers, Laplace inversions and the check
//! battery from the command line.
//!
//! Exit codes: 0 success, 1 a check failed, 2 usage error, 3 numerical failure.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use fracbvp::bm::sample_joint;
use fracbvp::fbvp::{catalog, lifetime_sample, Route, CATALOG};
use fracbvp::harness::checks::sub_seed;
use fracbvp::harness::{
    all_pass, parse_csv, render_svg, run_solve, run_suite, write_csv, write_reports, SolveConfig, Suite, SvgAxes,
};
use fracbvp::laplace::{InverterConfig, Method};
use fracbvp::par::{sample, Exec, Welford};
use fracbvp::randomtimes::{sample_inverse_stable, sample_lbar, sample_stable, LBAR_GRID};
use fracbvp::{Error, Params};

#[derive(Parser, Debug)]
#[command(
    name = "fracbvp",
    version,
    about = "Heat equation with a Caputo-type dynamic boundary condition"
)]
struct Cli {
    /// JSON document with the same keys as the flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed of every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for output files; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the data-parallel routes.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Survival probability u(t, x) on a grid by one or all routes.
    Solve(SolveArgs),
    /// Draws from the samplers.
    Mc(McArgs),
    /// Numerical inversion of a catalog transform.
    Laplace(LaplaceArgs),
    /// Runs the check battery of a module.
    Verify(VerifyArgs),
    /// Renders a solve CSV as SVG survival curves.
    Plot(PlotArgs),
}

/// A list `0.5,1,2` or an evenly spaced range `lo:hi:n`.
#[derive(Debug, Clone, Serialize)]
#[serde(transparent)]
struct Grid(Vec<f64>);

fn parse_grid(s: &str) -> Result<Grid, String> {
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}"));
    let parts: Vec<&str> = s.split(':').collect();
    let values = match parts.as_slice() {
        [lo, hi, n] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            let n: usize = n.trim().parse().map_err(|e| format!("'{n}': {e}"))?;
            match n {
                0 => return Err("a range needs at least one point".into()),
                1 => vec![lo],
                _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
            }
        }
        [list] => list.split(',').map(num).collect::<Result<_, _>>()?,
        _ => return Err(format!("'{s}' is neither a list nor lo:hi:n")),
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(format!("'{s}' has a non-finite entry"));
    }
    Ok(Grid(values))
}

#[derive(Args, Debug, Serialize)]
struct ParamArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    eta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RouteArg {
    Quadrature,
    Laplace,
    Mc,
    All,
}

impl RouteArg {
    fn routes(self) -> Vec<Route> {
        match self {
            RouteArg::Quadrature => vec![Route::Quadrature],
            RouteArg::Laplace => vec![Route::Laplace],
            RouteArg::Mc => vec![Route::MonteCarlo],
            RouteArg::All => Route::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MethodArg {
    Talbot,
    Stehfest,
}

#[derive(Args, Debug, Serialize)]
struct SolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    params: ParamArgs,
    #[arg(long, value_parser = parse_grid)]
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<Grid>,
    #[arg(long, value_parser = parse_grid)]
    #[serde(skip_serializing_if = "Option::is_none")]
    x: Option<Grid>,
    #[arg(long, value_enum)]
    #[serde(skip)]
    route: Option<RouteArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    mc_draws: Option<usize>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<MethodArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    stehfest_order: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum McKind {
    /// (X_t, γ_t) of reflected Brownian motion from x.
    Joint,
    /// Lifetime ζ from x.
    Lifetime,
    /// Stable subordinator H_t.
    Stable,
    /// Inverse stable subordinator L_t.
    InverseStable,
    /// Inverse of the subordinator with drift, L̄_t.
    Lbar,
}

#[derive(Args, Debug, Serialize)]
struct McArgs {
    #[arg(value_enum)]
    kind: McKind,
    #[command(flatten)]
    #[serde(flatten)]
    params: ParamArgs,
    #[arg(long, value_parser = parse_grid)]
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<Grid>,
    #[arg(long, value_parser = parse_grid)]
    #[serde(skip_serializing_if = "Option::is_none")]
    x: Option<Grid>,
    /// Draws per grid point.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    /// Mean and standard error instead of raw draws.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    summary: bool,
}

#[derive(Args, Debug, Serialize)]
struct LaplaceArgs {
    /// Catalog transform.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    expr: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    params: ParamArgs,
    #[arg(long, value_parser = parse_grid)]
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<Grid>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<MethodArg>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    stehfest_order: Option<usize>,
    /// The frozen second variable of the transform.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    at: Option<f64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// specfun, laplace, randomtimes, bm, fbvp or all.
    suite: String,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// CSV written by `solve`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "u(t, x)")]
    title: String,
}

enum Failure {
    Usage(String),
    Numerical(String),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

struct Context {
    config: Map<String, Value>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

impl Context {
    /// Config file values overlaid with the given flags.
    fn merged<T: Serialize, S: for<'de> Deserialize<'de>>(&self, flags: &T) -> Result<S, Failure> {
        let mut doc = self.config.clone();
        if let Value::Object(m) = serde_json::to_value(flags).map_err(|e| Failure::Usage(e.to_string()))? {
            doc.extend(m);
        }
        if let Some(s) = self.seed {
            doc.insert("seed".into(), s.into());
        }
        serde_json::from_value(Value::Object(doc)).map_err(|e| Failure::Usage(format!("configuration: {e}")))
    }

    fn sink(&self, name: &str) -> Result<Box<dyn Write>, Failure> {
        Ok(match &self.out {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                Box::new(BufWriter::new(File::create(dir.join(name))?))
            }
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn load_config(path: Option<&Path>) -> Result<Map<String, Value>, Failure> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(Failure::Usage(format!("{}: expected a JSON object", path.display()))),
        Err(e) => Err(Failure::Usage(format!("{}: {e}", path.display()))),
    }
}

fn configure_threads(n: Option<usize>) -> Outcome {
    let Some(n) = n else { return Ok(()) };
    if n == 0 {
        return Err(Failure::Usage("--threads must be positive".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    eprintln!("warning: built without the parallel feature; --threads {n} ignored");
    Ok(())
}

fn solve_cmd(ctx: &Context, args: &SolveArgs) -> Outcome {
    let mut cfg: SolveConfig = ctx.merged(args)?;
    if let Some(r) = args.route {
        cfg.routes = r.routes();
    }
    let records = run_solve(&cfg, Exec::default())?;
    for r in records.iter().filter(|r| !r.warning.is_empty()) {
        eprintln!("warning: t={} x={}: {}", r.t, r.x, r.warning);
    }
    let mut w = ctx.sink("solve.csv")?;
    write_csv(&records, &mut w)?;
    w.flush()?;
    Ok(())
}

fn default_one() -> f64 {
    1.0
}
fn default_seed() -> u64 {
    42
}
fn default_draws() -> usize {
    10_000
}
fn default_t() -> Vec<f64> {
    vec![1.0]
}
fn default_x() -> Vec<f64> {
    vec![0.0]
}
fn default_order() -> usize {
    16
}

#[derive(Deserialize)]
struct ParamSettings {
    alpha: Option<f64>,
    #[serde(default = "default_one")]
    eta: f64,
    #[serde(default)]
    sigma: f64,
    #[serde(default = "default_one")]
    c: f64,
}

impl ParamSettings {
    fn alpha(&self) -> Result<f64, Failure> {
        self.alpha.ok_or_else(|| Failure::Usage("--alpha is required".into()))
    }

    fn params(&self) -> Result<Params, Failure> {
        Ok(Params::new(self.alpha()?, self.eta, self.sigma, self.c)?)
    }
}

#[derive(Deserialize)]
struct McSettings {
    #[serde(flatten)]
    params: ParamSettings,
    #[serde(default = "default_t")]
    t: Vec<f64>,
    #[serde(default = "default_x")]
    x: Vec<f64>,
    #[serde(default = "default_draws")]
    n: usize,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default)]
    summary: bool,
}

fn collect<T>(draws: Vec<fracbvp::Result<T>>) -> Result<Vec<T>, Failure> {
    Ok(draws.into_iter().collect::<fracbvp::Result<Vec<T>>>()?)
}

fn moments(values: impl Iterator<Item = f64>) -> Welford {
    let mut acc = Welford::new();
    values.for_each(|v| acc.push(v));
    acc
}

fn mc_cmd(ctx: &Context, args: &McArgs) -> Outcome {
    let s: McSettings = ctx.merged(args)?;
    if s.n == 0 {
        return Err(Failure::Usage("--n must be positive".into()));
    }
    let exec = Exec::default();
    let kind = args.kind;
    let name = kind
        .to_possible_value()
        .map(|v| v.get_name().to_string())
        .unwrap_or_default();
    // Stable kinds do not depend on x, the lifetime not on t.
    let ts: Vec<f64> = if kind == McKind::Lifetime {
        vec![f64::NAN]
    } else {
        s.t.clone()
    };
    let xs: Vec<f64> = match kind {
        McKind::Joint | McKind::Lifetime => s.x.clone(),
        _ => vec![f64::NAN],
    };
    let params = match kind {
        McKind::Lifetime | McKind::Lbar => Some(s.params.params()?),
        McKind::Stable | McKind::InverseStable => Some(Params::new(s.params.alpha()?, 1.0, 0.0, 1.0)?),
        McKind::Joint => None,
    };
    let field = |v: f64| if v.is_nan() { String::new() } else { v.to_string() };
    let mut w = csv::Writer::from_writer(ctx.sink(&format!("mc-{name}.csv"))?);
    if s.summary {
        w.write_record(["t", "x", "quantity", "mean", "std_error", "draws"])?;
    } else if kind == McKind::Joint {
        w.write_record(["t", "x", "position", "local_time", "hit"])?;
    } else {
        w.write_record(["t", "x", "value"])?;
    }
    for &t in &ts {
        for &x in &xs {
            let seed = sub_seed(s.seed, &format!("{name}/{}/{}", field(t), field(x)));
            if kind == McKind::Joint {
                let draws = collect(sample(s.n, seed, exec, |rng| sample_joint(t, x, rng)))?;
                if s.summary {
                    let rows = [
                        ("position", moments(draws.iter().map(|d| d.position))),
                        ("local_time", moments(draws.iter().map(|d| d.local_time))),
                        ("hit", moments(draws.iter().map(|d| f64::from(u8::from(d.hit))))),
                    ];
                    for (q, m) in rows {
                        w.write_record([
                            field(t),
                            field(x),
                            q.into(),
                            m.mean().to_string(),
                            m.std_error().to_string(),
                            m.count().to_string(),
                        ])?;
                    }
                } else {
                    for d in &draws {
                        w.write_record([
                            field(t),
                            field(x),
                            d.position.to_string(),
                            d.local_time.to_string(),
                            d.hit.to_string(),
                        ])?;
                    }
                }
                continue;
            }
            let draws = match kind {
                McKind::Stable => {
                    let a = params.expect("alpha is parsed for the stable kinds").alpha;
                    collect(sample(s.n, seed, exec, |rng| sample_stable(a, t, rng)))?
                }
                McKind::InverseStable => {
                    let a = params.expect("alpha is parsed for the stable kinds").alpha;
                    collect(sample(s.n, seed, exec, |rng| sample_inverse_stable(a, t, rng)))?
                }
                McKind::Lbar => {
                    let p = params.expect("params are parsed for lbar");
                    collect(sample(s.n, seed, exec, |rng| sample_lbar(&p, t, rng, LBAR_GRID)))?
                }
                McKind::Lifetime => {
                    let p = params.expect("params are parsed for the lifetime");
                    collect(sample(s.n, seed, exec, |rng| lifetime_sample(&p, x, rng)))?
                }
                McKind::Joint => unreachable!(),
            };
            if s.summary {
                let finite = moments(draws.iter().copied().filter(|v| v.is_finite()));
                w.write_record([
                    field(t),
                    field(x),
                    "value".into(),
                    finite.mean().to_string(),
                    finite.std_error().to_string(),
                    finite.count().to_string(),
                ])?;
                if kind == McKind::Lifetime {
                    let inf = moments(draws.iter().map(|v| f64::from(u8::from(v.is_infinite()))));
                    w.write_record([
                        field(t),
                        field(x),
                        "infinite".into(),
                        inf.mean().to_string(),
                        inf.std_error().to_string(),
                        inf.count().to_string(),
                    ])?;
                }
            } else {
                for d in &draws {
                    w.write_record([field(t), field(x), d.to_string()])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Deserialize)]
struct LaplaceSettings {
    expr: Option<String>,
    #[serde(flatten)]
    params: ParamSettings,
    #[serde(default = "default_t")]
    t: Vec<f64>,
    #[serde(default)]
    method: Method,
    #[serde(default = "default_order")]
    stehfest_order: usize,
    #[serde(default = "default_one")]
    at: f64,
}

fn laplace_cmd(ctx: &Context, args: &LaplaceArgs) -> Outcome {
    let s: LaplaceSettings = ctx.merged(args)?;
    let expr = s
        .expr
        .ok_or_else(|| Failure::Usage(format!("--expr is required; one of {}", CATALOG.join(", "))))?;
    let entry = catalog(&expr, s.params.params()?, s.at)?;
    let cfg = InverterConfig {
        method: s.method,
        stehfest_order: s.stehfest_order,
        ..InverterConfig::default()
    };
    cfg.validate()?;
    let mut w = csv::Writer::from_writer(ctx.sink(&format!("laplace-{expr}.csv"))?);
    w.write_record(["t", "value"])?;
    for &t in &s.t {
        w.write_record([t.to_string(), entry.invert_at(t, &cfg)?.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn verify_cmd(ctx: &Context, args: &VerifyArgs) -> Outcome {
    let suite: Suite = args.suite.parse()?;
    let seed = match (ctx.seed, ctx.config.get("seed")) {
        (Some(s), _) => s,
        (None, Some(v)) => v
            .as_u64()
            .ok_or_else(|| Failure::Usage("configuration: seed must be an unsigned integer".into()))?,
        (None, None) => default_seed(),
    };
    let reports = run_suite(suite, seed);
    let mut w = ctx.sink(&format!("verify-{suite}.csv"))?;
    write_reports(&reports, &mut w)?;
    w.flush()?;
    let failed: Vec<_> = reports.iter().filter(|r| !r.pass).collect();
    for r in &failed {
        eprintln!(
            "FAIL {}: {} (measured {:e}, tolerance {:e})",
            r.suite, r.name, r.measured, r.tolerance
        );
    }
    eprintln!("{} checks, {} failed", reports.len(), failed.len());
    if all_pass(&reports) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn plot_cmd(ctx: &Context, args: &PlotArgs) -> Outcome {
    let records = parse_csv(&args.input)?;
    let axes = SvgAxes {
        title: args.title.clone(),
        ..SvgAxes::default()
    };
    let svg = render_svg(&records, &axes)?;
    let mut w = ctx.sink("survival.svg")?;
    w.write_all(svg.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    configure_threads(cli.threads)?;
    let ctx = Context {
        config: load_config(cli.config.as_deref())?,
        seed: cli.seed,
        out: cli.out,
    };
    match &cli.command {
        Command::Solve(a) => solve_cmd(&ctx, a),
        Command::Mc(a) => mc_cmd(&ctx, a),
        Command::Laplace(a) => laplace_cmd(&ctx, a),
        Command::Verify(a) => verify_cmd(&ctx, a),
        Command::Plot(a) => plot_cmd(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}
