//! Command-line definition and the subcommand runners.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sharpineq_core::constants::{gn_constant, logsob_constant, sobolev_constant, sobolev_l1_constant};
use sharpineq_core::profiles::{gn_extremal, normalize, perturb, sobolev_extremal, Bump};
use sharpineq_core::transport::{lemma21_check, radial_brenier};
use sharpineq_core::verifier::{
    characteristic_radius, random_profile, sample_rng, tensorization_limit, ProfileClass, SOUNDNESS_TOL, VERIFY_TOL,
};
use sharpineq_core::{
    minimize_quotient, Error, Objective, OptimizerOptions, Radial, RadialProfile, SharpConstant, Shape, TransportMap1D,
    WeightedDomain, DEFAULT_SEED,
};

use crate::grid::{parse_norms, parse_reals, parse_usizes, product, GridPoint};
use crate::output::{read_manifest, render, reproducible_part, Format, Record, RunManifest};
use crate::record;
use crate::suites::{self, Suite, VerifyConfig};

#[derive(Debug, Clone, Parser)]
#[command(name = "sharpineq", version, about = "Sharp weighted Sobolev, GN, log-Sobolev and isoperimetric constants")]
pub struct Cli {
    /// Quadrature tolerance.
    #[arg(long, global = true, default_value_t = VERIFY_TOL)]
    pub tol: f64,
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Monte Carlo sample count for oracle checks.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    pub mc_samples: usize,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Table of sharp constants over a parameter grid.
    Constants(ConstantsArgs),
    /// Run a verification suite; exit 0 iff every check passes.
    Verify(VerifyArgs),
    /// Minimize a quotient over spline profiles from a non-extremal start.
    Optimize(OptimizeArgs),
    /// Radial Brenier map between two densities and the transport inequality.
    Transport(TransportArgs),
    /// Long-format tables for plotting.
    Plotdata(PlotArgs),
    /// Re-run the command recorded in an output file and compare.
    #[serde(skip)]
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Constants(_) => "constants",
            Command::Verify(_) => "verify",
            Command::Optimize(_) => "optimize",
            Command::Transport(_) => "transport",
            Command::Plotdata(_) => "plotdata",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ConstantsArgs {
    /// Dimensions, e.g. `1..3`.
    #[arg(long, default_value = "2")]
    pub n: String,
    /// Weight exponents of the last coordinate.
    #[arg(long, default_value = "1")]
    pub a: String,
    /// Gradient exponents; `p = 1` gives the isoperimetric constant.
    #[arg(long, default_value = "2")]
    pub p: String,
    #[arg(long, default_value = "lq:2")]
    pub norm: String,
    /// Constant families.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "sobolev")]
    pub kind: Vec<Kind>,
    /// GN exponents used with `--kind gn`.
    #[arg(long, default_value = "1/2,2")]
    pub alpha: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Sobolev,
    Gn,
    Logsob,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Fewer random samples and a smaller optimizer budget.
    #[arg(long)]
    pub quick: bool,
    /// GN exponents replacing the default ones.
    #[arg(long)]
    pub alpha: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PointArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value = "1")]
    pub a: String,
    #[arg(long, default_value = "2")]
    pub p: String,
    #[arg(long, default_value = "lq:2")]
    pub norm: String,
}

impl PointArgs {
    fn point(&self) -> Result<GridPoint, Failure> {
        let a = sharpineq_core::parse_real(&self.a).map_err(usage)?;
        let p = sharpineq_core::parse_real(&self.p).map_err(usage)?;
        let norm = parse_norms(&self.norm).map_err(usage)?;
        if norm.len() != 1 {
            return Err(Failure::Usage("expected a single norm".into()));
        }
        Ok(GridPoint { n: self.n, a, p, norm: norm[0].clone() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Sobolev,
    Gn,
    Logsob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    Gaussian,
    Power,
    SmoothedIndicator,
    Extremal,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, value_enum, default_value_t = ObjectiveKind::Sobolev)]
    pub objective: ObjectiveKind,
    #[arg(long, default_value = "2")]
    pub alpha: String,
    #[arg(long, value_enum, default_value_t = InitKind::Gaussian)]
    pub init: InitKind,
    /// Objective evaluations per restart.
    #[arg(long, default_value_t = 5000)]
    pub budget: usize,
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TransportArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value = "1")]
    pub a: String,
    /// Source density: `random:K`, `gaussian:RATE` or `power:EXPONENT`.
    #[arg(long, default_value = "random:0")]
    pub source: String,
    #[arg(long, default_value = "random:1")]
    pub target: String,
    /// Exponents γ of the transport inequality; `critical` is `1 − 1/n_a`.
    #[arg(long, default_value = "critical,1.2,2")]
    pub gamma: String,
    /// Number of `(r, ψ(r))` samples, equally spaced in source mass.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PlotKind {
    ExtremalProfiles,
    DeficitVsPerturbation,
    TensorizationConvergence,
    TransportMap,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PlotArgs {
    #[arg(value_enum)]
    pub kind: PlotKind,
    #[command(flatten)]
    pub point: PointArgs,
    /// GN exponents drawn next to the Sobolev extremal.
    #[arg(long, default_value = "2")]
    pub alpha: String,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    /// Product sizes for the tensorization sweep.
    #[arg(long, default_value = "1..10,20,50,100,200,500,1000")]
    pub k: String,
    #[arg(long, default_value = "random:0")]
    pub source: String,
    #[arg(long, default_value = "random:1")]
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    /// A JSON or CSV file written by this tool.
    pub file: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Bad arguments; exit code 2.
    Usage(String),
    /// The run could not complete; exit code 1.
    Runtime(String),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn runtime(e: Error) -> Failure {
    Failure::Runtime(e.to_string())
}

/// Records produced by a subcommand and whether every check passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub records: Vec<Record>,
    pub ok: bool,
}

/// The complete rendered output of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub ok: bool,
}

impl Cli {
    pub fn config(&self) -> Settings {
        Settings { tol: self.tol, seed: self.seed, mc_samples: self.mc_samples }
    }
}

/// Global numerical settings recorded in every manifest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub tol: f64,
    pub seed: u64,
    pub mc_samples: usize,
}

/// Run a subcommand other than `replay` and render its output.
pub fn execute(command: &Command, settings: Settings, format: Format) -> Result<Report, Failure> {
    if !(settings.tol > 0.0 && settings.tol < 1.0) {
        return Err(Failure::Usage(format!("--tol must lie in (0, 1), got {}", settings.tol)));
    }
    let start = Instant::now();
    let outcome = match command {
        Command::Constants(a) => constants(a)?,
        Command::Verify(a) => verify(a, settings)?,
        Command::Optimize(a) => optimize(a, settings)?,
        Command::Transport(a) => transport(a, settings)?,
        Command::Plotdata(a) => plotdata(a, settings)?,
        Command::Replay(_) => return Err(Failure::Usage("replay cannot be nested".into())),
    };
    let manifest = RunManifest {
        command: command.name().into(),
        params: serde_json::to_value(command).expect("arguments are plain data"),
        seed: settings.seed,
        tol: settings.tol,
        mc_samples: settings.mc_samples,
        version: env!("CARGO_PKG_VERSION").into(),
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok(Report { text: render(&manifest, &outcome.records, format), ok: outcome.ok })
}

/// Re-run the manifest embedded in `text`; returns the fresh output and
/// whether its reproducible part matches.
pub fn replay(text: &str) -> Result<(Report, bool), Failure> {
    let manifest = read_manifest(text).map_err(Failure::Usage)?;
    let command: Command = serde_json::from_value(manifest.params.clone()).map_err(|e| Failure::Usage(format!("manifest parameters do not parse: {e}")))?;
    let format = if text.starts_with("# manifest: ") { Format::Csv } else { Format::Json };
    let settings = Settings { tol: manifest.tol, seed: manifest.seed, mc_samples: manifest.mc_samples };
    let report = execute(&command, settings, format)?;
    let same = reproducible_part(&report.text) == reproducible_part(text);
    Ok((report, same))
}

fn constant_row(g: &GridPoint, kind: Kind, alpha: Option<f64>, c: Result<SharpConstant, Error>) -> Record {
    let mut r = record! {
        "kind" => format!("{kind:?}").to_lowercase(),
        "n" => g.n, "a" => g.a, "p" => g.p, "norm" => g.norm.clone(), "alpha" => alpha,
    };
    let (n_a, status, message, fields) = match c {
        Ok(c) => (
            Some(c.domain.n_a()),
            "ok",
            Value::Null,
            Some((serde_json::to_value(c.kind).expect("plain enum"), c.theta, c.log_value, c.value())),
        ),
        Err(e @ Error::Parameter(_)) => (None, "parameter-error", Value::from(e.to_string()), None),
        Err(e) => (None, "error", Value::from(e.to_string()), None),
    };
    let n_a = n_a.or_else(|| g.domain().ok().map(|d| d.n_a()));
    r.insert("n_a".into(), serde_json::json!(n_a));
    let (constant, theta, log_value, value) = match fields {
        Some((k, t, l, v)) => (k, serde_json::json!(t), serde_json::json!(l), serde_json::json!(v)),
        None => (Value::Null, Value::Null, Value::Null, Value::Null),
    };
    r.insert("constant".into(), constant);
    r.insert("theta".into(), theta);
    r.insert("log_value".into(), log_value);
    r.insert("value".into(), value);
    r.insert("status".into(), Value::from(status));
    r.insert("message".into(), message);
    r
}

fn constants(args: &ConstantsArgs) -> Result<Outcome, Failure> {
    let grid = product(
        &parse_usizes(&args.n).map_err(usage)?,
        &parse_reals(&args.a).map_err(usage)?,
        &parse_reals(&args.p).map_err(usage)?,
        &parse_norms(&args.norm).map_err(usage)?,
    );
    let alphas = parse_reals(&args.alpha).map_err(usage)?;
    let mut kinds = args.kind.clone();
    kinds.sort_unstable();
    kinds.dedup();
    let mut tasks: Vec<(GridPoint, Kind, Option<f64>)> = Vec::new();
    for g in &grid {
        for &kind in &kinds {
            match kind {
                Kind::Gn => tasks.extend(alphas.iter().map(|&al| (g.clone(), kind, Some(al)))),
                _ => tasks.push((g.clone(), kind, None)),
            }
        }
    }
    use rayon::prelude::*;
    let records = tasks
        .par_iter()
        .map(|(g, kind, alpha)| {
            let c = g.domain().and_then(|dom| match (kind, alpha) {
                (Kind::Sobolev, _) if g.p == 1.0 => sobolev_l1_constant(&dom),
                (Kind::Sobolev, _) => sobolev_constant(&dom, g.p),
                (Kind::Gn, Some(al)) => gn_constant(&dom, g.p, *al),
                (Kind::Gn, None) => unreachable!("GN rows carry α"),
                (Kind::Logsob, _) => logsob_constant(&dom, g.p),
            });
            constant_row(g, *kind, *alpha, c)
        })
        .collect();
    Ok(Outcome { records, ok: true })
}

fn verify(args: &VerifyArgs, s: Settings) -> Result<Outcome, Failure> {
    let alphas = args.alpha.as_deref().map(parse_reals).transpose().map_err(usage)?;
    let cfg = VerifyConfig { quick: args.quick, tol: s.tol, seed: s.seed, mc_samples: s.mc_samples, alphas };
    let records = suites::run(args.suite, &cfg).map_err(usage)?;
    let ok = suites::all_pass(&records);
    Ok(Outcome { records, ok })
}

fn objective(kind: ObjectiveKind, p: f64, alpha: &str) -> Result<Objective, Failure> {
    Ok(match kind {
        ObjectiveKind::Sobolev => Objective::Sobolev { p },
        ObjectiveKind::Logsob => Objective::LogSobolev { p },
        ObjectiveKind::Gn => {
            let alpha = sharpineq_core::parse_real(alpha).map_err(usage)?;
            if !(alpha > 0.0 && alpha != 1.0) {
                return Err(Failure::Usage(format!("GN needs α > 0 and α ≠ 1, got α = {alpha}")));
            }
            Objective::Gn { p, alpha }
        }
    })
}

fn initial_profile(init: InitKind, dom: &WeightedDomain, obj: &Objective) -> Result<RadialProfile, Error> {
    match init {
        InitKind::Gaussian => Ok(suites::optimizer_starts().swap_remove(0)),
        InitKind::Power => Ok(suites::optimizer_starts().swap_remove(1)),
        InitKind::SmoothedIndicator => RadialProfile::spline(
            RadialProfile::log_knots(0.05, 0.9, sharpineq_core::optimizer::KNOTS),
            vec![0.0; sharpineq_core::optimizer::KNOTS],
            sharpineq_core::profiles::Tail::Compact { radius: 1.0, kappa: 1.0 },
        ),
        InitKind::Extremal => match *obj {
            Objective::Sobolev { p } => sobolev_extremal(dom, p),
            Objective::Gn { p, alpha } => gn_extremal(dom, p, alpha),
            Objective::LogSobolev { p } => sharpineq_core::profiles::logsob_extremal(dom, p, 1.0),
        },
    }
}

fn optimize(args: &OptimizeArgs, s: Settings) -> Result<Outcome, Failure> {
    let g = args.point.point()?;
    let dom = g.domain().map_err(usage)?;
    let obj = objective(args.objective, g.p, &args.alpha)?;
    let init = initial_profile(args.init, &dom, &obj).map_err(usage)?;
    let opts = OptimizerOptions { budget: args.budget, restarts: args.restarts, seed: s.seed, tol: s.tol };
    let run = minimize_quotient(&dom, obj, &init, &opts).map_err(|e| match e {
        Error::Parameter(_) => usage(e),
        e => runtime(e),
    })?;
    let sound = run.is_sound(1e-6);
    let alpha = match obj {
        Objective::Gn { alpha, .. } => Some(alpha),
        _ => None,
    };
    let rec = record! {
        "objective" => format!("{:?}", args.objective).to_lowercase(),
        "n" => g.n, "a" => g.a, "p" => g.p, "norm" => g.norm, "alpha" => alpha,
        "init" => serde_json::to_value(args.init).expect("plain enum"),
        "initial_value" => run.initial_value,
        "best_value" => run.best_value,
        "sharp_value" => run.sharp_value,
        "relative_gap" => run.relative_gap(),
        "iterations" => run.iterations,
        "converged" => run.converged,
        "restart_values" => run.restart_values.iter().map(|v| crate::output::format_real(*v)).collect::<Vec<_>>().join(";"),
        "status" => if sound { "sound" } else { "below-sharp-value" },
    };
    Ok(Outcome { records: vec![rec], ok: sound })
}

/// `random:K`, `gaussian:RATE` or `power:EXPONENT`, normalized to unit mass.
fn density(spec: &str, dom: &WeightedDomain, seed: u64, tol: f64) -> Result<RadialProfile, Failure> {
    let (name, arg) = spec.split_once(':').ok_or_else(|| Failure::Usage(format!("bad density `{spec}`")))?;
    let f = match name {
        "random" => {
            let k: u64 = arg.parse().map_err(|_| Failure::Usage(format!("bad density index `{arg}`")))?;
            let class = ProfileClass { n_a: dom.n_a(), p: 2.0, min_exponent: 1.0, compact: true };
            random_profile(&mut sample_rng(seed, (1 << 40) | k), class).map_err(runtime)?
        }
        "gaussian" => {
            let rate = sharpineq_core::parse_real(arg).map_err(usage)?;
            if rate <= 0.0 {
                return Err(Failure::Usage("Gaussian rate must be positive".into()));
            }
            RadialProfile::new(Shape::Gaussian { rate, q: 2.0 })
        }
        "power" => {
            let exponent = sharpineq_core::parse_real(arg).map_err(usage)?;
            if !(2.0 * exponent > dom.n_a()) {
                return Err(Failure::Usage(format!("(1 + r²)^(−{exponent}) has infinite mass for n_a = {}", dom.n_a())));
            }
            RadialProfile::new(Shape::Power { shift: 1.0, q: 2.0, exponent })
        }
        _ => return Err(Failure::Usage(format!("unknown density `{name}`"))),
    };
    normalize(dom, &f, 1.0, tol.max(1e-13)).map_err(runtime)
}

fn brenier(n: usize, a: &str, source: &str, target: &str, s: Settings) -> Result<(WeightedDomain, TransportMap1D), Failure> {
    let a = sharpineq_core::parse_real(a).map_err(usage)?;
    let dom = WeightedDomain::half_space(n, a, sharpineq_core::NormSpec::euclidean(n)).map_err(usage)?;
    let f = density(source, &dom, s.seed, s.tol)?;
    let g = density(target, &dom, s.seed, s.tol)?;
    let map = radial_brenier(&dom, &f, &g).map_err(runtime)?;
    Ok((dom, map))
}

fn map_samples(map: &TransportMap1D, samples: usize) -> Result<Vec<Record>, Failure> {
    (0..samples)
        .map(|i| {
            let m = (i as f64 + 0.5) / samples as f64;
            let r = map.source_quantile(m).map_err(runtime)?;
            Ok(record! { "kind" => "psi", "mass" => m, "r" => r, "psi" => map.psi(r) })
        })
        .collect()
}

fn transport(args: &TransportArgs, s: Settings) -> Result<Outcome, Failure> {
    let (dom, map) = brenier(args.n, &args.a, &args.source, &args.target, s)?;
    let mut gammas = Vec::new();
    for item in args.gamma.split(',').map(str::trim) {
        gammas.push(if item == "critical" {
            1.0 - 1.0 / dom.n_a()
        } else {
            sharpineq_core::parse_real(item).map_err(usage)?
        });
    }
    let mut records = map_samples(&map, args.samples)?;
    let mut ok = true;
    for gamma in gammas {
        let r = lemma21_check(&dom, gamma, &map, suites::LEMMA_TOL).map_err(|e| match e {
            Error::Parameter(_) => usage(e),
            e => runtime(e),
        })?;
        let pass = r.gap >= -SOUNDNESS_TOL;
        ok &= pass;
        records.push(record! {
            "kind" => "lemma", "gamma" => gamma, "lhs" => r.lhs, "rhs" => r.rhs, "gap" => r.gap,
            "amgm" => r.amgm, "boundary" => r.boundary, "residual" => r.residual,
            "status" => if pass { "pass" } else { "fail" },
        });
    }
    Ok(Outcome { records, ok })
}

fn plotdata(args: &PlotArgs, s: Settings) -> Result<Outcome, Failure> {
    if args.samples < 2 {
        return Err(Failure::Usage("--samples must be at least 2".into()));
    }
    let records = match args.kind {
        PlotKind::ExtremalProfiles => extremal_profiles(args)?,
        PlotKind::DeficitVsPerturbation => deficit_curve(args, s)?,
        PlotKind::TensorizationConvergence => {
            let g = args.point.point()?;
            let dom = g.domain().map_err(usage)?;
            let (ks, dropped): (Vec<usize>, Vec<usize>) =
                parse_usizes(&args.k).map_err(usage)?.into_iter().partition(|&k| k as f64 * dom.n_a() > g.p);
            if !dropped.is_empty() {
                eprintln!("skipping k = {dropped:?}: the product needs k·n_a > p");
            }
            tensorization_limit(&dom, g.p, &ks)
                .map_err(usage)?
                .into_iter()
                .map(|t| record! { "k" => t.k, "c_k" => t.c_k, "limit" => t.limit, "rel_gap" => t.rel_gap })
                .collect()
        }
        PlotKind::TransportMap => {
            let (_, map) = brenier(args.point.n, &args.point.a, &args.source, &args.target, s)?;
            map_samples(&map, args.samples)?
                .into_iter()
                .map(|mut r| {
                    r.shift_remove("kind");
                    r.shift_remove("mass");
                    r
                })
                .collect()
        }
    };
    Ok(Outcome { records, ok: true })
}

fn extremal_profiles(args: &PlotArgs) -> Result<Vec<Record>, Failure> {
    let g = args.point.point()?;
    let dom = g.domain().map_err(usage)?;
    let mut families = vec![("sobolev", None, sobolev_extremal(&dom, g.p).map_err(usage)?)];
    for alpha in parse_reals(&args.alpha).map_err(usage)? {
        families.push(("gn", Some(alpha), gn_extremal(&dom, g.p, alpha).map_err(usage)?));
    }
    let mut out = Vec::new();
    for (family, alpha, h) in families {
        let reach = (5.0 * characteristic_radius(&h)).min(h.support_radius());
        for i in 0..args.samples {
            let r = reach * i as f64 / (args.samples - 1) as f64;
            out.push(record! { "family" => family, "alpha" => alpha, "r" => r, "h" => h.value(r) });
        }
    }
    Ok(out)
}

/// Sobolev deficit of `h + ε h(r₀) bump(r₀, r₀)` for `ε ∈ [−0.3, 0.3]`.
fn deficit_curve(args: &PlotArgs, s: Settings) -> Result<Vec<Record>, Failure> {
    let g = args.point.point()?;
    let dom = g.domain().map_err(usage)?;
    let h = sobolev_extremal(&dom, g.p).map_err(usage)?;
    let obj = Objective::Sobolev { p: g.p };
    let k = obj.normalization_exponent(&dom);
    let r0 = characteristic_radius(&h);
    let mut out = Vec::new();
    for i in 0..args.samples {
        let eps = -0.3 + 0.6 * i as f64 / (args.samples - 1) as f64;
        let bump = Bump { center: r0, width: r0, amplitude: eps * h.value(r0) };
        let deficit = match perturb(&dom, &h, bump, k, s.tol) {
            Ok(f) => Some(obj.evaluate(&dom, &f, s.tol).map_err(runtime)?.deficit),
            Err(Error::Negativity(_)) => None,
            Err(e) => return Err(runtime(e)),
        };
        out.push(record! { "epsilon" => eps, "deficit" => deficit });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("sharpineq").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn constants_mark_parameter_errors_per_row() {
        let cli = parse(&["constants", "--n", "2", "--a", "1", "--p", "2,3"]);
        let report = execute(&cli.command, cli.config(), Format::Json).unwrap();
        assert!(report.ok);
        let doc: Value = serde_json::from_str(&report.text).unwrap();
        let recs = doc["records"].as_array().unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0]["status"], "ok");
        assert_eq!(recs[1]["status"], "parameter-error");
    }

    #[test]
    fn manifest_replays_identically() {
        let cli = parse(&["--format", "csv", "constants", "--n", "1..2", "--kind", "sobolev,gn"]);
        let report = execute(&cli.command, cli.config(), cli.format).unwrap();
        let (again, same) = replay(&report.text).unwrap();
        assert!(same, "{}\n{}", report.text, again.text);
    }

    #[test]
    fn usage_errors() {
        let cli = parse(&["verify", "gn", "--alpha", "1"]);
        assert!(matches!(execute(&cli.command, cli.config(), Format::Json), Err(Failure::Usage(_))));
        let cli = parse(&["constants", "--n", "x"]);
        assert!(matches!(execute(&cli.command, cli.config(), Format::Json), Err(Failure::Usage(_))));
    }
}
