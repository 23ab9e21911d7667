//! Verification suites. Each suite turns a default parameter grid into a
//! list of checks; a check is one record with a metric, its bound and a
//! status (`pass`, `fail` or `error`).

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sharpineq_core::constants::{gn_constant, gn_theta, sobolev_constant, sobolev_l1_constant};
use sharpineq_core::norms::conjugate;
use sharpineq_core::profiles::{
    gn_alpha_max, gn_extremal, indicator_extremal, logsob_extremal, normalize, perturb, sobolev_extremal, Tail,
};
use sharpineq_core::quadrature::monte_carlo_sigma;
use sharpineq_core::transport::{lemma21_check, radial_brenier};
use sharpineq_core::verifier::{
    dilation_check, dimension_reduction_check, duality_gap_gn, duality_gap_sobolev, gn_quotients, logsob_deficit,
    random_bump, random_profile, sample_rng, sobolev_quotient, tensorization_limit, theta_uniqueness,
    translation_check, ProfileClass, VERIFY_TOL,
};
use sharpineq_core::{
    minimize_quotient, Error, NormSpec, Objective, OptimizerOptions, Radial, RadialProfile, Result, Shape, WeightedDomain,
};

use crate::grid::{product, GridPoint};
use crate::output::Record;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Sobolev,
    Gn,
    Logsob,
    Duality,
    Dimred,
    Tensor,
    Transport,
    All,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Sobolev => "sobolev",
            Suite::Gn => "gn",
            Suite::Logsob => "logsob",
            Suite::Duality => "duality",
            Suite::Dimred => "dimred",
            Suite::Tensor => "tensor",
            Suite::Transport => "transport",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

const EACH: [Suite; 7] =
    [Suite::Sobolev, Suite::Gn, Suite::Logsob, Suite::Duality, Suite::Dimred, Suite::Tensor, Suite::Transport];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub quick: bool,
    /// Quadrature tolerance.
    pub tol: f64,
    pub seed: u64,
    pub mc_samples: usize,
    /// Replaces the default GN exponents.
    pub alphas: Option<Vec<f64>>,
}

impl VerifyConfig {
    pub fn new(quick: bool) -> Self {
        VerifyConfig {
            quick,
            tol: VERIFY_TOL,
            seed: sharpineq_core::DEFAULT_SEED,
            mc_samples: 1_000_000,
            alphas: None,
        }
    }

    fn count(&self, full: usize, quick: usize) -> usize {
        if self.quick {
            quick
        } else {
            full
        }
    }
}

pub const EQUALITY_TOL: f64 = 1e-8;
pub const GN_EQUALITY_TOL: f64 = 1e-7;
pub const SOUNDNESS: f64 = 1e-8;
pub const THETA_ONE_TOL: f64 = 1e-10;
pub const DILATION_TOL: f64 = 1e-10;
pub const TRANSLATION_TOL: f64 = 1e-6;
pub const THETA_TOL: f64 = 1e-10;
pub const PERIMETER_TOL: f64 = 1e-6;
pub const OPTIMIZER_GAP: f64 = 5e-3;
pub const OPTIMIZER_SOUNDNESS: f64 = 1e-6;
pub const DUALITY_TOL: f64 = 1e-7;
pub const MU_GAP: f64 = 1e-4;
pub const ASSEMBLY_TOL: f64 = 1e-10;
pub const TENSOR_200: f64 = 1e-2;
pub const TENSOR_1000: f64 = 2e-3;
pub const MC_SIGMAS: f64 = 3.0;

const DEFAULT_ALPHAS: [f64; 3] = [0.5, 0.9, 2.0];

/// The Sobolev/GN grid: `n ∈ {1,2,3}`, `a ∈ {0, 0.5, 1, 2.5}`,
/// `p ∈ {1.5, 2, 3}` with `p < n_a`, norms `ℓ²` and `ℓ⁴`.
pub fn default_grid() -> Vec<GridPoint> {
    product(&[1, 2, 3], &[0.0, 0.5, 1.0, 2.5], &[1.5, 2.0, 3.0], &["lq:2".into(), "lq:4".into()])
        .into_iter()
        .filter(|g| g.p < g.n as f64 + g.a)
        .collect()
}

#[derive(Debug, Clone, Copy)]
enum Bound {
    AtMost(f64),
    AtLeast(f64),
}

/// One check under construction.
struct Row(Record);

impl Row {
    fn new(suite: Suite, case: &str) -> Self {
        let mut r = Record::new();
        r.insert("suite".into(), Value::from(suite.to_string()));
        r.insert("case".into(), Value::from(case));
        Row(r)
    }

    fn with(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.0.insert(key.into(), v.into());
        self
    }

    fn point(self, g: &GridPoint) -> Self {
        self.with("n", g.n).with("a", g.a).with("p", g.p).with("norm", g.norm.clone())
    }

    fn check(self, metric: &str, value: f64, bound: Bound) -> Record {
        let (text, ok) = match bound {
            Bound::AtMost(b) => (format!("<= {b:e}"), value <= b),
            Bound::AtLeast(b) => (format!(">= {b:e}"), value >= b),
        };
        let mut r = self.with("metric", metric).with("value", value).with("bound", text).0;
        r.insert("status".into(), Value::from(if ok { "pass" } else { "fail" }));
        r
    }

    fn flag(self, metric: &str, ok: bool) -> Record {
        let mut r = self.with("metric", metric).with("value", ok).with("bound", "true").0;
        r.insert("status".into(), Value::from(if ok { "pass" } else { "fail" }));
        r
    }

    fn error(self, metric: &str, e: &Error) -> Record {
        let mut r = self.with("metric", metric).0;
        r.insert("status".into(), Value::from("error"));
        r.insert("message".into(), Value::from(e.to_string()));
        r
    }

    fn result(self, metric: &str, value: Result<f64>, bound: Bound) -> Record {
        match value {
            Ok(v) => self.check(metric, v, bound),
            Err(e) => self.error(metric, &e),
        }
    }
}

type Task<'a> = Box<dyn Fn() -> Vec<Record> + Send + Sync + 'a>;

fn run_tasks(tasks: Vec<Task<'_>>) -> Vec<Record> {
    tasks.par_iter().map(|t| t()).collect::<Vec<_>>().into_iter().flatten().collect()
}

pub fn run(suite: Suite, cfg: &VerifyConfig) -> Result<Vec<Record>> {
    if let Some(alphas) = &cfg.alphas {
        if let Some(a) = alphas.iter().find(|&&a| !(a > 0.0 && a != 1.0 && a.is_finite())) {
            return Err(Error::Parameter(format!("GN needs α > 0 and α ≠ 1, got α = {a}")));
        }
    }
    Ok(match suite {
        Suite::All => EACH.iter().flat_map(|&s| run_one(s, cfg)).collect(),
        s => run_one(s, cfg),
    })
}

fn run_one(suite: Suite, cfg: &VerifyConfig) -> Vec<Record> {
    match suite {
        Suite::Sobolev => sobolev(cfg),
        Suite::Gn => gn(cfg),
        Suite::Logsob => logsob(cfg),
        Suite::Duality => duality(cfg),
        Suite::Dimred => dimred(cfg),
        Suite::Tensor => tensor(cfg),
        Suite::Transport => transport(cfg),
        Suite::All => unreachable!("expanded by run"),
    }
}

pub fn all_pass(records: &[Record]) -> bool {
    records.iter().all(|r| r.get("status").and_then(Value::as_str) == Some("pass"))
}

fn euclidean(n: usize, a: f64) -> Result<WeightedDomain> {
    WeightedDomain::half_space(n, a, NormSpec::euclidean(n))
}

fn point_seed(point: usize, sample: usize) -> u64 {
    ((point as u64) << 20) | sample as u64
}

/// Smallest deficit over seeded bump perturbations of `h`; perturbations that
/// would make the profile negative are skipped.
fn perturbation_row(
    row: Row,
    dom: &WeightedDomain,
    objective: Objective,
    h: &RadialProfile,
    samples: usize,
    stream: usize,
    cfg: &VerifyConfig,
) -> Record {
    let k = objective.normalization_exponent(dom);
    let mut worst = f64::INFINITY;
    let mut skipped = 0usize;
    for i in 0..samples {
        let mut rng = sample_rng(cfg.seed, point_seed(stream, i));
        let bump = random_bump(&mut rng, h);
        let f = match perturb(dom, h, bump, k, cfg.tol) {
            Ok(f) => f,
            Err(Error::Negativity(_)) => {
                skipped += 1;
                continue;
            }
            Err(e) => return row.error("min_deficit", &e),
        };
        match objective.evaluate(dom, &f, cfg.tol) {
            Ok(r) => worst = worst.min(r.deficit),
            Err(e) => return row.error("min_deficit", &e),
        }
    }
    row.with("samples", samples - skipped).with("skipped", skipped).check("min_deficit", worst, Bound::AtLeast(-SOUNDNESS))
}

/// Equality of the Sobolev quotient on the extremal over the default grid.
pub fn sobolev_equality(cfg: &VerifyConfig) -> Vec<Record> {
    let tasks: Vec<Task> = default_grid()
        .into_iter()
        .map(|g| -> Task {
            Box::new(move || {
                let d = g.domain().and_then(|dom| {
                    let h = sobolev_extremal(&dom, g.p)?;
                    sobolev_quotient(&dom, g.p, &h, cfg.tol)
                });
                vec![Row::new(Suite::Sobolev, "extremal").point(&g).result(
                    "abs_deficit",
                    d.map(|r| r.deficit.abs()),
                    Bound::AtMost(EQUALITY_TOL),
                )]
            })
        })
        .collect();
    run_tasks(tasks)
}

fn sobolev(cfg: &VerifyConfig) -> Vec<Record> {
    let s = Suite::Sobolev;
    let grid = default_grid();
    let samples = cfg.count(100, 10);
    let mut tasks: Vec<Task> = vec![Box::new(move || sobolev_equality(cfg))];
    for (idx, g) in grid.iter().enumerate() {
        tasks.push(Box::new(move || {
            let row = || Row::new(s, "perturbation").point(g);
            let dom = match g.domain() {
                Ok(d) => d,
                Err(e) => return vec![row().error("min_deficit", &e)],
            };
            let h = match sobolev_extremal(&dom, g.p) {
                Ok(h) => h,
                Err(e) => return vec![row().error("min_deficit", &e)],
            };
            let obj = Objective::Sobolev { p: g.p };
            vec![
                perturbation_row(Row::new(s, "perturbation").point(g), &dom, obj, &h, samples, idx, cfg),
                Row::new(s, "dilation").point(g).result(
                    "max_rel_change",
                    dilation_check(&dom, obj, &h, &[0.5, 2.0, 3.7], cfg.tol),
                    Bound::AtMost(DILATION_TOL),
                ),
            ]
        }));
    }
    for (n, a) in [(2, 0.0), (2, 1.0), (3, 2.0)] {
        tasks.push(Box::new(move || isoperimetry(n, a, cfg)));
    }
    let shifts: Vec<(usize, f64, f64, &str, Vec<f64>)> = if cfg.quick {
        vec![(2, 1.0, 2.0, "lq:2", vec![0.7, 0.0])]
    } else {
        // three nested half-line integrals of algebraic tails take minutes in 3-D
        vec![(2, 1.0, 2.0, "lq:2", vec![0.7, 0.0]), (2, 0.5, 1.5, "lq:4", vec![-0.4, 0.0])]
    };
    for (n, a, p, norm, shift) in shifts {
        tasks.push(Box::new(move || {
            let g = GridPoint { n, a, p, norm: norm.into() };
            let row = Row::new(s, "translation").point(&g).with("shift", shift.clone());
            let rel = g.domain().and_then(|dom| {
                let h = sobolev_extremal(&dom, p)?;
                translation_check(&dom, p, &h, &shift, 1e-9).map(|r| r.rel_change().abs())
            });
            vec![row.result("rel_change", rel, Bound::AtMost(TRANSLATION_TOL))]
        }));
    }
    let mc_samples = if cfg.quick { (cfg.mc_samples / 10).max(1000) } else { cfg.mc_samples };
    for case in 0..10 {
        tasks.push(Box::new(move || vec![monte_carlo_case(case, mc_samples, cfg)]));
    }
    let starts = cfg.count(3, 1);
    let budget = cfg.count(5000, 1500);
    for (i, init) in optimizer_starts().into_iter().take(starts).enumerate() {
        tasks.push(Box::new(move || {
            let g = GridPoint { n: 2, a: 1.0, p: 2.0, norm: "lq:2".into() };
            vec![optimizer_row(s, &g, Objective::Sobolev { p: 2.0 }, &init, i, budget, cfg)]
        }));
    }
    run_tasks(tasks)
}

fn isoperimetry(n: usize, a: f64, cfg: &VerifyConfig) -> Vec<Record> {
    let s = Suite::Sobolev;
    let row = |case: &str| Row::new(s, case).with("n", n).with("a", a).with("p", 1.0).with("norm", "lq:2");
    let dom = match euclidean(n, a) {
        Ok(d) => d,
        Err(e) => return vec![row("isoperimetry").error("perimeter_rel_error", &e)],
    };
    let perimeter = dom.ball_perimeter();
    let by_construction = (perimeter / (dom.n_a() * dom.ball_measure()) - 1.0).abs();
    let surface = dom.surface_perimeter_quadrature(1e-10).map(|q| (q / perimeter - 1.0).abs());
    let indicator = sobolev_quotient(&dom, 1.0, &indicator_extremal(&dom), cfg.tol).map(|r| r.deficit.abs());
    let ratio = sobolev_l1_constant(&dom).map(|c| c.value());
    vec![
        row("perimeter").check("identity_rel_error", by_construction, Bound::AtMost(1e-14)),
        row("perimeter").result("surface_rel_error", surface, Bound::AtMost(PERIMETER_TOL)),
        row("indicator").result("abs_deficit", indicator, Bound::AtMost(EQUALITY_TOL)),
        row("indicator").result("constant_positive", ratio, Bound::AtLeast(f64::MIN_POSITIVE)),
    ]
}

const MC_CASES: [(usize, f64, &str); 5] =
    [(1, 0.5, "lq:2"), (2, 1.0, "lq:2"), (2, 0.0, "lq:4"), (3, 2.5, "lq:2"), (3, 0.5, "lq:4")];

/// `∫ f(‖z‖) σ` by radial quadrature against the Monte Carlo oracle.
fn monte_carlo_case(case: usize, samples: usize, cfg: &VerifyConfig) -> Record {
    let (n, a, norm) = MC_CASES[case % MC_CASES.len()];
    let row = Row::new(Suite::Sobolev, "monte-carlo").with("n", n).with("a", a).with("norm", norm).with("index", case);
    let z = (|| {
        let dom = GridPoint { n, a, p: 1.0, norm: norm.into() }.domain()?;
        let class = ProfileClass { n_a: dom.n_a(), p: 1.0, min_exponent: 1.0, compact: true };
        let f = random_profile(&mut sample_rng(cfg.seed, point_seed(9000, case)), class)?;
        let exact = dom.radial_integral(&f, 0.0, cfg.tol)?;
        let norm = dom.norm().clone();
        let integrand = |x: &[f64]| norm.norm(x).map_or(f64::NAN, |r| f.value(r));
        let mc = monte_carlo_sigma(&dom, &integrand, samples, cfg.seed.wrapping_add(case as u64))?;
        Ok::<_, Error>((mc.estimate - exact).abs() / mc.std_error)
    })();
    row.with("samples", samples).result("std_errors", z, Bound::AtMost(MC_SIGMAS))
}

/// Non-extremal starting profiles for the optimizer.
pub fn optimizer_starts() -> Vec<RadialProfile> {
    vec![
        RadialProfile::new(Shape::Gaussian { rate: 1.0, q: 2.0 }),
        RadialProfile::new(Shape::Power { shift: 1.0, q: 2.0, exponent: 2.5 }),
        RadialProfile::new(Shape::Gaussian { rate: 0.5, q: 1.5 }),
    ]
}

fn smoothed_indicator() -> Result<RadialProfile> {
    RadialProfile::spline(
        RadialProfile::log_knots(0.05, 0.9, sharpineq_core::optimizer::KNOTS),
        vec![0.0; sharpineq_core::optimizer::KNOTS],
        Tail::Compact { radius: 1.0, kappa: 1.0 },
    )
}

fn optimizer_row(
    s: Suite,
    g: &GridPoint,
    objective: Objective,
    init: &RadialProfile,
    start: usize,
    budget: usize,
    cfg: &VerifyConfig,
) -> Record {
    let mut row = Row::new(s, "optimizer").point(g).with("start", start).with("budget", budget);
    if let Objective::Gn { alpha, .. } = objective {
        row = row.with("alpha", alpha);
    }
    let run = g.domain().and_then(|dom| {
        let opts = OptimizerOptions { budget, restarts: 1, seed: cfg.seed, tol: cfg.tol };
        minimize_quotient(&dom, objective, init, &opts)
    });
    match run {
        Ok(run) => {
            let gap = run.relative_gap();
            let row = row.with("initial_gap", run.initial_value * run.sharp_value - 1.0);
            if !run.is_sound(OPTIMIZER_SOUNDNESS) {
                return row.check("relative_gap", gap, Bound::AtLeast(-OPTIMIZER_SOUNDNESS));
            }
            row.check("relative_gap", gap, Bound::AtMost(OPTIMIZER_GAP))
        }
        Err(e) => row.error("relative_gap", &e),
    }
}

fn gn_alphas(cfg: &VerifyConfig, dom: &WeightedDomain, p: f64) -> Vec<(f64, bool)> {
    let crit = gn_alpha_max(dom, p);
    match &cfg.alphas {
        Some(list) => list.iter().map(|&a| (a, (a - crit).abs() <= 1e-12 * crit)).collect(),
        None => DEFAULT_ALPHAS
            .iter()
            .filter(|&&a| a < 1.0 || a < crit)
            .map(|&a| (a, false))
            .chain(std::iter::once((crit, true)))
            .collect(),
    }
}

fn gn(cfg: &VerifyConfig) -> Vec<Record> {
    let s = Suite::Gn;
    let samples = cfg.count(25, 5);
    let mut tasks: Vec<Task> = Vec::new();
    for (idx, g) in default_grid().into_iter().enumerate() {
        tasks.push(Box::new(move || {
            let dom = match g.domain() {
                Ok(d) => d,
                Err(e) => return vec![Row::new(s, "extremal").point(&g).error("abs_deficit", &e)],
            };
            let mut out = Vec::new();
            for (j, (alpha, critical)) in gn_alphas(cfg, &dom, g.p).into_iter().enumerate() {
                let row = |case: &str| Row::new(s, case).point(&g).with("alpha", alpha);
                let h = match gn_extremal(&dom, g.p, alpha) {
                    Ok(h) => h,
                    Err(e) => {
                        out.push(row("extremal").error("abs_deficit", &e));
                        continue;
                    }
                };
                let obj = Objective::Gn { p: g.p, alpha };
                out.push(row("extremal").result(
                    "abs_deficit",
                    gn_quotients(&dom, g.p, alpha, &h, cfg.tol).map(|r| r.deficit.abs()),
                    Bound::AtMost(GN_EQUALITY_TOL),
                ));
                if critical {
                    let coincide = gn_constant(&dom, g.p, alpha)
                        .and_then(|c| Ok((c.value() / sobolev_constant(&dom, g.p)?.value() - 1.0).abs()));
                    out.push(row("theta-one").result("rel_diff_from_sobolev", coincide, Bound::AtMost(THETA_ONE_TOL)));
                }
                out.push(perturbation_row(row("perturbation"), &dom, obj, &h, samples, idx * 8 + j + 4096, cfg));
                out.push(row("dilation").result(
                    "max_rel_change",
                    dilation_check(&dom, obj, &h, &[0.5, 2.0, 3.7], cfg.tol),
                    Bound::AtMost(DILATION_TOL),
                ));
                let theta = gn_theta(dom.n_a(), g.p, alpha);
                let (big, small) = (alpha * g.p, alpha * g.p - alpha + 1.0);
                let (lhs, other) = if alpha > 1.0 { (big, small) } else { (small, big) };
                let solved = theta_uniqueness(&dom, g.p, lhs, other, theta, &h, cfg.tol)
                    .map(|t| (t.theta_solved - t.theta_formula).abs());
                out.push(row("theta").with("theta", theta).result("abs_error", solved, Bound::AtMost(THETA_TOL)));
            }
            out
        }));
    }
    if cfg.alphas.is_none() {
        let budget = cfg.count(5000, 1500);
        tasks.push(Box::new(move || {
            let g = GridPoint { n: 2, a: 1.0, p: 2.0, norm: "lq:2".into() };
            match smoothed_indicator() {
                Ok(init) => vec![optimizer_row(s, &g, Objective::Gn { p: 2.0, alpha: 0.5 }, &init, 0, budget, cfg)],
                Err(e) => vec![Row::new(s, "optimizer").point(&g).error("relative_gap", &e)],
            }
        }));
        if !cfg.quick {
            tasks.push(Box::new(move || {
                let g = GridPoint { n: 2, a: 1.0, p: 2.0, norm: "lq:2".into() };
                let init = &optimizer_starts()[0];
                vec![optimizer_row(s, &g, Objective::Gn { p: 2.0, alpha: 2.0 }, init, 0, budget, cfg)]
            }));
        }
    }
    run_tasks(tasks)
}

const LOGSOB_DOMAINS: [(usize, f64); 2] = [(1, 0.0), (2, 1.0)];

fn logsob(cfg: &VerifyConfig) -> Vec<Record> {
    let s = Suite::Logsob;
    let samples = cfg.count(50, 10);
    let mut tasks: Vec<Task> = Vec::new();
    for (di, (n, a)) in LOGSOB_DOMAINS.into_iter().enumerate() {
        for (pi, p) in [1.5, 2.0, 3.0].into_iter().enumerate() {
            tasks.push(Box::new(move || {
                let g = GridPoint { n, a, p, norm: "lq:2".into() };
                let row = |case: &str| Row::new(s, case).point(&g);
                let dom = match euclidean(n, a) {
                    Ok(d) => d,
                    Err(e) => return vec![row("extremal").error("abs_deficit", &e)],
                };
                let mut out = Vec::new();
                for scale in [1.0, 2.5] {
                    let d = logsob_extremal(&dom, p, scale).and_then(|h| logsob_deficit(&dom, p, &h, cfg.tol));
                    out.push(row("extremal").with("scale", scale).result(
                        "abs_deficit",
                        d.map(|r| r.deficit.abs()),
                        Bound::AtMost(GN_EQUALITY_TOL),
                    ));
                }
                let class = ProfileClass { n_a: dom.n_a(), p, min_exponent: p, compact: false };
                let worst = (0..samples).try_fold(f64::INFINITY, |w, i| {
                    let mut rng = sample_rng(cfg.seed, point_seed(20000 + di * 8 + pi, i));
                    let f = random_profile(&mut rng, class)?;
                    Ok::<_, Error>(w.min(logsob_deficit(&dom, p, &f, cfg.tol)?.deficit))
                });
                out.push(row("random").with("samples", samples).result("min_deficit", worst, Bound::AtLeast(-SOUNDNESS)));
                out
            }));
        }
        tasks.push(Box::new(move || {
            let dom = euclidean(n, a);
            [0.5, 1.0, 2.0]
                .into_iter()
                .map(|scale| {
                    let d = dom.clone().and_then(|dom| {
                        let h = logsob_extremal(&dom, 1.0, scale)?;
                        logsob_deficit(&dom, 1.0, &h, cfg.tol)
                    });
                    Row::new(s, "indicator").with("n", n).with("a", a).with("p", 1.0).with("scale", scale).result(
                        "abs_deficit",
                        d.map(|r| r.deficit.abs()),
                        Bound::AtMost(GN_EQUALITY_TOL),
                    )
                })
                .collect()
        }));
    }
    run_tasks(tasks)
}

/// Points where random duality pairs are drawn.
const DUALITY_RANDOM: [(usize, f64, f64, &str); 4] =
    [(1, 2.5, 2.0, "lq:2"), (2, 1.0, 2.0, "lq:2"), (3, 0.5, 1.5, "lq:4"), (3, 2.5, 3.0, "lq:2")];

fn duality(cfg: &VerifyConfig) -> Vec<Record> {
    let s = Suite::Duality;
    let samples = cfg.count(50, 10);
    let mut tasks: Vec<Task> = Vec::new();
    for g in default_grid() {
        tasks.push(Box::new(move || {
            let row = |case: &str| Row::new(s, case).point(&g);
            let dom = match g.domain() {
                Ok(d) => d,
                Err(e) => return vec![row("sobolev-extremal").error("abs_gap", &e)],
            };
            let mut out = vec![row("sobolev-extremal").result(
                "abs_gap",
                sobolev_extremal(&dom, g.p)
                    .and_then(|h| duality_gap_sobolev(&dom, g.p, &h, &h, cfg.tol))
                    .map(|r| r.gap.abs()),
                Bound::AtMost(DUALITY_TOL),
            )];
            let q = conjugate(g.p);
            let mu_p = q.powf(1.0 / q);
            let crit = gn_alpha_max(&dom, g.p);
            for alpha in [0.5, 2.0].into_iter().filter(|&a| a < 1.0 || a < crit) {
                let row = |case: &str| row(case).with("alpha", alpha);
                let h = match gn_extremal(&dom, g.p, alpha) {
                    Ok(h) => h,
                    Err(e) => {
                        out.push(row("gn-extremal").error("abs_gap", &e));
                        continue;
                    }
                };
                let gap = |mu: f64| duality_gap_gn(&dom, g.p, alpha, &h, &h, mu, cfg.tol).map(|r| r.gap);
                out.push(row("gn-extremal").with("mu", mu_p).result("abs_gap", gap(mu_p).map(f64::abs), Bound::AtMost(DUALITY_TOL)));
                for factor in [0.5, 1.5] {
                    out.push(row("gn-mu-off").with("mu", factor * mu_p).result("gap", gap(factor * mu_p), Bound::AtLeast(MU_GAP)));
                }
            }
            out
        }));
    }
    for (idx, (n, a, p, norm)) in DUALITY_RANDOM.into_iter().enumerate() {
        tasks.push(Box::new(move || {
            let g = GridPoint { n, a, p, norm: norm.into() };
            let row = |case: &str| Row::new(s, case).point(&g).with("samples", samples);
            let dom = match g.domain() {
                Ok(d) => d,
                Err(e) => return vec![row("sobolev-random").error("min_gap", &e)],
            };
            let class = ProfileClass { n_a: dom.n_a(), p, min_exponent: 1.0, compact: true };
            let pair = |stream: u64, k: f64| -> Result<(RadialProfile, RadialProfile)> {
                let mut rng = sample_rng(cfg.seed, stream);
                let f = normalize(&dom, &random_profile(&mut rng, class)?, k, cfg.tol)?;
                let h = normalize(&dom, &random_profile(&mut rng, class)?, k, cfg.tol)?;
                Ok((f, h))
            };
            let p_star = dom.n_a() * p / (dom.n_a() - p);
            let sob = (0..samples).try_fold(f64::INFINITY, |w, i| {
                let (f, h) = pair(point_seed(30000 + idx, i), p_star)?;
                Ok::<_, Error>(w.min(duality_gap_sobolev(&dom, p, &f, &h, cfg.tol)?.gap))
            });
            let mut out = vec![row("sobolev-random").result("min_gap", sob, Bound::AtLeast(-SOUNDNESS))];
            let q = conjugate(p);
            let mu_p = q.powf(1.0 / q);
            let crit = gn_alpha_max(&dom, p);
            for alpha in [0.5, 2.0].into_iter().filter(|&a| a < 1.0 || a < crit) {
                let worst = (0..samples).try_fold(f64::INFINITY, |w, i| {
                    let (f, h) = pair(point_seed(31000 + idx * 4 + (alpha > 1.0) as usize, i), alpha * p)?;
                    Ok::<_, Error>(w.min(duality_gap_gn(&dom, p, alpha, &f, &h, mu_p, cfg.tol)?.gap))
                });
                out.push(row("gn-random").with("alpha", alpha).result("min_gap", worst, Bound::AtLeast(-SOUNDNESS)));
            }
            out
        }));
    }
    run_tasks(tasks)
}

/// `(n, p, a)` points for dimension reduction; `(1, 2.5, 0)` is branch (ii).
pub const DIMRED_POINTS: [(usize, f64, f64); 4] = [(1, 2.0, 0.0), (2, 1.5, 1.0), (3, 2.0, 0.0), (1, 2.5, 0.0)];

fn dimred(cfg: &VerifyConfig) -> Vec<Record> {
    let s = Suite::Dimred;
    let tasks: Vec<Task> = DIMRED_POINTS
        .into_iter()
        .map(|(n, p, a)| -> Task {
            Box::new(move || {
                let row = |case: &str| Row::new(s, case).with("n", n).with("p", p).with("a", a).with("norm", "lq:2");
                match dimension_reduction_check(n, p, a, &NormSpec::euclidean(n), cfg.tol) {
                    Ok(r) => {
                        let row = |case: &str| {
                            row(case).with("alpha", r.alpha).with("theta", r.theta).with("branch", format!("{:?}", r.branch))
                        };
                        let mut out = vec![
                            row("assembly").check("rel_error", r.assembly_error, Bound::AtMost(ASSEMBLY_TOL)),
                            row("extremal").check("abs_deficit", r.extremal.deficit.abs(), Bound::AtMost(EQUALITY_TOL)),
                        ];
                        if (n, p, a) == (3, 2.0, 0.0) {
                            out.push(row("classical-range").flag("in_range", r.in_classical_range == Some(true)));
                        }
                        out
                    }
                    Err(e) => vec![row("assembly").error("rel_error", &e)],
                }
            })
        })
        .collect();
    run_tasks(tasks)
}

const TENSOR_BASES: [(usize, f64); 3] = [(1, 0.0), (2, 1.0), (3, 0.5)];

fn tensor(_cfg: &VerifyConfig) -> Vec<Record> {
    let s = Suite::Tensor;
    let mut out = Vec::new();
    for (n, a) in TENSOR_BASES {
        for p in [1.5, 2.0, 3.0] {
            let row = |k: usize| Row::new(s, "limit").with("n", n).with("a", a).with("p", p).with("norm", "lq:2").with("k", k);
            match euclidean(n, a).and_then(|dom| tensorization_limit(&dom, p, &[200, 1000])) {
                Ok(points) => {
                    for (t, bound) in points.iter().zip([TENSOR_200, TENSOR_1000]) {
                        out.push(row(t.k).with("c_k", t.c_k).with("limit", t.limit).check("rel_gap", t.rel_gap, Bound::AtMost(bound)));
                    }
                }
                Err(e) => out.push(row(200).error("rel_gap", &e)),
            }
        }
    }
    out
}

const TRANSPORT_DOMAINS: [(usize, f64); 2] = [(2, 1.0), (1, 0.5)];
pub const LEMMA_TOL: f64 = 1e-10;

fn transport(cfg: &VerifyConfig) -> Vec<Record> {
    let s = Suite::Transport;
    let pairs = cfg.count(50, 6);
    let mut tasks: Vec<Task> = Vec::new();
    for (di, (n, a)) in TRANSPORT_DOMAINS.into_iter().enumerate() {
        tasks.push(Box::new(move || {
            let row = Row::new(s, "identity").with("n", n).with("a", a).with("norm", "lq:2");
            let gap = euclidean(n, a).and_then(|dom| {
                let class = ProfileClass { n_a: dom.n_a(), p: 2.0, min_exponent: 1.0, compact: true };
                let f = normalize(&dom, &random_profile(&mut sample_rng(cfg.seed, point_seed(40000 + di, 0)), class)?, 1.0, 1e-13)?;
                let map = radial_brenier(&dom, &f, &f)?;
                Ok((lemma21_check(&dom, 1.0 - 1.0 / dom.n_a(), &map, LEMMA_TOL)?.gap.abs(), 1.0 - 1.0 / dom.n_a()))
            });
            match gap {
                Ok((g, gamma)) => vec![row.with("gamma", gamma).check("abs_gap", g, Bound::AtMost(DUALITY_TOL))],
                Err(e) => vec![row.error("abs_gap", &e)],
            }
        }));
    }
    for i in 0..pairs {
        let (n, a) = TRANSPORT_DOMAINS[i % TRANSPORT_DOMAINS.len()];
        tasks.push(Box::new(move || transport_pair(n, a, i, cfg)));
    }
    run_tasks(tasks)
}

fn transport_pair(n: usize, a: f64, index: usize, cfg: &VerifyConfig) -> Vec<Record> {
    let row = || Row::new(Suite::Transport, "random-pair").with("n", n).with("a", a).with("norm", "lq:2").with("index", index);
    let map = (|| {
        let dom = euclidean(n, a)?;
        let class = ProfileClass { n_a: dom.n_a(), p: 2.0, min_exponent: 1.0, compact: true };
        let mut rng = sample_rng(cfg.seed, point_seed(41000, index));
        let f = normalize(&dom, &random_profile(&mut rng, class)?, 1.0, 1e-13)?;
        let g = normalize(&dom, &random_profile(&mut rng, class)?, 1.0, 1e-13)?;
        Ok::<_, Error>((radial_brenier(&dom, &f, &g)?, dom))
    })();
    let (map, dom) = match map {
        Ok(m) => m,
        Err(e) => return vec![row().error("gap", &e)],
    };
    [1.0 - 1.0 / dom.n_a(), 1.2, 2.0]
        .into_iter()
        .map(|gamma| match lemma21_check(&dom, gamma, &map, LEMMA_TOL) {
            Ok(r) => row().with("gamma", gamma).with("residual", r.residual).check("gap", r.gap, Bound::AtLeast(-SOUNDNESS)),
            Err(e) => row().with("gamma", gamma).error("gap", &e),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_the_valid_points_only() {
        let g = default_grid();
        assert_eq!(g.len(), 46);
        assert!(g.iter().all(|p| p.p < p.n as f64 + p.a));
    }

    #[test]
    fn alpha_one_is_refused() {
        let cfg = VerifyConfig { alphas: Some(vec![1.0]), ..VerifyConfig::new(true) };
        assert!(matches!(run(Suite::Gn, &cfg), Err(Error::Parameter(_))));
    }

    #[test]
    fn dimred_and_tensor_suites() {
        let cfg = VerifyConfig::new(true);
        let recs = run(Suite::Tensor, &cfg).unwrap();
        assert_eq!(recs.len(), 18);
        assert!(all_pass(&recs), "{recs:?}");
        let recs = run(Suite::Dimred, &cfg).unwrap();
        assert!(recs.iter().any(|r| r["case"] == "classical-range"));
    }
}
