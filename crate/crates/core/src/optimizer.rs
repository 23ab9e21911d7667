//! Derivative-free minimization of the Sobolev, GN and log-Sobolev
//! functionals over a spline family with frozen log-spaced knots.
//!
//! A candidate is `KNOTS` values of `ln f`, searched through the log-log
//! slopes between them, plus one tail parameter: the decay
//! exponent of a power tail, or `κ` of a compact tail `(1 − (r/R)²)₊^κ` with
//! `R` taken from the initial profile. Knots sit at fixed multiples of the
//! initial profile's half-value radius, so dilating the start dilates the
//! whole search and cannot change the values it sees.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::WeightedDomain;
use crate::error::{Error, Result};
use crate::profiles::{normalize, Radial, RadialProfile, Shape, Tail};
use crate::quadrature::DEFAULT_SEED;
use crate::verifier::{characteristic_radius, sample_rng, Objective};

pub const KNOTS: usize = 12;
/// Knot span around the half-value radius `r₀` of a power-tailed start.
const SPAN: (f64, f64) = (0.03, 30.0);
/// Knot span as fractions of the support radius of a compact start.
const COMPACT_SPAN: (f64, f64) = (0.03, 0.9);
/// Extra decay required beyond the integrability threshold.
const DECAY_MARGIN: f64 = 1e-3;
const FTOL: f64 = 1e-10;
const XTOL: f64 = 1e-7;
const STEP: f64 = 0.25;
/// Start slopes are clamped to at most this much steeper than the tail.
const STEEPEST: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerOptions {
    /// Objective evaluations allowed per restart.
    pub budget: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Quadrature tolerance of each evaluation.
    pub tol: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions { budget: 5000, restarts: 3, seed: DEFAULT_SEED, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationRun {
    pub objective: Objective,
    pub initial: RadialProfile,
    pub initial_value: f64,
    /// Best profile found, normalized in the objective's natural Lebesgue norm.
    pub best: RadialProfile,
    /// `‖∇f‖-side / ‖f‖-side` for homogeneous objectives, the deficit for
    /// log-Sobolev.
    pub best_value: f64,
    /// Infimum of the objective: `1/C` for homogeneous kinds, 0 for log-Sobolev.
    pub sharp_value: f64,
    /// Objective evaluations over all restarts.
    pub iterations: usize,
    /// Every restart met the simplex tolerance within its budget.
    pub converged: bool,
    pub seed: u64,
    pub restart_values: Vec<f64>,
}

impl OptimizationRun {
    /// `best/sharp − 1`, or the deficit itself for log-Sobolev.
    pub fn relative_gap(&self) -> f64 {
        match self.objective {
            Objective::LogSobolev { .. } => self.best_value,
            _ => self.best_value / self.sharp_value - 1.0,
        }
    }

    /// The soundness invariant: never below the sharp value beyond `tol`.
    pub fn is_sound(&self, tol: f64) -> bool {
        self.relative_gap() >= -tol
    }
}

/// Objective value of `f` and the infimum it is compared with.
fn objective_value(dom: &WeightedDomain, objective: &Objective, f: &RadialProfile, tol: f64) -> Result<(f64, f64)> {
    let report = objective.evaluate(dom, f, tol)?;
    Ok(match objective {
        Objective::LogSobolev { .. } => (report.deficit, 0.0),
        _ => ((1.0 + report.deficit) / report.sharp_value, 1.0 / report.sharp_value),
    })
}

/// The frozen part of the search space.
#[derive(Debug, Clone)]
struct Family {
    knots: Vec<f64>,
    compact: Option<f64>,
    min_decay: f64,
    level: f64,
}

impl Family {
    /// Knot values from the search vector: log-log slopes over the knot
    /// cells followed by the tail parameter. `ln f` at the first knot is
    /// pinned to the start's value; every objective is either invariant under
    /// scaling or renormalizes, so that direction carries no information.
    fn profile(&self, x: &[f64]) -> Result<RadialProfile> {
        let (slopes, t) = x.split_at(KNOTS - 1);
        let mut values = Vec::with_capacity(KNOTS);
        values.push(self.level);
        for (i, s) in slopes.iter().enumerate() {
            values.push(values[i] + s * (self.knots[i + 1] / self.knots[i]).ln());
        }
        let tail = match self.compact {
            Some(radius) => Tail::Compact { radius, kappa: t[0].exp() },
            None => Tail::Power { decay: self.min_decay + t[0].exp() },
        };
        RadialProfile::spline(self.knots.clone(), values, tail)
    }

    /// Start vector read off `init` (the compact cut divided out), with
    /// slopes no steeper than `STEEPEST` so that fast-decaying starts do not
    /// put the outer knots out of the simplex's reach.
    fn start(init: &RadialProfile, knots: Vec<f64>, compact: Option<f64>, min_decay: f64) -> (Family, Vec<f64>) {
        let ln_f = |r: f64| match compact {
            Some(radius) => (init.value(r) / (1.0 - (r / radius).powi(2))).ln(),
            None => init.value(r).ln(),
        };
        let steepest = -(STEEPEST + min_decay);
        let mut x: Vec<f64> = knots
            .windows(2)
            .map(|w| {
                let s = (ln_f(w[1]) - ln_f(w[0])) / (w[1] / w[0]).ln();
                if s.is_finite() {
                    s.max(steepest)
                } else {
                    steepest
                }
            })
            .collect();
        x.push(match compact {
            Some(_) => 0.0,
            None => (-x[KNOTS - 2] - min_decay).max(0.1).ln(),
        });
        let level = ln_f(knots[0]);
        (Family { knots, compact, min_decay, level }, x)
    }
}

fn family(dom: &WeightedDomain, objective: &Objective, init: &RadialProfile) -> Result<(Family, Vec<f64>)> {
    let support = init.support_radius();
    if support.is_finite() {
        let knots = RadialProfile::log_knots(COMPACT_SPAN.0 * support, COMPACT_SPAN.1 * support, KNOTS);
        return Ok(Family::start(init, knots, Some(support), 0.0));
    }
    let r0 = characteristic_radius(init);
    if !(r0 > 0.0 && r0 < 1e12) {
        return Err(Error::Parameter("initial profile has no half-value radius".into()));
    }
    let na = dom.n_a();
    let p = objective.p();
    let need = (na / objective.min_exponent(dom)).max(na / p - 1.0);
    let knots = RadialProfile::log_knots(SPAN.0 * r0, SPAN.1 * r0, KNOTS);
    Ok(Family::start(init, knots, None, need + DECAY_MARGIN))
}

/// Minimize `objective` from `init`. Each restart runs Nelder–Mead from its
/// own simplex (the first unperturbed, the others jittered by the seeded
/// stream of their index), re-seeding the simplex around its best point
/// whenever it collapses, until the budget runs out or a re-seed no longer
/// improves. Restarts run concurrently; the result does not depend on the
/// thread count.
pub fn minimize_quotient(
    dom: &WeightedDomain,
    objective: Objective,
    init: &RadialProfile,
    opts: &OptimizerOptions,
) -> Result<OptimizationRun> {
    if opts.restarts == 0 || opts.budget < 2 * (KNOTS + 1) {
        return Err(Error::Parameter(format!(
            "need at least one restart and a budget of {} evaluations",
            2 * (KNOTS + 1)
        )));
    }
    let (initial_value, sharp_value) = objective_value(dom, &objective, init, opts.tol)?;
    if !initial_value.is_finite() {
        return Err(Error::Parameter("initial profile has no finite objective".into()));
    }
    let (fam, x0) = family(dom, &objective, init)?;
    let eval = |x: &[f64]| match fam.profile(x).and_then(|f| objective_value(dom, &objective, &f, opts.tol)) {
        Ok((v, _)) if v.is_finite() => v,
        _ => f64::INFINITY,
    };
    let runs: Vec<Simplex> = (0..opts.restarts)
        .into_par_iter()
        .map(|k| {
            let mut start = x0.clone();
            let mut step = vec![STEP; start.len()];
            if k > 0 {
                let mut rng = sample_rng(opts.seed, k as u64);
                for (v, s) in start.iter_mut().zip(step.iter_mut()) {
                    *v += rng.random_range(-0.3..0.3);
                    *s *= if rng.random::<bool>() { 1.0 } else { -1.0 };
                }
            }
            nelder_mead(&eval, start, &step, opts.budget)
        })
        .collect();
    let iterations = runs.iter().map(|r| r.evaluations).sum();
    let converged = runs.iter().all(|r| r.converged);
    let restart_values: Vec<f64> = runs.iter().map(|r| r.best_value).collect();
    let winner = runs
        .iter()
        .min_by(|a, b| a.best_value.total_cmp(&b.best_value))
        .expect("at least one restart");
    let (best, best_value) = if winner.best_value < initial_value {
        (fam.profile(&winner.best)?, winner.best_value)
    } else {
        (init.clone(), initial_value)
    };
    let best = match best.shape {
        Shape::Indicator { .. } => best,
        _ => normalize(dom, &best, objective.normalization_exponent(dom), opts.tol)?,
    };
    Ok(OptimizationRun {
        objective,
        initial: init.clone(),
        initial_value,
        best,
        best_value,
        sharp_value,
        iterations,
        converged,
        seed: opts.seed,
        restart_values,
    })
}

struct Simplex {
    best: Vec<f64>,
    best_value: f64,
    evaluations: usize,
    converged: bool,
}

/// Adaptive-coefficient Nelder–Mead with re-seeding on collapse.
fn nelder_mead(f: &dyn Fn(&[f64]) -> f64, start: Vec<f64>, step: &[f64], budget: usize) -> Simplex {
    let dim = start.len();
    let d = dim as f64;
    let (reflect, expand, contract, shrink) = (1.0, 1.0 + 2.0 / d, 0.75 - 0.5 / d, 1.0 - 1.0 / d);
    let count = std::cell::Cell::new(0usize);
    let call = |x: &[f64]| {
        count.set(count.get() + 1);
        f(x)
    };
    let mut best = start;
    let mut best_value = call(&best);
    let mut scale = 1.0;
    let mut converged = false;
    loop {
        let mut pts: Vec<(Vec<f64>, f64)> = vec![(best.clone(), best_value)];
        for i in 0..dim {
            let mut x = best.clone();
            x[i] += scale * step[i];
            let v = call(&x);
            pts.push((x, v));
        }
        let mut exhausted = false;
        loop {
            pts.sort_by(|a, b| a.1.total_cmp(&b.1));
            let (lo, hi) = (pts[0].1, pts[dim].1);
            let spread = (hi - lo).abs();
            let size = pts[1..].iter().map(|(x, _)| max_dist(x, &pts[0].0)).fold(0.0, f64::max);
            if spread <= FTOL * lo.abs().max(1e-300) && size <= XTOL {
                break;
            }
            if count.get() + dim + 2 > budget {
                exhausted = true;
                break;
            }
            let centroid: Vec<f64> = (0..dim).map(|j| pts[..dim].iter().map(|(x, _)| x[j]).sum::<f64>() / d).collect();
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&pts[dim].0).map(|(c, w)| c + t * (c - w)).collect()
            };
            let xr = along(reflect);
            let vr = call(&xr);
            if vr < pts[0].1 {
                let xe = along(reflect * expand);
                let ve = call(&xe);
                pts[dim] = if ve < vr { (xe, ve) } else { (xr, vr) };
            } else if vr < pts[dim - 1].1 {
                pts[dim] = (xr, vr);
            } else {
                let (xc, vc) = if vr < pts[dim].1 {
                    let xc = along(reflect * contract);
                    let vc = call(&xc);
                    (xc, vc)
                } else {
                    let xc = along(-contract);
                    let vc = call(&xc);
                    (xc, vc)
                };
                if vc < vr.min(pts[dim].1) {
                    pts[dim] = (xc, vc);
                } else {
                    let x0 = pts[0].0.clone();
                    for (x, v) in pts[1..].iter_mut() {
                        for (xi, bi) in x.iter_mut().zip(&x0) {
                            *xi = bi + shrink * (*xi - bi);
                        }
                        *v = call(x);
                    }
                }
            }
        }
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let improved = pts[0].1 < best_value - FTOL * best_value.abs();
        if pts[0].1 < best_value {
            best = pts[0].0.clone();
            best_value = pts[0].1;
        }
        if exhausted {
            break;
        }
        if !improved {
            converged = true;
            break;
        }
        // collapsed somewhere better: look again with a smaller simplex
        scale *= 0.5;
    }
    Simplex { best, best_value, evaluations: count.get(), converged }
}

fn max_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::NormSpec;
    use crate::profiles::{gn_extremal, sobolev_extremal};

    fn dom(n: usize, a: f64) -> WeightedDomain {
        WeightedDomain::half_space(n, a, NormSpec::euclidean(n)).unwrap()
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let s = nelder_mead(&f, vec![-1.2, 1.0], &[0.5, 0.5], 5000);
        assert!(s.converged);
        assert!((s.best[0] - 1.0).abs() < 1e-5 && (s.best[1] - 1.0).abs() < 1e-5, "{:?}", s.best);
    }

    #[test]
    fn extremal_start_does_not_improve() {
        let d = dom(2, 1.0);
        let h = sobolev_extremal(&d, 2.0).unwrap();
        let opts = OptimizerOptions { budget: 400, restarts: 1, ..Default::default() };
        let run = minimize_quotient(&d, Objective::Sobolev { p: 2.0 }, &h, &opts).unwrap();
        assert!(run.relative_gap() >= -1e-8, "{}", run.relative_gap());
        assert!(run.relative_gap() <= 1e-8);
    }

    #[test]
    fn gaussian_start_reaches_the_sobolev_constant() {
        let d = dom(2, 1.0);
        let g = RadialProfile::new(Shape::Gaussian { rate: 1.0, q: 2.0 });
        let opts = OptimizerOptions { budget: 5000, restarts: 1, ..Default::default() };
        let run = minimize_quotient(&d, Objective::Sobolev { p: 2.0 }, &g, &opts).unwrap();
        assert!(run.iterations <= 5000);
        assert!(run.relative_gap() < 1e-3, "{run:?}");
        assert!(run.is_sound(1e-6));
    }

    #[test]
    fn smoothed_indicator_reaches_the_sub_gn_constant() {
        let d = dom(2, 1.0);
        let start = RadialProfile::spline(
            RadialProfile::log_knots(0.05, 0.9, KNOTS),
            vec![0.0; KNOTS],
            Tail::Compact { radius: 1.0, kappa: 1.0 },
        )
        .unwrap();
        let obj = Objective::Gn { p: 2.0, alpha: 0.5 };
        let opts = OptimizerOptions { budget: 3000, restarts: 2, ..Default::default() };
        let run = minimize_quotient(&d, obj, &start, &opts).unwrap();
        assert!(run.relative_gap() < 5e-3, "{run:?}");
        assert!(run.is_sound(1e-6));
        // the extremal itself is not beaten
        let h = gn_extremal(&d, 2.0, 0.5).unwrap();
        let (v, _) = objective_value(&d, &obj, &h, 1e-10).unwrap();
        assert!(run.best_value >= v - 1e-6 * v);
    }

    #[test]
    fn dilated_start_gives_the_same_run() {
        let d = dom(2, 1.0);
        let g = RadialProfile::new(Shape::Gaussian { rate: 1.0, q: 2.0 });
        let opts = OptimizerOptions { budget: 600, restarts: 1, ..Default::default() };
        let obj = Objective::Sobolev { p: 2.0 };
        let a = minimize_quotient(&d, obj, &g, &opts).unwrap();
        let b = minimize_quotient(&d, obj, &g.dilate(0.37), &opts).unwrap();
        assert!((a.best_value / b.best_value - 1.0).abs() < 1e-6, "{} vs {}", a.best_value, b.best_value);
    }

    #[test]
    fn restarts_are_deterministic() {
        let d = dom(2, 0.5);
        let g = RadialProfile::new(Shape::Gaussian { rate: 1.0, q: 2.0 });
        let opts = OptimizerOptions { budget: 200, restarts: 3, seed: 9, tol: 1e-9 };
        let obj = Objective::Gn { p: 2.0, alpha: 2.0 };
        let a = minimize_quotient(&d, obj, &g, &opts).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| minimize_quotient(&d, obj, &g, &opts).unwrap());
        assert_eq!(a.restart_values, b.restart_values);
        assert!(a.is_sound(1e-6));
    }

    #[test]
    fn tiny_budget_is_refused() {
        let d = dom(1, 0.5);
        let g = RadialProfile::new(Shape::Gaussian { rate: 1.0, q: 2.0 });
        let opts = OptimizerOptions { budget: 5, ..Default::default() };
        assert!(minimize_quotient(&d, Objective::Sobolev { p: 1.5 }, &g, &opts).is_err());
    }
}
