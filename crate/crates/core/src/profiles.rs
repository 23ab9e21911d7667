//! Radial profiles `f(‖x‖)`: the extremal families, indicators, monotone
//! log-log splines for random and optimized candidates, and bump
//! perturbations.

use serde::{Deserialize, Serialize};

use crate::domain::WeightedDomain;
use crate::error::{Error, Result};
use crate::norms::conjugate;
use crate::quadrature::Hints;
use crate::special::lgamma_unchecked as lg;

/// A scalar function of `r = ‖x‖` with a derivative.
pub trait Radial: Sync {
    fn value(&self, r: f64) -> f64;
    fn derivative(&self, r: f64) -> f64;
    fn support_radius(&self) -> f64 {
        f64::INFINITY
    }
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
    /// Jump discontinuities `(radius, f(radius⁺) − f(radius⁻))`.
    fn jumps(&self) -> Vec<(f64, f64)> {
        Vec::new()
    }
    fn hints(&self) -> Hints {
        let support = self.support_radius();
        Hints {
            support: support.is_finite().then_some(support),
            edge_exponent: None,
            breakpoints: self.breakpoints(),
            scale: None,
        }
    }
}

/// Tail of a spline profile beyond its last knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Tail {
    /// `f ∝ r^{−decay}`.
    Power { decay: f64 },
    /// The spline (held flat past its last knot) times `(1 − (r/radius)²)₊^κ`.
    Compact { radius: f64, kappa: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// `(shift + r^q)^{−exponent}`.
    Power { shift: f64, q: f64, exponent: f64 },
    /// `(sigma + (alpha − 1) r^q)₊^{1/(1−alpha)}`.
    Gn { sigma: f64, alpha: f64, q: f64 },
    /// `exp(−rate·r^q)`.
    Gaussian { rate: f64, q: f64 },
    /// `1_{r ≤ radius}`.
    Indicator { radius: f64 },
    /// Monotone cubic (PCHIP) interpolation of `ln f` against `ln r`.
    Spline { knots: Vec<f64>, ln_values: Vec<f64>, tail: Tail },
    /// `base + amplitude·exp(1 − 1/(1 − x²))`, `x = (r − center)/width`.
    Perturbed { base: Box<RadialProfile>, center: f64, width: f64, amplitude: f64 },
}

/// `r ↦ amplitude · shape(r / scale)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub shape: Shape,
    pub amplitude: f64,
    pub scale: f64,
}

impl RadialProfile {
    pub fn new(shape: Shape) -> Self {
        RadialProfile { shape, amplitude: 1.0, scale: 1.0 }
    }

    pub fn kind(&self) -> &'static str {
        match self.shape {
            Shape::Power { .. } => "power",
            Shape::Gn { .. } => "gn",
            Shape::Gaussian { .. } => "gaussian",
            Shape::Indicator { .. } => "indicator",
            Shape::Spline { .. } => "spline",
            Shape::Perturbed { .. } => "perturbed",
        }
    }

    /// `r ↦ f(λ r)` (amplitude unchanged).
    pub fn dilate(&self, lambda: f64) -> Self {
        RadialProfile { scale: self.scale / lambda, ..self.clone() }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        RadialProfile { amplitude: self.amplitude * factor, ..self.clone() }
    }

    /// A spline through log-spaced knots; `ln_values` are `ln f` at the knots.
    pub fn spline(knots: Vec<f64>, ln_values: Vec<f64>, tail: Tail) -> Result<Self> {
        if knots.len() < 2 || knots.len() != ln_values.len() {
            return Err(Error::Parameter("a spline needs ≥ 2 knots and one value per knot".into()));
        }
        if knots[0] <= 0.0 || knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parameter("spline knots must be positive and increasing".into()));
        }
        if ln_values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("spline values must be finite".into()));
        }
        match tail {
            Tail::Power { decay } if !(decay > 0.0 && decay.is_finite()) => {
                return Err(Error::Parameter(format!("tail decay must be positive, got {decay}")))
            }
            Tail::Compact { radius, kappa } if !(radius > knots[knots.len() - 1] && kappa > 0.0) => {
                return Err(Error::Parameter("compact tail needs radius past the last knot and κ > 0".into()))
            }
            _ => {}
        }
        Ok(RadialProfile::new(Shape::Spline { knots, ln_values, tail }))
    }

    /// `count` log-spaced radii between `lo` and `hi`.
    pub fn log_knots(lo: f64, hi: f64, count: usize) -> Vec<f64> {
        let (a, b) = (lo.ln(), hi.ln());
        (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect()
    }

    /// Sample `self` at the knots into a power-tailed spline.
    pub fn to_spline(&self, knots: &[f64], decay: f64) -> Result<Self> {
        let ln_values: Vec<f64> = knots.iter().map(|&r| self.value(r).ln()).collect();
        Self::spline(knots.to_vec(), ln_values, Tail::Power { decay })
    }

    fn shape_value(&self, s: f64) -> f64 {
        match &self.shape {
            Shape::Power { shift, q, exponent } => (shift + s.powf(*q)).powf(-exponent),
            Shape::Gn { sigma, alpha, q } => {
                let base = sigma + (alpha - 1.0) * s.powf(*q);
                if base <= 0.0 {
                    0.0
                } else {
                    base.powf(1.0 / (1.0 - alpha))
                }
            }
            Shape::Gaussian { rate, q } => (-rate * s.powf(*q)).exp(),
            Shape::Indicator { radius } => {
                if s <= *radius {
                    1.0
                } else {
                    0.0
                }
            }
            Shape::Spline { knots, ln_values, tail } => spline_eval(knots, ln_values, tail, s).0,
            Shape::Perturbed { base, center, width, amplitude } => base.value(s) + amplitude * bump(s, *center, *width).0,
        }
    }

    fn shape_derivative(&self, s: f64) -> f64 {
        match &self.shape {
            Shape::Power { shift, q, exponent } => {
                if s == 0.0 {
                    return 0.0;
                }
                -exponent * q * s.powf(q - 1.0) * (shift + s.powf(*q)).powf(-exponent - 1.0)
            }
            Shape::Gn { sigma, alpha, q } => {
                let base = sigma + (alpha - 1.0) * s.powf(*q);
                if base <= 0.0 || s == 0.0 {
                    0.0
                } else {
                    -q * s.powf(q - 1.0) * base.powf(alpha / (1.0 - alpha))
                }
            }
            Shape::Gaussian { rate, q } => {
                if s == 0.0 {
                    0.0
                } else {
                    -rate * q * s.powf(q - 1.0) * (-rate * s.powf(*q)).exp()
                }
            }
            Shape::Indicator { .. } => 0.0,
            Shape::Spline { knots, ln_values, tail } => spline_eval(knots, ln_values, tail, s).1,
            Shape::Perturbed { base, center, width, amplitude } => {
                base.derivative(s) + amplitude * bump(s, *center, *width).1
            }
        }
    }

    fn shape_support(&self) -> f64 {
        match &self.shape {
            Shape::Gn { sigma, alpha, q } if *alpha < 1.0 => (sigma / (1.0 - alpha)).powf(1.0 / q),
            Shape::Indicator { radius } => *radius,
            Shape::Spline { tail: Tail::Compact { radius, .. }, .. } => *radius,
            Shape::Perturbed { base, center, width, .. } => base.support_radius().max(center + width),
            _ => f64::INFINITY,
        }
    }

    fn shape_breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Spline { knots, .. } => knots.clone(),
            Shape::Perturbed { base, center, width, .. } => {
                let mut b = base.breakpoints();
                b.extend([(center - width).max(0.0), *center, center + width]);
                b
            }
            _ => Vec::new(),
        }
    }
}

impl Radial for RadialProfile {
    fn value(&self, r: f64) -> f64 {
        self.amplitude * self.shape_value(r / self.scale)
    }

    fn derivative(&self, r: f64) -> f64 {
        self.amplitude / self.scale * self.shape_derivative(r / self.scale)
    }

    fn support_radius(&self) -> f64 {
        self.scale * self.shape_support()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.shape_breakpoints().into_iter().map(|b| b * self.scale).filter(|b| *b > 0.0).collect()
    }

    fn jumps(&self) -> Vec<(f64, f64)> {
        match &self.shape {
            Shape::Indicator { radius } => vec![(radius * self.scale, -self.amplitude)],
            Shape::Perturbed { base, .. } => base.jumps().into_iter().map(|(r, j)| (r * self.scale, j * self.amplitude)).collect(),
            _ => Vec::new(),
        }
    }
}

/// Smooth bump `exp(1 − 1/(1 − x²))` and its r-derivative.
fn bump(r: f64, center: f64, width: f64) -> (f64, f64) {
    let x = (r - center) / width;
    if x.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let d = 1.0 - x * x;
    let v = (1.0 - 1.0 / d).exp();
    (v, v * (-2.0 * x / (d * d)) / width)
}

/// PCHIP slopes for `ln f` against `ln r`, with the first slope pinned to 0
/// (flat core) and the last one to the tail's log-log slope.
fn pchip_slopes(x: &[f64], y: &[f64], end_slope: f64) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d[n - 1] = end_slope;
    d
}

fn spline_eval(knots: &[f64], ln_values: &[f64], tail: &Tail, s: f64) -> (f64, f64) {
    let n = knots.len();
    let (cut, cut_d) = match tail {
        Tail::Compact { radius, kappa } => {
            if s >= *radius {
                return (0.0, 0.0);
            }
            let u = 1.0 - (s / radius).powi(2);
            (u.powf(*kappa), -2.0 * kappa * s / (radius * radius) * u.powf(kappa - 1.0))
        }
        Tail::Power { .. } => (1.0, 0.0),
    };
    let end_slope = match tail {
        Tail::Power { decay } => -decay,
        Tail::Compact { .. } => 0.0,
    };
    // log-log value and slope
    let (ly, slope) = if s <= knots[0] {
        (ln_values[0], 0.0)
    } else if s >= knots[n - 1] {
        let lx = s.ln() - knots[n - 1].ln();
        (ln_values[n - 1] + end_slope * lx, end_slope)
    } else {
        let x: Vec<f64> = knots.iter().map(|k| k.ln()).collect();
        let d = pchip_slopes(&x, ln_values, end_slope);
        let ls = s.ln();
        let i = x.partition_point(|&v| v <= ls).saturating_sub(1).min(n - 2);
        let h = x[i + 1] - x[i];
        let t = (ls - x[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * ln_values[i] + h10 * h * d[i] + h01 * ln_values[i + 1] + h11 * h * d[i + 1];
        let dh00 = 6.0 * t2 - 6.0 * t;
        let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
        let dh01 = -6.0 * t2 + 6.0 * t;
        let dh11 = 3.0 * t2 - 2.0 * t;
        let dv = (dh00 * ln_values[i] + dh01 * ln_values[i + 1]) / h + dh10 * d[i] + dh11 * d[i + 1];
        (v, dv)
    };
    let f = ly.exp();
    let df = if s == 0.0 { 0.0 } else { f * slope / s };
    (f * cut, df * cut + f * cut_d)
}

/// `∫_Σ |f|^k σ` by radial reduction.
pub fn power_integral(dom: &WeightedDomain, f: &dyn Radial, k: f64, tol: f64) -> Result<f64> {
    dom.radial_moment(&|r| f.value(r).abs().powf(k), &f.hints(), 0.0, tol)
}

/// Rescale `f` so that `∫_Σ |f|^k σ = 1`.
pub fn normalize(dom: &WeightedDomain, f: &RadialProfile, k: f64, tol: f64) -> Result<RadialProfile> {
    let mass = power_integral(dom, f, k, tol)?;
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::Normalization(format!("cannot normalize: ∫ f^{k} σ = {mass}")));
    }
    Ok(f.scaled(mass.powf(-1.0 / k)))
}

const NORMALIZER_TOL: f64 = 1e-8;

/// Solve `∫ shape(σ)^k σ = 1` for `σ` by bisection in `ln σ`, starting from a
/// bracket around `guess`.
fn bisect_normalizer(
    dom: &WeightedDomain,
    make: &dyn Fn(f64) -> RadialProfile,
    k: f64,
    guess: f64,
    tol: f64,
) -> Result<f64> {
    let excess = |s: f64| -> Result<f64> { Ok(power_integral(dom, &make(s), k, tol)?.ln()) };
    let (mut lo, mut hi) = (guess.ln() - 1.0, guess.ln() + 1.0);
    let (mut flo, mut fhi) = (excess(lo.exp())?, excess(hi.exp())?);
    let mut widen = 0;
    while flo.signum() == fhi.signum() {
        widen += 1;
        if widen > 60 {
            return Err(Error::Normalization("could not bracket the normalizing constant".into()));
        }
        if flo.abs() < fhi.abs() {
            lo -= 2.0;
            flo = excess(lo.exp())?;
        } else {
            hi += 2.0;
            fhi = excess(hi.exp())?;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < 1e-13 {
            break;
        }
        let fm = excess(mid.exp())?;
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

fn cross_check(name: &str, formula: f64, bisected: f64) -> Result<()> {
    let rel = (formula / bisected - 1.0).abs();
    if rel > NORMALIZER_TOL {
        return Err(Error::Normalization(format!(
            "{name}: closed form {formula:.17e} disagrees with bisection {bisected:.17e} (relative {rel:.3e})"
        )));
    }
    Ok(())
}

fn check_sobolev_range(dom: &WeightedDomain, p: f64) -> Result<()> {
    if !(p > 1.0 && p < dom.n_a()) {
        return Err(Error::Parameter(format!("need 1 < p < n_a = {}, got p = {p}", dom.n_a())));
    }
    Ok(())
}

/// `ln σ_{p,a}` from the Gamma formula.
pub fn ln_sobolev_sigma(dom: &WeightedDomain, p: f64) -> Result<f64> {
    check_sobolev_range(dom, p)?;
    let na = dom.n_a();
    let q = conjugate(p);
    Ok(p / na * (lg(na / p) + lg(na / q + 1.0) - lg(na) + dom.ln_ball_measure()))
}

/// The Sobolev extremal `(σ + r^q)^{−(n_a−p)/p}`, normalized in `L^{p*}`.
/// The closed-form `σ` is cross-checked against bisection on the quadrature.
pub fn sobolev_extremal(dom: &WeightedDomain, p: f64) -> Result<RadialProfile> {
    let sigma = ln_sobolev_sigma(dom, p)?.exp();
    let na = dom.n_a();
    let q = conjugate(p);
    let p_star = na * p / (na - p);
    let make = |s: f64| RadialProfile::new(Shape::Power { shift: s, q, exponent: (na - p) / p });
    let bisected = bisect_normalizer(dom, &make, p_star, sigma, 1e-12)?;
    cross_check("σ_{p,a}", sigma, bisected)?;
    Ok(make(sigma))
}

/// Largest admissible GN exponent `n_a/(n_a − p)`.
pub fn gn_alpha_max(dom: &WeightedDomain, p: f64) -> f64 {
    dom.n_a() / (dom.n_a() - p)
}

pub(crate) fn check_gn_range(dom: &WeightedDomain, p: f64, alpha: f64) -> Result<()> {
    check_sobolev_range(dom, p)?;
    let top = gn_alpha_max(dom, p);
    if !(alpha > 0.0 && alpha <= top * (1.0 + 1e-15)) || alpha == 1.0 {
        return Err(Error::Parameter(format!("need α ∈ (0, {top}] with α ≠ 1, got α = {alpha}")));
    }
    Ok(())
}

/// `ln σ_{α,p,a}` from the two-branch Gamma formula.
pub fn ln_gn_sigma(dom: &WeightedDomain, p: f64, alpha: f64) -> Result<f64> {
    check_gn_range(dom, p, alpha)?;
    let na = dom.n_a();
    let q = conjugate(p);
    let outer = q * (alpha - 1.0) / (alpha * p * q - na * (alpha - 1.0));
    let inner = if alpha > 1.0 {
        let c = alpha * p / (alpha - 1.0);
        -na / q * (alpha - 1.0).ln() + lg(c - na / q) + lg(na / q + 1.0) - lg(c)
    } else {
        let d = alpha * p / (1.0 - alpha);
        -na / q * (1.0 - alpha).ln() + lg(d + 1.0) + lg(na / q + 1.0) - lg(d + 1.0 + na / q)
    };
    Ok(outer * (inner + dom.ln_ball_measure()))
}

/// The GN extremal `(σ + (α−1) r^q)₊^{1/(1−α)}`, normalized in `L^{αp}`.
pub fn gn_extremal(dom: &WeightedDomain, p: f64, alpha: f64) -> Result<RadialProfile> {
    let sigma = ln_gn_sigma(dom, p, alpha)?.exp();
    let q = conjugate(p);
    let make = |s: f64| RadialProfile::new(Shape::Gn { sigma: s, alpha, q });
    let bisected = bisect_normalizer(dom, &make, alpha * p, sigma, 1e-12)?;
    cross_check("σ_{α,p,a}", sigma, bisected)?;
    Ok(make(sigma))
}

/// `b·exp(−s r^q)` with `∫ f^p σ = 1`; for `p = 1` the indicator
/// `s^{n_a} V_B^{−1} 1_{r ≤ 1/s}`.
pub fn logsob_extremal(dom: &WeightedDomain, p: f64, s: f64) -> Result<RadialProfile> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Parameter(format!("log-Sobolev scale must be positive, got {s}")));
    }
    if !(p >= 1.0) {
        return Err(Error::Parameter(format!("need p ≥ 1, got {p}")));
    }
    let na = dom.n_a();
    if p == 1.0 {
        let b = (na * s.ln() - dom.ln_ball_measure()).exp();
        return Ok(RadialProfile { shape: Shape::Indicator { radius: 1.0 / s }, amplitude: b, scale: 1.0 });
    }
    let q = conjugate(p);
    // b^{−p} = V_B Γ(n_a/q + 1)(p s)^{−n_a/q}
    let ln_b = -(dom.ln_ball_measure() + lg(na / q + 1.0) - na / q * (p * s).ln()) / p;
    Ok(RadialProfile { shape: Shape::Gaussian { rate: s, q }, amplitude: ln_b.exp(), scale: 1.0 })
}

/// `V_B^{−(n_a−1)/n_a} 1_B`, the `p = 1` Sobolev extremal.
pub fn indicator_extremal(dom: &WeightedDomain) -> RadialProfile {
    let na = dom.n_a();
    RadialProfile {
        shape: Shape::Indicator { radius: 1.0 },
        amplitude: (-(na - 1.0) / na * dom.ln_ball_measure()).exp(),
        scale: 1.0,
    }
}

/// A smooth compactly supported bump added to a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
}

/// `f + bump`, renormalized so that `∫ |f|^k σ = 1`.
pub fn perturb(dom: &WeightedDomain, f: &RadialProfile, bump_spec: Bump, k: f64, tol: f64) -> Result<RadialProfile> {
    let Bump { center, width, amplitude } = bump_spec;
    if !(width > 0.0 && center >= 0.0) {
        return Err(Error::Parameter("bump needs a positive width and a non-negative center".into()));
    }
    if amplitude == 0.0 {
        return Ok(f.clone());
    }
    let base = f.clone();
    let perturbed = RadialProfile::new(Shape::Perturbed { base: Box::new(base), center, width, amplitude });
    for i in 0..=400 {
        let r = (center - width).max(0.0) + 2.0 * width * i as f64 / 400.0;
        let v = perturbed.value(r);
        if v < 0.0 {
            return Err(Error::Negativity(format!("perturbed profile is {v:e} at r = {r}")));
        }
    }
    normalize(dom, &perturbed, k, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::NormSpec;

    fn dom(n: usize, a: f64, q: f64) -> WeightedDomain {
        WeightedDomain::half_space(n, a, NormSpec::lq(q, n).unwrap()).unwrap()
    }

    #[test]
    fn sobolev_extremal_is_normalized() {
        for (n, a, p) in [(3, 0.0, 2.0), (2, 1.0, 2.0), (1, 2.5, 1.5), (3, 2.5, 3.0)] {
            let d = dom(n, a, 2.0);
            let h = sobolev_extremal(&d, p).unwrap();
            let na = d.n_a();
            let mass = power_integral(&d, &h, na * p / (na - p), 1e-12).unwrap();
            assert!((mass - 1.0).abs() < 1e-10, "{n} {a} {p}: {mass}");
        }
        let h = sobolev_extremal(&dom(3, 0.0, 2.0), 2.0).unwrap();
        assert!(matches!(h.shape, Shape::Power { exponent, q, .. } if exponent == 0.5 && q == 2.0));
    }

    #[test]
    fn gn_extremals_are_normalized() {
        let d = dom(2, 1.0, 2.0);
        for alpha in [0.5, 0.9, 2.0, 3.0] {
            let h = gn_extremal(&d, 2.0, alpha).unwrap();
            let mass = power_integral(&d, &h, alpha * 2.0, 1e-12).unwrap();
            assert!((mass - 1.0).abs() < 1e-10, "α={alpha}: {mass}");
            if alpha < 1.0 {
                let r = h.support_radius();
                assert!(r.is_finite());
                assert_eq!(h.value(r), 0.0);
            } else {
                assert!(h.support_radius().is_infinite());
            }
        }
        assert!(gn_extremal(&d, 2.0, 1.0).is_err());
        assert!(gn_extremal(&d, 2.0, 3.5).is_err());
    }

    #[test]
    fn gn_extremal_approaches_sobolev_at_endpoint() {
        // both are L^{p*}-normalized members of the family c·h(λr), c = λ^{n_a/p*};
        // match λ through the value at the origin
        let d = dom(2, 1.0, 2.0);
        let (p, na) = (2.0, d.n_a());
        let p_star = na * p / (na - p);
        let top = gn_alpha_max(&d, p);
        let h = sobolev_extremal(&d, p).unwrap();
        for gap in [1e-3, 1e-4, 1e-5] {
            let g = gn_extremal(&d, p, top - gap).unwrap();
            let lambda = (g.value(0.0) / h.value(0.0)).powf(p_star / na);
            let matched = h.dilate(lambda).scaled(lambda.powf(na / p_star));
            for r in [0.0, 0.3, 1.0, 2.0, 5.0] {
                let (x, y) = (g.value(r), matched.value(r));
                assert!((x - y).abs() < 20.0 * gap * y, "gap={gap} r={r}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn logsob_extremals() {
        let d = dom(2, 1.0, 2.0);
        for p in [1.5, 2.0, 3.0] {
            for s in [0.5, 1.0, 3.0] {
                let f = logsob_extremal(&d, p, s).unwrap();
                assert!((power_integral(&d, &f, p, 1e-12).unwrap() - 1.0).abs() < 1e-10);
            }
        }
        let g = logsob_extremal(&dom(1, 0.0, 2.0), 2.0, 1.0).unwrap();
        assert!(matches!(g.shape, Shape::Gaussian { q, .. } if q == 2.0));
        let f = logsob_extremal(&d, 1.0, 2.0).unwrap();
        let want = 2f64.powf(d.n_a()) / d.ball_measure();
        assert!((f.amplitude - want).abs() < 1e-12 * want);
        assert!(logsob_extremal(&d, 2.0, 0.0).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let d = dom(2, 1.0, 2.0);
        let knots = RadialProfile::log_knots(0.05, 5.0, 12);
        let vals: Vec<f64> = knots.iter().map(|r: &f64| -0.7 * r * r - 0.1 * r).collect();
        let profiles = vec![
            sobolev_extremal(&d, 1.5).unwrap().dilate(1.7),
            gn_extremal(&d, 2.0, 0.7).unwrap(),
            gn_extremal(&d, 2.0, 2.0).unwrap(),
            logsob_extremal(&d, 3.0, 0.8).unwrap(),
            RadialProfile::spline(knots.clone(), vals.clone(), Tail::Power { decay: 4.0 }).unwrap(),
            RadialProfile::spline(knots.clone(), vals, Tail::Compact { radius: 7.0, kappa: 2.5 }).unwrap(),
            perturb(&d, &sobolev_extremal(&d, 2.0).unwrap(), Bump { center: 1.0, width: 0.5, amplitude: 0.01 }, 6.0, 1e-11).unwrap(),
        ];
        for f in &profiles {
            for r in [0.02, 0.1, 0.37, 0.9, 1.3, 2.2, 4.0, 6.0] {
                if r >= f.support_radius() * 0.98 {
                    continue;
                }
                let h = 1e-6 * r;
                let fd = (f.value(r + h) - f.value(r - h)) / (2.0 * h);
                let an = f.derivative(r);
                assert!((fd - an).abs() < 1e-6 * an.abs().max(f.value(r)).max(1e-8), "{} at {r}: {fd} vs {an}", f.kind());
            }
        }
    }

    #[test]
    fn spline_reproduces_knots_and_tail() {
        let knots = RadialProfile::log_knots(0.1, 10.0, 12);
        let vals: Vec<f64> = knots.iter().map(|r| -(1.0 + r * r).ln()).collect();
        let s = RadialProfile::spline(knots.clone(), vals.clone(), Tail::Power { decay: 2.0 }).unwrap();
        for (k, v) in knots.iter().zip(&vals) {
            assert!((s.value(*k).ln() - v).abs() < 1e-14);
        }
        assert_eq!(s.value(0.0), s.value(0.05));
        let r = 100.0;
        assert!((s.value(r) - vals[11].exp() * (r / 10.0f64).powi(-2)).abs() < 1e-15);
        assert!(RadialProfile::spline(vec![1.0, 0.5], vec![0.0, 0.0], Tail::Power { decay: 1.0 }).is_err());
        assert!(RadialProfile::spline(knots, vals, Tail::Compact { radius: 5.0, kappa: 1.0 }).is_err());
    }

    #[test]
    fn perturbation_rules() {
        let d = dom(2, 1.0, 2.0);
        let h = sobolev_extremal(&d, 2.0).unwrap();
        let same = perturb(&d, &h, Bump { center: 1.0, width: 0.5, amplitude: 0.0 }, 6.0, 1e-11).unwrap();
        assert_eq!(same, h);
        let big = perturb(&d, &h, Bump { center: 1.0, width: 0.5, amplitude: -10.0 }, 6.0, 1e-11);
        assert!(matches!(big, Err(Error::Negativity(_))));
        let p = perturb(&d, &h, Bump { center: 1.0, width: 0.5, amplitude: 0.05 }, 6.0, 1e-11).unwrap();
        assert!((power_integral(&d, &p, 6.0, 1e-12).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn json_round_trip() {
        let d = dom(2, 1.0, 2.0);
        let p = perturb(&d, &gn_extremal(&d, 2.0, 0.5).unwrap(), Bump { center: 0.2, width: 0.1, amplitude: 0.01 }, 1.0, 1e-10).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\"kind\":\"perturbed\""));
        let back: RadialProfile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }
}
