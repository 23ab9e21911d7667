//! The weighted orthant `Σ = ℝ^{n−m} × ℝ₊^m` with weight `t₁^{a₁}···t_m^{a_m}`
//! and a norm: ball measures, perimeters and the radial reduction
//! `∫_Σ g(‖z‖) σ dz = n_a V_B ∫₀^∞ g(r) r^{n_a−1} dr`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::norms::{split_top_level, NormSpec};
use crate::profiles::Radial;
use crate::quadrature::{self, Hints};
use crate::special::lgamma_unchecked;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDomain {
    n: usize,
    axes: Vec<usize>,
    a: Vec<f64>,
    norm: NormSpec,
    n_a: f64,
}

impl WeightedDomain {
    /// Weighted coordinates are the last `a.len()` axes, or the last axis of
    /// each block when the norm is a `k`-block norm and `a.len() == k`.
    pub fn new(n: usize, a: Vec<f64>, norm: NormSpec) -> Result<Self> {
        let m = a.len();
        let axes = match &norm {
            NormSpec::Blocks { block, count, .. } if *count == m && m > 1 => {
                (0..m).map(|i| (i + 1) * block.dim() - 1).collect()
            }
            _ => (n.saturating_sub(m)..n).collect(),
        };
        Self::with_axes(n, axes, a, norm)
    }

    pub fn with_axes(n: usize, axes: Vec<usize>, a: Vec<f64>, norm: NormSpec) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("dimension must be at least 1".into()));
        }
        if a.len() > n || axes.len() != a.len() {
            return Err(Error::Parameter(format!("{} weighted axes do not fit in dimension {n}", a.len())));
        }
        let mut sorted = axes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != axes.len() || axes.iter().any(|&i| i >= n) {
            return Err(Error::Parameter("weighted axes must be distinct and inside the dimension".into()));
        }
        if let Some(bad) = a.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::Parameter(format!("weight exponents must be finite and ≥ 0, got {bad}")));
        }
        if norm.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: norm.dim() });
        }
        let n_a = n as f64 + a.iter().sum::<f64>();
        Ok(WeightedDomain { n, axes, a, norm, n_a })
    }

    /// `ℝ^{n−1} × ℝ₊` with weight `t^a`.
    pub fn half_space(n: usize, a: f64, norm: NormSpec) -> Result<Self> {
        Self::new(n, vec![a], norm)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn weighted_axes(&self) -> &[usize] {
        &self.axes
    }

    pub fn norm(&self) -> &NormSpec {
        &self.norm
    }

    /// Fractional dimension `n + Σ aᵢ`.
    pub fn n_a(&self) -> f64 {
        self.n_a
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        z.len() == self.n && self.axes.iter().all(|&i| z[i] >= 0.0)
    }

    /// `σ(z) = ∏ t_i^{a_i}`, zero outside the orthant.
    pub fn weight(&self, z: &[f64]) -> f64 {
        if !self.contains(z) {
            return 0.0;
        }
        self.axes.iter().zip(&self.a).map(|(&i, &a)| if a == 0.0 { 1.0 } else { z[i].powf(a) }).product()
    }

    /// Exponent of the weight on axis `i` (`None` for a free axis).
    pub fn axis_exponent(&self, i: usize) -> Option<f64> {
        self.axes.iter().position(|&j| j == i).map(|k| self.a[k])
    }

    /// `ln V_B`, the log of the weighted measure of the unit ball in `Σ`.
    pub fn ln_ball_measure(&self) -> f64 {
        let mut b = vec![1.0; self.n];
        let mut c = vec![2f64.ln(); self.n];
        for (&i, &a) in self.axes.iter().zip(&self.a) {
            b[i] = a + 1.0;
            c[i] = 0.0;
        }
        ln_ball(&self.norm, &b, &c)
    }

    /// `V_B = ∫_{B∩Σ} σ` in closed form.
    pub fn ball_measure(&self) -> f64 {
        self.ln_ball_measure().exp()
    }

    /// Weighted perimeter of the unit ball, `n_a V_B`.
    pub fn ball_perimeter(&self) -> f64 {
        self.n_a * self.ball_measure()
    }

    /// `∫_Σ g(‖z‖) ‖z‖^shift σ(z) dz` by radial reduction.
    pub fn radial_integral(&self, g: &dyn Radial, shift: f64, tol: f64) -> Result<f64> {
        self.radial_moment(&|r| g.value(r), &g.hints(), shift, tol)
    }

    /// `n_a V_B ∫₀^∞ h(r) r^{n_a + shift − 1} dr` for a bare integrand.
    pub fn radial_moment(&self, h: &dyn Fn(f64) -> f64, hints: &Hints, shift: f64, tol: f64) -> Result<f64> {
        if !(shift >= 0.0) {
            return Err(Error::Parameter(format!("moment shift must be ≥ 0, got {shift}")));
        }
        let power = self.n_a + shift - 1.0;
        let integrand = |r: f64| {
            let v = h(r);
            if v == 0.0 {
                0.0
            } else {
                v * r.powf(power)
            }
        };
        let res = quadrature::integrate_halfline_with(&integrand, hints, tol)?;
        Ok(self.ball_perimeter() * res.value)
    }

    /// Direct quadrature of `∫_{∂B∩Σ} ‖ν‖_* σ dℋ^{n−1}` over the Euclidean
    /// half-sphere, for `n ∈ {2, 3}` and one weighted coordinate.
    pub fn surface_perimeter_quadrature(&self, tol: f64) -> Result<f64> {
        if !self.norm.is_euclidean() || self.m() != 1 || !(self.n == 2 || self.n == 3) || self.axes[0] != self.n - 1 {
            return Err(Error::Unsupported(
                "surface quadrature needs the Euclidean norm, n ∈ {2, 3} and a weighted last axis".into(),
            ));
        }
        let dual = self.norm.dual();
        match self.n {
            2 => {
                let f = |theta: f64| {
                    let x = [theta.cos(), theta.sin()];
                    dual.eval(&x) * self.weight(&x)
                };
                Ok(quadrature::integrate(&f, 0.0, PI, tol)?.value)
            }
            _ => {
                let inner = |theta: f64| -> f64 {
                    let g = |phi: f64| {
                        let x = [phi.sin() * theta.cos(), phi.sin() * theta.sin(), phi.cos()];
                        dual.eval(&x) * self.weight(&x) * phi.sin()
                    };
                    quadrature::integrate(&g, 0.0, PI / 2.0, tol).map(|r| r.value).unwrap_or(f64::NAN)
                };
                Ok(quadrature::integrate(&inner, 0.0, 2.0 * PI, tol)?.value)
            }
        }
    }
}

/// `ln` of the weighted unit-ball measure of `norm`, given per-axis Dirichlet
/// exponents `b` (1 free, a+1 weighted) and log-multiplicities `c`
/// (`ln 2` free, 0 weighted).
fn ln_ball(norm: &NormSpec, b: &[f64], c: &[f64]) -> f64 {
    match norm {
        NormSpec::Lq { q, .. } => {
            if q.is_infinite() {
                return b.iter().zip(c).map(|(bi, ci)| ci - bi.ln()).sum();
            }
            let total: f64 = b.iter().sum();
            b.iter().zip(c).map(|(bi, ci)| ci + lgamma_unchecked(1.0 + bi / q) - bi.ln()).sum::<f64>()
                - lgamma_unchecked(1.0 + total / q)
        }
        NormSpec::Product { first, q, .. } => {
            let d = first.dim();
            let parts = [(first.as_ref(), &b[..d], &c[..d]), (norm_second(norm), &b[d..], &c[d..])];
            combine(*q, &parts)
        }
        NormSpec::Blocks { block, q, .. } => {
            let d = block.dim();
            let parts: Vec<_> = b.chunks(d).zip(c.chunks(d)).map(|(bb, cc)| (block.as_ref(), bb, cc)).collect();
            combine(*q, &parts)
        }
    }
}

fn norm_second(norm: &NormSpec) -> &NormSpec {
    match norm {
        NormSpec::Product { second, .. } => second,
        other => other,
    }
}

/// Unit ball of `(Σ ‖x_i‖_i^q)^{1/q}` from the component balls:
/// `∏ (n_i V_i Γ(n_i/q)/q) / Γ(1 + Σ n_i/q)`.
fn combine(q: f64, parts: &[(&NormSpec, &[f64], &[f64])]) -> f64 {
    let logs: Vec<(f64, f64)> = parts.iter().map(|(n, b, c)| (b.iter().sum(), ln_ball(n, b, c))).collect();
    if q.is_infinite() {
        return logs.iter().map(|(_, v)| v).sum();
    }
    let total: f64 = logs.iter().map(|(d, _)| d).sum();
    logs.iter().map(|(d, v)| d.ln() + v + lgamma_unchecked(d / q) - q.ln()).sum::<f64>() - lgamma_unchecked(1.0 + total / q)
}

impl fmt::Display for WeightedDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.a.iter().map(|x| format!("{x}")).collect();
        write!(f, "domain:n={},m={}", self.n, self.m())?;
        if !a.is_empty() {
            write!(f, ",a={}", a.join(";"))?;
        }
        write!(f, ",norm={}", self.norm)
    }
}

impl FromStr for WeightedDomain {
    type Err = Error;

    /// `domain:n=3,m=1,a=2.5,norm=lq:2`; several exponents are separated by
    /// `;`, and a single exponent is repeated over all `m` weighted axes.
    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .trim()
            .strip_prefix("domain:")
            .ok_or_else(|| Error::Parse(format!("domain must start with `domain:`, got `{s}`")))?;
        let (mut n, mut m, mut a, mut norm) = (None, None, None, None);
        for field in split_top_level(body) {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{field}`")))?;
            let value = value.trim();
            match key.trim() {
                "n" => n = Some(value.parse::<usize>().map_err(|_| Error::Parse(format!("bad n `{value}`")))?),
                "m" => m = Some(value.parse::<usize>().map_err(|_| Error::Parse(format!("bad m `{value}`")))?),
                "a" => a = Some(value.split(';').map(crate::parse_real).collect::<Result<Vec<f64>>>()?),
                "norm" => norm = Some(value.to_string()),
                other => return Err(Error::Parse(format!("unknown domain key `{other}`"))),
            }
        }
        let n = n.ok_or_else(|| Error::Parse("domain needs n=".into()))?;
        let a = a.unwrap_or_default();
        let m = m.unwrap_or(a.len().max(1));
        let a = match (a.len(), m) {
            (0, 0) => vec![],
            (0, m) => vec![0.0; m],
            (1, m) => vec![a[0]; m],
            (k, m) if k == m => a,
            (k, m) => return Err(Error::Parse(format!("{k} exponents given for m={m}"))),
        };
        let norm = match norm {
            Some(text) => NormSpec::parse_with_dim(&text, Some(n))?,
            None => NormSpec::euclidean(n),
        };
        WeightedDomain::new(n, a, norm)
    }
}

impl Serialize for WeightedDomain {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for WeightedDomain {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
