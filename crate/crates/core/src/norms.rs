//! ℓ^q norms, two-factor product norms and flat ℓ^q-of-blocks norms, with
//! exact duals and gradients.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Hölder conjugate of `q`, with `1 ↔ ∞`.
pub fn conjugate(q: f64) -> f64 {
    if q == 1.0 {
        f64::INFINITY
    } else if q.is_infinite() {
        1.0
    } else {
        q / (q - 1.0)
    }
}

fn check_exponent(q: f64) -> Result<()> {
    if q >= 1.0 && !q.is_nan() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("norm exponent must lie in [1, ∞], got {q}")))
    }
}

/// A norm on ℝ^dim.
///
/// `Product` is `(‖x‖₁^q + ‖t‖₂^q)^{1/q}` on ℝ^{d₁} × ℝ^{d₂}; `Blocks` is the
/// same construction over `count` identical blocks. Components are plain ℓ^q
/// norms, so nesting depth never exceeds two.
#[derive(Debug, Clone, PartialEq)]
pub enum NormSpec {
    Lq { q: f64, dim: usize },
    Product { first: Box<NormSpec>, second: Box<NormSpec>, q: f64 },
    Blocks { block: Box<NormSpec>, count: usize, q: f64 },
}

impl NormSpec {
    pub fn lq(q: f64, dim: usize) -> Result<Self> {
        check_exponent(q)?;
        if dim == 0 {
            return Err(Error::Parameter("norm dimension must be positive".into()));
        }
        Ok(NormSpec::Lq { q, dim })
    }

    pub fn euclidean(dim: usize) -> Self {
        NormSpec::Lq { q: 2.0, dim }
    }

    pub fn product(first: NormSpec, second: NormSpec, q: f64) -> Result<Self> {
        check_exponent(q)?;
        if !first.is_lq() || !second.is_lq() {
            return Err(Error::Unsupported("product norms nest to depth 2 only".into()));
        }
        Ok(NormSpec::Product { first: Box::new(first), second: Box::new(second), q })
    }

    /// `(‖x‖^q + |t|^q)^{1/q}` on ℝ^{d} × ℝ.
    pub fn with_scalar(inner: NormSpec, q: f64) -> Result<Self> {
        Self::product(inner, NormSpec::lq(q, 1)?, q)
    }

    pub fn blocks(block: NormSpec, count: usize, q: f64) -> Result<Self> {
        check_exponent(q)?;
        if !block.is_lq() {
            return Err(Error::Unsupported("block norms nest to depth 2 only".into()));
        }
        if count == 0 {
            return Err(Error::Parameter("block count must be positive".into()));
        }
        Ok(NormSpec::Blocks { block: Box::new(block), count, q })
    }

    fn is_lq(&self) -> bool {
        matches!(self, NormSpec::Lq { .. })
    }

    pub fn dim(&self) -> usize {
        match self {
            NormSpec::Lq { dim, .. } => *dim,
            NormSpec::Product { first, second, .. } => first.dim() + second.dim(),
            NormSpec::Blocks { block, count, .. } => block.dim() * count,
        }
    }

    /// The same norm shape in another dimension (only meaningful for ℓ^q).
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        match self {
            NormSpec::Lq { q, .. } => NormSpec::lq(*q, dim),
            other if other.dim() == dim => Ok(other.clone()),
            other => Err(Error::DimensionMismatch { expected: other.dim(), got: dim }),
        }
    }

    /// The exponent of the outermost combination.
    pub fn outer_exponent(&self) -> f64 {
        match self {
            NormSpec::Lq { q, .. } | NormSpec::Product { q, .. } | NormSpec::Blocks { q, .. } => *q,
        }
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, NormSpec::Lq { q, .. } if *q == 2.0)
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim(), got: v.len() })
        }
    }

    pub fn norm(&self, v: &[f64]) -> Result<f64> {
        self.check_dim(v)?;
        Ok(self.eval(v))
    }

    /// Norm without the dimension check; callers guarantee `v.len() == dim`.
    pub(crate) fn eval(&self, v: &[f64]) -> f64 {
        match self {
            NormSpec::Lq { q, .. } => lq_norm(*q, v),
            NormSpec::Product { first, second, q } => {
                let (x, t) = v.split_at(first.dim());
                lq_norm(*q, &[first.eval(x), second.eval(t)])
            }
            NormSpec::Blocks { block, q, .. } => {
                let parts: Vec<f64> = v.chunks(block.dim()).map(|c| block.eval(c)).collect();
                lq_norm(*q, &parts)
            }
        }
    }

    /// The dual norm `‖x‖_* = sup_{‖y‖ ≤ 1} x·y` as a `NormSpec`.
    pub fn dual(&self) -> NormSpec {
        match self {
            NormSpec::Lq { q, dim } => NormSpec::Lq { q: conjugate(*q), dim: *dim },
            NormSpec::Product { first, second, q } => NormSpec::Product {
                first: Box::new(first.dual()),
                second: Box::new(second.dual()),
                q: conjugate(*q),
            },
            NormSpec::Blocks { block, count, q } => {
                NormSpec::Blocks { block: Box::new(block.dual()), count: *count, q: conjugate(*q) }
            }
        }
    }

    pub fn dual_norm(&self, v: &[f64]) -> Result<f64> {
        self.check_dim(v)?;
        Ok(self.dual().eval(v))
    }

    /// The gradient `x*` of the norm at `v`: `‖x*‖_* = 1` and `v·x* = ‖v‖`.
    pub fn norm_gradient(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(v)?;
        if v.iter().all(|&x| x == 0.0) {
            return Err(Error::Domain("norm gradient is undefined at the origin".into()));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("norm gradient needs a finite vector".into()));
        }
        self.gradient(v).ok_or_else(|| Error::NonDifferentiable(v.to_vec()))
    }

    fn gradient(&self, v: &[f64]) -> Option<Vec<f64>> {
        match self {
            NormSpec::Lq { q, .. } => lq_gradient(*q, v),
            NormSpec::Product { first, second, q } => {
                let (x, t) = v.split_at(first.dim());
                combine_gradient(*q, &[(first.as_ref(), x), (second.as_ref(), t)])
            }
            NormSpec::Blocks { block, .. } => {
                let parts: Vec<(&NormSpec, &[f64])> =
                    v.chunks(block.dim()).map(|c| (block.as_ref(), c)).collect();
                combine_gradient(self.outer_exponent(), &parts)
            }
        }
    }
}

fn lq_norm(q: f64, v: &[f64]) -> f64 {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if q.is_infinite() || max == 0.0 {
        return max;
    }
    if q == 1.0 {
        return v.iter().map(|x| x.abs()).sum();
    }
    if q == 2.0 {
        return max * v.iter().map(|x| (x / max).powi(2)).sum::<f64>().sqrt();
    }
    max * v.iter().map(|x| (x.abs() / max).powf(q)).sum::<f64>().powf(1.0 / q)
}

fn lq_gradient(q: f64, v: &[f64]) -> Option<Vec<f64>> {
    if q == 1.0 {
        if v.iter().any(|&x| x == 0.0) {
            return None;
        }
        return Some(v.iter().map(|x| x.signum()).collect());
    }
    if q.is_infinite() {
        let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let hits: Vec<usize> = (0..v.len()).filter(|&i| v[i].abs() == max).collect();
        if hits.len() != 1 {
            return None;
        }
        let mut g = vec![0.0; v.len()];
        g[hits[0]] = v[hits[0]].signum();
        return Some(g);
    }
    let n = lq_norm(q, v);
    Some(v.iter().map(|&x| x.signum() * (x.abs() / n).powf(q - 1.0)).collect())
}

/// Gradient of `(Σ ‖x_i‖_i^q)^{1/q}` from the component gradients.
fn combine_gradient(q: f64, parts: &[(&NormSpec, &[f64])]) -> Option<Vec<f64>> {
    let values: Vec<f64> = parts.iter().map(|(n, x)| n.eval(x)).collect();
    let total = lq_norm(q, &values);
    let outer = lq_gradient(q, &values)?;
    let mut g = Vec::new();
    for ((norm, x), (&w, &value)) in parts.iter().zip(outer.iter().zip(values.iter())) {
        if w == 0.0 {
            g.extend(std::iter::repeat(0.0).take(x.len()));
        } else if value == 0.0 {
            // the outer weight is nonzero only for q = 1, where a zero block is a kink
            return None;
        } else {
            g.extend(norm.gradient(x)?.into_iter().map(|c| c * w));
        }
    }
    debug_assert!(total > 0.0);
    Some(g)
}

fn fmt_exponent(q: f64) -> String {
    if q.is_infinite() {
        "inf".into()
    } else {
        format!("{q}")
    }
}

fn parse_exponent(s: &str) -> Result<f64> {
    let s = s.trim();
    if s == "inf" || s == "∞" {
        return Ok(f64::INFINITY);
    }
    crate::parse_real(s)
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::Lq { q, dim } => write!(f, "lq:{}:dim={dim}", fmt_exponent(*q)),
            NormSpec::Product { first, second, q } => {
                write!(f, "prod({first},{second},q={})", fmt_exponent(*q))
            }
            NormSpec::Blocks { block, count, q } => {
                write!(f, "blocks({block},k={count},q={})", fmt_exponent(*q))
            }
        }
    }
}

/// Split on commas that are not inside parentheses.
pub(crate) fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

impl NormSpec {
    /// Parse the canonical text form. `default_dim` fills in a missing
    /// `dim=` on a plain ℓ^q norm (as in `domain:...,norm=lq:2`).
    pub fn parse_with_dim(s: &str, default_dim: Option<usize>) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("unrecognised norm `{s}`"));
        if let Some(rest) = s.strip_prefix("lq:") {
            let mut fields = rest.split(':');
            let q = parse_exponent(fields.next().ok_or_else(bad)?)?;
            let dim = match fields.next() {
                Some(d) => d
                    .trim()
                    .strip_prefix("dim=")
                    .ok_or_else(bad)?
                    .parse::<usize>()
                    .map_err(|_| bad())?,
                None => default_dim.ok_or_else(|| Error::Parse(format!("norm `{s}` needs dim=")))?,
            };
            if fields.next().is_some() {
                return Err(bad());
            }
            return NormSpec::lq(q, dim);
        }
        let (head, inner) = s
            .strip_suffix(')')
            .and_then(|t| t.split_once('('))
            .ok_or_else(bad)?;
        let args = split_top_level(inner);
        let keyed = |key: &str| -> Option<&str> {
            args.iter().find_map(|a| a.trim().strip_prefix(key))
        };
        let q = parse_exponent(keyed("q=").ok_or_else(bad)?)?;
        let norms: Vec<&str> = args.iter().copied().filter(|a| !a.contains('=') || a.contains("dim=")).collect();
        match head.trim() {
            "prod" => {
                let first_dim = default_dim.map(|d| d.saturating_sub(1));
                match norms.as_slice() {
                    [a] => NormSpec::with_scalar(NormSpec::parse_with_dim(a, first_dim)?, q),
                    [a, b] => NormSpec::product(
                        NormSpec::parse_with_dim(a, None)?,
                        NormSpec::parse_with_dim(b, None)?,
                        q,
                    ),
                    _ => Err(bad()),
                }
            }
            "blocks" => {
                let k: usize = keyed("k=").ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
                match norms.as_slice() {
                    [a] => NormSpec::blocks(NormSpec::parse_with_dim(a, None)?, k, q),
                    _ => Err(bad()),
                }
            }
            _ => Err(bad()),
        }
    }
}

impl FromStr for NormSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        NormSpec::parse_with_dim(s, None)
    }
}

impl Serialize for NormSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for NormSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
