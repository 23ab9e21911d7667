//! Closed-form sharp constants, assembled in the log domain.

use serde::{Deserialize, Serialize};

use crate::domain::WeightedDomain;
use crate::error::{Error, Result};
use crate::norms::{conjugate, NormSpec};
use crate::profiles::check_gn_range;
use crate::special::{lbeta, lgamma_unchecked as lg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantKind {
    SobolevP,
    SobolevL1,
    GnSuper,
    GnSub,
    LogSob,
    EuclideanGn,
    EuclideanGnNeg,
}

/// Parameter branch of the Euclidean GN family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    I,
    II,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharpConstant {
    pub kind: ConstantKind,
    pub domain: WeightedDomain,
    pub p: f64,
    pub alpha: Option<f64>,
    pub log_value: f64,
    pub theta: Option<f64>,
}

impl SharpConstant {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

fn sobolev_range(dom: &WeightedDomain, p: f64) -> Result<()> {
    if !(p > 1.0 && p < dom.n_a()) {
        return Err(Error::Parameter(format!("need 1 < p < n_a = {}, got p = {p}", dom.n_a())));
    }
    Ok(())
}

/// `ln S(n, m, a, p)` from its parts, for any fractional dimension `na`
/// and `ln V_B`.
pub fn ln_sobolev(na: f64, ln_ball: f64, p: f64) -> f64 {
    ((p - 1.0) * (p - 1.0).ln() - na.ln() - (p - 1.0) * (na - p).ln()) / p
        - (lg(na / p) + lg(na * (p - 1.0) / p + 1.0) - lg(na) + ln_ball) / na
}

/// Sharp weighted Sobolev constant for `1 < p < n_a`.
pub fn sobolev_constant(dom: &WeightedDomain, p: f64) -> Result<SharpConstant> {
    sobolev_range(dom, p)?;
    Ok(SharpConstant {
        kind: ConstantKind::SobolevP,
        domain: dom.clone(),
        p,
        alpha: None,
        log_value: ln_sobolev(dom.n_a(), dom.ln_ball_measure(), p),
        theta: None,
    })
}

/// `S(n, a, 1) = n_a^{−1} V_B^{−1/n_a}`.
pub fn sobolev_l1_constant(dom: &WeightedDomain) -> Result<SharpConstant> {
    let na = dom.n_a();
    if !(na > 1.0) {
        return Err(Error::Parameter(format!("the p = 1 constant needs n_a > 1, got {na}")));
    }
    Ok(SharpConstant {
        kind: ConstantKind::SobolevL1,
        domain: dom.clone(),
        p: 1.0,
        alpha: None,
        log_value: -na.ln() - dom.ln_ball_measure() / na,
        theta: None,
    })
}

/// `P(B)/V_B^{(n_a−1)/n_a} = n_a V_B^{1/n_a}`, the isoperimetric ratio of the ball.
pub fn isoperimetric_ratio(dom: &WeightedDomain) -> f64 {
    let na = dom.n_a();
    dom.ball_perimeter() / dom.ball_measure().powf((na - 1.0) / na)
}

/// GN interpolation exponent for fractional dimension `na`.
pub fn gn_theta(na: f64, p: f64, alpha: f64) -> f64 {
    let p_star = na * p / (na - p);
    if alpha > 1.0 {
        p_star * (alpha - 1.0) / (alpha * p * (p_star - alpha * p + alpha - 1.0))
    } else {
        p_star * (1.0 - alpha) / ((p_star - alpha * p) * (alpha * p + 1.0 - alpha))
    }
}

/// Sharp weighted GN constant: `G` for `α > 1`, `N` for `α < 1`.
pub fn gn_constant(dom: &WeightedDomain, p: f64, alpha: f64) -> Result<SharpConstant> {
    check_gn_range(dom, p, alpha)?;
    let na = dom.n_a();
    let q = conjugate(p);
    let theta = gn_theta(na, p, alpha);
    let ln_v = dom.ln_ball_measure();
    let (kind, log_value) = if alpha > 1.0 {
        let y = (alpha * (p - 1.0) + 1.0) / (alpha - 1.0);
        let lv = theta / p * (y.ln() + p * (alpha - 1.0).ln() - (p - 1.0) * q.ln() - na.ln())
            + ((q * y - na).ln() - (q * y).ln()) / (alpha * p)
            + theta / na * (lg(y) - lg(y - na / q) - lg(na / q + 1.0) - ln_v);
        (ConstantKind::GnSuper, lv)
    } else {
        let z = (alpha * p - alpha + 1.0) / (1.0 - alpha);
        let lv = theta / p * (z.ln() + p * (1.0 - alpha).ln() - (p - 1.0) * q.ln() - na.ln())
            + (1.0 - theta) / (alpha * p) * ((q * z).ln() - (q * z + na).ln())
            + theta / na * (lg(z + 1.0 + na / q) - lg(z + 1.0) - lg(na / q + 1.0) - ln_v);
        (ConstantKind::GnSub, lv)
    };
    Ok(SharpConstant { kind, domain: dom.clone(), p, alpha: Some(alpha), log_value, theta: Some(theta) })
}

/// `L^p`-log-Sobolev constant `𝓛_{n,a}(p)`, `p ≥ 1`.
pub fn logsob_constant(dom: &WeightedDomain, p: f64) -> Result<SharpConstant> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Parameter(format!("need p ≥ 1, got {p}")));
    }
    let na = dom.n_a();
    let ln_v = dom.ln_ball_measure();
    let log_value = if p == 1.0 {
        -na.ln() - ln_v / na
    } else {
        let q = conjugate(p);
        (p / na).ln() + (p - 1.0) * ((p - 1.0).ln() - 1.0) - p / na * (lg(na / q + 1.0) + ln_v)
    };
    Ok(SharpConstant { kind: ConstantKind::LogSob, domain: dom.clone(), p, alpha: None, log_value, theta: None })
}

/// `(n + √(n² + 4(1+a)))/2`, where the Euclidean GN exponent `α` blows up.
pub fn branch_boundary(n: usize, a: f64) -> f64 {
    let n = n as f64;
    0.5 * (n + (n * n + 4.0 * (1.0 + a)).sqrt())
}

/// `α = (np + a + 1)/(pn + a + 1 − p²)`.
pub fn dimred_alpha(n: usize, p: f64, a: f64) -> f64 {
    let n = n as f64;
    (n * p + a + 1.0) / (p * n + a + 1.0 - p * p)
}

/// Sharp GN constant on `ℝⁿ` obtained by dimension reduction from the
/// weighted Sobolev inequality on `ℝⁿ × ℝ₊`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EuclideanGn {
    pub constant: SharpConstant,
    pub n: usize,
    pub a: f64,
    pub alpha: f64,
    pub theta: f64,
    pub branch: Branch,
    /// `y` in branch (i), `z` in branch (ii); both equal `n + (a+1−p)/p`.
    pub aux: f64,
    /// `ln ∫₀^∞ t^a (1 + t^q)^{−N} dt`, `N = n + 1 + a`.
    pub ln_s1: f64,
    /// `ln S₁ − p ln|β|`, `β = −1/(α−1)`.
    pub ln_s2: f64,
    /// `ln ∫₀^∞ t^{a+q} (1 + t^q)^{−N} dt`.
    pub ln_s3: f64,
    /// `ℝⁿ × ℝ₊` with weight `t^a` and norm `(‖x‖^q + |t|^q)^{1/q}`.
    pub lifted: WeightedDomain,
}

/// `GN(n, p, a)` for a norm on `ℝⁿ`; `p` must avoid the branch boundary.
pub fn euclidean_gn_constant(n: usize, p: f64, a: f64, norm: &NormSpec) -> Result<EuclideanGn> {
    if norm.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: norm.dim() });
    }
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::Parameter(format!("need a ≥ 0, got {a}")));
    }
    let big_n = n as f64 + 1.0 + a;
    let boundary = branch_boundary(n, a);
    let branch = if p > 1.0 && p < boundary {
        Branch::I
    } else if p > boundary && p < big_n {
        Branch::II
    } else {
        return Err(Error::Parameter(format!(
            "need 1 < p < {boundary} or {boundary} < p < {big_n} (n = {n}, a = {a}), got p = {p}"
        )));
    };
    let nf = n as f64;
    let q = conjugate(p);
    let alpha = dimred_alpha(n, p, a);
    let aux = nf + (a + 1.0 - p) / p;
    let ln_k = WeightedDomain::new(n, vec![], norm.clone())?.ln_ball_measure();
    let (theta, log_value, kind) = match branch {
        Branch::I => {
            let theta = nf * (alpha - 1.0) / (alpha * (nf * p - (alpha * p + 1.0 - alpha) * (nf - p)));
            let y = aux;
            let lv = theta / p * (y.ln() + p * (alpha - 1.0).ln() - (p - 1.0) * q.ln() - nf.ln())
                + ((q * y - nf).ln() - (q * y).ln()) / (alpha * p)
                + theta / nf * (lg(y) - ln_k - lg(nf / q + 1.0) - lg(y - nf / q));
            (theta, lv, ConstantKind::EuclideanGn)
        }
        Branch::II => {
            let theta = nf * (1.0 - alpha) / ((alpha * p - alpha + 1.0) * (nf - alpha * (nf - p)));
            let z = aux;
            let lv = theta / p * (z.ln() + p * (1.0 - alpha).ln() - (p - 1.0) * q.ln() - nf.ln())
                + (1.0 - theta) / (alpha * p) * ((q * z).ln() - (q * z - nf).ln())
                + theta / nf * (lg(z) - ln_k - lg(nf / q + 1.0) - lg(z - nf / q));
            (theta, lv, ConstantKind::EuclideanGnNeg)
        }
    };
    let ln_s1 = lbeta((a + 1.0) / q, big_n - (a + 1.0) / q)? - q.ln();
    let ln_s3 = lbeta((q + a + 1.0) / q, big_n - (q + a + 1.0) / q)? - q.ln();
    let beta = -1.0 / (alpha - 1.0);
    let ln_s2 = ln_s1 - p * beta.abs().ln();
    let lifted = WeightedDomain::half_space(n + 1, a, NormSpec::with_scalar(norm.clone(), q)?)?;
    let constant = SharpConstant { kind, domain: lifted.clone(), p, alpha: Some(alpha), log_value, theta: Some(theta) };
    Ok(EuclideanGn { constant, n, a, alpha, theta, branch, aux, ln_s1, ln_s2, ln_s3, lifted })
}
