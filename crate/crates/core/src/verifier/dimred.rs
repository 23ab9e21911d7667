//! Dimension reduction: the weighted Sobolev inequality on `ℝⁿ × ℝ₊`
//! restricted to `F(x, t) = (f(x)^{−p/(N−p)} + t^q)^{−(N−p)/p}` collapses to a
//! GN inequality on `ℝⁿ`. The constant is reassembled here from the Sobolev
//! constant and the three Beta integrals, then optimized over dilations.

use serde::{Deserialize, Serialize};

use super::{gradient_norm, lebesgue_norm, InequalityKind, QuotientReport};
use crate::constants::{euclidean_gn_constant, sobolev_constant, Branch, EuclideanGn};
use crate::domain::WeightedDomain;
use crate::error::{Error, Result};
use crate::norms::{conjugate, NormSpec};
use crate::profiles::{RadialProfile, Shape};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimredReport {
    pub n: usize,
    pub p: f64,
    pub a: f64,
    pub alpha: f64,
    pub branch: Branch,
    pub theta: f64,
    /// Closed-form `GN(n, a, p)`.
    pub formula: f64,
    /// `GN` reassembled from `S(n+1, a, p)`, `S₁`, `S₂`, `S₃`.
    pub assembled: f64,
    pub assembled_theta: f64,
    /// `|assembled/formula − 1|`.
    pub assembly_error: f64,
    /// Quotient of `(1 + ‖x‖^q)^{−1/(α−1)}` against the formula constant.
    pub extremal: QuotientReport,
    /// For `a = 0`: `α ∈ (1, (np+1)/(np+1−p²)]`.
    pub in_classical_range: Option<bool>,
}

/// Reassemble `GN(n, a, p)` from the lifted Sobolev constant and the Beta
/// integrals, minimizing the resulting two-term bound over dilations.
/// Returns `(C, θ)`.
fn assemble(e: &EuclideanGn, p: f64) -> Result<(f64, f64)> {
    let big_n = e.n as f64 + 1.0 + e.a;
    let q = conjugate(p);
    let alpha = e.alpha;
    let kappa = (big_n - p) / big_n;
    let ln_sn = sobolev_constant(&e.lifted, p)?.log_value;
    let common = p * ln_sn + p * ((big_n - p) / p).ln() - kappa * e.ln_s1;
    let ln_a = common + e.ln_s2;
    let ln_b = common + p * q.ln() + e.ln_s3;
    let p_alpha = alpha * p - alpha + 1.0;
    let e1 = p - alpha * p * kappa;
    let e2 = p_alpha - alpha * p * kappa;
    let u = -e2 / (e1 - e2);
    let v = e1 / (e1 - e2);
    let ratio_a = (e2 - e1) / e2;
    let ratio_b = -e2 / e1;
    if !(ratio_a > 0.0 && ratio_b > 0.0) {
        return Err(Error::Domain(format!("λ-optimization has no interior minimum (e₁ = {e1}, e₂ = {e2})")));
    }
    let ln_kc = ratio_a.ln() + e1 / (e1 - e2) * ratio_b.ln() + u * ln_a + v * ln_b;
    Ok(match e.branch {
        Branch::I => ((ln_kc / (alpha * p * kappa)).exp(), u * p / (alpha * p * kappa)),
        Branch::II => ((-ln_kc / (v * p_alpha)).exp(), -u * p / (v * p_alpha)),
    })
}

/// Euclidean GN quotient on `(ℝⁿ, norm)`. Branch (i):
/// `‖f‖_{αp} ≤ GN ‖∇f‖^θ ‖f‖_{p_α}^{1−θ}`; branch (ii), where `α < 0` and both
/// Lebesgue exponents are negative: `‖f‖_{p_α} ≤ GN ‖∇f‖^θ ‖f‖_{αp}^{1−θ}`.
pub fn euclidean_gn_quotient(e: &EuclideanGn, norm: &NormSpec, f: &RadialProfile, tol: f64) -> Result<QuotientReport> {
    let p = e.constant.p;
    let alpha = e.alpha;
    let space = WeightedDomain::new(e.n, vec![], norm.clone())?;
    let (big, small) = (alpha * p, alpha * p - alpha + 1.0);
    let grad = gradient_norm(&space, f, p, tol)?;
    let n_big = lebesgue_norm(&space, f, big, tol)?;
    let n_small = lebesgue_norm(&space, f, small, tol)?;
    let (kind, lhs, other) = match e.branch {
        Branch::I => (InequalityKind::EuclideanGn, n_big, n_small),
        Branch::II => (InequalityKind::EuclideanGnNeg, n_small, n_big),
    };
    let c = e.constant.value();
    let rhs = c * grad.powf(e.theta) * other.powf(1.0 - e.theta);
    Ok(QuotientReport::homogeneous(kind, f, lhs, rhs, c, tol))
}

/// Compare the assembled constant with the closed form and evaluate the
/// quotient of the extremal `(1 + ‖x‖^q)^{−1/(α−1)}`.
pub fn dimension_reduction_check(n: usize, p: f64, a: f64, norm: &NormSpec, tol: f64) -> Result<DimredReport> {
    let e = euclidean_gn_constant(n, p, a, norm)?;
    let (assembled, assembled_theta) = assemble(&e, p)?;
    let formula = e.constant.value();
    let q = conjugate(p);
    let h = RadialProfile::new(Shape::Power { shift: 1.0, q, exponent: 1.0 / (e.alpha - 1.0) });
    let extremal = euclidean_gn_quotient(&e, norm, &h, tol)?;
    let nf = n as f64;
    let in_classical_range = (a == 0.0).then(|| {
        let top = (nf * p + 1.0) / (nf * p + 1.0 - p * p);
        e.alpha > 1.0 && e.alpha <= top * (1.0 + 1e-12)
    });
    Ok(DimredReport {
        n,
        p,
        a,
        alpha: e.alpha,
        branch: e.branch,
        theta: e.theta,
        formula,
        assembled,
        assembled_theta,
        assembly_error: (assembled / formula - 1.0).abs(),
        extremal,
        in_classical_range,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verifier::VERIFY_TOL;

    #[test]
    fn assembly_matches_formula_on_both_branches() {
        for (n, p, a) in [(2, 1.5, 1.0), (3, 2.0, 0.0), (1, 1.5, 0.0), (1, 2.5, 1.0), (2, 2.7, 0.0)] {
            let r = dimension_reduction_check(n, p, a, &NormSpec::euclidean(n), VERIFY_TOL).unwrap();
            assert!(r.assembly_error < 1e-10, "({n},{p},{a}): {r:?}");
            assert!((r.assembled_theta - r.theta).abs() < 1e-12, "({n},{p},{a}): {r:?}");
            assert!(r.extremal.is_equality(1e-9), "({n},{p},{a}): {}", r.extremal.deficit);
        }
    }

    #[test]
    fn three_dimensional_point_is_the_classical_endpoint() {
        let r = dimension_reduction_check(3, 2.0, 0.0, &NormSpec::euclidean(3), VERIFY_TOL).unwrap();
        assert_eq!(r.in_classical_range, Some(true));
        assert!((r.alpha - 7.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn non_euclidean_norm() {
        let norm = NormSpec::lq(3.0, 2).unwrap();
        let r = dimension_reduction_check(2, 1.5, 1.0, &norm, VERIFY_TOL).unwrap();
        assert!(r.assembly_error < 1e-10 && r.extremal.is_equality(1e-9), "{r:?}");
    }

    #[test]
    fn outside_both_branches_is_an_error() {
        assert!(dimension_reduction_check(1, 2.0, 0.0, &NormSpec::euclidean(1), VERIFY_TOL).is_err());
    }
}
