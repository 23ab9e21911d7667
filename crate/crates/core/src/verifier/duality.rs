//! Two-sided functionals of the duality principles: a supremum over `g`
//! bounded by an infimum over `f`, with common extremizer.

use serde::{Deserialize, Serialize};

use super::{finite, gradient_power};
use crate::constants::gn_theta;
use crate::domain::WeightedDomain;
use crate::error::{Error, Result};
use crate::norms::conjugate;
use crate::profiles::{self, check_gn_range, Radial, RadialProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityGap {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`, ≥ 0.
    pub gap: f64,
}

const NORMALIZATION_TOL: f64 = 1e-8;

fn require_unit(dom: &WeightedDomain, f: &dyn Radial, k: f64, name: &str, tol: f64) -> Result<()> {
    let mass = profiles::power_integral(dom, f, k, tol)?;
    if (mass - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Normalization(format!("∫ {name}^{k} σ = {mass}, expected 1")));
    }
    Ok(())
}

fn moment(dom: &WeightedDomain, g: &dyn Radial, power: f64, shift: f64, tol: f64) -> Result<f64> {
    let m = dom.radial_moment(&|r| g.value(r).abs().powf(power), &g.hints(), shift, tol)?;
    finite(m, "duality moment")
}

/// `∫ g^{p*(1−1/n_a)} / (∫ ‖y‖^q g^{p*})^{1/q} ≤ p(n_a−1)/(n_a(n_a−p)) ‖∇f‖_p`
/// for `‖f‖_{p*} = ‖g‖_{p*} = 1`.
pub fn duality_gap_sobolev(
    dom: &WeightedDomain,
    p: f64,
    f: &RadialProfile,
    g: &RadialProfile,
    tol: f64,
) -> Result<DualityGap> {
    let na = dom.n_a();
    if !(p > 1.0 && p < na) {
        return Err(Error::Parameter(format!("need 1 < p < n_a = {na}, got p = {p}")));
    }
    let q = conjugate(p);
    let p_star = na * p / (na - p);
    require_unit(dom, f, p_star, "f", tol)?;
    require_unit(dom, g, p_star, "g", tol)?;
    let top = moment(dom, g, p_star * (1.0 - 1.0 / na), 0.0, tol)?;
    let spread = moment(dom, g, p_star, q, tol)?;
    let lhs = top / spread.powf(1.0 / q);
    let rhs = p * (na - 1.0) / (na * (na - p)) * gradient_power(dom, f, p, tol)?.powf(1.0 / p);
    Ok(DualityGap { lhs, rhs, gap: rhs - lhs })
}

/// The non-homogeneous GN duality inequality
/// `αp/((α−1)p_α) ∫ g^{p_α} − (μ^q/q) ∫ g^{αp}‖y‖^q
///   ≤ (αp − n_a(α−1))/((α−1)p_α) ∫ f^{p_α} + (1/(p μ^p)) ∫ |∇f|^p`
/// for `‖f‖_{αp} = ‖g‖_{αp} = 1`; equality at `μ = q^{1/q}` on the extremal.
pub fn duality_gap_gn(
    dom: &WeightedDomain,
    p: f64,
    alpha: f64,
    f: &RadialProfile,
    g: &RadialProfile,
    mu: f64,
    tol: f64,
) -> Result<DualityGap> {
    check_gn_range(dom, p, alpha)?;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Parameter(format!("need μ > 0, got {mu}")));
    }
    debug_assert!(gn_theta(dom.n_a(), p, alpha).is_finite());
    let na = dom.n_a();
    let q = conjugate(p);
    let (big, small) = (alpha * p, alpha * p - alpha + 1.0);
    require_unit(dom, f, big, "f", tol)?;
    require_unit(dom, g, big, "g", tol)?;
    let denom = (alpha - 1.0) * small;
    let lhs = big / denom * moment(dom, g, small, 0.0, tol)? - mu.powf(q) / q * moment(dom, g, big, q, tol)?;
    let rhs = (big - na * (alpha - 1.0)) / denom * moment(dom, f, small, 0.0, tol)?
        + gradient_power(dom, f, p, tol)? / (p * mu.powf(p));
    Ok(DualityGap { lhs, rhs, gap: rhs - lhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::NormSpec;
    use crate::profiles::{gn_extremal, normalize, sobolev_extremal};
    use crate::verifier::VERIFY_TOL;

    fn dom(n: usize, a: f64) -> WeightedDomain {
        WeightedDomain::half_space(n, a, NormSpec::euclidean(n)).unwrap()
    }

    #[test]
    fn sobolev_extremal_pair_closes_the_gap() {
        for (n, a, p) in [(2, 1.0, 2.0), (3, 0.5, 1.5)] {
            let d = dom(n, a);
            let h = sobolev_extremal(&d, p).unwrap();
            let r = duality_gap_sobolev(&d, p, &h, &h, VERIFY_TOL).unwrap();
            assert!(r.gap.abs() < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn counterparts_stay_below() {
        let d = dom(2, 1.0);
        let p = 2.0;
        let na = d.n_a();
        let p_star = na * p / (na - p);
        let h = sobolev_extremal(&d, p).unwrap();
        let exact = duality_gap_sobolev(&d, p, &h, &h, VERIFY_TOL).unwrap();
        // the sup side is dilation invariant, so dilates stay extremal
        for lambda in [0.5, 2.0] {
            let g = normalize(&d, &h.dilate(lambda), p_star, VERIFY_TOL).unwrap();
            let r = duality_gap_sobolev(&d, p, &h, &g, VERIFY_TOL).unwrap();
            assert!((r.lhs - exact.lhs).abs() < 1e-10, "{r:?}");
        }
        let g = RadialProfile::new(crate::Shape::Gaussian { rate: 1.0, q: 2.0 });
        let g = normalize(&d, &g, p_star, VERIFY_TOL).unwrap();
        let r = duality_gap_sobolev(&d, p, &h, &g, VERIFY_TOL).unwrap();
        assert!(r.lhs < exact.lhs - 1e-4 && r.gap > 1e-4, "{r:?}");
    }

    #[test]
    fn unnormalized_input_is_rejected() {
        let d = dom(2, 1.0);
        let h = sobolev_extremal(&d, 2.0).unwrap().scaled(1.1);
        assert!(matches!(duality_gap_sobolev(&d, 2.0, &h, &h, VERIFY_TOL), Err(Error::Normalization(_))));
    }

    #[test]
    fn gn_extremal_pair_closes_the_gap_at_mu_p() {
        let d = dom(2, 1.0);
        let p = 2.0;
        let mu_p = conjugate(p).powf(1.0 / conjugate(p));
        for alpha in [0.5, 0.9, 2.0, 3.0] {
            let h = gn_extremal(&d, p, alpha).unwrap();
            let r = duality_gap_gn(&d, p, alpha, &h, &h, mu_p, VERIFY_TOL).unwrap();
            assert!(r.gap.abs() < 1e-9, "α={alpha}: {r:?}");
            let off = duality_gap_gn(&d, p, alpha, &h, &h, 1.5 * mu_p, VERIFY_TOL).unwrap();
            assert!(off.gap > 1e-4, "α={alpha}: {off:?}");
        }
    }
}
