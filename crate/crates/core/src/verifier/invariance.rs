//! Symmetries of the quotients: dilation, the scaling exponent θ, and
//! translation along the unweighted coordinates.

use serde::{Deserialize, Serialize};

use super::{gradient_norm, lebesgue_norm, Objective};
use crate::constants::sobolev_constant;
use crate::domain::WeightedDomain;
use crate::error::{Error, Result};
use crate::profiles::{Radial, RadialProfile};
use crate::quadrature::integrate_tensor;

/// Largest `|Q(f(λ·))/Q(f) − 1|` over `lambdas`, `Q = rhs/lhs`.
pub fn dilation_check(
    dom: &WeightedDomain,
    objective: Objective,
    f: &RadialProfile,
    lambdas: &[f64],
    tol: f64,
) -> Result<f64> {
    if matches!(objective, Objective::LogSobolev { .. }) {
        return Err(Error::Unsupported("the log-Sobolev deficit is not dilation invariant".into()));
    }
    let ratio = |g: &RadialProfile| objective.evaluate(dom, g, tol).map(|r| r.rhs / r.lhs);
    let base = ratio(f)?;
    let mut worst = 0.0f64;
    for &lambda in lambdas {
        worst = worst.max((ratio(&f.dilate(lambda))? / base - 1.0).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaReport {
    pub theta_formula: f64,
    /// The unique `θ` with `d/dλ ln(‖f_λ‖_l / (‖∇f_λ‖^θ ‖f_λ‖_o^{1−θ})) = 0`.
    pub theta_solved: f64,
    /// `ln` ratio variation over the λ sweep with `θ ∓ 0.01`.
    pub shifted_variation: [f64; 2],
}

/// Fit the scaling slopes of the three norms over `λ ∈ {1/2, 1, 2}` and solve
/// for the exponent that makes `‖f‖_l ≤ C‖∇f‖_p^θ‖f‖_o^{1−θ}` dilation
/// invariant.
pub fn theta_uniqueness(
    dom: &WeightedDomain,
    p: f64,
    lhs_exponent: f64,
    other_exponent: f64,
    theta_formula: f64,
    f: &RadialProfile,
    tol: f64,
) -> Result<ThetaReport> {
    let lambdas = [0.5, 1.0, 2.0];
    let mut logs = [[0.0; 3]; 3];
    for (i, &lambda) in lambdas.iter().enumerate() {
        let g = f.dilate(lambda);
        logs[0][i] = lebesgue_norm(dom, &g, lhs_exponent, tol)?.ln();
        logs[1][i] = gradient_norm(dom, &g, p, tol)?.ln();
        logs[2][i] = lebesgue_norm(dom, &g, other_exponent, tol)?.ln();
    }
    // least-squares slope against ln λ = (−ln 2, 0, ln 2)
    let slope = |y: &[f64; 3]| (y[2] - y[0]) / (2.0 * 2f64.ln());
    let (sl, sg, so) = (slope(&logs[0]), slope(&logs[1]), slope(&logs[2]));
    let theta_solved = (sl - so) / (sg - so);
    let variation = |t: f64| ((sl - t * sg - (1.0 - t) * so) * 4f64.ln()).abs();
    Ok(ThetaReport {
        theta_formula,
        theta_solved,
        shifted_variation: [variation(theta_formula - 0.01), variation(theta_formula + 0.01)],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslationReport {
    pub shift: Vec<f64>,
    /// `S·‖∇f‖_p/‖f‖_{p*}` for the centred profile (tensor quadrature).
    pub centred: f64,
    /// The same for `f(‖z − shift‖)` restricted to `Σ`.
    pub shifted: f64,
}

impl TranslationReport {
    pub fn rel_change(&self) -> f64 {
        self.shifted / self.centred - 1.0
    }
}

fn tensor_sobolev_ratio(dom: &WeightedDomain, p: f64, f: &RadialProfile, shift: &[f64], tol: f64) -> Result<f64> {
    let na = dom.n_a();
    let p_star = na * p / (na - p);
    let norm = dom.norm();
    let bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); dom.n()];
    let radius = |z: &[f64]| {
        let d: Vec<f64> = z.iter().zip(shift).map(|(x, s)| x - s).collect();
        norm.eval(&d)
    };
    let mass = integrate_tensor(dom, &|z| f.value(radius(z)).abs().powf(p_star), &bounds, tol)?.value;
    let grad = integrate_tensor(dom, &|z| f.derivative(radius(z)).abs().powf(p), &bounds, tol)?.value;
    let s = sobolev_constant(dom, p)?.value();
    Ok(s * grad.powf(1.0 / p) / mass.powf(1.0 / p_star))
}

/// Sobolev quotient of `f(‖z − shift‖)` by tensor quadrature (`n ≤ 3`).
/// Shifts along free axes leave it unchanged; a shift into a weighted axis
/// moves mass off the extremal configuration and raises it.
pub fn translation_check(
    dom: &WeightedDomain,
    p: f64,
    f: &RadialProfile,
    shift: &[f64],
    tol: f64,
) -> Result<TranslationReport> {
    if shift.len() != dom.n() {
        return Err(Error::DimensionMismatch { expected: dom.n(), got: shift.len() });
    }
    if dom.weighted_axes().iter().any(|&i| shift[i] < 0.0) {
        return Err(Error::Parameter("a shift along a weighted axis must be ≥ 0".into()));
    }
    let centred = tensor_sobolev_ratio(dom, p, f, &vec![0.0; dom.n()], tol)?;
    let shifted = tensor_sobolev_ratio(dom, p, f, shift, tol)?;
    Ok(TranslationReport { shift: shift.to_vec(), centred, shifted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::gn_theta;
    use crate::norms::NormSpec;
    use crate::profiles::{gn_extremal, sobolev_extremal};
    use crate::verifier::VERIFY_TOL;

    fn dom(n: usize, a: f64) -> WeightedDomain {
        WeightedDomain::half_space(n, a, NormSpec::euclidean(n)).unwrap()
    }

    #[test]
    fn quotients_are_dilation_invariant() {
        let d = dom(2, 1.0);
        let h = sobolev_extremal(&d, 2.0).unwrap();
        let w = dilation_check(&d, Objective::Sobolev { p: 2.0 }, &h, &[0.5, 2.0, 3.7], VERIFY_TOL).unwrap();
        assert!(w < 1e-10, "{w:e}");
        let g = gn_extremal(&d, 2.0, 0.5).unwrap();
        let w = dilation_check(&d, Objective::Gn { p: 2.0, alpha: 0.5 }, &g, &[0.5, 2.0], VERIFY_TOL).unwrap();
        assert!(w < 1e-10, "{w:e}");
    }

    #[test]
    fn theta_is_the_unique_scaling_exponent() {
        let d = dom(2, 1.0);
        let p = 2.0;
        let f = RadialProfile::new(crate::Shape::Gaussian { rate: 0.7, q: 1.5 });
        for alpha in [0.5, 2.0] {
            let theta = gn_theta(d.n_a(), p, alpha);
            let (big, small) = (alpha * p, alpha * p - alpha + 1.0);
            let (l, o) = if alpha > 1.0 { (big, small) } else { (small, big) };
            let r = theta_uniqueness(&d, p, l, o, theta, &f, VERIFY_TOL).unwrap();
            assert!((r.theta_solved - theta).abs() < 1e-10, "{r:?}");
            assert!(r.shifted_variation.iter().all(|v| *v > 1e-3), "{r:?}");
        }
    }

    #[test]
    fn translation_along_free_axis_is_invisible() {
        let d = dom(2, 1.0);
        let h = sobolev_extremal(&d, 2.0).unwrap();
        let r = translation_check(&d, 2.0, &h, &[0.7, 0.0], 1e-9).unwrap();
        assert!((r.centred - 1.0).abs() < 1e-6, "{r:?}");
        assert!(r.rel_change().abs() < 1e-6, "{r:?}");
        let r = translation_check(&d, 2.0, &h, &[0.0, 0.5], 1e-9).unwrap();
        assert!(r.rel_change() > 1e-4, "{r:?}");
    }
}
