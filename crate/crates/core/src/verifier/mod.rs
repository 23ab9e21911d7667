//! Inequality functionals evaluated on radial profiles and compared with the
//! sharp constants.
//!
//! Deficit conventions (fixed per kind, see [`QuotientReport::deficit`]):
//! homogeneous inequalities `lhs ≤ rhs` report the relative deficit
//! `rhs/lhs − 1`; the log-Sobolev inequality reports `rhs − lhs`. In both
//! cases the deficit is ≥ 0 for every admissible profile and 0 on extremals.
//! For the `α < 1` GN branch the roles of the two Lebesgue exponents swap,
//! so the norm on the left is `L^{p_α}`, not `L^{αp}`.

mod dimred;
mod duality;
mod invariance;
mod random;
mod tensorization;

use serde::{Deserialize, Serialize};

use crate::constants::{self, ConstantKind};
use crate::domain::WeightedDomain;
use crate::error::{Error, Result};
use crate::profiles::{self, Radial, RadialProfile};
use crate::quadrature::Hints;

pub use dimred::{dimension_reduction_check, euclidean_gn_quotient, DimredReport};
pub use duality::{duality_gap_gn, duality_gap_sobolev, DualityGap};
pub use invariance::{dilation_check, theta_uniqueness, translation_check, ThetaReport, TranslationReport};
pub use random::{characteristic_radius, random_bump, random_profile, sample_rng, ProfileClass};
pub use tensorization::{tensorization_limit, TensorizationPoint};

/// Quadrature tolerance used by the verifier unless overridden.
pub const VERIFY_TOL: f64 = 1e-12;
/// Slack allowed on a deficit before an inequality counts as violated.
pub const SOUNDNESS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityKind {
    /// `‖f‖_{p*} ≤ S ‖∇f‖_p` (including `p = 1` with the perimeter functional).
    Sobolev,
    /// `‖f‖_{αp} ≤ G ‖∇f‖_p^θ ‖f‖_{p_α}^{1−θ}`, `α > 1`.
    GnSuper,
    /// `‖f‖_{p_α} ≤ N ‖∇f‖_p^θ ‖f‖_{αp}^{1−θ}`, `α < 1`.
    GnSub,
    /// `∫ f^p ln f^p ≤ (n_a/p) ln(𝓛 ∫ |∇f|^p)` with `∫ f^p = 1`.
    LogSobolev,
    /// Euclidean GN on `ℝⁿ` from dimension reduction, branch (i).
    EuclideanGn,
    /// Euclidean GN with negative exponents, branch (ii).
    EuclideanGnNeg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientReport {
    pub kind: InequalityKind,
    /// Profile family name (`power`, `gn`, `spline`, ...).
    pub profile: String,
    pub lhs: f64,
    pub rhs: f64,
    /// The sharp constant of the inequality.
    pub sharp_value: f64,
    /// `rhs/lhs − 1` for homogeneous kinds, `rhs − lhs` for log-Sobolev.
    pub deficit: f64,
    /// Quadrature tolerance of each integral.
    pub quad_tol: f64,
    /// Allowed negative deficit.
    pub tolerance: f64,
    pub pass: bool,
}

impl QuotientReport {
    fn homogeneous(kind: InequalityKind, f: &RadialProfile, lhs: f64, rhs: f64, sharp: f64, quad_tol: f64) -> Self {
        let deficit = rhs / lhs - 1.0;
        QuotientReport {
            kind,
            profile: f.kind().to_string(),
            lhs,
            rhs,
            sharp_value: sharp,
            deficit,
            quad_tol,
            tolerance: SOUNDNESS_TOL,
            pass: deficit >= -SOUNDNESS_TOL,
        }
    }

    /// `|deficit| ≤ tol`, the equality certificate.
    pub fn is_equality(&self, tol: f64) -> bool {
        self.deficit.abs() <= tol
    }
}

/// An inequality with its parameters, evaluated as a functional of `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Objective {
    Sobolev { p: f64 },
    Gn { p: f64, alpha: f64 },
    LogSobolev { p: f64 },
}

impl Objective {
    pub fn evaluate(&self, dom: &WeightedDomain, f: &RadialProfile, tol: f64) -> Result<QuotientReport> {
        match *self {
            Objective::Sobolev { p } => sobolev_quotient(dom, p, f, tol),
            Objective::Gn { p, alpha } => gn_quotients(dom, p, alpha, f, tol),
            Objective::LogSobolev { p } => logsob_deficit(dom, p, f, tol),
        }
    }

    pub fn p(&self) -> f64 {
        match *self {
            Objective::Sobolev { p } | Objective::Gn { p, .. } | Objective::LogSobolev { p } => p,
        }
    }

    /// Exponent `k` of the normalization `∫ f^k σ = 1` natural to the objective.
    pub fn normalization_exponent(&self, dom: &WeightedDomain) -> f64 {
        let na = dom.n_a();
        match *self {
            Objective::Sobolev { p } if p > 1.0 => na * p / (na - p),
            Objective::Sobolev { .. } => na / (na - 1.0),
            Objective::Gn { p, alpha } => alpha * p,
            Objective::LogSobolev { p } => p,
        }
    }

    /// Smallest Lebesgue exponent the objective integrates.
    pub fn min_exponent(&self, dom: &WeightedDomain) -> f64 {
        match *self {
            Objective::Gn { p, alpha } => (alpha * p).min(alpha * p - alpha + 1.0),
            other => other.normalization_exponent(dom),
        }
    }
}

/// `(∫_Σ |f|^s σ)^{1/s}`; negative `s` requires `f > 0` everywhere.
pub fn lebesgue_norm(dom: &WeightedDomain, f: &dyn Radial, s: f64, tol: f64) -> Result<f64> {
    if s == 0.0 || !s.is_finite() {
        return Err(Error::Parameter(format!("Lebesgue exponent must be finite and non-zero, got {s}")));
    }
    if s < 0.0 && f.support_radius().is_finite() {
        return Err(Error::Divergence(format!("L^{s} norm of a compactly supported profile")));
    }
    let mass = profiles::power_integral(dom, f, s, tol)?;
    finite(mass.powf(1.0 / s), "Lebesgue norm")
}

/// `∫_Σ |∇f|^p σ` with `|∇f| = |f′(r)|`. For `p = 1` the jumps of `f`
/// contribute their weighted perimeter `|jump|·n_a V_B ρ^{n_a−1}`.
pub fn gradient_power(dom: &WeightedDomain, f: &dyn Radial, p: f64, tol: f64) -> Result<f64> {
    let jumps = f.jumps();
    if p != 1.0 && !jumps.is_empty() {
        return Err(Error::Divergence("a profile with jumps has no finite L^p gradient for p > 1".into()));
    }
    let smooth = dom.radial_moment(&|r| f.derivative(r).abs().powf(p), &f.hints(), 0.0, tol)?;
    let na = dom.n_a();
    let edges: f64 = jumps.iter().map(|(rho, j)| j.abs() * dom.ball_perimeter() * rho.powf(na - 1.0)).sum();
    finite(smooth + edges, "gradient integral")
}

/// `‖∇f‖_{L^p(Σ,σ)}`.
pub fn gradient_norm(dom: &WeightedDomain, f: &dyn Radial, p: f64, tol: f64) -> Result<f64> {
    Ok(gradient_power(dom, f, p, tol)?.powf(1.0 / p))
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Divergence(format!("{what} is {v}")))
    }
}

/// Sobolev inequality `‖f‖_{p*} ≤ S ‖∇f‖_p`; `p = 1` uses the isoperimetric
/// constant and counts jumps through the perimeter functional.
pub fn sobolev_quotient(dom: &WeightedDomain, p: f64, f: &RadialProfile, tol: f64) -> Result<QuotientReport> {
    let sharp = if p == 1.0 { constants::sobolev_l1_constant(dom)? } else { constants::sobolev_constant(dom, p)? };
    let na = dom.n_a();
    let p_star = na * p / (na - p);
    let lhs = lebesgue_norm(dom, f, p_star, tol)?;
    let grad = gradient_norm(dom, f, p, tol)?;
    let s = sharp.value();
    Ok(QuotientReport::homogeneous(InequalityKind::Sobolev, f, lhs, s * grad, 1.0 / s, tol))
}

/// Both GN branches. `α > 1`: `‖f‖_{αp} ≤ G‖∇f‖^θ‖f‖_{p_α}^{1−θ}`;
/// `α < 1`: `‖f‖_{p_α} ≤ N‖∇f‖^θ‖f‖_{αp}^{1−θ}`, `p_α = αp − α + 1`.
pub fn gn_quotients(dom: &WeightedDomain, p: f64, alpha: f64, f: &RadialProfile, tol: f64) -> Result<QuotientReport> {
    let sharp = constants::gn_constant(dom, p, alpha)?;
    let theta = sharp.theta.expect("GN constants carry θ");
    let (big, small) = (alpha * p, alpha * p - alpha + 1.0);
    let grad = gradient_norm(dom, f, p, tol)?;
    let n_big = lebesgue_norm(dom, f, big, tol)?;
    let n_small = lebesgue_norm(dom, f, small, tol)?;
    let c = sharp.value();
    let (kind, lhs, other) = match sharp.kind {
        ConstantKind::GnSuper => (InequalityKind::GnSuper, n_big, n_small),
        _ => (InequalityKind::GnSub, n_small, n_big),
    };
    let rhs = c * grad.powf(theta) * other.powf(1.0 - theta);
    Ok(QuotientReport::homogeneous(kind, f, lhs, rhs, c, tol))
}

/// Log-Sobolev deficit `(n_a/p) ln(𝓛 ∫|∇f|^p) − ∫ f^p ln f^p`; `f` is
/// renormalized in `L^p` first.
pub fn logsob_deficit(dom: &WeightedDomain, p: f64, f: &RadialProfile, tol: f64) -> Result<QuotientReport> {
    let sharp = constants::logsob_constant(dom, p)?;
    let mass = profiles::power_integral(dom, f, p, tol)?;
    let f = if (mass - 1.0).abs() > 1e-10 { profiles::normalize(dom, f, p, tol)? } else { f.clone() };
    let entropy = dom.radial_moment(
        &|r| {
            let v = f.value(r).abs().powf(p);
            if v > 0.0 {
                v * v.ln()
            } else {
                0.0
            }
        },
        // the entropy may cancel to zero; ∫ f^p σ = 1 sets its scale
        &Hints { scale: Some(1.0 / dom.ball_perimeter()), ..f.hints() },
        0.0,
        tol,
    )?;
    let lhs = finite(entropy, "entropy integral")?;
    let rhs = dom.n_a() / p * (sharp.log_value + gradient_power(dom, &f, p, tol)?.ln());
    let deficit = rhs - lhs;
    Ok(QuotientReport {
        kind: InequalityKind::LogSobolev,
        profile: f.kind().to_string(),
        lhs,
        rhs,
        sharp_value: sharp.value(),
        deficit,
        quad_tol: tol,
        tolerance: SOUNDNESS_TOL,
        pass: deficit >= -SOUNDNESS_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::NormSpec;
    use crate::profiles::{gn_extremal, indicator_extremal, logsob_extremal, perturb, sobolev_extremal, Bump};

    fn dom(n: usize, a: f64, q: f64) -> WeightedDomain {
        WeightedDomain::half_space(n, a, NormSpec::lq(q, n).unwrap()).unwrap()
    }

    #[test]
    fn sobolev_extremal_is_an_equality() {
        for (n, a, p, q) in [(2, 1.0, 2.0, 2.0), (3, 0.5, 1.5, 4.0), (1, 2.5, 3.0, 2.0)] {
            let d = dom(n, a, q);
            let h = sobolev_extremal(&d, p).unwrap();
            let r = sobolev_quotient(&d, p, &h, VERIFY_TOL).unwrap();
            assert!(r.is_equality(1e-10), "{n} {a} {p}: {}", r.deficit);
        }
    }

    #[test]
    fn perturbed_sobolev_extremal_is_strict() {
        let d = dom(2, 1.0, 2.0);
        let h = sobolev_extremal(&d, 2.0).unwrap();
        let bump = Bump { center: 1.0, width: 0.5, amplitude: 0.05 };
        let g = perturb(&d, &h, bump, 4.0, VERIFY_TOL).unwrap();
        let r = sobolev_quotient(&d, 2.0, &g, VERIFY_TOL).unwrap();
        assert!(r.deficit > 1e-6 && r.pass);
    }

    #[test]
    fn indicator_meets_the_l1_constant() {
        let d = dom(3, 2.0, 2.0);
        let r = sobolev_quotient(&d, 1.0, &indicator_extremal(&d), VERIFY_TOL).unwrap();
        assert!(r.is_equality(1e-12), "{}", r.deficit);
        let g = RadialProfile::new(crate::Shape::Gaussian { rate: 1.0, q: 2.0 });
        assert!(sobolev_quotient(&d, 1.0, &g, VERIFY_TOL).unwrap().deficit > 1e-3);
    }

    #[test]
    fn gn_extremals_are_equalities() {
        let d = dom(2, 1.0, 2.0);
        for alpha in [0.5, 0.9, 2.0, 3.0] {
            let h = gn_extremal(&d, 2.0, alpha).unwrap();
            let r = gn_quotients(&d, 2.0, alpha, &h, VERIFY_TOL).unwrap();
            assert!(r.is_equality(1e-9), "α={alpha}: {}", r.deficit);
            let want = if alpha > 1.0 { InequalityKind::GnSuper } else { InequalityKind::GnSub };
            assert_eq!(r.kind, want);
        }
    }

    #[test]
    fn gn_rejects_alpha_one() {
        let d = dom(2, 1.0, 2.0);
        let h = sobolev_extremal(&d, 2.0).unwrap();
        assert!(matches!(gn_quotients(&d, 2.0, 1.0, &h, VERIFY_TOL), Err(Error::Parameter(_))));
    }

    #[test]
    fn logsob_extremals_are_equalities() {
        let d = dom(2, 1.0, 2.0);
        for p in [1.5, 2.0, 3.0] {
            for s in [0.5, 1.0, 3.0] {
                let h = logsob_extremal(&d, p, s).unwrap();
                let r = logsob_deficit(&d, p, &h, VERIFY_TOL).unwrap();
                assert!(r.deficit.abs() < 1e-9, "p={p} s={s}: {}", r.deficit);
            }
        }
        for s in [0.5, 2.0] {
            let h = logsob_extremal(&d, 1.0, s).unwrap();
            assert!(logsob_deficit(&d, 1.0, &h, VERIFY_TOL).unwrap().deficit.abs() < 1e-12);
        }
    }

    #[test]
    fn sobolev_extremal_has_positive_logsob_deficit() {
        let d = dom(3, 2.0, 2.0);
        let h = sobolev_extremal(&d, 2.0).unwrap();
        assert!(logsob_deficit(&d, 2.0, &h, VERIFY_TOL).unwrap().deficit > 1e-3);
    }
}
