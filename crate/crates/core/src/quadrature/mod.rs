//! Numerical integration: adaptive Gauss–Kronrod on the half line, a
//! low-dimensional tensor rule with Gauss–Jacobi panels for monomial weights,
//! and a seeded Monte Carlo oracle over weighted orthants.

mod jacobi;
mod kronrod;
mod monte_carlo;
mod tensor;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use jacobi::{gauss_jacobi, GaussRule};
pub use monte_carlo::{monte_carlo_sigma, McEstimate};
pub use tensor::integrate_tensor;

/// Default relative tolerance of the 1-D integrators.
pub const DEFAULT_TOL: f64 = 1e-11;
/// Default Monte Carlo seed, recorded in every output.
pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error: f64,
    pub subdivisions: usize,
    pub converged: bool,
}

impl QuadratureResult {
    fn zero() -> Self {
        QuadratureResult { value: 0.0, abs_error: 0.0, subdivisions: 0, converged: true }
    }

    fn add(self, other: QuadratureResult) -> Self {
        QuadratureResult {
            value: self.value + other.value,
            abs_error: self.abs_error + other.abs_error,
            subdivisions: self.subdivisions + other.subdivisions,
            converged: self.converged && other.converged,
        }
    }
}

/// What an integrand on `[0, ∞)` is known to look like.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Hints {
    /// The integrand vanishes beyond this radius.
    pub support: Option<f64>,
    /// Behaviour `(support − r)^β` at the support edge.
    pub edge_exponent: Option<f64>,
    /// Interior points where the integrand may have kinks or jumps.
    pub breakpoints: Vec<f64>,
    /// Magnitude the error is measured against when the integral itself
    /// may cancel to (near) zero: the target is never below `tol·scale`.
    pub scale: Option<f64>,
}

/// Adaptive Gauss–Kronrod on `[a, b]` with relative tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    check_tol(tol)?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Parameter("finite interval expected".into()));
    }
    kronrod::adaptive(f, a, b, &[], tol, 0.0)
}

/// [`integrate`] with an absolute error target of at least `floor`.
pub(crate) fn integrate_floor(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, floor: f64) -> Result<QuadratureResult> {
    check_tol(tol)?;
    kronrod::adaptive(f, a, b, &[], tol, floor)
}

/// `∫₀^∞ f(r) dr` with no prior knowledge of `f`.
pub fn integrate_halfline(f: &dyn Fn(f64) -> f64, tol: f64) -> Result<QuadratureResult> {
    integrate_halfline_with(f, &Hints::default(), tol)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("tolerance must lie in (0, 1), got {tol}")))
    }
}

/// `∫₀^∞ f(r) dr` using support, edge and breakpoint hints.
///
/// The infinite case integrates `[0, R]` adaptively, where `R` is where `|f|`
/// first falls below 1e-3 of its maximum on a coarse log grid, and maps the
/// tail through `r = R·exp(s/(1−s))`.
pub fn integrate_halfline_with(f: &dyn Fn(f64) -> f64, hints: &Hints, tol: f64) -> Result<QuadratureResult> {
    check_tol(tol)?;
    let floor = hints.scale.map_or(0.0, |s| tol * s.abs());
    if let Some(support) = hints.support.filter(|s| s.is_finite()) {
        return integrate_compact(f, support, hints, tol, floor);
    }
    let Some((split, mut breaks, peak)) = split_radius(f, &hints.breakpoints) else {
        return Ok(QuadratureResult::zero());
    };
    check_tail(f, split, peak * split)?;
    breaks.extend_from_slice(&hints.breakpoints);
    let head = kronrod::adaptive(f, 0.0, split, &breaks, tol, 0.5 * floor)?;
    let tail = |s: f64| {
        let u = s / (1.0 - s);
        let r = split * u.exp();
        if !r.is_finite() {
            return 0.0;
        }
        let fr = f(r);
        // far out, products like r^k·e^{−r} evaluate to ∞·0
        if fr == 0.0 || (fr.is_nan() && r > split * 1e50) {
            0.0
        } else {
            fr * r / ((1.0 - s) * (1.0 - s))
        }
    };
    let tail = kronrod::adaptive(&tail, 0.0, 1.0, &[], tol, 0.5 * floor)?;
    Ok(head.add(tail))
}

fn integrate_compact(f: &dyn Fn(f64) -> f64, support: f64, hints: &Hints, tol: f64, floor: f64) -> Result<QuadratureResult> {
    if support <= 0.0 {
        return Ok(QuadratureResult::zero());
    }
    let breaks: Vec<f64> = hints.breakpoints.iter().copied().filter(|&b| b > 0.0 && b < support).collect();
    match hints.edge_exponent {
        Some(beta) if beta > -1.0 && beta.fract() != 0.0 => {
            let last = breaks.iter().copied().fold(0.5 * support, f64::max);
            let head = kronrod::adaptive(f, 0.0, last, &breaks, tol, 0.5 * floor)?;
            // r = R(1 − u^{1/(1+β)}) turns (R − r)^β dr into a smooth measure
            let power = 1.0 / (1.0 + beta);
            let top = (1.0 - last / support).powf(1.0 + beta);
            // close to the edge R − d loses digits; below d₀ = √ε·R the
            // leading power law is more accurate than the rounded value
            let d0 = f64::EPSILON.sqrt() * support;
            let edge = |u: f64| {
                let d = support * u.powf(power);
                if d < d0 {
                    f(support - d0) * (support / d0).powf(beta) * support * power
                } else {
                    f(support - d) * support * power * u.powf(power - 1.0)
                }
            };
            let edge = kronrod::adaptive(&edge, 0.0, top, &[], tol, 0.5 * floor)?;
            Ok(head.add(edge))
        }
        _ => kronrod::adaptive(f, 0.0, support, &breaks, tol, floor),
    }
}

/// Coarse log-grid scan for the radius beyond which `|f|` is below 1e-3 of
/// its maximum, together with initial cuts at the grid points bracketing the
/// bulk of the integrand, and the peak value. `None` when `f` vanishes on
/// the whole grid.
fn split_radius(f: &dyn Fn(f64) -> f64, breaks: &[f64]) -> Option<(f64, Vec<f64>, f64)> {
    let grid: Vec<f64> = (-60..=60).map(|j| 10f64.powf(j as f64 / 10.0)).collect();
    let values: Vec<f64> = grid.iter().map(|&r| f(r).abs()).collect();
    let (peak, max) = values
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    if max == 0.0 {
        return None;
    }
    let Some(cut) = (peak..grid.len()).find(|&i| values[i] < 1e-3 * max) else {
        // still in the bulk at the end of the grid: keep walking outwards
        let far = (61..=1500)
            .map(|j| 10f64.powf(j as f64 / 10.0))
            .find(|&r| f(r).abs() < 1e-3 * max)
            .unwrap_or(1e150);
        let start = (0..=peak).find(|&i| values[i] >= 1e-3 * max).unwrap_or(peak).saturating_sub(1);
        let cuts = (start..grid.len()).step_by(5).map(|i| grid[i]).collect();
        return Some((far.max(breaks.iter().copied().fold(0.0, f64::max)), cuts, max));
    };
    let start = (0..=peak).find(|&i| values[i] >= 1e-3 * max).unwrap_or(peak).saturating_sub(1);
    let mut cuts: Vec<f64> = (start..cut).step_by(5).map(|i| grid[i]).collect();
    cuts.extend(grid[peak.saturating_sub(1)..(peak + 2).min(grid.len())].iter());
    let floor = breaks.iter().copied().fold(0.0, f64::max);
    Some((grid[cut].max(floor), cuts, max))
}

/// Rejects integrands whose tail `r·f(r)` does not decay. Tails below
/// `1e-30·scale` are treated as noise.
fn check_tail(f: &dyn Fn(f64) -> f64, split: f64, scale: f64) -> Result<()> {
    let (r1, r2) = (split * 1e4, split * 1e8);
    let t1 = (r1 * f(r1)).abs();
    let t2 = (r2 * f(r2)).abs();
    if !t1.is_finite() || !t2.is_finite() || (t2 > 1e-30 * scale && t2 >= 0.9 * t1) {
        return Err(Error::Divergence(format!(
            "integrand tail does not decay: r·f(r) = {t1:e} at r = {r1:e}, {t2:e} at r = {r2:e}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn halfline_examples() {
        let r = integrate_halfline(&|r: f64| (-r).exp(), DEFAULT_TOL).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let r = integrate_halfline(&|r: f64| r.powi(3) * (-r).exp(), DEFAULT_TOL).unwrap();
        assert!((r.value - 6.0).abs() < 6e-12);
        // B(3/2, 3/2)/2 = π/16
        let r = integrate_halfline(&|r: f64| r * r * (1.0 + r * r).powi(-3), DEFAULT_TOL).unwrap();
        assert!((r.value - PI / 16.0).abs() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn divergence_is_reported() {
        let err = integrate_halfline(&|r: f64| 1.0 / (1.0 + r), 1e-8).unwrap_err();
        assert!(matches!(err, Error::Divergence(_)));
    }

    #[test]
    fn step_function() {
        for c in [0.3, 0.123456, 0.7071067811865476] {
            let r = integrate(&|t: f64| if t <= c { 1.0 } else { 0.0 }, 0.0, 1.0, 1e-10).unwrap();
            assert!((r.value - c).abs() < 1e-9, "{c}: {r:?}");
        }
    }

    #[test]
    fn zero_integrand() {
        assert_eq!(integrate_halfline(&|_| 0.0, 1e-8).unwrap().value, 0.0);
    }

    #[test]
    fn compact_support_with_singular_edge() {
        // ∫₀¹ (1 − r)^{-1/2} dr = 2
        let hints = Hints { support: Some(1.0), edge_exponent: Some(-0.5), ..Default::default() };
        let r = integrate_halfline_with(&|r: f64| (1.0 - r).powf(-0.5), &hints, 1e-12).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12, "{r:?}");
        assert!(r.subdivisions < 10);
    }

    #[test]
    fn far_away_mass_is_found() {
        let r = integrate_halfline(&|r: f64| (-(r - 1e3).powi(2) / 2.0).exp(), 1e-10).unwrap();
        assert!((r.value - (2.0 * PI).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn bad_tolerance() {
        assert!(matches!(integrate_halfline(&|r: f64| (-r).exp(), 0.0), Err(Error::Parameter(_))));
    }
}
