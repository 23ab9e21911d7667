//! Iterated adaptive quadrature over boxes in weighted orthants of dimension
//! at most three. A weighted coordinate starting at 0 gets a Gauss–Jacobi
//! panel next to the origin, so `t^a` never has to be resolved by bisection.

use std::cell::Cell;

use super::jacobi::{gauss_jacobi, GaussRule};
use super::{integrate_halfline_with, kronrod, Hints, QuadratureResult};
use crate::domain::WeightedDomain;
use crate::error::{Error, Result};

struct Axis {
    lo: f64,
    hi: f64,
    exponent: f64,
    rules: Option<(GaussRule, GaussRule)>,
}

/// `∫_box f(z) σ(z) dz` over `bounds` (one `(lo, hi)` per axis, infinite
/// ends allowed; weighted axes are clipped to `[0, ∞)`).
pub fn integrate_tensor(
    dom: &WeightedDomain,
    f: &dyn Fn(&[f64]) -> f64,
    bounds: &[(f64, f64)],
    tol: f64,
) -> Result<QuadratureResult> {
    let n = dom.n();
    if n > 3 {
        return Err(Error::Unsupported(format!("tensor quadrature supports n ≤ 3, got n = {n}")));
    }
    if bounds.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: bounds.len() });
    }
    let mut axes = Vec::with_capacity(n);
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        let exponent = dom.axis_exponent(i);
        let lo = if exponent.is_some() { lo.max(0.0) } else { lo };
        if !(lo <= hi) {
            return Err(Error::Parameter(format!("empty range on axis {i}")));
        }
        let exponent = exponent.unwrap_or(0.0);
        let rules = if lo == 0.0 && exponent.fract() != 0.0 {
            Some((gauss_jacobi(12, exponent)?, gauss_jacobi(24, exponent)?))
        } else {
            None
        };
        axes.push(Axis { lo, hi, exponent, rules });
    }
    let worst = Cell::new(0.0f64);
    let total = nested(&axes, 0, &vec![0.0; n], f, tol, &worst)?;
    Ok(QuadratureResult {
        abs_error: total.abs_error + worst.get() * total.value.abs(),
        ..total
    })
}

fn nested(
    axes: &[Axis],
    k: usize,
    prefix: &[f64],
    f: &dyn Fn(&[f64]) -> f64,
    tol: f64,
    worst: &Cell<f64>,
) -> Result<QuadratureResult> {
    let inner_tol = tol * 0.1;
    let failed: Cell<Option<Error>> = Cell::new(None);
    let g = |x: f64| -> f64 {
        let mut z = prefix.to_vec();
        z[k] = x;
        if k + 1 == axes.len() {
            f(&z)
        } else {
            match nested(axes, k + 1, &z, f, inner_tol, worst) {
                Ok(r) => {
                    if r.value != 0.0 {
                        worst.set(worst.get().max(r.abs_error / r.value.abs()));
                    }
                    r.value
                }
                Err(e) => {
                    failed.set(Some(e));
                    0.0
                }
            }
        }
    };
    let result = integrate_axis(&axes[k], &g, tol);
    if let Some(e) = failed.take() {
        return Err(e);
    }
    result
}

fn integrate_axis(axis: &Axis, g: &dyn Fn(f64) -> f64, tol: f64) -> Result<QuadratureResult> {
    let a = axis.exponent;
    let weighted = |x: f64| if a == 0.0 { g(x) } else { x.powf(a) * g(x) };
    let mut start = axis.lo;
    let mut head = QuadratureResult { value: 0.0, abs_error: 0.0, subdivisions: 0, converged: true };
    if let Some((coarse, fine)) = &axis.rules {
        // shrink the Jacobi panel [0, c] until the two rules agree
        let mut c = if axis.hi.is_finite() { axis.hi.min(1.0) } else { 1.0 };
        loop {
            let scale = c.powf(a + 1.0);
            let v12 = scale * coarse.apply(&|u| g(c * u));
            let v24 = scale * fine.apply(&|u| g(c * u));
            let err = (v24 - v12).abs();
            if err <= tol * v24.abs() || c < 1e-12 {
                head = QuadratureResult { value: v24, abs_error: err, subdivisions: 1, converged: err <= tol * v24.abs() };
                start = c;
                break;
            }
            c *= 0.5;
        }
    }
    let rest = range(&weighted, start, axis.hi, tol)?;
    Ok(QuadratureResult {
        value: head.value + rest.value,
        abs_error: head.abs_error + rest.abs_error,
        subdivisions: head.subdivisions + rest.subdivisions,
        converged: head.converged && rest.converged,
    })
}

fn range(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<QuadratureResult> {
    let hints = Hints::default();
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => kronrod::adaptive(f, lo, hi, &[], tol, 0.0),
        (true, false) => integrate_halfline_with(&|s| f(lo + s), &hints, tol),
        (false, true) => integrate_halfline_with(&|s| f(hi - s), &hints, tol),
        (false, false) => {
            let right = integrate_halfline_with(&|s| f(s), &hints, tol)?;
            let left = integrate_halfline_with(&|s| f(-s), &hints, tol)?;
            Ok(QuadratureResult {
                value: left.value + right.value,
                abs_error: left.abs_error + right.abs_error,
                subdivisions: left.subdivisions + right.subdivisions,
                converged: left.converged && right.converged,
            })
        }
    }
}
