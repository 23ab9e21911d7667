//! Gauss–Jacobi rules for `∫₀¹ t^a g(t) dt` via the Golub–Welsch eigenproblem.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{param_err, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn apply(&self, g: &dyn Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * g(t)).sum()
    }
}

/// `points`-node Gauss rule on `[0, 1]` for the weight `t^a`, `a > −1`.
pub fn gauss_jacobi(points: usize, a: f64) -> Result<GaussRule> {
    if points == 0 {
        return param_err("a Gauss rule needs at least one node");
    }
    if !(a > -1.0) || !a.is_finite() {
        return param_err(format!("Jacobi exponent must exceed -1, got {a}"));
    }
    // monic Jacobi recurrence on [−1, 1] for (1−x)^0 (1+x)^a, mapped by t = (1+x)/2
    let beta = a;
    let mut diag = vec![0.0; points];
    let mut off = vec![0.0; points.saturating_sub(1)];
    for (k, d) in diag.iter_mut().enumerate() {
        let s = 2.0 * k as f64 + beta;
        let ak = if k == 0 { beta / (beta + 2.0) } else { beta * beta / (s * (s + 2.0)) };
        *d = 0.5 * (1.0 + ak);
    }
    for (i, o) in off.iter_mut().enumerate() {
        let k = (i + 1) as f64;
        let s = 2.0 * k + beta;
        let bk = 4.0 * k * k * (k + beta) * (k + beta) / (s * s * (s + 1.0) * (s - 1.0));
        *o = 0.5 * bk.sqrt();
    }
    let mut jm = DMatrix::<f64>::zeros(points, points);
    for i in 0..points {
        jm[(i, i)] = diag[i];
        if i + 1 < points {
            jm[(i, i + 1)] = off[i];
            jm[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(jm);
    let mass = 1.0 / (a + 1.0);
    let mut pairs: Vec<(f64, f64)> = (0..points)
        .map(|i| (eig.eigenvalues[i], mass * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(GaussRule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() })
}
