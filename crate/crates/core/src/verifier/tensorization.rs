//! The log-Sobolev constant as the limit of `k^{1/p} S` on k-fold products.

use serde::{Deserialize, Serialize};

use crate::constants::{logsob_constant, sobolev_constant};
use crate::domain::WeightedDomain;
use crate::error::{Error, Result};
use crate::norms::{conjugate, NormSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensorizationPoint {
    pub k: usize,
    pub c_k: f64,
    pub limit: f64,
    /// `|c_k/L − 1|`.
    pub rel_gap: f64,
}

/// `c_k = k^{1/p} S` on `Σᵏ` with weight `∏ t_i^a` and block norm
/// `(Σ ‖x_i‖^q)^{1/q}`, `q = p/(p−1)`, for each requested `k`; `L = 𝓛^{1/p}`.
pub fn tensorization_limit(base: &WeightedDomain, p: f64, ks: &[usize]) -> Result<Vec<TensorizationPoint>> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Parameter(format!("need p > 1, got {p}")));
    }
    let limit = (logsob_constant(base, p)?.log_value / p).exp();
    let q = conjugate(p);
    let n = base.n();
    ks.iter()
        .map(|&k| {
            if k == 0 || k as f64 * base.n_a() <= p {
                return Err(Error::Parameter(format!("need k·n_a > p, got k = {k}")));
            }
            let norm = NormSpec::blocks(base.norm().clone(), k, q)?;
            let axes: Vec<usize> = (0..k).flat_map(|b| base.weighted_axes().iter().map(move |&i| b * n + i)).collect();
            let a = base.a().repeat(k);
            let dom = WeightedDomain::with_axes(n * k, axes, a, norm)?;
            let c_k = ((k as f64).ln() / p + sobolev_constant(&dom, p)?.log_value).exp();
            Ok(TensorizationPoint { k, c_k, limit, rel_gap: (c_k / limit - 1.0).abs() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn converges_at_the_stirling_rate() {
        let base = WeightedDomain::half_space(2, 1.0, NormSpec::euclidean(2)).unwrap();
        let pts = tensorization_limit(&base, 2.0, &[2, 10, 200, 1000]).unwrap();
        assert!(pts.windows(2).all(|w| w[1].rel_gap < w[0].rel_gap));
        assert!(pts[2].rel_gap < 1e-2);
        assert!(pts[3].rel_gap < 2e-3);
    }

    #[test]
    fn single_block_is_the_base_constant() {
        let base = WeightedDomain::half_space(3, 0.5, NormSpec::euclidean(3)).unwrap();
        let pts = tensorization_limit(&base, 1.5, &[1]).unwrap();
        let s = sobolev_constant(&base, 1.5).unwrap().value();
        assert!((pts[0].c_k / s - 1.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_small_products() {
        let base = WeightedDomain::half_space(1, 0.0, NormSpec::euclidean(1)).unwrap();
        assert!(tensorization_limit(&base, 2.0, &[1]).is_err());
        assert!(tensorization_limit(&base, 2.0, &[3]).is_ok());
    }
}
