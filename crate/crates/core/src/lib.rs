//! Sharp weighted Sobolev, Gagliardo–Nirenberg, isoperimetric and
//! L^p-log-Sobolev constants on weighted orthants, with the numerical
//! machinery needed to check them: radial quadrature, extremal profiles,
//! inequality functionals, radial optimal transport and a quotient optimizer.

pub mod constants;
pub mod domain;
pub mod error;
pub mod norms;
pub mod optimizer;
pub mod profiles;
pub mod quadrature;
pub mod special;
pub mod transport;
pub mod verifier;

pub use constants::{Branch, ConstantKind, EuclideanGn, SharpConstant};
pub use domain::WeightedDomain;
pub use error::{Error, Result};
pub use norms::NormSpec;
pub use optimizer::{minimize_quotient, OptimizationRun, OptimizerOptions};
pub use profiles::{Radial, RadialProfile, Shape};
pub use quadrature::{QuadratureResult, DEFAULT_SEED, DEFAULT_TOL};
pub use transport::TransportMap1D;
pub use verifier::{InequalityKind, Objective, QuotientReport};

/// Parse a real number written either as a decimal or as a ratio `p/q`.
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a number: `{s}`"));
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            if den == 0.0 {
                return Err(bad());
            }
            num / den
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

#[cfg(test)]
mod tests {
    use super::parse_real;

    #[test]
    fn rationals_and_decimals() {
        assert_eq!(parse_real("3/2").unwrap(), 1.5);
        assert_eq!(parse_real(" 2.5 ").unwrap(), 2.5);
        assert_eq!(parse_real("7/3").unwrap(), 7.0 / 3.0);
        assert!(parse_real("1/0").is_err());
        assert!(parse_real("two").is_err());
        assert!(parse_real("inf").is_err());
    }
}
