//! Seeded random profiles for falsification runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::profiles::{Bump, Radial, RadialProfile, Tail};

/// The integrability a random profile must have.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileClass {
    pub n_a: f64,
    /// Gradient exponent.
    pub p: f64,
    /// Smallest Lebesgue exponent the inequality uses.
    pub min_exponent: f64,
    /// Compactly supported tail instead of a power tail.
    pub compact: bool,
}

const KNOTS: usize = 12;

/// A ChaCha stream keyed by `(seed, index)`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A spline with log-uniform knot values on log-spaced knots and a tail
/// chosen so that every norm of `class` is finite. Not normalized.
pub fn random_profile(rng: &mut impl Rng, class: ProfileClass) -> Result<RadialProfile> {
    let span = rng.random_range(3.0..30.0);
    let lo = rng.random_range(0.02..0.2);
    let knots = RadialProfile::log_knots(lo, lo * span, KNOTS);
    let ln_values: Vec<f64> = (0..KNOTS).map(|_| -rng.random_range(0.0..4.0f64)).collect();
    let last = knots[KNOTS - 1];
    let tail = if class.compact {
        Tail::Compact { radius: last * rng.random_range(1.2..3.0), kappa: rng.random_range(1.0..3.0) }
    } else {
        let need = (class.n_a / class.min_exponent).max(class.n_a / class.p - 1.0);
        Tail::Power { decay: need + rng.random_range(0.3..3.0) }
    };
    RadialProfile::spline(knots, ln_values, tail)
}

/// Radius where `f` first drops to half its value at the origin.
pub fn characteristic_radius(f: &dyn Radial) -> f64 {
    let half = 0.5 * f.value(0.0);
    let (mut lo, mut hi) = (0.0, 1.0);
    while f.value(hi) > half && hi < 1e12 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f.value(mid) > half {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// A bump placed on the bulk of `f`, with amplitude a random fraction (up to
/// ±30%) of the local value.
pub fn random_bump(rng: &mut impl Rng, f: &dyn Radial) -> Bump {
    let r0 = characteristic_radius(f);
    let center = r0 * rng.random_range(0.0..2.5);
    let width = r0 * rng.random_range(0.2..1.0);
    let amplitude = f.value(center) * rng.random_range(-0.3..0.3);
    Bump { center, width, amplitude }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::NormSpec;
    use crate::profiles::power_integral;
    use crate::WeightedDomain;

    #[test]
    fn streams_are_reproducible() {
        let class = ProfileClass { n_a: 3.0, p: 2.0, min_exponent: 2.0, compact: false };
        let a = random_profile(&mut sample_rng(7, 3), class).unwrap();
        let b = random_profile(&mut sample_rng(7, 3), class).unwrap();
        let c = random_profile(&mut sample_rng(7, 4), class).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn norms_are_finite() {
        let d = WeightedDomain::half_space(2, 1.0, NormSpec::euclidean(2)).unwrap();
        for i in 0..10 {
            for compact in [false, true] {
                let class = ProfileClass { n_a: 3.0, p: 1.5, min_exponent: 1.5, compact };
                let f = random_profile(&mut sample_rng(1, i), class).unwrap();
                let m = power_integral(&d, &f, 1.5, 1e-10).unwrap();
                assert!(m.is_finite() && m > 0.0);
            }
        }
    }

    #[test]
    fn half_radius_of_a_gaussian() {
        let g = RadialProfile::new(crate::Shape::Gaussian { rate: 1.0, q: 2.0 });
        assert!((characteristic_radius(&g) - 2f64.ln().sqrt()).abs() < 1e-12);
    }
}
