//! Log-domain Gamma and Beta functions.
//!
//! Every constant in the crate is assembled from `ln Γ` values and
//! exponentiated once; the k-fold product domains need `Γ(k·n_a/q)` for k in
//! the thousands, far outside the range of a linear-domain Gamma.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Above this argument the Stirling series is used.
const STIRLING_SWITCH: f64 = 20.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// ζ(k) for k = 2..=29, used by the Taylor expansion of ln Γ around 1.
const ZETA: [f64; 28] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_37,
    1.017_343_061_984_449_1,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_3,
    1.002_008_392_826_082_2,
    1.000_994_575_127_818_1,
    1.000_494_188_604_119_5,
    1.000_246_086_553_308,
    1.000_122_713_347_578_5,
    1.000_061_248_135_058_7,
    1.000_030_588_236_307,
    1.000_015_282_259_408_7,
    1.000_007_637_197_637_9,
    1.000_003_817_293_265,
    1.000_001_908_212_716_6,
    1.000_000_953_962_033_9,
    1.000_000_476_932_986_8,
    1.000_000_238_450_502_7,
    1.000_000_119_219_926,
    1.000_000_059_608_189,
    1.000_000_029_803_503_5,
    1.000_000_014_901_554_8,
    1.000_000_007_450_711_8,
    1.000_000_003_725_334,
    1.000_000_001_862_659_7,
];

/// `ln Γ(1 + eps)` for small `|eps|` via the zeta series.
fn lgamma_1p_small(eps: f64) -> f64 {
    let mut sum = 0.0;
    let mut pow = -eps;
    for (i, z) in ZETA.iter().enumerate() {
        let k = (i + 2) as f64;
        pow *= -eps;
        sum += z * pow / k;
    }
    -EULER_GAMMA * eps + sum
}

fn lgamma_lanczos(x: f64) -> f64 {
    // Valid for x >= 0.5.
    let z = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + acc.ln()
}

fn lgamma_stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli terms B_{2k} / (2k (2k-1) x^{2k-1})
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2
                        * (1.0 / 1260.0
                            + inv2 * (-1.0 / 1680.0 + inv2 * (1.0 / 1188.0 - inv2 * 691.0 / 360_360.0)))));
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

/// Natural logarithm of Γ(x) for finite `x > 0`.
pub fn lgamma(x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::Domain(format!("lgamma requires finite x > 0, got {x}")));
    }
    Ok(lgamma_unchecked(x))
}

pub(crate) fn lgamma_unchecked(x: f64) -> f64 {
    if x >= STIRLING_SWITCH {
        lgamma_stirling(x)
    } else if (x - 1.0).abs() <= 0.25 {
        lgamma_1p_small(x - 1.0)
    } else if (x - 2.0).abs() <= 0.25 {
        let eps = x - 2.0;
        eps.ln_1p() + lgamma_1p_small(eps)
    } else if x < 0.5 {
        // Γ(x) = Γ(x + 1) / x
        lgamma_unchecked(x + 1.0) - x.ln()
    } else {
        lgamma_lanczos(x)
    }
}

/// `ln B(x, y) = ln Γ(x) + ln Γ(y) − ln Γ(x + y)`.
pub fn lbeta(x: f64, y: f64) -> Result<f64> {
    Ok(lgamma(x)? + lgamma(y)? - lgamma(x + y)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from a 40-digit evaluation.
    const REFERENCE: [(f64, f64); 17] = [
        (0.001, 6.907_178_885_383_853_7),
        (0.01, 4.599_479_878_042_021_7),
        (0.1, 2.252_712_651_734_206),
        (0.5, 0.572_364_942_924_700_1),
        (0.75, 0.203_280_951_431_295_37),
        (1.5, -0.120_782_237_635_245_22),
        (2.5, 0.284_682_870_472_919_16),
        (3.3, 0.987_098_577_894_734_6),
        (7.25, 7.052_185_450_738_539),
        (12.5, 18.734_347_511_936_446),
        (19.999, 39.336_913_688_843_1),
        (20.001, 39.342_854_736_826_71),
        (33.3, 82.603_723_581_654_95),
        (100.5, 361.435_540_467_777_6),
        (1234.5, 7_550.550_901_077_895),
        (99_999.5, 1_051_281.952_514_674_4),
        (1_000_000.0, 12_815_504.569_147_612),
    ];

    #[test]
    fn matches_high_precision_reference() {
        for (x, want) in REFERENCE {
            let got = lgamma(x).unwrap();
            let rel = ((got - want) / want).abs();
            assert!(rel < 1e-13, "lgamma({x}) = {got}, want {want}, rel {rel:e}");
        }
    }

    #[test]
    fn exact_small_values() {
        assert_eq!(lgamma(1.0).unwrap(), 0.0);
        assert!(lgamma(2.0).unwrap().abs() < 1e-16);
        assert!((lgamma(5.0).unwrap() - 24f64.ln()).abs() < 1e-14);
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((lgamma(0.5).unwrap().exp() - sqrt_pi).abs() < 1e-14);
    }

    #[test]
    fn recurrence_holds() {
        let mut x = 0.5;
        while x < 1000.0 {
            let lhs = lgamma(x + 1.0).unwrap();
            let rhs = lgamma(x).unwrap() + x.ln();
            let scale = lhs.abs().max(1.0);
            assert!((lhs - rhs).abs() / scale < 1e-13, "x = {x}");
            x *= 1.037;
        }
    }

    #[test]
    fn stirling_leading_terms_converge() {
        let x: f64 = 1e5;
        let lead = x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI / x).ln();
        assert!((lgamma(x).unwrap() - lead).abs() < 1e-6);
    }

    #[test]
    fn switch_points_are_continuous() {
        for s in [0.5, 0.75, 1.25, 1.75, 2.25, STIRLING_SWITCH] {
            let lo = lgamma(s * (1.0 - 1e-14)).unwrap();
            let hi = lgamma(s * (1.0 + 1e-14)).unwrap();
            assert!((lo - hi).abs() < 1e-11, "jump at {s}: {lo} vs {hi}");
        }
    }

    #[test]
    fn beta_values() {
        assert!(lbeta(1.0, 1.0).unwrap().abs() < 1e-15);
        assert!((lbeta(0.5, 0.5).unwrap() - std::f64::consts::PI.ln()).abs() < 1e-14);
        assert!((lbeta(2.0, 3.0).unwrap() - (1.0f64 / 12.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_arguments() {
        for x in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(lgamma(x), Err(Error::Domain(_))));
        }
        assert!(lbeta(-1.0, 2.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn log_convex(x in 1e-3f64..500.0, y in 1e-3f64..500.0) {
            let mid = lgamma(0.5 * (x + y)).unwrap();
            let avg = 0.5 * (lgamma(x).unwrap() + lgamma(y).unwrap());
            proptest::prop_assert!(mid <= avg + 1e-12 * avg.abs().max(1.0));
        }
    }
}
