//! Seeded importance-sampling Monte Carlo over `(Σ, σ)`.
//!
//! Free coordinates are drawn as `±Y`, `Y ~ BetaPrime(1, ν)`; a coordinate
//! with weight `t^a` is drawn from `BetaPrime(a + 1, ν)`, which cancels the
//! weight exactly. Samples are split into fixed-size chunks, each with its
//! own ChaCha stream, so the result does not depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::WeightedDomain;
use crate::error::{param_err, Result};
use crate::special::lbeta;

const NU: f64 = 3.0;
const CHUNK: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

enum Sampler {
    Free,
    Weighted { beta: Beta<f64>, ln_norm: f64, power: f64 },
}

/// Estimate `∫_Σ f σ` from `samples ≥ 1000` draws.
pub fn monte_carlo_sigma(
    dom: &WeightedDomain,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if samples < 1000 {
        return param_err(format!("Monte Carlo needs at least 1000 samples, got {samples}"));
    }
    let mut samplers = Vec::with_capacity(dom.n());
    for i in 0..dom.n() {
        samplers.push(match dom.axis_exponent(i) {
            None => Sampler::Free,
            Some(a) => Sampler::Weighted {
                beta: Beta::new(a + 1.0, NU).map_err(|e| crate::Error::Parameter(e.to_string()))?,
                ln_norm: lbeta(a + 1.0, NU)?,
                power: a + 1.0 + NU,
            },
        });
    }
    let chunks = samples.div_ceil(CHUNK);
    let sums: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut z = vec![0.0; samplers.len()];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let mut ln_ratio = 0.0;
                for (zi, sampler) in z.iter_mut().zip(&samplers) {
                    match sampler {
                        Sampler::Free => {
                            let u: f64 = 1.0 - rng.random::<f64>();
                            let y = u.powf(-1.0 / NU) - 1.0;
                            *zi = if rng.random::<bool>() { y } else { -y };
                            ln_ratio += (2.0 / NU).ln() + (1.0 + NU) * y.ln_1p();
                        }
                        Sampler::Weighted { beta, ln_norm, power } => {
                            let x: f64 = beta.sample(&mut rng);
                            let t = x / (1.0 - x);
                            *zi = t;
                            // σ/p = B(a+1, ν)(1+t)^{a+1+ν} = B(a+1, ν)(1−x)^{−a−1−ν}
                            ln_ratio += ln_norm - power * (-x).ln_1p();
                        }
                    }
                }
                let v = f(&z);
                let v = if v == 0.0 { 0.0 } else { v * ln_ratio.exp() };
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = sums.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let n = samples as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(McEstimate { estimate: mean, std_error: (var / n).sqrt(), samples, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::NormSpec;

    #[test]
    fn ball_measure_within_three_sigma() {
        for (n, a, q) in [(2, 0.0, 2.0), (2, 1.0, 1.0), (3, 2.5, 4.0), (1, 0.5, 2.0)] {
            let d = WeightedDomain::half_space(n, a, NormSpec::lq(q, n).unwrap()).unwrap();
            let norm = d.norm().clone();
            let ball = move |z: &[f64]| if norm.eval(z) <= 1.0 { 1.0 } else { 0.0 };
            let est = monte_carlo_sigma(&d, &ball, 200_000, 7).unwrap();
            let exact = d.ball_measure();
            assert!((est.estimate - exact).abs() < 3.0 * est.std_error, "n={n} a={a}: {est:?} vs {exact}");
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let d = WeightedDomain::half_space(2, 1.5, NormSpec::euclidean(2)).unwrap();
        let f = |z: &[f64]| (-(z[0] * z[0] + z[1] * z[1])).exp();
        let a = monte_carlo_sigma(&d, &f, 50_000, DEFAULT).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| monte_carlo_sigma(&d, &f, 50_000, DEFAULT).unwrap());
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let c = monte_carlo_sigma(&d, &f, 50_000, DEFAULT + 1).unwrap();
        assert_ne!(a.estimate, c.estimate);
    }

    const DEFAULT: u64 = crate::quadrature::DEFAULT_SEED;

    #[test]
    fn too_few_samples() {
        let d = WeightedDomain::half_space(1, 0.0, NormSpec::euclidean(1)).unwrap();
        assert!(monte_carlo_sigma(&d, &|_| 1.0, 999, 1).is_err());
    }
}
