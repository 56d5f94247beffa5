//! Two-sample multinomial homogeneity tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Resamples drawn by the Monte-Carlo likelihood-ratio test.
pub const MONTE_CARLO_RESAMPLES: usize = 999;

/// Pooled expected counts below this switch to the Monte-Carlo test.
const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMethod {
    ChiSquare,
    MonteCarloLikelihoodRatio,
    /// All observations fall in one category; nothing to test.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityTest {
    pub method: TestMethod,
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

fn expected(c0: &[u64], c1: &[u64]) -> (Vec<f64>, Vec<f64>) {
    let n0: u64 = c0.iter().sum();
    let n1: u64 = c1.iter().sum();
    let n = (n0 + n1) as f64;
    let pooled: Vec<f64> = c0.iter().zip(c1).map(|(a, b)| (a + b) as f64 / n).collect();
    (
        pooled.iter().map(|p| p * n0 as f64).collect(),
        pooled.iter().map(|p| p * n1 as f64).collect(),
    )
}

fn chi_square(c0: &[u64], c1: &[u64]) -> f64 {
    let (e0, e1) = expected(c0, c1);
    let term = |o: u64, e: f64| if e > 0.0 { (o as f64 - e).powi(2) / e } else { 0.0 };
    c0.iter().zip(&e0).map(|(&o, &e)| term(o, e)).sum::<f64>()
        + c1.iter().zip(&e1).map(|(&o, &e)| term(o, e)).sum::<f64>()
}

fn g_statistic(c0: &[u64], c1: &[u64]) -> f64 {
    let (e0, e1) = expected(c0, c1);
    let term = |o: u64, e: f64| if o > 0 { o as f64 * (o as f64 / e).ln() } else { 0.0 };
    2.0 * (c0.iter().zip(&e0).map(|(&o, &e)| term(o, e)).sum::<f64>()
        + c1.iter().zip(&e1).map(|(&o, &e)| term(o, e)).sum::<f64>())
}

fn draw(rng: &mut ChaCha8Rng, cumulative: &[f64], n: u64) -> Vec<u64> {
    let mut c = vec![0u64; cumulative.len()];
    for _ in 0..n {
        let u: f64 = rng.gen();
        let k = cumulative.iter().position(|&v| u < v).unwrap_or(cumulative.len() - 1);
        c[k] += 1;
    }
    c
}

/// Tests whether two count vectors come from the same distribution:
/// Pearson chi-square with pooled expected counts when every expected count
/// is at least 5, otherwise a Monte-Carlo likelihood-ratio test that
/// resamples both samples from the pooled distribution.
pub fn homogeneity_test(c0: &[u64], c1: &[u64], seed: u64) -> HomogeneityTest {
    let keep: Vec<usize> = (0..c0.len()).filter(|&k| c0[k] + c1[k] > 0).collect();
    let c0: Vec<u64> = keep.iter().map(|&k| c0[k]).collect();
    let c1: Vec<u64> = keep.iter().map(|&k| c1[k]).collect();
    let df = keep.len().saturating_sub(1);
    if df == 0 {
        return HomogeneityTest {
            method: TestMethod::Degenerate,
            statistic: 0.0,
            degrees_of_freedom: 0,
            p_value: 1.0,
        };
    }
    let (e0, e1) = expected(&c0, &c1);
    if e0.iter().chain(&e1).all(|&e| e >= MIN_EXPECTED) {
        let statistic = chi_square(&c0, &c1);
        let dist = ChiSquared::new(df as f64).expect("positive degrees of freedom");
        return HomogeneityTest {
            method: TestMethod::ChiSquare,
            statistic,
            degrees_of_freedom: df,
            p_value: dist.sf(statistic),
        };
    }
    let statistic = g_statistic(&c0, &c1);
    let (n0, n1): (u64, u64) = (c0.iter().sum(), c1.iter().sum());
    let n = (n0 + n1) as f64;
    let cumulative: Vec<f64> = c0
        .iter()
        .zip(&c1)
        .scan(0.0, |acc, (a, b)| {
            *acc += (a + b) as f64 / n;
            Some(*acc)
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    let exceed = (0..MONTE_CARLO_RESAMPLES)
        .filter(|_| {
            let r0 = draw(&mut rng, &cumulative, n0);
            let r1 = draw(&mut rng, &cumulative, n1);
            g_statistic(&r0, &r1) >= statistic - 1e-12
        })
        .count();
    HomogeneityTest {
        method: TestMethod::MonteCarloLikelihoodRatio,
        statistic,
        degrees_of_freedom: df,
        p_value: (1 + exceed) as f64 / (1 + MONTE_CARLO_RESAMPLES) as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_counts_accept() {
        let t = homogeneity_test(&[50, 50], &[50, 50], 1);
        assert_eq!(t.method, TestMethod::ChiSquare);
        assert!(t.statistic.abs() < 1e-12);
        assert!((t.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_counts_fall_back() {
        let t = homogeneity_test(&[3, 0], &[0, 3], 1);
        assert_eq!(t.method, TestMethod::MonteCarloLikelihoodRatio);
        assert!(t.p_value < 0.2);
        let d = homogeneity_test(&[1, 0], &[1, 0], 1);
        assert_eq!(d.method, TestMethod::Degenerate);
    }
}
