use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Uniform draws of `draw` distinct indices out of `0..population`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SamplerSpec {
    pub population: usize,
    pub draw: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    /// Trials where the metric was undefined and left out of the mean.
    pub skipped: usize,
}

impl MonteCarloEstimate {
    pub fn used(&self) -> usize {
        self.trials - self.skipped
    }

    /// Distance from `exact` in units of the standard error.
    pub fn z_score(&self, exact: f64) -> f64 {
        (self.mean - exact) / self.std_error
    }
}

/// Sample mean and standard error of `metric` over `trials` random subsets.
///
/// `metric` receives the drawn indices in ascending order and returns `None`
/// when undefined for that draw (e.g. no observed positives); such trials are
/// skipped. Output is a pure function of the arguments.
pub fn monte_carlo_expectation<F>(
    mut metric: F,
    sampler: SamplerSpec,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloEstimate>
where
    F: FnMut(&[usize]) -> Option<f64>,
{
    if trials < 2 {
        return Err(Error::InvalidTrials(trials));
    }
    if sampler.draw > sampler.population {
        return Err(Error::InvalidSampleSize { size: sampler.draw, item_count: sampler.population });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut drawn = Vec::with_capacity(sampler.draw);
    // Welford running moments.
    let (mut count, mut mean, mut m2) = (0usize, 0.0f64, 0.0f64);
    for _ in 0..trials {
        drawn.clear();
        drawn.extend(index::sample(&mut rng, sampler.population, sampler.draw).iter());
        drawn.sort_unstable();
        if let Some(x) = metric(&drawn) {
            count += 1;
            let delta = x - mean;
            mean += delta / count as f64;
            m2 += delta * (x - mean);
        }
    }
    if count < 2 {
        return Err(Error::InvalidTrials(count));
    }
    let variance = m2 / (count - 1) as f64;
    Ok(MonteCarloEstimate {
        mean,
        std_error: (variance / count as f64).sqrt(),
        trials,
        skipped: trials - count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The 6-item instance with positives at ranks 1, 2 (above K = 2) and 3.
    fn ure_ratio(subset: &[usize]) -> Option<f64> {
        let n = subset.iter().filter(|&&i| i < 3).count();
        let m = subset.iter().filter(|&&i| i < 2).count();
        (n > 0).then(|| m as f64 / n as f64)
    }

    #[test]
    fn converges_to_exact_mean() {
        let est = monte_carlo_expectation(ure_ratio, SamplerSpec { population: 6, draw: 3 }, 100_000, 11).unwrap();
        assert!(est.z_score(2.0 / 3.0).abs() < 3.0, "{est:?}");
        assert!(est.skipped > 0);
    }

    #[test]
    fn rejects_single_trial() {
        let r = monte_carlo_expectation(ure_ratio, SamplerSpec { population: 6, draw: 3 }, 1, 0);
        assert!(matches!(r, Err(Error::InvalidTrials(1))));
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let spec = SamplerSpec { population: 50, draw: 7 };
        let a = monte_carlo_expectation(|s| Some(s.iter().sum::<usize>() as f64), spec, 2000, 5).unwrap();
        let b = monte_carlo_expectation(|s| Some(s.iter().sum::<usize>() as f64), spec, 2000, 5).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let c = monte_carlo_expectation(|s| Some(s.iter().sum::<usize>() as f64), spec, 2000, 6).unwrap();
        assert_ne!(a.mean, c.mean);
    }
}
