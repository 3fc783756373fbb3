//! Synthetic fully-exposed worlds, random exposure sampling, and scorer
//! families of graded quality.
//!
//! Every random draw comes from a stream seeded by [`derive_seed`] over
//! `(seed, purpose, user)`, so a user's data never depends on how many other
//! users exist or on evaluation order.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::domain::{Catalog, ExposureKind, ItemId, LabeledExposure, PredictionTable, UserId};
use crate::error::{Error, Result};

const PURPOSE_LATENT: u64 = 1;
const PURPOSE_RATE: u64 = 2;
const PURPOSE_EXPOSURE: u64 = 3;
const PURPOSE_NOISE: u64 = 4;
const PURPOSE_FAMILY: u64 = 5;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Positional seed derivation: hashes `base` followed by each path component.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

fn stream(base: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, &[purpose, index]))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositiveRate {
    Fixed(f64),
    /// Each user draws a rate uniformly from `[low, high]`.
    Uniform { low: f64, high: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldSpec {
    pub user_count: usize,
    pub item_count: usize,
    pub positive_rate: PositiveRate,
    pub seed: u64,
}

impl WorldSpec {
    /// The reference world: 200 users, 500 items, fixed positive rate 0.15.
    pub fn reference(seed: u64) -> Self {
        Self { user_count: 200, item_count: 500, positive_rate: PositiveRate::Fixed(REFERENCE_POSITIVE_RATE), seed }
    }

    fn validate(&self) -> Result<()> {
        if self.user_count == 0 || self.item_count == 0 {
            return Err(Error::InvalidSpec("user_count and item_count must be at least 1".into()));
        }
        let valid = |r: f64| r > 0.0 && r <= 1.0;
        let ok = match self.positive_rate {
            PositiveRate::Fixed(r) => valid(r),
            PositiveRate::Uniform { low, high } => valid(low) && valid(high) && low <= high,
        };
        if !ok {
            return Err(Error::InvalidSpec(format!("positive rate {:?} must lie in (0, 1]", self.positive_rate)));
        }
        Ok(())
    }
}

/// Latent preference of every user for every item, user-major.
#[derive(Clone, Debug, PartialEq)]
pub struct LatentPreferences {
    item_count: usize,
    values: Vec<f64>,
}

impl LatentPreferences {
    pub fn user_count(&self) -> usize {
        self.values.len() / self.item_count
    }

    pub fn item_count(&self) -> usize {
        self.item_count
    }

    /// Preferences of the user with dense id `user` (1-based).
    pub fn user(&self, user: UserId) -> &[f64] {
        let start = (user.0 as usize - 1) * self.item_count;
        &self.values[start..start + self.item_count]
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticWorld {
    pub spec: WorldSpec,
    pub catalog: Catalog,
    /// One fully-exposed record per user, users `1..=user_count`.
    pub full: Vec<LabeledExposure>,
    pub latent: LatentPreferences,
}

/// Draws standard-normal latent preferences and labels an item positive when
/// its latent value clears the standard-normal quantile at `1 - rate`. Labels
/// are therefore i.i.d. Bernoulli(rate) and a scorer that ranks by latent
/// preference is a perfect ranker.
pub fn generate_full(world: &WorldSpec) -> Result<SyntheticWorld> {
    world.validate()?;
    let catalog = Catalog::new(world.item_count)?;
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let per_user: Vec<(Vec<f64>, LabeledExposure)> = (1..=world.user_count as u32)
        .into_par_iter()
        .map(|u| {
            let rate = match world.positive_rate {
                PositiveRate::Fixed(r) => r,
                PositiveRate::Uniform { low, high } => {
                    stream(world.seed, PURPOSE_RATE, u as u64).random_range(low..=high)
                }
            };
            let threshold = if rate >= 1.0 { f64::NEG_INFINITY } else { std_normal.inverse_cdf(1.0 - rate) };
            let mut rng = stream(world.seed, PURPOSE_LATENT, u as u64);
            let latent: Vec<f64> = (0..world.item_count).map(|_| rng.sample(StandardNormal)).collect();
            let labels: Vec<bool> = latent.iter().map(|&x| x > threshold).collect();
            let full = LabeledExposure::full_from_labels(UserId(u), &labels).expect("complete labels");
            (latent, full)
        })
        .collect();
    let mut values = Vec::with_capacity(world.user_count * world.item_count);
    let mut full = Vec::with_capacity(world.user_count);
    for (latent, exposure) in per_user {
        values.extend(latent);
        full.push(exposure);
    }
    Ok(SyntheticWorld {
        spec: *world,
        catalog,
        full,
        latent: LatentPreferences { item_count: world.item_count, values },
    })
}

/// Uniformly samples `nbar` distinct items per user and copies their labels.
pub fn sample_random_exposure(full: &[LabeledExposure], nbar: usize, seed: u64) -> Result<Vec<LabeledExposure>> {
    full.par_iter()
        .map(|user_full| {
            user_full.expect_kind(ExposureKind::Full)?;
            let item_count = user_full.len();
            if nbar == 0 || nbar > item_count {
                return Err(Error::InvalidSampleSize { size: nbar, item_count });
            }
            let catalog = Catalog::new(item_count)?;
            let mut rng = stream(seed, PURPOSE_EXPOSURE, user_full.user().0 as u64);
            let entries = index::sample(&mut rng, item_count, nbar).into_iter().map(|i| {
                let item = ItemId::from_index(i);
                (item, user_full.entries()[i].1)
            });
            LabeledExposure::new(user_full.user(), ExposureKind::Random, entries, &catalog)
        })
        .collect()
}

/// One member of a scorer family:
/// `score = fidelity·g(latent) + (1 - fidelity)·noise_sd·z` with `z` standard
/// normal and `g(x) = (exp(curvature·x) - 1) / curvature` (`g(x) = x` at zero
/// curvature).
///
/// `g` is strictly increasing, so it never changes the noiseless ranking. It
/// changes where the noise bites: positive curvature spreads out the top of
/// the latent scale (accurate heads, noisy tails) and negative curvature
/// compresses it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScorerSpec {
    pub fidelity: f64,
    pub noise_sd: f64,
    #[serde(default)]
    pub curvature: f64,
    pub seed: u64,
}

impl ScorerSpec {
    pub fn new(fidelity: f64, noise_sd: f64, seed: u64) -> Self {
        Self { fidelity, noise_sd, curvature: 0.0, seed }
    }

    fn transform(&self, x: f64) -> f64 {
        if self.curvature == 0.0 {
            x
        } else {
            (self.curvature * x).exp_m1() / self.curvature
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fidelity) {
            return Err(Error::InvalidSpec(format!("fidelity {} outside [0, 1]", self.fidelity)));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidSpec(format!("noise_sd {} must be finite and ≥ 0", self.noise_sd)));
        }
        if !self.curvature.is_finite() {
            return Err(Error::InvalidSpec(format!("curvature {} must be finite", self.curvature)));
        }
        Ok(())
    }
}

/// Scores every (user, item) pair of `latent` with the scorer `spec`.
pub fn make_scorer(latent: &LatentPreferences, spec: &ScorerSpec) -> Result<Vec<PredictionTable>> {
    spec.validate()?;
    (1..=latent.user_count() as u32)
        .into_par_iter()
        .map(|u| {
            let user = UserId(u);
            let mut rng = stream(spec.seed, PURPOSE_NOISE, u as u64);
            let scale = (1.0 - spec.fidelity) * spec.noise_sd;
            let scores = latent
                .user(user)
                .iter()
                .map(|&x| {
                    let z: f64 = rng.sample(StandardNormal);
                    spec.fidelity * spec.transform(x) + scale * z
                })
                .collect();
            PredictionTable::from_dense(user, scores)
        })
        .collect()
}

/// Cartesian grid of scorers (fidelity-major, then noise, then curvature),
/// each with its own noise seed.
pub fn scorer_family(fidelities: &[f64], noise_sds: &[f64], curvatures: &[f64], seed: u64) -> Vec<ScorerSpec> {
    let mut family = Vec::with_capacity(fidelities.len() * noise_sds.len() * curvatures.len());
    for &fidelity in fidelities {
        for &noise_sd in noise_sds {
            for &curvature in curvatures {
                let index = family.len() as u64;
                family.push(ScorerSpec {
                    fidelity,
                    noise_sd,
                    curvature,
                    seed: derive_seed(seed, &[PURPOSE_FAMILY, index]),
                });
            }
        }
    }
    family
}

pub const DEFAULT_FIDELITIES: [f64; 12] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6];
pub const DEFAULT_NOISE_SD: f64 = 1.0;
pub const DEFAULT_CURVATURES: [f64; 5] = [-1.5, -0.75, 0.0, 0.75, 1.5];
/// Positive rate of the reference synthetic world.
pub const REFERENCE_POSITIVE_RATE: f64 = 0.15;

/// The 60-member reference family: 12 fidelities by 5 curvatures at unit noise.
///
/// Varying only the fidelity gives models whose recall curves are nearly
/// proportional at every K, so any metric correlates with any other. The
/// curvature axis makes head and tail accuracy vary independently, which is
/// what lets a cutoff-specific metric be told apart from a neighbouring one.
pub fn default_family(seed: u64) -> Vec<ScorerSpec> {
    scorer_family(&DEFAULT_FIDELITIES, &[DEFAULT_NOISE_SD], &DEFAULT_CURVATURES, seed)
}

#[cfg(test)]
mod tests {
    use statrs::distribution::{Binomial, DiscreteCDF};

    use super::*;
    use crate::domain::{build_ranked_catalog, RankedCatalog};
    use crate::metrics::recall_at_k;

    fn world(users: usize, items: usize, rate: f64, seed: u64) -> WorldSpec {
        WorldSpec { user_count: users, item_count: items, positive_rate: PositiveRate::Fixed(rate), seed }
    }

    #[test]
    fn rate_one_labels_everything_positive() {
        let w = generate_full(&world(3, 20, 1.0, 1)).unwrap();
        assert!(w.full.iter().all(|f| f.positive_count() == 20));
    }

    #[test]
    fn invalid_specs() {
        assert!(generate_full(&world(3, 20, 0.0, 1)).is_err());
        assert!(generate_full(&world(0, 20, 0.5, 1)).is_err());
        let bad = WorldSpec { positive_rate: PositiveRate::Uniform { low: 0.4, high: 0.2 }, ..world(2, 5, 0.1, 1) };
        assert!(generate_full(&bad).is_err());
        let w = generate_full(&world(2, 5, 0.5, 1)).unwrap();
        assert!(make_scorer(&w.latent, &ScorerSpec::new(1.5, 0.0, 0)).is_err());
        assert!(make_scorer(&w.latent, &ScorerSpec::new(0.5, -1.0, 0)).is_err());
    }

    #[test]
    fn generation_is_deterministic_and_positional() {
        let a = generate_full(&world(5, 50, 0.3, 9)).unwrap();
        let b = generate_full(&world(5, 50, 0.3, 9)).unwrap();
        assert_eq!(a.full, b.full);
        assert_eq!(a.latent, b.latent);
        // Adding users leaves existing users untouched.
        let c = generate_full(&world(8, 50, 0.3, 9)).unwrap();
        assert_eq!(&c.full[..5], &a.full[..]);
        assert_eq!(c.latent.user(UserId(5)), a.latent.user(UserId(5)));
        let d = generate_full(&world(5, 50, 0.3, 10)).unwrap();
        assert_ne!(a.latent, d.latent);
    }

    #[test]
    fn positive_counts_follow_binomial() {
        let binom = Binomial::new(0.2, 1000).unwrap();
        // Central 99.9% interval.
        let lo = binom.inverse_cdf(0.0005);
        let hi = binom.inverse_cdf(0.9995);
        let mut outside = 0;
        let mut total = 0;
        for seed in 0..10 {
            let w = generate_full(&world(20, 1000, 0.2, seed)).unwrap();
            for f in &w.full {
                total += 1;
                let c = f.positive_count() as u64;
                if c < lo || c > hi {
                    outside += 1;
                }
            }
        }
        // Expect ~0.2 of 200 outside; allow a handful.
        assert!(outside <= 3, "{outside} of {total} outside [{lo}, {hi}]");
    }

    #[test]
    fn uniform_rates_vary_per_user() {
        let spec = WorldSpec { positive_rate: PositiveRate::Uniform { low: 0.05, high: 0.5 }, ..world(30, 400, 0.1, 3) };
        let w = generate_full(&spec).unwrap();
        let counts: Vec<usize> = w.full.iter().map(|f| f.positive_count()).collect();
        assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() > 60);
    }

    #[test]
    fn full_sample_reproduces_full_labels() {
        let w = generate_full(&world(4, 30, 0.3, 2)).unwrap();
        let rand = sample_random_exposure(&w.full, 30, 5).unwrap();
        for (r, f) in rand.iter().zip(&w.full) {
            assert_eq!(r.entries(), f.entries());
            assert_eq!(r.kind(), ExposureKind::Random);
        }
        assert!(matches!(sample_random_exposure(&w.full, 31, 5), Err(Error::InvalidSampleSize { .. })));
        assert!(matches!(sample_random_exposure(&w.full, 0, 5), Err(Error::InvalidSampleSize { .. })));
    }

    #[test]
    fn sampling_is_uniform_over_items() {
        let w = generate_full(&world(1, 40, 0.3, 2)).unwrap();
        let (n, nbar, draws) = (40usize, 8usize, 10_000u64);
        let mut freq = vec![0u64; n];
        for seed in 0..draws {
            let rand = sample_random_exposure(&w.full, nbar, seed).unwrap();
            assert_eq!(rand[0].len(), nbar);
            for &(item, label) in rand[0].entries() {
                freq[item.index()] += 1;
                assert_eq!(Some(label), w.full[0].label(item));
            }
        }
        let p = nbar as f64 / n as f64;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        let expected = draws as f64 * p;
        let beyond = freq.iter().filter(|&&f| (f as f64 - expected).abs() > 3.0 * sigma).count();
        // 3σ is exceeded with probability ~0.27% per item.
        assert!(beyond <= 1, "{freq:?}");
    }

    fn ranked(tables: &[PredictionTable], catalog: &Catalog) -> Vec<RankedCatalog> {
        tables.iter().map(|t| build_ranked_catalog(t, catalog).unwrap()).collect()
    }

    #[test]
    fn perfect_scorer_ranks_by_latent() {
        let w = generate_full(&world(6, 100, 0.1, 4)).unwrap();
        let tables = make_scorer(&w.latent, &ScorerSpec::new(1.0, 0.0, 1)).unwrap();
        for (r, f) in ranked(&tables, &w.catalog).iter().zip(&w.full) {
            let positives = f.positive_count();
            if positives > 0 && positives < 100 {
                assert_eq!(recall_at_k(r, f, positives).unwrap(), 1.0);
            }
        }
        let again = make_scorer(&w.latent, &ScorerSpec::new(1.0, 0.0, 1)).unwrap();
        assert_eq!(tables, again);
    }

    #[test]
    fn random_scorer_recall_matches_k_over_n() {
        let w = generate_full(&world(200, 200, 0.2, 8)).unwrap();
        let k = 20;
        let mut values = Vec::new();
        for seed in 0..5 {
            let tables = make_scorer(&w.latent, &ScorerSpec::new(0.0, 1.0, seed)).unwrap();
            for (r, f) in ranked(&tables, &w.catalog).iter().zip(&w.full) {
                if let Ok(v) = recall_at_k(r, f, k) {
                    values.push(v);
                }
            }
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
        let se = (var / values.len() as f64).sqrt();
        assert!((mean - 0.1).abs() < 4.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn family_grid_order_and_seeds() {
        let fam = default_family(7);
        assert_eq!(fam.len(), 60);
        assert_eq!((fam[0].fidelity, fam[0].curvature), (0.05, -1.5));
        assert_eq!((fam[1].fidelity, fam[1].curvature), (0.05, -0.75));
        assert_eq!((fam[5].fidelity, fam[5].curvature), (0.1, -1.5));
        assert!(fam.iter().all(|s| s.noise_sd == 1.0));
        let mut seeds: Vec<u64> = fam.iter().map(|s| s.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), 60);
    }
}
