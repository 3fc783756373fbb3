//! Exact checks of the two recall identities.
//!
//! All arithmetic here is over arbitrary-precision rationals and every
//! comparison is an exact equality. The enumeration routines work on 64-bit
//! masks: bit `r` set means "rank `r + 1`".
//!
//! Averaging over every permutation of the catalog is replaced by averaging
//! over every placement of the positives among the ranks. Recall@K only
//! depends on which ranks hold positives, and each placement is hit by the
//! same number (`N⁺!·N⁻!`) of permutations, so both averages coincide.

mod enumerate;
mod exact;
mod monte_carlo;

pub use enumerate::{
    combinations, theorem1_identity_check, theorem2_unbiasedness_check, ConditionalMean,
    Theorem1Report, Theorem2Report,
};
pub use exact::{binomial, expected_recall_random_ranking, hypergeom_pmf, ExactValue};
pub use monte_carlo::{monte_carlo_expectation, MonteCarloEstimate, SamplerSpec};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::SkipPolicy;

/// Default cap on enumerated cases (placement × subset pairs).
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Largest catalog the mask-based enumeration supports.
pub const MAX_ENUMERATION_ITEMS: usize = 64;

/// A small instance of the sampling problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EnumerationSpec {
    pub item_count: usize,
    pub n_pos: usize,
    pub sample_size: usize,
    pub cutoff_full: usize,
    pub cutoff_rand: usize,
}

impl EnumerationSpec {
    pub fn new(
        item_count: usize,
        n_pos: usize,
        sample_size: usize,
        cutoff_full: usize,
        cutoff_rand: usize,
    ) -> Result<Self> {
        let spec = Self { item_count, n_pos, sample_size, cutoff_full, cutoff_rand };
        if item_count == 0 {
            return Err(Error::InvalidInstance("item_count must be at least 1".into()));
        }
        if n_pos > item_count || sample_size > item_count || cutoff_full > item_count {
            return Err(Error::InvalidInstance(format!(
                "n_pos, sample_size and cutoff_full must not exceed item_count ({spec:?})"
            )));
        }
        if cutoff_rand > sample_size {
            return Err(Error::InvalidInstance(format!(
                "cutoff_rand {cutoff_rand} exceeds sample_size {sample_size}"
            )));
        }
        Ok(spec)
    }

    /// Instance whose rand cutoff is coupled to the full cutoff by `K̄ = N̄·K/N`.
    pub fn coupled(item_count: usize, n_pos: usize, sample_size: usize, cutoff_full: usize) -> Result<Self> {
        let scaled = sample_size * cutoff_full;
        if item_count == 0 || scaled == 0 || !scaled.is_multiple_of(item_count) {
            return Err(Error::IncompatibleCutoffs { item_count, sample_size, cutoff_full });
        }
        Self::new(item_count, n_pos, sample_size, cutoff_full, scaled / item_count)
    }

    /// Instance for a ranking-only question (no subsampling).
    pub fn ranking(item_count: usize, n_pos: usize, cutoff_full: usize) -> Result<Self> {
        Self::new(item_count, n_pos, item_count, cutoff_full, cutoff_full)
    }

    pub fn has_coupled_cutoffs(&self) -> bool {
        self.cutoff_rand >= 1 && self.cutoff_rand * self.item_count == self.sample_size * self.cutoff_full
    }

    /// Number of (placement, subset) pairs a joint enumeration visits.
    pub fn enumeration_cost(&self) -> u128 {
        let n = self.item_count as u64;
        exact::binomial_u128(n, self.n_pos as i64)
            .saturating_mul(exact::binomial_u128(n, self.sample_size as i64))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EnumerationOptions {
    pub budget: u128,
    /// Treatment of sampled subsets containing no positives.
    pub policy: SkipPolicy,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self { budget: DEFAULT_BUDGET, policy: SkipPolicy::Skip }
    }
}
