use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use super::exact::{binomial_u128, ExactValue};
use super::{EnumerationOptions, EnumerationSpec, MAX_ENUMERATION_ITEMS};
use crate::error::{Error, Result};
use crate::metrics::SkipPolicy;

/// All `n`-bit masks with exactly `k` bits set, in increasing numeric order.
pub fn combinations(n: usize, k: usize) -> impl Iterator<Item = u64> {
    assert!(n <= 64, "masks hold at most 64 items");
    let limit: u128 = 1u128 << n;
    let first: u128 = if k > n { limit } else { (1u128 << k) - 1 };
    let mut next = Some(first).filter(|&x| x < limit);
    std::iter::from_fn(move || {
        let current = next?;
        next = if current == 0 {
            None
        } else {
            // Gosper's hack: next larger integer with the same popcount.
            let low = current & current.wrapping_neg();
            let ripple = current + low;
            let successor = (((ripple ^ current) >> 2) / low) | ripple;
            Some(successor).filter(|&x| x < limit)
        };
        Some(current as u64)
    })
}

#[inline]
fn low_bits(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// The `k` lowest set bits of `mask`, i.e. the first `k` items of a subset in rank order.
#[inline]
fn lowest_set_bits(mask: u64, k: usize) -> u64 {
    let mut rest = mask;
    for _ in 0..k {
        rest &= rest.wrapping_sub(1);
    }
    mask ^ rest
}

fn check_enumerable(item_count: usize) -> Result<()> {
    if item_count > MAX_ENUMERATION_ITEMS {
        return Err(Error::InvalidInstance(format!(
            "enumeration supports at most {MAX_ENUMERATION_ITEMS} items, got {item_count}"
        )));
    }
    Ok(())
}

fn ratio(num: u128, den: u128) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Positive hits summed per observed-positive count `n`, so that the exact
/// mean of `hits / n` is `Σ_n hits_by_n[n] / n` over the number of cases.
#[derive(Clone, Debug)]
struct HitTally {
    hits_by_n: Vec<u128>,
    cases_by_n: Vec<u128>,
}

impl HitTally {
    fn new(max_n: usize) -> Self {
        Self { hits_by_n: vec![0; max_n + 1], cases_by_n: vec![0; max_n + 1] }
    }

    #[inline]
    fn record(&mut self, n: usize, hits: u32) {
        self.hits_by_n[n] += hits as u128;
        self.cases_by_n[n] += 1;
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.hits_by_n.iter_mut().zip(&other.hits_by_n) {
            *a += b;
        }
        for (a, b) in self.cases_by_n.iter_mut().zip(&other.cases_by_n) {
            *a += b;
        }
        self
    }

    fn empty_cases(&self) -> u128 {
        self.cases_by_n[0]
    }

    /// Exact mean of `hits / n`; cases with `n = 0` are dropped or count as 0.
    fn mean(&self, policy: SkipPolicy) -> Option<BigRational> {
        let mut sum = BigRational::zero();
        let mut cases: u128 = self.cases_by_n.iter().skip(1).sum();
        for n in 1..self.hits_by_n.len() {
            if self.hits_by_n[n] > 0 {
                sum += ratio(self.hits_by_n[n], n as u128);
            }
        }
        if policy == SkipPolicy::Zero {
            cases += self.cases_by_n[0];
        }
        (cases > 0).then(|| sum / BigRational::from_integer(BigInt::from(cases)))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem1Report {
    pub spec: EnumerationSpec,
    pub policy: SkipPolicy,
    /// (placement, subset) pairs visited.
    pub pairs: u128,
    /// Pairs whose subset held no positive.
    pub empty_subset_pairs: u128,
    /// Mean Recall@K̄ over placements and subsets.
    pub rand_mean: ExactValue,
    /// Mean Recall@K over placements.
    pub full_mean: ExactValue,
    /// `rand_mean - full_mean`.
    pub difference: ExactValue,
}

impl Theorem1Report {
    pub fn holds(&self) -> bool {
        self.difference.is_zero()
    }
}

/// Enumerates every placement of the positives and every size-N̄ subset and
/// returns the exact gap between mean Recall@K̄ on the subset and mean
/// Recall@K on the full ranking, under the coupling `K̄ = N̄·K/N`.
///
/// Under [`SkipPolicy::Skip`] every placement drops the same number of
/// subsets (those avoiding all positives), so the pooled mean equals the
/// mean over placements of the per-placement subset means.
pub fn theorem1_identity_check(spec: &EnumerationSpec, options: &EnumerationOptions) -> Result<Theorem1Report> {
    if !spec.has_coupled_cutoffs() {
        return Err(Error::IncompatibleCutoffs {
            item_count: spec.item_count,
            sample_size: spec.sample_size,
            cutoff_full: spec.cutoff_full,
        });
    }
    if spec.n_pos == 0 {
        return Err(Error::NoPositiveSamples);
    }
    let cost = spec.enumeration_cost();
    if cost > options.budget {
        return Err(Error::EnumerationTooLarge { cost, budget: options.budget });
    }
    check_enumerable(spec.item_count)?;

    let n = spec.item_count;
    let top_full = low_bits(spec.cutoff_full);
    let subsets: Vec<(u64, u64)> = combinations(n, spec.sample_size)
        .map(|s| (s, lowest_set_bits(s, spec.cutoff_rand)))
        .collect();
    let placements: Vec<u64> = combinations(n, spec.n_pos).collect();

    let (tally, full_hits) = placements
        .par_iter()
        .fold(
            || (HitTally::new(spec.n_pos), 0u128),
            |(mut tally, mut full_hits), &positives| {
                full_hits += (positives & top_full).count_ones() as u128;
                for &(subset, head) in &subsets {
                    let observed = (positives & subset).count_ones() as usize;
                    tally.record(observed, (positives & head).count_ones());
                }
                (tally, full_hits)
            },
        )
        .reduce(
            || (HitTally::new(spec.n_pos), 0u128),
            |(a, ha), (b, hb)| (a.merge(b), ha + hb),
        );

    let rand_mean = tally
        .mean(options.policy)
        .ok_or_else(|| Error::InvalidInstance("no subset contains a positive".into()))?;
    let full_mean = ratio(full_hits, spec.n_pos as u128 * placements.len() as u128);
    let difference = ExactValue::from_ratio(&rand_mean - &full_mean);
    Ok(Theorem1Report {
        spec: *spec,
        policy: options.policy,
        pairs: placements.len() as u128 * subsets.len() as u128,
        empty_subset_pairs: tally.empty_cases(),
        rand_mean: ExactValue::from_ratio(rand_mean),
        full_mean: ExactValue::from_ratio(full_mean),
        difference,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionalMean {
    /// Number of positives that landed in the subset.
    pub observed_positives: usize,
    pub subsets: u128,
    pub mean: ExactValue,
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem2Report {
    pub item_count: usize,
    pub n_pos: usize,
    pub m_above: usize,
    pub sample_size: usize,
    /// Cutoff realising the layout: `m_above` positives at ranks ≤ `cutoff`.
    pub cutoff: usize,
    pub policy: SkipPolicy,
    pub subsets: u128,
    pub empty_subsets: u128,
    /// Mean of `m / n` over enumerated subsets.
    pub estimator_mean: ExactValue,
    /// `m_above / n_pos`, the Recall@K of the fixed ranking.
    pub target: ExactValue,
    pub difference: ExactValue,
    pub conditional: Vec<ConditionalMean>,
    /// Every conditional mean equals the target.
    pub conditional_holds: bool,
}

impl Theorem2Report {
    pub fn holds(&self) -> bool {
        self.difference.is_zero() && self.conditional_holds
    }
}

/// Fixes a ranking in which `m_above` of the `n_pos` positives sit within the
/// top K, enumerates every size-`sample_size` subset, and compares the exact
/// mean of the URE ratio `m / n` to `m_above / n_pos`, overall and for each
/// observed positive count separately.
///
/// The ranking places positives at ranks `1..=M` and `K+1..=K+(n_pos-M)` with
/// `K = max(M, 1)`; any other layout gives the same subset distribution.
pub fn theorem2_unbiasedness_check(
    item_count: usize,
    n_pos: usize,
    m_above: usize,
    sample_size: usize,
    options: &EnumerationOptions,
) -> Result<Theorem2Report> {
    if n_pos == 0 {
        return Err(Error::NoPositiveSamples);
    }
    if m_above > n_pos || n_pos > item_count {
        return Err(Error::InvalidInstance(format!(
            "need m_above ≤ n_pos ≤ item_count, got {m_above}, {n_pos}, {item_count}"
        )));
    }
    if sample_size == 0 || sample_size > item_count {
        return Err(Error::InvalidSampleSize { size: sample_size, item_count });
    }
    let cutoff = m_above.max(1);
    if cutoff + 1 > item_count || cutoff + (n_pos - m_above) > item_count {
        return Err(Error::InvalidInstance(format!(
            "no cutoff K < {item_count} puts exactly {m_above} of {n_pos} positives in the top K"
        )));
    }
    let cost = binomial_u128(item_count as u64, sample_size as i64);
    if cost > options.budget {
        return Err(Error::EnumerationTooLarge { cost, budget: options.budget });
    }
    check_enumerable(item_count)?;

    let above = low_bits(m_above);
    let below = low_bits(cutoff + n_pos - m_above) & !low_bits(cutoff);
    let positives = above | below;
    let top = low_bits(cutoff);

    let mut tally = HitTally::new(n_pos);
    for subset in combinations(item_count, sample_size) {
        let seen = positives & subset;
        tally.record(seen.count_ones() as usize, (seen & top).count_ones());
    }

    let target = ratio(m_above as u128, n_pos as u128);
    let mean = tally
        .mean(options.policy)
        .expect("a non-empty subset of a catalog with positives can contain one");
    let conditional: Vec<ConditionalMean> = (1..=n_pos)
        .filter(|&n| tally.cases_by_n[n] > 0)
        .map(|n| ConditionalMean {
            observed_positives: n,
            subsets: tally.cases_by_n[n],
            mean: ExactValue::from_ratio(ratio(tally.hits_by_n[n], n as u128 * tally.cases_by_n[n])),
        })
        .collect();
    let conditional_holds = conditional.iter().all(|c| c.mean.ratio() == &target);
    Ok(Theorem2Report {
        item_count,
        n_pos,
        m_above,
        sample_size,
        cutoff,
        policy: options.policy,
        subsets: tally.cases_by_n.iter().sum(),
        empty_subsets: tally.empty_cases(),
        difference: ExactValue::from_ratio(&mean - &target),
        estimator_mean: ExactValue::from_ratio(mean),
        target: ExactValue::from_ratio(target),
        conditional,
        conditional_holds,
    })
}
