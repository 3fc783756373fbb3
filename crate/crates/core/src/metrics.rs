//! The three recall evaluation schemes.
//!
//! * [`recall_at_k`]: gold-standard Recall@K against a fully-exposed user.
//! * [`traditional_recall_on_rand`]: the same formula applied to the ranking
//!   restricted to the randomly exposed items, with a cutoff `K̄ ≤ N̄`.
//! * [`ure_estimate`]: ranks the whole catalog, takes the (K+1)-th item as a
//!   threshold and reports the share of observed positives ranked above it.
//!
//! Thresholds are expressed through ranks. "Score strictly above the
//! (K+1)-th item" and "rank ≤ K" coincide whenever no tie straddles the
//! boundary, and the rank form stays well defined when one does.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{
    build_ranked_catalog, Catalog, ExposureKind, ItemId, LabeledExposure, PredictionTable,
    RankedCatalog, UserId,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Recall@K̄ on the randomly-exposed items only.
    #[serde(rename = "rand")]
    TraditionalRand,
    /// Recall@K on fully-exposed labels.
    #[serde(rename = "full")]
    GoldFull,
    /// Unbiased Recall@K estimate from randomly-exposed labels.
    #[serde(rename = "ure")]
    Ure,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::TraditionalRand => "rand",
            Scheme::GoldFull => "full",
            Scheme::Ure => "ure",
        })
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rand" | "traditional" => Ok(Scheme::TraditionalRand),
            "full" | "gold" => Ok(Scheme::GoldFull),
            "ure" => Ok(Scheme::Ure),
            other => Err(format!("unknown scheme `{other}` (expected full, rand or ure)")),
        }
    }
}

/// What to do with a user (or sampled subset) that has no positive labels.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SkipPolicy {
    /// Exclude from the average; recall is undefined with no positives.
    #[default]
    Skip,
    /// Count as a recall of 0.
    Zero,
}

impl fmt::Display for SkipPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkipPolicy::Skip => "skip",
            SkipPolicy::Zero => "zero",
        })
    }
}

impl FromStr for SkipPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "skip" => Ok(SkipPolicy::Skip),
            "zero" => Ok(SkipPolicy::Zero),
            other => Err(format!("unknown skip policy `{other}` (expected skip or zero)")),
        }
    }
}

fn check_cutoff(k: usize, max: usize) -> Result<()> {
    if k == 0 || k > max {
        Err(Error::InvalidCutoff { k, max })
    } else {
        Ok(())
    }
}

/// Sorted ranks of the user's positive items in the full ranking.
fn positive_ranks(ranked: &RankedCatalog, labels: &LabeledExposure) -> Vec<usize> {
    let mut ranks: Vec<usize> = labels.positives().map(|item| ranked.rank(item)).collect();
    ranks.sort_unstable();
    ranks
}

/// Gold-standard Recall@K: share of the user's positives ranked within the top `k`.
pub fn recall_at_k(ranked: &RankedCatalog, full: &LabeledExposure, k: usize) -> Result<f64> {
    Ok(recall_at_ks(ranked, full, &[k])?[0])
}

/// Recall@K for several cutoffs from a single pass over the positives.
pub fn recall_at_ks(ranked: &RankedCatalog, full: &LabeledExposure, ks: &[usize]) -> Result<Vec<f64>> {
    full.expect_kind(ExposureKind::Full)?;
    if full.len() != ranked.len() {
        return Err(Error::IncompleteFullExposure {
            user: full.user(),
            labeled: full.len(),
            item_count: ranked.len(),
        });
    }
    for &k in ks {
        check_cutoff(k, ranked.len())?;
    }
    let ranks = positive_ranks(ranked, full);
    if ranks.is_empty() {
        return Err(Error::NoPositives { user: full.user() });
    }
    let total = ranks.len() as f64;
    Ok(ks
        .iter()
        .map(|&k| ranks.partition_point(|&r| r <= k) as f64 / total)
        .collect())
}

/// Recall@K̄ computed on the ranking of the randomly exposed items alone.
pub fn traditional_recall_on_rand(
    preds: &PredictionTable,
    rand: &LabeledExposure,
    kbar: usize,
) -> Result<f64> {
    Ok(traditional_recall_at_kbars(preds, rand, &[kbar])?[0])
}

pub fn traditional_recall_at_kbars(
    preds: &PredictionTable,
    rand: &LabeledExposure,
    kbars: &[usize],
) -> Result<Vec<f64>> {
    for &kbar in kbars {
        check_cutoff(kbar, rand.len())?;
    }
    if let Some(&(item, _)) = rand.entries().iter().find(|(item, _)| item.index() >= preds.len()) {
        return Err(Error::MissingPrediction { user: rand.user(), item });
    }
    let mut items: Vec<(ItemId, bool)> = rand.entries().to_vec();
    items.sort_unstable_by(|a, b| preds.compare_items(a.0, b.0));
    // Restricted ranks of the positives, ascending.
    let ranks: Vec<usize> = items
        .iter()
        .enumerate()
        .filter(|(_, (_, label))| *label)
        .map(|(pos, _)| pos + 1)
        .collect();
    if ranks.is_empty() {
        return Err(Error::NoPositives { user: rand.user() });
    }
    let total = ranks.len() as f64;
    Ok(kbars
        .iter()
        .map(|&kbar| ranks.partition_point(|&r| r <= kbar) as f64 / total)
        .collect())
}

/// [`traditional_recall_at_kbars`] driven by a full ranking instead of raw
/// scores. The restricted order is the full order filtered to the exposed
/// items, so both agree exactly.
pub fn traditional_recall_from_ranking(
    ranked: &RankedCatalog,
    rand: &LabeledExposure,
    kbars: &[usize],
) -> Result<Vec<f64>> {
    for &kbar in kbars {
        check_cutoff(kbar, rand.len())?;
    }
    if let Some(&(item, _)) = rand.entries().iter().find(|(item, _)| item.index() >= ranked.len()) {
        return Err(Error::ItemOutOfRange { user: rand.user(), item, item_count: ranked.len() });
    }
    let mut by_rank: Vec<(usize, bool)> =
        rand.entries().iter().map(|&(item, label)| (ranked.rank(item), label)).collect();
    by_rank.sort_unstable();
    let ranks: Vec<usize> = by_rank
        .iter()
        .enumerate()
        .filter(|(_, (_, label))| *label)
        .map(|(pos, _)| pos + 1)
        .collect();
    if ranks.is_empty() {
        return Err(Error::NoPositives { user: rand.user() });
    }
    let total = ranks.len() as f64;
    Ok(kbars
        .iter()
        .map(|&kbar| ranks.partition_point(|&r| r <= kbar) as f64 / total)
        .collect())
}

/// Per-user URE outcome: `n` observed positives, `m` of them ranked within the top K.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UreUserOutcome {
    pub n: usize,
    pub m: usize,
}

impl UreUserOutcome {
    pub fn value(&self) -> Option<f64> {
        (self.n > 0).then(|| self.m as f64 / self.n as f64)
    }
}

/// URE estimate of Recall@K for one user.
pub fn ure_estimate(ranked: &RankedCatalog, rand: &LabeledExposure, k: usize) -> Result<UreUserOutcome> {
    Ok(ure_at_ks(ranked, rand, &[k])?[0])
}

pub fn ure_at_ks(
    ranked: &RankedCatalog,
    rand: &LabeledExposure,
    ks: &[usize],
) -> Result<Vec<UreUserOutcome>> {
    // The (K+1)-th item must exist.
    for &k in ks {
        check_cutoff(k, ranked.len().saturating_sub(1))?;
    }
    if let Some(&(item, _)) = rand.entries().iter().find(|(item, _)| item.index() >= ranked.len()) {
        return Err(Error::ItemOutOfRange { user: rand.user(), item, item_count: ranked.len() });
    }
    let ranks = positive_ranks(ranked, rand);
    if ranks.is_empty() {
        return Err(Error::NoObservedPositives { user: rand.user() });
    }
    let n = ranks.len();
    Ok(ks
        .iter()
        .map(|&k| UreUserOutcome { n, m: ranks.partition_point(|&r| r <= k) })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    NoPositives,
    NoObservedPositives,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkipReason::NoPositives => "no_positives",
            SkipReason::NoObservedPositives => "no_observed_positives",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedUser {
    pub user: UserId,
    pub reason: SkipReason,
}

/// Macro-averaged result of one scheme over a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub scheme: Scheme,
    pub k: usize,
    pub policy: SkipPolicy,
    pub per_user: BTreeMap<UserId, f64>,
    pub macro_mean: f64,
    /// Users excluded from the mean (empty under [`SkipPolicy::Zero`]).
    pub skipped_users: Vec<SkippedUser>,
    /// Users without positives that were scored 0 under [`SkipPolicy::Zero`].
    pub zero_filled_users: Vec<SkippedUser>,
}

impl EvalReport {
    pub fn skipped_count(&self, reason: SkipReason) -> usize {
        self.skipped_users.iter().filter(|s| s.reason == reason).count()
    }
}

fn user_value(
    scheme: Scheme,
    labels: &LabeledExposure,
    preds: &PredictionTable,
    catalog: &Catalog,
    k: usize,
) -> Result<f64> {
    match scheme {
        Scheme::GoldFull => recall_at_k(&build_ranked_catalog(preds, catalog)?, labels, k),
        Scheme::TraditionalRand => traditional_recall_on_rand(preds, labels, k),
        Scheme::Ure => {
            let outcome = ure_estimate(&build_ranked_catalog(preds, catalog)?, labels, k)?;
            Ok(outcome.value().expect("n > 0 after ure_estimate"))
        }
    }
}

/// Evaluates every user in `datasets` under `scheme` and macro-averages.
///
/// Users are processed in parallel; the report lists them in id order.
/// `k` is K for [`Scheme::GoldFull`] and [`Scheme::Ure`], K̄ for
/// [`Scheme::TraditionalRand`].
pub fn evaluate_scheme(
    scheme: Scheme,
    datasets: &[LabeledExposure],
    preds: &[PredictionTable],
    k: usize,
    policy: SkipPolicy,
) -> Result<EvalReport> {
    let by_user: HashMap<UserId, &PredictionTable> = preds.iter().map(|p| (p.user(), p)).collect();
    let mut users: Vec<&LabeledExposure> = datasets.iter().collect();
    users.sort_by_key(|d| d.user());

    let outcomes: Vec<(UserId, Result<f64>)> = users
        .par_iter()
        .map(|labels| {
            let user = labels.user();
            let value = by_user
                .get(&user)
                .ok_or(Error::NoPredictionsForUser { user })
                .and_then(|p| {
                    if scheme == Scheme::GoldFull {
                        labels.expect_kind(ExposureKind::Full)?;
                    }
                    let catalog = Catalog::new(p.len())?;
                    user_value(scheme, labels, p, &catalog, k)
                });
            (user, value)
        })
        .collect();

    let mut per_user = BTreeMap::new();
    let mut skipped_users = Vec::new();
    let mut zero_filled_users = Vec::new();
    for (user, outcome) in outcomes {
        let reason = match outcome {
            Ok(value) => {
                per_user.insert(user, value);
                continue;
            }
            Err(Error::NoPositives { .. }) => SkipReason::NoPositives,
            Err(Error::NoObservedPositives { .. }) => SkipReason::NoObservedPositives,
            Err(e) => return Err(e),
        };
        match policy {
            SkipPolicy::Skip => skipped_users.push(SkippedUser { user, reason }),
            SkipPolicy::Zero => {
                per_user.insert(user, 0.0);
                zero_filled_users.push(SkippedUser { user, reason });
            }
        }
    }
    if per_user.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let macro_mean = per_user.values().sum::<f64>() / per_user.len() as f64;
    Ok(EvalReport { scheme, k, policy, per_user, macro_mean, skipped_users, zero_filled_users })
}
