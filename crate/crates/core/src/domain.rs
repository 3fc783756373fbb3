//! Domain types shared by every scheme: the catalog, labeled exposures,
//! per-user predictions and the rankings derived from them.
//!
//! Item ids are dense and 1-based (`1..=item_count`). External ids are
//! remapped at ingestion time by [`crate::io::IdMap`].

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UserId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(pub u32);

impl ItemId {
    /// Zero-based position of this item in dense per-item vectors.
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    #[inline]
    pub fn from_index(index: usize) -> Self {
        ItemId(index as u32 + 1)
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The candidate item set shared by every user.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    item_count: usize,
}

impl Catalog {
    pub fn new(item_count: usize) -> Result<Self> {
        if item_count == 0 {
            return Err(Error::EmptyCatalog);
        }
        Ok(Self { item_count })
    }

    pub fn item_count(&self) -> usize {
        self.item_count
    }

    pub fn contains(&self, item: ItemId) -> bool {
        item.0 >= 1 && item.0 as usize <= self.item_count
    }

    pub fn items(&self) -> impl Iterator<Item = ItemId> {
        (1..=self.item_count as u32).map(ItemId)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExposureKind {
    /// Every catalog item carries a label.
    Full,
    /// A uniformly drawn subset of the catalog carries labels.
    Random,
}

impl ExposureKind {
    fn name(self) -> &'static str {
        match self {
            ExposureKind::Full => "full",
            ExposureKind::Random => "random",
        }
    }
}

/// Binary feedback of one user on a set of items.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledExposure {
    user: UserId,
    kind: ExposureKind,
    /// Sorted by item id.
    entries: Vec<(ItemId, bool)>,
}

impl LabeledExposure {
    pub fn new(
        user: UserId,
        kind: ExposureKind,
        entries: impl IntoIterator<Item = (ItemId, bool)>,
        catalog: &Catalog,
    ) -> Result<Self> {
        let mut entries: Vec<(ItemId, bool)> = entries.into_iter().collect();
        entries.sort_unstable_by_key(|&(item, _)| item);
        for window in entries.windows(2) {
            if window[0].0 == window[1].0 {
                return Err(Error::DuplicateItem { user, item: window[0].0 });
            }
        }
        if let Some(&(item, _)) = entries.iter().find(|(item, _)| !catalog.contains(*item)) {
            return Err(Error::ItemOutOfRange { user, item, item_count: catalog.item_count() });
        }
        let labeled = entries.len();
        let item_count = catalog.item_count();
        match kind {
            ExposureKind::Full if labeled != item_count => {
                return Err(Error::IncompleteFullExposure { user, labeled, item_count });
            }
            ExposureKind::Random if labeled == 0 || labeled > item_count => {
                return Err(Error::InvalidExposureSize { user, labeled, item_count });
            }
            _ => {}
        }
        Ok(Self { user, kind, entries })
    }

    /// Full exposure from a dense label vector (`labels[i]` belongs to item `i + 1`).
    pub fn full_from_labels(user: UserId, labels: &[bool]) -> Result<Self> {
        let catalog = Catalog::new(labels.len())?;
        let entries = labels.iter().enumerate().map(|(i, &l)| (ItemId::from_index(i), l));
        Self::new(user, ExposureKind::Full, entries, &catalog)
    }

    pub fn user(&self) -> UserId {
        self.user
    }

    pub fn kind(&self) -> ExposureKind {
        self.kind
    }

    pub fn entries(&self) -> &[(ItemId, bool)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn positives(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.entries.iter().filter(|(_, label)| *label).map(|&(item, _)| item)
    }

    pub fn positive_count(&self) -> usize {
        self.entries.iter().filter(|(_, label)| *label).count()
    }

    pub fn label(&self, item: ItemId) -> Option<bool> {
        self.entries
            .binary_search_by_key(&item, |&(i, _)| i)
            .ok()
            .map(|idx| self.entries[idx].1)
    }

    /// Reinterprets a full exposure as a random exposure covering every item.
    pub fn as_random(&self) -> Self {
        Self { user: self.user, kind: ExposureKind::Random, entries: self.entries.clone() }
    }

    pub(crate) fn expect_kind(&self, kind: ExposureKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::WrongExposureKind { user: self.user, expected: kind.name() })
        }
    }
}

/// A model's score for every catalog item, for one user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionTable {
    user: UserId,
    /// `scores[i]` is the score of item `i + 1`.
    scores: Vec<f64>,
}

impl PredictionTable {
    pub fn from_dense(user: UserId, scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::EmptyCatalog);
        }
        if let Some((i, &score)) = scores.iter().enumerate().find(|(_, s)| !s.is_finite()) {
            return Err(Error::InvalidScore { user, item: ItemId::from_index(i), score });
        }
        Ok(Self { user, scores })
    }

    /// Builds a table from sparse `(item, score)` pairs that must cover the catalog exactly once.
    pub fn from_pairs(
        user: UserId,
        pairs: impl IntoIterator<Item = (ItemId, f64)>,
        catalog: &Catalog,
    ) -> Result<Self> {
        let mut scores: Vec<Option<f64>> = vec![None; catalog.item_count()];
        for (item, score) in pairs {
            if !catalog.contains(item) {
                return Err(Error::ItemOutOfRange { user, item, item_count: catalog.item_count() });
            }
            if !score.is_finite() {
                return Err(Error::InvalidScore { user, item, score });
            }
            let slot = &mut scores[item.index()];
            if slot.is_some() {
                return Err(Error::DuplicateItem { user, item });
            }
            *slot = Some(score);
        }
        let scores = scores
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or(Error::MissingPrediction { user, item: ItemId::from_index(i) }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { user, scores })
    }

    pub fn user(&self) -> UserId {
        self.user
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn score(&self, item: ItemId) -> f64 {
        self.scores[item.index()]
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    /// Item order used by every scheme: higher score first, ties by ascending id.
    pub fn compare_items(&self, a: ItemId, b: ItemId) -> Ordering {
        let (sa, sb) = (self.score(a), self.score(b));
        sb.partial_cmp(&sa).unwrap_or(Ordering::Equal).then(a.cmp(&b))
    }
}

/// Total order of the catalog for one user, with its inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedCatalog {
    user: UserId,
    order: Vec<ItemId>,
    /// `rank_of[i]` is the 1-based rank of item `i + 1`.
    rank_of: Vec<u32>,
}

impl RankedCatalog {
    /// Builds a ranking directly from an order; `order` must be a permutation of the catalog.
    pub fn from_order(user: UserId, order: Vec<ItemId>) -> Result<Self> {
        let n = order.len();
        let catalog = Catalog::new(n)?;
        let mut rank_of = vec![0u32; n];
        for (pos, &item) in order.iter().enumerate() {
            if !catalog.contains(item) {
                return Err(Error::ItemOutOfRange { user, item, item_count: n });
            }
            if rank_of[item.index()] != 0 {
                return Err(Error::DuplicateItem { user, item });
            }
            rank_of[item.index()] = pos as u32 + 1;
        }
        Ok(Self { user, order, rank_of })
    }

    pub fn user(&self) -> UserId {
        self.user
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[ItemId] {
        &self.order
    }

    /// 1-based rank of `item`.
    #[inline]
    pub fn rank(&self, item: ItemId) -> usize {
        self.rank_of[item.index()] as usize
    }

    /// Item at 1-based `rank`.
    pub fn item_at(&self, rank: usize) -> ItemId {
        self.order[rank - 1]
    }
}

pub fn build_ranked_catalog(preds: &PredictionTable, catalog: &Catalog) -> Result<RankedCatalog> {
    let user = preds.user();
    if preds.len() < catalog.item_count() {
        return Err(Error::MissingPrediction { user, item: ItemId::from_index(preds.len()) });
    }
    if preds.len() > catalog.item_count() {
        return Err(Error::ItemOutOfRange {
            user,
            item: ItemId::from_index(catalog.item_count()),
            item_count: catalog.item_count(),
        });
    }
    if let Some((i, &score)) = preds.scores().iter().enumerate().find(|(_, s)| !s.is_finite()) {
        return Err(Error::InvalidScore { user, item: ItemId::from_index(i), score });
    }
    let mut order: Vec<ItemId> = catalog.items().collect();
    order.sort_unstable_by(|&a, &b| preds.compare_items(a, b));
    let mut rank_of = vec![0u32; order.len()];
    for (pos, item) in order.iter().enumerate() {
        rank_of[item.index()] = pos as u32 + 1;
    }
    Ok(RankedCatalog { user, order, rank_of })
}

/// One raw `(user, item, label)` row as read from an exposure file, before validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExposureRecord {
    pub line: u64,
    pub user: UserId,
    pub item: ItemId,
    pub label: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationSummary {
    /// Second and later occurrences of a `(user, item)` pair.
    pub duplicates: Vec<ExposureIssue>,
    pub out_of_range: Vec<ExposureIssue>,
    pub invalid_labels: Vec<ExposureIssue>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExposureIssue {
    pub line: u64,
    pub user: UserId,
    pub item: ItemId,
}

impl ValidationSummary {
    pub fn is_clean(&self) -> bool {
        self.duplicates.is_empty() && self.out_of_range.is_empty() && self.invalid_labels.is_empty()
    }

    pub fn issue_count(&self) -> usize {
        self.duplicates.len() + self.out_of_range.len() + self.invalid_labels.len()
    }
}

/// Reports duplicate pairs, out-of-range items and non-binary labels. Never fails.
pub fn validate_dataset(records: &[ExposureRecord], catalog: &Catalog) -> ValidationSummary {
    let mut seen = BTreeSet::new();
    let mut summary = ValidationSummary::default();
    for rec in records {
        let issue = ExposureIssue { line: rec.line, user: rec.user, item: rec.item };
        if !seen.insert((rec.user, rec.item)) {
            summary.duplicates.push(issue.clone());
        }
        if !catalog.contains(rec.item) {
            summary.out_of_range.push(issue.clone());
        }
        if rec.label != 0 && rec.label != 1 {
            summary.invalid_labels.push(issue);
        }
    }
    summary
}
