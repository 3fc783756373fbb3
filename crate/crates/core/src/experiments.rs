//! Model-selection experiments: how well does each proxy metric computed on
//! randomly-exposed data track gold Recall@K across a family of models?
//!
//! An [`Experiment`] ranks every user's catalog once per model and caches gold
//! Recall@K over a cutoff grid. Random exposures are then evaluated against
//! the cached rankings, which keeps N̄ and K̄ sweeps cheap.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{build_ranked_catalog, Catalog, LabeledExposure, PredictionTable, RankedCatalog};
use crate::error::{Error, Result};
use crate::metrics::{recall_at_ks, traditional_recall_from_ranking, ure_at_ks};
use crate::synth::{derive_seed, make_scorer, sample_random_exposure, ScorerSpec, SyntheticWorld};

/// Random-exposure size of the reference configuration.
pub const REFERENCE_NBAR: usize = 20;
/// Cutoffs of the default URE-vs-gold matrix.
pub const DEFAULT_K_TARGETS: [usize; 5] = [5, 10, 30, 50, 100];

/// Default cutoff grid, intersected with `[1, item_count]`.
pub fn default_k_grid(item_count: usize) -> Vec<usize> {
    const GRID: [usize; 20] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 30, 50, 75, 100, 150, 200, 300, 500];
    GRID.iter().copied().filter(|&k| k <= item_count).collect()
}

/// A macro-averaged metric identified by scheme and cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "scheme", content = "k")]
pub enum MetricId {
    /// Gold Recall@K on fully-exposed labels.
    Full(usize),
    /// Traditional Recall@K̄ on the random exposure.
    Rand(usize),
    /// URE estimate of Recall@K from the random exposure.
    Ure(usize),
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricId::Full(k) => write!(f, "full@{k}"),
            MetricId::Rand(k) => write!(f, "rand@{k}"),
            MetricId::Ure(k) => write!(f, "ure@{k}"),
        }
    }
}

impl FromStr for MetricId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (scheme, k) = s.split_once('@').ok_or_else(|| format!("expected scheme@k, got `{s}`"))?;
        let k: usize = k.parse().map_err(|_| format!("invalid cutoff in `{s}`"))?;
        match scheme {
            "full" => Ok(MetricId::Full(k)),
            "rand" => Ok(MetricId::Rand(k)),
            "ure" => Ok(MetricId::Ure(k)),
            other => Err(format!("unknown scheme `{other}` (expected full, rand or ure)")),
        }
    }
}

/// Macro-averaged metrics for every model of a family (rows are models).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFamilyResult {
    pub model_count: usize,
    pub nbar: usize,
    pub k_grid: Vec<usize>,
    pub kbar_grid: Vec<usize>,
    /// Cutoffs below the catalog size, where URE is defined.
    pub ure_k_grid: Vec<usize>,
    pub full: Vec<Vec<f64>>,
    pub rand: Vec<Vec<f64>>,
    pub ure: Vec<Vec<f64>>,
}

impl ModelFamilyResult {
    /// Values of `metric` across models, if it was computed.
    pub fn series(&self, metric: MetricId) -> Option<Vec<f64>> {
        let (grid, table, k) = match metric {
            MetricId::Full(k) => (&self.k_grid, &self.full, k),
            MetricId::Rand(k) => (&self.kbar_grid, &self.rand, k),
            MetricId::Ure(k) => (&self.ure_k_grid, &self.ure, k),
        };
        let col = grid.iter().position(|&g| g == k)?;
        Some(table.iter().map(|row| row[col]).collect())
    }
}

fn mean_columns(rows: Vec<Vec<f64>>, width: usize) -> Result<Vec<f64>> {
    if rows.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let mut sums = vec![0.0; width];
    for row in &rows {
        for (s, v) in sums.iter_mut().zip(row) {
            *s += v;
        }
    }
    Ok(sums.into_iter().map(|s| s / rows.len() as f64).collect())
}

/// Per-model rankings of a fixed set of users plus cached gold recall.
pub struct Experiment {
    catalog: Catalog,
    full: Vec<LabeledExposure>,
    /// `rankings[model][user_index]`, users aligned with `full`.
    rankings: Vec<Vec<RankedCatalog>>,
    k_grid: Vec<usize>,
    gold: Vec<Vec<f64>>,
}

impl Experiment {
    /// Builds the family of scorers over a synthetic world.
    pub fn synthetic(world: &SyntheticWorld, family: &[ScorerSpec], k_grid: &[usize]) -> Result<Self> {
        let models = family
            .iter()
            .map(|spec| make_scorer(&world.latent, spec))
            .collect::<Result<Vec<_>>>()?;
        Self::from_predictions(world.catalog, world.full.clone(), &models, k_grid)
    }

    /// `models[m]` holds one prediction table per user of `full` (matched by user id).
    pub fn from_predictions(
        catalog: Catalog,
        full: Vec<LabeledExposure>,
        models: &[Vec<PredictionTable>],
        k_grid: &[usize],
    ) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::InvalidSpec("a model family needs at least one model".into()));
        }
        let rankings = models
            .par_iter()
            .map(|tables| {
                let by_user: std::collections::HashMap<_, _> = tables.iter().map(|t| (t.user(), t)).collect();
                full.iter()
                    .map(|f| {
                        let table = by_user.get(&f.user()).ok_or(Error::NoPredictionsForUser { user: f.user() })?;
                        build_ranked_catalog(table, &catalog)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut exp = Self { catalog, full, rankings, k_grid: k_grid.to_vec(), gold: Vec::new() };
        exp.gold = exp.gold_table(k_grid)?;
        Ok(exp)
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn full(&self) -> &[LabeledExposure] {
        &self.full
    }

    pub fn model_count(&self) -> usize {
        self.rankings.len()
    }

    pub fn k_grid(&self) -> &[usize] {
        &self.k_grid
    }

    fn gold_table(&self, k_grid: &[usize]) -> Result<Vec<Vec<f64>>> {
        self.rankings
            .par_iter()
            .map(|users| {
                let rows = users
                    .iter()
                    .zip(&self.full)
                    .filter(|(_, f)| f.positive_count() > 0)
                    .map(|(r, f)| recall_at_ks(r, f, k_grid))
                    .collect::<Result<Vec<_>>>()?;
                mean_columns(rows, k_grid.len())
            })
            .collect()
    }

    /// Evaluates every model on `rand` (aligned with the world's users).
    ///
    /// Users without positives in the relevant labels are skipped.
    pub fn evaluate(&self, rand: &[LabeledExposure], kbar_grid: &[usize]) -> Result<ModelFamilyResult> {
        if rand.len() != self.full.len() || rand.iter().zip(&self.full).any(|(r, f)| r.user() != f.user()) {
            return Err(Error::UserMismatch("random exposure users must match the full exposure users".into()));
        }
        let nbar = rand.iter().map(|r| r.len()).min().unwrap_or(0);
        let ure_k_grid: Vec<usize> =
            self.k_grid.iter().copied().filter(|&k| k < self.catalog.item_count()).collect();
        let per_model: Vec<(Vec<f64>, Vec<f64>)> = self
            .rankings
            .par_iter()
            .map(|users| {
                let rand_rows = users
                    .iter()
                    .zip(rand)
                    .filter(|(_, r)| r.positive_count() > 0)
                    .map(|(ranked, r)| traditional_recall_from_ranking(ranked, r, kbar_grid))
                    .collect::<Result<Vec<_>>>()?;
                let ure_rows = users
                    .iter()
                    .zip(rand)
                    .filter(|(_, r)| r.positive_count() > 0)
                    .map(|(ranked, r)| {
                        let outcomes = ure_at_ks(ranked, r, &ure_k_grid)?;
                        Ok(outcomes.iter().map(|o| o.m as f64 / o.n as f64).collect())
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((mean_columns(rand_rows, kbar_grid.len())?, mean_columns(ure_rows, ure_k_grid.len())?))
            })
            .collect::<Result<Vec<_>>>()?;
        let (rand_table, ure_table) = per_model.into_iter().unzip();
        Ok(ModelFamilyResult {
            model_count: self.rankings.len(),
            nbar,
            k_grid: self.k_grid.clone(),
            kbar_grid: kbar_grid.to_vec(),
            ure_k_grid,
            full: self.gold.clone(),
            rand: rand_table,
            ure: ure_table,
        })
    }
}

/// Pearson product-moment correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::CorrelationLength(xs.len(), ys.len()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    /// `None` when the correlation is undefined (zero variance).
    pub pearson_r: Option<f64>,
}

/// Correlation of one fixed metric with gold Recall@K across a K grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCurve {
    pub fixed: MetricId,
    pub points: Vec<CurvePoint>,
    /// Smallest K attaining the highest correlation.
    pub k_max: usize,
    pub r_max: f64,
}

/// Correlates `fixed` against gold Recall@K for every K in `k_grid`
/// (defaults to the family's grid).
pub fn correlation_sweep(
    family: &ModelFamilyResult,
    fixed: MetricId,
    k_grid: Option<&[usize]>,
) -> Result<CorrelationCurve> {
    let xs = family
        .series(fixed)
        .ok_or_else(|| Error::InvalidSpec(format!("metric {fixed} was not evaluated for this family")))?;
    let grid = k_grid.unwrap_or(&family.k_grid);
    let points = grid
        .iter()
        .map(|&k| {
            let ys = family
                .series(MetricId::Full(k))
                .ok_or_else(|| Error::InvalidSpec(format!("gold Recall@{k} was not evaluated")))?;
            let r = match pearson(&xs, &ys) {
                Ok(r) => Some(r),
                Err(Error::UndefinedCorrelation) => None,
                Err(e) => return Err(e),
            };
            Ok(CurvePoint { k, pearson_r: r })
        })
        .collect::<Result<Vec<_>>>()?;
    let (k_max, r_max) = points
        .iter()
        .filter_map(|p| p.pearson_r.map(|r| (p.k, r)))
        .fold(None, |best: Option<(usize, f64)>, (k, r)| match best {
            Some((_, br)) if br >= r => best,
            _ => Some((k, r)),
        })
        .ok_or(Error::EmptyCurve)?;
    Ok(CorrelationCurve { fixed, points, k_max, r_max })
}

/// One curve of a sweep, tagged with the sampling parameters used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub nbar: usize,
    pub kbar: usize,
    pub curve: CorrelationCurve,
}

/// Seed used for the random exposure of size `nbar` in a sweep.
pub fn sweep_exposure_seed(seed: u64, nbar: usize) -> u64 {
    derive_seed(seed, &[nbar as u64])
}

/// Correlation curves of Recall@K̄ (fixed K̄) for each sample size N̄.
/// Each N̄ gets an independent random exposure.
pub fn nbar_sweep(exp: &Experiment, nbars: &[usize], kbar: usize, seed: u64) -> Result<Vec<SweepCurve>> {
    nbars
        .iter()
        .map(|&nbar| {
            let rand = sample_random_exposure(exp.full(), nbar, sweep_exposure_seed(seed, nbar))?;
            let family = exp.evaluate(&rand, &[kbar])?;
            let curve = correlation_sweep(&family, MetricId::Rand(kbar), None)?;
            Ok(SweepCurve { nbar, kbar, curve })
        })
        .collect()
}

/// Correlation curves of Recall@K̄ for each K̄ at a fixed sample size N̄.
pub fn kbar_sweep(exp: &Experiment, nbar: usize, kbars: &[usize], seed: u64) -> Result<Vec<SweepCurve>> {
    let rand = sample_random_exposure(exp.full(), nbar, sweep_exposure_seed(seed, nbar))?;
    let family = exp.evaluate(&rand, kbars)?;
    kbars
        .iter()
        .map(|&kbar| {
            let curve = correlation_sweep(&family, MetricId::Rand(kbar), None)?;
            Ok(SweepCurve { nbar, kbar, curve })
        })
        .collect()
}

/// `matrix[i][j]` = r(URE@K_i, Recall@K_j).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCorrelation {
    pub k_targets: Vec<usize>,
    pub matrix: Vec<Vec<Option<f64>>>,
    /// For each row, the column K with the highest correlation.
    pub row_argmax: Vec<Option<usize>>,
    /// Every row peaks on its own K.
    pub diagonal_dominant: bool,
}

pub fn ure_vs_gold_report(family: &ModelFamilyResult, k_targets: &[usize]) -> Result<CrossCorrelation> {
    let fetch = |metric: MetricId| {
        family
            .series(metric)
            .ok_or_else(|| Error::InvalidSpec(format!("metric {metric} was not evaluated for this family")))
    };
    let gold = k_targets.iter().map(|&k| fetch(MetricId::Full(k))).collect::<Result<Vec<_>>>()?;
    let mut matrix = Vec::with_capacity(k_targets.len());
    for &k in k_targets {
        let ure = fetch(MetricId::Ure(k))?;
        let row = gold
            .iter()
            .map(|g| match pearson(&ure, g) {
                Ok(r) => Ok(Some(r)),
                Err(Error::UndefinedCorrelation) => Ok(None),
                Err(e) => Err(e),
            })
            .collect::<Result<Vec<_>>>()?;
        matrix.push(row);
    }
    let row_argmax: Vec<Option<usize>> = matrix
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter_map(|(j, r)| r.map(|r| (j, r)))
                .fold(None, |best: Option<(usize, f64)>, (j, r)| match best {
                    Some((_, br)) if br >= r => best,
                    _ => Some((j, r)),
                })
                .map(|(j, _)| k_targets[j])
        })
        .collect();
    let diagonal_dominant = row_argmax.iter().zip(k_targets).all(|(a, &k)| *a == Some(k));
    Ok(CrossCorrelation { k_targets: k_targets.to_vec(), matrix, row_argmax, diagonal_dominant })
}
