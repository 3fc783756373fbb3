use std::path::PathBuf;

use thiserror::Error;

use crate::domain::{ItemId, UserId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid catalog: item_count must be at least 1")]
    EmptyCatalog,

    #[error("user {user}: no prediction for item {item}")]
    MissingPrediction { user: UserId, item: ItemId },

    #[error("user {user}, item {item}: score {score} is not finite")]
    InvalidScore { user: UserId, item: ItemId, score: f64 },

    #[error("user {user}: item {item} is outside the catalog [1..{item_count}]")]
    ItemOutOfRange { user: UserId, item: ItemId, item_count: usize },

    #[error("user {user}: item {item} appears more than once")]
    DuplicateItem { user: UserId, item: ItemId },

    #[error("user {user}: full exposure labels {labeled} of {item_count} items")]
    IncompleteFullExposure { user: UserId, labeled: usize, item_count: usize },

    #[error("user {user}: random exposure must label between 1 and {item_count} items, got {labeled}")]
    InvalidExposureSize { user: UserId, labeled: usize, item_count: usize },

    #[error("user {user}: exposure kind mismatch, expected {expected}")]
    WrongExposureKind { user: UserId, expected: &'static str },

    #[error("user {user}: no positive labels")]
    NoPositives { user: UserId },

    #[error("user {user}: no positive labels among the randomly exposed items")]
    NoObservedPositives { user: UserId },

    #[error("cutoff {k} outside the valid range [1..{max}]")]
    InvalidCutoff { k: usize, max: usize },

    #[error("user {user}: no predictions")]
    NoPredictionsForUser { user: UserId },

    #[error("every user was skipped; nothing to average")]
    EmptyEvaluation,

    #[error("positive count must be at least 1")]
    NoPositiveSamples,

    #[error("cutoff coupling {sample_size}*{cutoff_full}/{item_count} is not a positive integer")]
    IncompatibleCutoffs { item_count: usize, sample_size: usize, cutoff_full: usize },

    #[error("invalid enumeration instance: {0}")]
    InvalidInstance(String),

    #[error("enumeration needs {cost} cases, budget is {budget}")]
    EnumerationTooLarge { cost: u128, budget: u128 },

    #[error("monte carlo needs at least 2 trials, got {0}")]
    InvalidTrials(usize),

    #[error("invalid sample size {size} for a catalog of {item_count} items")]
    InvalidSampleSize { size: usize, item_count: usize },

    #[error("invalid generator parameter: {0}")]
    InvalidSpec(String),

    #[error("correlation undefined: zero variance")]
    UndefinedCorrelation,

    #[error("correlation needs two equal-length vectors of at least 2 values (got {0} and {1})")]
    CorrelationLength(usize, usize),

    #[error("user sets differ: {0}")]
    UserMismatch(String),

    #[error("every point of the correlation curve is undefined")]
    EmptyCurve,

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("{path}:{line}: duplicate (user {user}, item {item})")]
    DuplicatePair { path: PathBuf, line: u64, user: String, item: String },

    #[error("{path}:{line}: label {label} is not 0 or 1")]
    InvalidLabel { path: PathBuf, line: u64, label: String },

    #[error("{path}: user {user} has no prediction for item {item}")]
    MissingPredictionRow { path: PathBuf, user: String, item: String },

    #[error("{path}:{line}: score {score} for (user {user}, item {item}) is not finite")]
    InvalidScoreRow { path: PathBuf, line: u64, user: String, item: String, score: String },

    #[error("{path}:{line}: item {item} is not in the catalog")]
    UnknownItem { path: PathBuf, line: u64, item: String },

    #[error("{path}: user {user} labels {labeled} of {item_count} catalog items in a full exposure file")]
    IncompleteFullExposureFile { path: PathBuf, user: String, labeled: usize, item_count: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
