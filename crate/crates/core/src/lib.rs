//! Recall evaluation on randomly exposed data.
//!
//! When each user has labels for only a random sample of `N̄` items out of a
//! catalog of `N`, the usual Recall@K̄ on that sample measures something
//! different from Recall@K on the full catalog. This crate provides:
//!
//! * [`metrics`]: gold Recall@K, traditional Recall@K̄ on the sample, and the
//!   unbiased recall estimator (URE), which ranks the whole catalog and counts
//!   observed positives inside the top K.
//! * [`oracle`]: exact rational enumeration and Monte Carlo checks of the
//!   identities relating these quantities.
//! * [`synth`]: seeded synthetic worlds and scorer families.
//! * [`experiments`]: correlation curves, `N̄`/`K̄` sweeps and the
//!   URE-vs-gold correlation matrix over a family of models.
//! * [`io`] and [`cli`]: CSV ingestion, JSON/CSV reports and the `ure` binary.
//!
//! ```
//! use ure_eval::domain::{build_ranked_catalog, Catalog, ExposureKind, ItemId, LabeledExposure, PredictionTable, UserId};
//! use ure_eval::metrics::ure_estimate;
//!
//! let catalog = Catalog::new(4).unwrap();
//! let preds = PredictionTable::from_dense(UserId(1), vec![0.9, 0.1, 0.5, 0.3]).unwrap();
//! let ranked = build_ranked_catalog(&preds, &catalog).unwrap();
//! let rand = LabeledExposure::new(
//!     UserId(1),
//!     ExposureKind::Random,
//!     [(ItemId(1), true), (ItemId(2), true)],
//!     &catalog,
//! )
//! .unwrap();
//! let est = ure_estimate(&ranked, &rand, 2).unwrap();
//! assert_eq!((est.m, est.n), (1, 2));
//! ```

pub mod domain;
pub mod error;
pub mod metrics;
pub mod oracle;
pub mod synth;
pub mod experiments;
pub mod io;
pub mod cli;
