//! Sampling check of the estimator at a size too large to enumerate.
//!
//! 200 items, 40 positives of which 15 are ranked in the top K = 15, and a
//! random exposure of 25 items per trial. The mean of m/n should approach 15/40.

use ure_eval::domain::{Catalog, ExposureKind, ItemId, LabeledExposure, RankedCatalog, UserId};
use ure_eval::metrics::ure_estimate;
use ure_eval::oracle::{monte_carlo_expectation, SamplerSpec};

fn main() -> ure_eval::error::Result<()> {
    let catalog = Catalog::new(200)?;
    let ranked = RankedCatalog::from_order(UserId(1), (1..=200).map(ItemId).collect())?;
    let metric = |drawn: &[usize]| {
        let entries = drawn.iter().map(|&i| (ItemId::from_index(i), i < 40));
        let rand = LabeledExposure::new(UserId(1), ExposureKind::Random, entries, &catalog).ok()?;
        ure_estimate(&ranked, &rand, 15).ok()?.value()
    };
    for seed in 1..=5 {
        let est = monte_carlo_expectation(metric, SamplerSpec { population: 200, draw: 25 }, 100_000, seed)?;
        println!(
            "seed {seed}: mean {:.5} ± {:.5} ({} draws without positives skipped), z = {:+.2}",
            est.mean,
            est.std_error,
            est.skipped,
            est.z_score(0.375)
        );
    }
    Ok(())
}
