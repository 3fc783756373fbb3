//! The three schemes on a single hand-made user.
//!
//! Catalog of 10 items, positives {1, 4, 7}, and a model whose scores rank
//! the catalog 1, 2, ..., 10. The random exposure shows the user 4 items.

use ure_eval::domain::{build_ranked_catalog, Catalog, ExposureKind, ItemId, LabeledExposure, PredictionTable, UserId};
use ure_eval::metrics::{recall_at_k, traditional_recall_on_rand, ure_estimate};

fn main() -> ure_eval::error::Result<()> {
    let catalog = Catalog::new(10)?;
    let user = UserId(1);
    let labels: Vec<bool> = (1..=10).map(|i| [1, 4, 7].contains(&i)).collect();
    let full = LabeledExposure::full_from_labels(user, &labels)?;
    let scores: Vec<f64> = (0..10).map(|i| 1.0 - i as f64 / 10.0).collect();
    let preds = PredictionTable::from_dense(user, scores)?;
    let ranked = build_ranked_catalog(&preds, &catalog)?;

    let shown = [1, 3, 7, 9].map(|i| (ItemId(i), labels[i as usize - 1]));
    let rand = LabeledExposure::new(user, ExposureKind::Random, shown, &catalog)?;

    println!("ranking: {:?}", ranked.order().iter().map(|i| i.0).collect::<Vec<_>>());
    for k in [1, 3, 5, 8] {
        let ure = ure_estimate(&ranked, &rand, k)?;
        println!(
            "K={k}: Recall@K on D_full = {:.3}, URE = {}/{} = {:.3}",
            recall_at_k(&ranked, &full, k)?,
            ure.m,
            ure.n,
            ure.value().unwrap()
        );
    }
    for kbar in 1..=2 {
        println!("Kbar={kbar}: traditional Recall@Kbar on D_rand = {:.3}", traditional_recall_on_rand(&preds, &rand, kbar)?);
    }
    Ok(())
}
