//! Generates a small synthetic world and writes it out as CSV.
//!
//! `cargo run --example simulate_family -- <dir>` (defaults to a temp dir).

use std::path::PathBuf;

use ure_eval::experiments::sweep_exposure_seed;
use ure_eval::io::{write_exposure_csv, write_predictions_csv};
use ure_eval::metrics::{evaluate_scheme, Scheme, SkipPolicy};
use ure_eval::synth::{generate_full, make_scorer, sample_random_exposure, scorer_family, PositiveRate, WorldSpec};

fn main() -> ure_eval::error::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("ure-sim"));
    std::fs::create_dir_all(&dir).map_err(|e| ure_eval::error::Error::Io { path: dir.clone(), source: e })?;

    let spec = WorldSpec { user_count: 50, item_count: 120, positive_rate: PositiveRate::Uniform { low: 0.05, high: 0.25 }, seed: 11 };
    let world = generate_full(&spec)?;
    let rand = sample_random_exposure(&world.full, 30, sweep_exposure_seed(spec.seed, 30))?;
    write_exposure_csv(dir.join("full.csv"), &world.full, None)?;
    write_exposure_csv(dir.join("rand.csv"), &rand, None)?;

    let family = scorer_family(&[0.0, 0.2, 0.4, 0.6, 1.0], &[1.0], &[0.0], spec.seed);
    for (i, scorer) in family.iter().enumerate() {
        let preds = make_scorer(&world.latent, scorer)?;
        write_predictions_csv(dir.join(format!("model_{i}.csv")), &preds, None)?;
        let gold = evaluate_scheme(Scheme::GoldFull, &world.full, &preds, 10, SkipPolicy::Skip)?;
        let ure = evaluate_scheme(Scheme::Ure, &rand, &preds, 10, SkipPolicy::Skip)?;
        let trad = evaluate_scheme(Scheme::TraditionalRand, &rand, &preds, 3, SkipPolicy::Skip)?;
        println!(
            "fidelity {:.1}: Recall@10 {:.3}  URE@10 {:.3} ({} users skipped)  Recall@Kbar=3 {:.3}",
            scorer.fidelity,
            gold.macro_mean,
            ure.macro_mean,
            ure.skipped_users.len(),
            trad.macro_mean
        );
    }
    println!("wrote full.csv, rand.csv and {} prediction files to {}", family.len(), dir.display());
    Ok(())
}
