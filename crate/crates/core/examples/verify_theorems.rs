//! Exact checks of both identities on small instances.
//!
//! Run with `cargo run --example verify_theorems`.

use ure_eval::metrics::SkipPolicy;
use ure_eval::oracle::{
    expected_recall_random_ranking, theorem1_identity_check, theorem2_unbiasedness_check, EnumerationOptions,
    EnumerationSpec,
};

fn main() -> ure_eval::error::Result<()> {
    // A random ranking finds K/N of the positives on average.
    for (n, npos, k) in [(10, 3, 3), (12, 5, 4), (40, 7, 9)] {
        let spec = EnumerationSpec::ranking(n, npos, k)?;
        println!("N={n} N+={npos} K={k}: E[Recall@K] = {}", expected_recall_random_ranking(&spec)?);
    }

    // Recall@Kbar on a random sample of Nbar items matches Recall@K with K = N·Kbar/Nbar.
    let spec = EnumerationSpec::coupled(12, 4, 6, 4)?;
    for policy in [SkipPolicy::Skip, SkipPolicy::Zero] {
        let report = theorem1_identity_check(&spec, &EnumerationOptions { policy, ..Default::default() })?;
        println!(
            "coupled N=12 N+=4 Nbar=6 K=4 Kbar={} ({policy}): {} vs {}, difference {} over {} pairs",
            spec.cutoff_rand, report.rand_mean, report.full_mean, report.difference, report.pairs
        );
    }

    // The URE estimate is unbiased, and unbiased within each observed-positive count.
    let report = theorem2_unbiasedness_check(14, 5, 3, 6, &EnumerationOptions::default())?;
    println!(
        "URE N=14 N+=5 M=3 Nbar=6: E[m/n] = {} (target {}), difference {}",
        report.estimator_mean, report.target, report.difference
    );
    for c in &report.conditional {
        println!("  n={}: E[m/n | n] = {} over {} subsets", c.observed_positives, c.mean, c.subsets);
    }
    Ok(())
}
