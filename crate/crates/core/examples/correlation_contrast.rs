//! Which metric on D_rand tracks Recall@10 on D_full across 60 models?
//!
//! Uses the reference synthetic configuration: 500 items, 200 users, random
//! exposure of 20 items per user, seed 7.

use ure_eval::experiments::{
    correlation_sweep, default_k_grid, sweep_exposure_seed, ure_vs_gold_report, Experiment, MetricId,
    DEFAULT_K_TARGETS, REFERENCE_NBAR,
};
use ure_eval::synth::{default_family, generate_full, sample_random_exposure, WorldSpec};

fn main() -> ure_eval::error::Result<()> {
    let seed = 7;
    let world = generate_full(&WorldSpec::reference(seed))?;
    let exp = Experiment::synthetic(&world, &default_family(seed), &default_k_grid(500))?;
    let rand = sample_random_exposure(&world.full, REFERENCE_NBAR, sweep_exposure_seed(seed, REFERENCE_NBAR))?;
    let family = exp.evaluate(&rand, &default_k_grid(REFERENCE_NBAR))?;

    for fixed in [MetricId::Rand(5), MetricId::Ure(10), MetricId::Ure(30)] {
        let curve = correlation_sweep(&family, fixed, None)?;
        let at = |k: usize| curve.points.iter().find(|p| p.k == k).and_then(|p| p.pearson_r).unwrap_or(f64::NAN);
        println!(
            "{fixed:>7}: r vs Recall@10 = {:.3}, r vs Recall@30 = {:.3}, peak at K = {} (r = {:.3})",
            at(10),
            at(30),
            curve.k_max,
            curve.r_max
        );
    }

    let cross = ure_vs_gold_report(&family, &DEFAULT_K_TARGETS)?;
    print!("\n          ");
    for k in &cross.k_targets {
        print!("R@{k:<5}");
    }
    println!();
    for (row, k) in cross.matrix.iter().zip(&cross.k_targets) {
        print!("URE@{k:<5} ");
        for r in row {
            print!("{:<7.3}", r.unwrap_or(f64::NAN));
        }
        println!();
    }
    println!("each row peaks on the diagonal: {}", cross.diagonal_dominant);
    Ok(())
}
