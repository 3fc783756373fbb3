//! Seeded end-to-end checks on the reference synthetic configuration
//! (500 items, 200 users, 60 scorers, seed 7).

use std::sync::OnceLock;

use ure_eval::error::Error;
use ure_eval::experiments::{
    correlation_sweep, default_k_grid, kbar_sweep, nbar_sweep, sweep_exposure_seed, Experiment, MetricId,
    ModelFamilyResult, REFERENCE_NBAR,
};
use ure_eval::synth::{
    default_family, generate_full, sample_random_exposure, scorer_family, SyntheticWorld, WorldSpec,
    DEFAULT_FIDELITIES,
};

const SEED: u64 = 7;

struct Reference {
    world: SyntheticWorld,
    experiment: Experiment,
    family: ModelFamilyResult,
}

fn reference() -> &'static Reference {
    static CELL: OnceLock<Reference> = OnceLock::new();
    CELL.get_or_init(|| {
        let world = generate_full(&WorldSpec::reference(SEED)).unwrap();
        let experiment = Experiment::synthetic(&world, &default_family(SEED), &default_k_grid(500)).unwrap();
        let rand = sample_random_exposure(&world.full, REFERENCE_NBAR, sweep_exposure_seed(SEED, REFERENCE_NBAR)).unwrap();
        let family = experiment.evaluate(&rand, &default_k_grid(REFERENCE_NBAR)).unwrap();
        Reference { world, experiment, family }
    })
}

#[test]
fn traditional_metric_peaks_at_large_k() {
    let curve = correlation_sweep(&reference().family, MetricId::Rand(5), None).unwrap();
    assert!(curve.k_max >= 50, "k_max {}", curve.k_max);
}

#[test]
fn ure_peaks_at_its_own_cutoff() {
    for k in [10, 30] {
        let curve = correlation_sweep(&reference().family, MetricId::Ure(k), None).unwrap();
        assert_eq!(curve.k_max, k, "{curve:?}");
    }
}

#[test]
fn gold_self_correlation_is_one_at_its_own_cutoff() {
    let curve = correlation_sweep(&reference().family, MetricId::Full(50), None).unwrap();
    assert_eq!((curve.k_max, curve.r_max), (50, 1.0));
}

#[test]
fn nbar_sweep_k_max_tracks_the_coupling() {
    let curves = nbar_sweep(&reference().experiment, &[20, 40, 80], 5, SEED).unwrap();
    for c in &curves {
        let coupled = 500.0 * 5.0 / c.nbar as f64;
        let k = c.curve.k_max as f64;
        assert!((0.5 * coupled..=1.5 * coupled).contains(&k), "nbar {}: k_max {k}, coupled {coupled}", c.nbar);
    }
}

#[test]
fn kbar_sweep_k_max_follows_kbar() {
    let curves = kbar_sweep(&reference().experiment, 80, &[1, 3, 5], SEED).unwrap();
    let k_max: Vec<usize> = curves.iter().map(|c| c.curve.k_max).collect();
    assert!(k_max.windows(2).all(|w| w[0] <= w[1]), "{k_max:?}");
}

#[test]
fn full_sample_with_full_cutoff_is_degenerate() {
    let world = generate_full(&WorldSpec { user_count: 30, ..WorldSpec::reference(SEED) }).unwrap();
    let family = scorer_family(&[0.2, 0.5], &[1.0], &[0.0], SEED);
    let exp = Experiment::synthetic(&world, &family, &[10, 500]).unwrap();
    let curves = kbar_sweep(&exp, 500, &[500], SEED);
    assert!(matches!(curves, Err(Error::EmptyCurve)));
}

#[test]
fn higher_fidelity_never_lowers_median_recall() {
    let r = reference();
    let family = scorer_family(&DEFAULT_FIDELITIES, &[1.0], &[-1.0, 0.0, 1.0], SEED);
    let ks = [10, 50, 100];
    let exp = Experiment::synthetic(&r.world, &family, &ks).unwrap();
    let rand = sample_random_exposure(&r.world.full, 500, 0).unwrap();
    let result = exp.evaluate(&rand, &[5]).unwrap();
    for (col, k) in ks.iter().enumerate() {
        let medians: Vec<f64> = result
            .full
            .chunks(3)
            .map(|group| {
                let mut v: Vec<f64> = group.iter().map(|row| row[col]).collect();
                v.sort_by(f64::total_cmp);
                v[1]
            })
            .collect();
        assert!(medians.windows(2).all(|w| w[0] <= w[1]), "K={k}: {medians:?}");
    }
}
