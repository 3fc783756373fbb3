//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 failed verification.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::domain::{ExposureKind, LabeledExposure, PredictionTable};
use crate::error::Error;
use crate::experiments::{
    correlation_sweep, default_k_grid, kbar_sweep, nbar_sweep, sweep_exposure_seed, ure_vs_gold_report, Experiment,
    MetricId, DEFAULT_K_TARGETS, REFERENCE_NBAR,
};
use crate::io::{
    read_exposure_csv, read_predictions_csv, write_exposure_csv, write_predictions_csv, write_report, Format, IdSpace,
    Provenance, Report,
};
use crate::metrics::{evaluate_scheme, Scheme, SkipPolicy};
use crate::oracle::{
    expected_recall_random_ranking, theorem1_identity_check, theorem2_unbiasedness_check, EnumerationOptions,
    EnumerationSpec, ExactValue, DEFAULT_BUDGET,
};
use crate::synth::{
    default_family, generate_full, make_scorer, sample_random_exposure, scorer_family, PositiveRate, ScorerSpec,
    WorldSpec, DEFAULT_CURVATURES, DEFAULT_FIDELITIES, DEFAULT_NOISE_SD, REFERENCE_POSITIVE_RATE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_VERIFICATION: i32 = 3;

/// Environment variable overriding the default enumeration budget.
pub const BUDGET_ENV: &str = "URE_BUDGET";

#[derive(Debug, Parser)]
#[command(name = "ure", version, about = "Recall evaluation on randomly-exposed data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Macro-average one scheme over a dataset and a prediction file.
    Eval(EvalArgs),
    /// Exact enumeration checks of the recall identities.
    Verify(VerifyArgs),
    /// Write a synthetic world, its random exposure and a scorer family to disk.
    Simulate(SimulateArgs),
    /// Correlation of one metric (or a URE-vs-gold matrix) against gold Recall@K.
    Correlate(CorrelateArgs),
    /// Correlation curves of Recall@K̄ across sample sizes or cutoffs.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// Report path; a summary is always printed to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report format: json or csv.
    #[arg(long, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// full (gold Recall@K), rand (traditional Recall@K̄) or ure.
    #[arg(long)]
    pub scheme: Scheme,
    /// `user_id,item_id,score` file covering the whole catalog.
    #[arg(long)]
    pub predictions: PathBuf,
    /// `user_id,item_id,label` file: full exposure for `full`, random exposure otherwise.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Cutoff on the full ranking (schemes `full` and `ure`).
    #[arg(long)]
    pub k: Option<usize>,
    /// Cutoff on the sampled ranking (scheme `rand`).
    #[arg(long)]
    pub kbar: Option<usize>,
    /// Users without (observed) positives: `skip` drops them, `zero` scores them 0.
    #[arg(long, default_value_t = SkipPolicy::Skip)]
    pub skip_policy: SkipPolicy,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    Theorem1,
    Theorem2,
    Hypergeom,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub mode: VerifyMode,
    /// Catalog size.
    #[arg(long)]
    pub n: usize,
    /// Positive count; theorem1 and hypergeom check every value in 1..=n when omitted.
    #[arg(long)]
    pub npos: Option<usize>,
    /// Random sample size per user.
    #[arg(long)]
    pub nbar: Option<usize>,
    /// Full-catalog cutoff; hypergeom checks every value in 1..=n when omitted.
    #[arg(long)]
    pub k: Option<usize>,
    /// Positives ranked within the cutoff (theorem2).
    #[arg(long)]
    pub m: Option<usize>,
    /// Enumeration budget; falls back to URE_BUDGET, then 10^7.
    #[arg(long)]
    pub budget: Option<u128>,
    /// Users without (observed) positives: `skip` drops them, `zero` scores them 0.
    #[arg(long, default_value_t = SkipPolicy::Skip)]
    pub skip_policy: SkipPolicy,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Synthetic world and scorer family.
#[derive(Debug, Clone, Args, Serialize)]
pub struct WorldArgs {
    #[arg(long, default_value_t = 200)]
    pub users: usize,
    #[arg(long, default_value_t = 500)]
    pub items: usize,
    #[arg(long, default_value_t = REFERENCE_POSITIVE_RATE)]
    pub positive_rate: f64,
    /// Per-user rate drawn uniformly from LOW,HIGH instead of a fixed rate.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub rate_range: Option<Vec<f64>>,
    /// Scorer fidelities in [0, 1], comma separated.
    #[arg(long, value_delimiter = ',')]
    pub fidelities: Option<Vec<f64>>,
    /// Scorer noise standard deviations, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub noise_sds: Option<Vec<f64>>,
    /// Curvatures of the latent transform, comma separated; 0 is linear.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub curvatures: Option<Vec<f64>>,
}

impl WorldArgs {
    fn world(&self, seed: u64) -> Result<WorldSpec, Failure> {
        let positive_rate = match self.rate_range.as_deref() {
            None => PositiveRate::Fixed(self.positive_rate),
            Some(&[low, high]) => PositiveRate::Uniform { low, high },
            Some(_) => return Err(Failure::usage("--rate-range: expected LOW,HIGH")),
        };
        Ok(WorldSpec { user_count: self.users, item_count: self.items, positive_rate, seed })
    }

    fn family(&self, seed: u64) -> Vec<ScorerSpec> {
        if self.fidelities.is_none() && self.noise_sds.is_none() && self.curvatures.is_none() {
            return default_family(seed);
        }
        scorer_family(
            self.fidelities.as_deref().unwrap_or(&DEFAULT_FIDELITIES),
            self.noise_sds.as_deref().unwrap_or(&[DEFAULT_NOISE_SD]),
            self.curvatures.as_deref().unwrap_or(&DEFAULT_CURVATURES),
            seed,
        )
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Random sample size per user.
    #[arg(long, default_value_t = REFERENCE_NBAR)]
    pub nbar: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[command(flatten)]
    pub world: WorldArgs,
}

/// Where the model family comes from: files when `--full` is given, else a synthetic world.
#[derive(Debug, Args, Serialize)]
pub struct SourceArgs {
    /// Full-exposure file; requires `--predictions`.
    #[arg(long, requires = "predictions")]
    pub full: Option<PathBuf>,
    /// One prediction file per model.
    #[arg(long, num_args = 1.., requires = "full")]
    pub predictions: Vec<PathBuf>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Gold cutoff grid (defaults to 1..10,15,20,30,50,...,500 within the catalog).
    #[arg(long, value_delimiter = ',')]
    pub k_grid: Option<Vec<usize>>,
    #[command(flatten)]
    pub world: WorldArgs,
}

#[derive(Debug, Args, Serialize)]
#[command(group = clap::ArgGroup::new("target").required(true).args(["fixed", "matrix"]))]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Random-exposure file; sampled with `--nbar` and `--seed` when omitted.
    #[arg(long, requires = "full")]
    pub rand: Option<PathBuf>,
    /// Random sample size per user.
    #[arg(long, default_value_t = REFERENCE_NBAR)]
    pub nbar: usize,
    /// Metric to correlate against gold Recall@K, e.g. rand@5 or ure@30.
    #[arg(long)]
    pub fixed: Option<MetricId>,
    /// URE-vs-gold matrix over these cutoffs, e.g. 5,10,30,50,100.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub matrix: Option<Vec<usize>>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Nbar,
    Kbar,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub mode: SweepMode,
    /// Swept values: N̄ for `nbar` (default 20,40,80), K̄ for `kbar` (default 1,3,5).
    #[arg(long, value_delimiter = ',')]
    pub values: Option<Vec<usize>>,
    /// Fixed K̄ of an `nbar` sweep.
    #[arg(long, default_value_t = 5)]
    pub kbar: usize,
    /// Fixed N̄ of a `kbar` sweep.
    #[arg(long, default_value_t = 80)]
    pub nbar: usize,
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// An error on its way to an exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    /// Prefixes the message with the flag it concerns.
    fn flag(flag: &str) -> impl FnOnce(Error) -> Failure + '_ {
        move |e| {
            let f = Failure::from(e);
            Failure { code: f.code, message: format!("{flag}: {}", f.message) }
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::IncompatibleCutoffs { .. }
            | Error::EnumerationTooLarge { .. }
            | Error::InvalidInstance(_)
            | Error::InvalidCutoff { .. }
            | Error::InvalidSampleSize { .. }
            | Error::InvalidSpec(_)
            | Error::InvalidTrials(_)
            | Error::NoPositiveSamples
            | Error::EmptyCatalog => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Self { code, message: e.to_string() }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn run(command: Command) -> CliResult<i32> {
    match command {
        Command::Eval(a) => eval(&a).map(|_| EXIT_OK),
        Command::Verify(a) => verify(&a),
        Command::Simulate(a) => simulate(&a).map(|_| EXIT_OK),
        Command::Correlate(a) => correlate(&a).map(|_| EXIT_OK),
        Command::Sweep(a) => sweep(&a).map(|_| EXIT_OK),
    }
}

fn emit(output: &OutputArgs, report: Report<'_>, provenance: &Provenance) -> CliResult {
    if let Some(path) = &output.out {
        write_report(report, provenance, path, output.format)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn eval(a: &EvalArgs) -> CliResult {
    let (k, flag) = match (a.scheme, a.k, a.kbar) {
        (Scheme::TraditionalRand, None, Some(kbar)) => (kbar, "--kbar"),
        (Scheme::TraditionalRand, _, _) => return Err(Failure::usage("scheme rand takes its cutoff from --kbar (not --k)")),
        (_, Some(k), None) => (k, "--k"),
        (_, _, Some(_)) => return Err(Failure::usage("--kbar only applies to scheme rand; use --k")),
        (_, None, None) => return Err(Failure::usage(format!("--k is required for scheme {}", a.scheme))),
    };
    if k == 0 {
        return Err(Failure::usage(format!("{flag}: cutoff must be at least 1")));
    }
    let preds = read_predictions_csv(&a.predictions, None)?;
    let kind = if a.scheme == Scheme::GoldFull { ExposureKind::Full } else { ExposureKind::Random };
    let data = read_exposure_csv(&a.dataset, kind, Some(&preds.ids))?;
    let report = evaluate_scheme(a.scheme, &data.exposures, &preds.tables, k, a.skip_policy)
        .map_err(|e| match e {
            Error::InvalidCutoff { .. } => Failure::flag(flag)(e),
            e => e.into(),
        })?;
    println!(
        "{}@{} macro_mean={} users={} skipped={} zero_filled={} policy={}",
        a.scheme,
        k,
        report.macro_mean,
        report.per_user.len(),
        report.skipped_users.len(),
        report.zero_filled_users.len(),
        a.skip_policy
    );
    let provenance = Provenance::new("eval", None, a)?;
    emit(&a.output, Report::Eval { report: &report, ids: Some(&preds.ids) }, &provenance)
}

/// `--budget`, then `URE_BUDGET`, then the default.
fn resolve_budget(flag: Option<u128>) -> CliResult<u128> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("{BUDGET_ENV}: `{v}` is not a non-negative integer"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

fn budget_context(e: Error) -> Failure {
    match e {
        Error::EnumerationTooLarge { .. } => Failure::flag("--budget")(e),
        e => e.into(),
    }
}

fn required<T: Copy>(value: Option<T>, flag: &str, mode: &str) -> CliResult<T> {
    value.ok_or_else(|| Failure::usage(format!("{flag} is required for --mode {mode}")))
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn verify(a: &VerifyArgs) -> CliResult<i32> {
    let options = EnumerationOptions { budget: resolve_budget(a.budget)?, policy: a.skip_policy };
    let n = a.n;
    let all = |given: Option<usize>| given.map_or_else(|| (1..=n).collect::<Vec<_>>(), |v| vec![v]);
    let mut instances = Vec::new();
    let mut passed = true;
    match a.mode {
        VerifyMode::Theorem1 => {
            let nbar = required(a.nbar, "--nbar", "theorem1")?;
            let k = required(a.k, "--k", "theorem1")?;
            // The cutoff coupling does not depend on the positive count.
            EnumerationSpec::coupled(n, 0, nbar, k).map_err(Failure::flag("--n/--nbar/--k"))?;
            for npos in all(a.npos) {
                let spec = EnumerationSpec::coupled(n, npos, nbar, k).map_err(Failure::flag("--npos"))?;
                let report = theorem1_identity_check(&spec, &options).map_err(budget_context)?;
                println!(
                    "theorem1 N={n} N+={npos} Nbar={nbar} K={k} Kbar={}: E[Recall@Kbar]={} E[Recall@K]={} difference={} pairs={} {}",
                    spec.cutoff_rand,
                    report.rand_mean,
                    report.full_mean,
                    report.difference,
                    report.pairs,
                    verdict(report.holds())
                );
                passed &= report.holds();
                instances.push(serde_json::to_value(&report).map_err(Error::from)?);
            }
        }
        VerifyMode::Theorem2 => {
            let npos = required(a.npos, "--npos", "theorem2")?;
            let m = required(a.m, "--m", "theorem2")?;
            let nbar = required(a.nbar, "--nbar", "theorem2")?;
            let report = theorem2_unbiasedness_check(n, npos, m, nbar, &options).map_err(budget_context)?;
            println!(
                "theorem2 N={n} N+={npos} M={m} Nbar={nbar} K={}: E[URE]={} M/N+={} difference={} subsets={} {}",
                report.cutoff,
                report.estimator_mean,
                report.target,
                report.difference,
                report.subsets,
                verdict(report.holds())
            );
            for c in &report.conditional {
                println!("  n={}: E[m/n | n]={} over {} subsets", c.observed_positives, c.mean, c.subsets);
            }
            passed &= report.holds();
            instances.push(serde_json::to_value(&report).map_err(Error::from)?);
        }
        VerifyMode::Hypergeom => {
            for npos in all(a.npos) {
                for k in all(a.k) {
                    let spec = EnumerationSpec::ranking(n, npos, k)?;
                    let value = expected_recall_random_ranking(&spec)?;
                    let target = ExactValue::new(k as u64, n as u64);
                    let ok = value == target;
                    println!("hypergeom N={n} N+={npos} K={k}: E[Recall@K]={value} K/N={target} {}", verdict(ok));
                    passed &= ok;
                    instances.push(json!({ "item_count": n, "n_pos": npos, "k": k, "expected_recall": value, "k_over_n": target, "holds": ok }));
                }
            }
        }
    }
    println!("{}: {} instance(s) checked", verdict(passed), instances.len());
    let value = json!({ "mode": a.mode, "passed": passed, "instances": instances });
    let provenance = Provenance::new("verify", None, a)?;
    emit(&a.output, Report::Record { kind: "verify", value: &value }, &provenance)?;
    Ok(if passed { EXIT_OK } else { EXIT_VERIFICATION })
}

fn create_dir(path: &Path) -> CliResult {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e).into())
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e).into())
}

fn simulate(a: &SimulateArgs) -> CliResult {
    let spec = a.world.world(a.seed)?;
    let family = a.world.family(a.seed);
    let world = generate_full(&spec)?;
    let rand = sample_random_exposure(&world.full, a.nbar, sweep_exposure_seed(a.seed, a.nbar))
        .map_err(Failure::flag("--nbar"))?;

    create_dir(&a.out)?;
    let pred_dir = a.out.join("predictions");
    create_dir(&pred_dir)?;
    write_exposure_csv(a.out.join("full.csv"), &world.full, None)?;
    write_exposure_csv(a.out.join("rand.csv"), &rand, None)?;
    let files: Vec<String> = (0..family.len()).map(|i| format!("predictions/model_{i:03}.csv")).collect();
    family
        .par_iter()
        .zip(&files)
        .try_for_each(|(scorer, file)| -> Result<(), Error> {
            write_predictions_csv(a.out.join(file), &make_scorer(&world.latent, scorer)?, None)
        })?;
    write_json(&a.out.join("family.json"), &family)?;
    let provenance = Provenance::new("simulate", Some(a.seed), a)?;
    write_json(
        &a.out.join("manifest.json"),
        &json!({
            "provenance": provenance,
            "world": spec,
            "nbar": a.nbar,
            "full": "full.csv",
            "rand": "rand.csv",
            "family": "family.json",
            "predictions": files,
        }),
    )?;
    let positives: usize = world.full.iter().map(LabeledExposure::positive_count).sum();
    println!(
        "wrote {} users x {} items ({} positives), nbar={}, {} scorers to {}",
        spec.user_count,
        spec.item_count,
        positives,
        a.nbar,
        family.len(),
        a.out.display()
    );
    Ok(())
}

/// Experiment plus the id space of its files (`None` for a synthetic world).
struct Loaded {
    experiment: Experiment,
    ids: Option<IdSpace>,
}

fn k_grid(source: &SourceArgs, item_count: usize, needed: &[usize]) -> CliResult<Vec<usize>> {
    let mut grid = source.k_grid.clone().unwrap_or_else(|| default_k_grid(item_count));
    grid.extend_from_slice(needed);
    grid.sort_unstable();
    grid.dedup();
    if let Some(&k) = grid.iter().find(|&&k| k == 0 || k > item_count) {
        return Err(Failure::usage(format!("--k-grid: cutoff {k} outside [1..{item_count}]")));
    }
    Ok(grid)
}

fn load(source: &SourceArgs, needed_ks: &[usize]) -> CliResult<Loaded> {
    let Some(full_path) = &source.full else {
        let spec = source.world.world(source.seed)?;
        let world = generate_full(&spec)?;
        let grid = k_grid(source, spec.item_count, needed_ks)?;
        let experiment = Experiment::synthetic(&world, &source.world.family(source.seed), &grid)?;
        return Ok(Loaded { experiment, ids: None });
    };
    let (first, rest) = source.predictions.split_first().ok_or_else(|| Failure::usage("--predictions: no files"))?;
    let head = read_predictions_csv(first, None)?;
    let ids = head.ids;
    let tail: Vec<Vec<PredictionTable>> = rest
        .par_iter()
        .map(|p| read_predictions_csv(p, Some(&ids)).map(|d| d.tables))
        .collect::<Result<_, _>>()?;
    let models: Vec<Vec<PredictionTable>> = std::iter::once(head.tables).chain(tail).collect();
    let full = read_exposure_csv(full_path, ExposureKind::Full, Some(&ids))?;
    let grid = k_grid(source, full.catalog.item_count(), needed_ks)?;
    let experiment = Experiment::from_predictions(full.catalog, full.exposures, &models, &grid)?;
    Ok(Loaded { experiment, ids: Some(ids) })
}

fn correlate(a: &CorrelateArgs) -> CliResult {
    let targets: Option<Vec<usize>> = a.matrix.as_ref().map(|m| if m.is_empty() { DEFAULT_K_TARGETS.to_vec() } else { m.clone() });
    let needed: Vec<usize> = match (a.fixed, &targets) {
        (Some(MetricId::Full(k) | MetricId::Ure(k)), _) => vec![k],
        (_, Some(t)) => t.clone(),
        _ => Vec::new(),
    };
    let loaded = load(&a.source, &needed)?;
    let exp = &loaded.experiment;
    let rand = match (&a.rand, &loaded.ids) {
        (Some(path), Some(ids)) => read_exposure_csv(path, ExposureKind::Random, Some(ids))?.exposures,
        _ => sample_random_exposure(exp.full(), a.nbar, sweep_exposure_seed(a.source.seed, a.nbar))
            .map_err(Failure::flag("--nbar"))?,
    };
    let nbar = rand.iter().map(LabeledExposure::len).min().unwrap_or(0);
    let mut kbar_grid = default_k_grid(nbar);
    if let Some(MetricId::Rand(kbar)) = a.fixed {
        if kbar == 0 || kbar > nbar {
            return Err(Failure::usage(format!("--fixed: K̄ = {kbar} outside [1..{nbar}]")));
        }
        kbar_grid.push(kbar);
        kbar_grid.sort_unstable();
        kbar_grid.dedup();
    }
    let family = exp.evaluate(&rand, &kbar_grid)?;
    let provenance = Provenance::new("correlate", Some(a.source.seed), a)?;
    if let Some(fixed) = a.fixed {
        let curve = correlation_sweep(&family, fixed, None).map_err(Failure::flag("--fixed"))?;
        for p in &curve.points {
            println!("{fixed} vs full@{}: r={}", p.k, p.pearson_r.map_or("undefined".into(), |r| format!("{r:.4}")));
        }
        println!("k_max={} r_max={:.4}", curve.k_max, curve.r_max);
        emit(&a.output, Report::Curve(&curve), &provenance)
    } else {
        let targets = targets.expect("clap requires --fixed or --matrix");
        let cross = ure_vs_gold_report(&family, &targets).map_err(Failure::flag("--matrix"))?;
        for (row, &k) in cross.matrix.iter().zip(&cross.k_targets) {
            let cells: Vec<String> =
                row.iter().map(|r| r.map_or("   -  ".into(), |r| format!("{r:.4}"))).collect();
            println!("ure@{k:<4} {}", cells.join(" "));
        }
        println!("diagonal_dominant={}", cross.diagonal_dominant);
        emit(&a.output, Report::Matrix(&cross), &provenance)
    }
}

fn sweep(a: &SweepArgs) -> CliResult {
    let loaded = load(&a.source, &[])?;
    let exp = &loaded.experiment;
    let curves = match a.mode {
        SweepMode::Nbar => {
            let values = a.values.clone().unwrap_or_else(|| vec![20, 40, 80]);
            nbar_sweep(exp, &values, a.kbar, a.source.seed).map_err(Failure::flag("--values"))?
        }
        SweepMode::Kbar => {
            let values = a.values.clone().unwrap_or_else(|| vec![1, 3, 5]);
            if let Some(&k) = values.iter().find(|&&k| k == 0 || k > a.nbar) {
                return Err(Failure::usage(format!("--values: K̄ = {k} outside [1..{}]", a.nbar)));
            }
            kbar_sweep(exp, a.nbar, &values, a.source.seed).map_err(Failure::flag("--nbar"))?
        }
    };
    for c in &curves {
        println!("nbar={} kbar={}: k_max={} r_max={:.4}", c.nbar, c.kbar, c.curve.k_max, c.curve.r_max);
    }
    let provenance = Provenance::new("sweep", Some(a.source.seed), a)?;
    emit(&a.output, Report::Sweep(&curves), &provenance)
}
