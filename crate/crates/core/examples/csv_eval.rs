//! Evaluating externally produced predictions from CSV files.
//!
//! Ids are arbitrary strings; the reader maps them to dense ids and the JSON
//! report carries the mapping back.

use std::fs;

use ure_eval::domain::ExposureKind;
use ure_eval::io::{read_exposure_csv, read_predictions_csv, write_report, Format, Provenance, Report};
use ure_eval::metrics::{evaluate_scheme, Scheme, SkipPolicy};

const PREDICTIONS: &str = "user_id,item_id,score
alice,song-a,0.91
alice,song-b,0.40
alice,song-c,0.75
alice,song-d,0.10
bob,song-a,0.20
bob,song-b,0.85
bob,song-c,0.55
bob,song-d,0.60
";

const RAND: &str = "user_id,item_id,label
alice,song-a,1
alice,song-d,1
bob,song-a,0
bob,song-c,0
";

fn main() -> ure_eval::error::Result<()> {
    let dir = tempfile_dir();
    let (preds_path, rand_path) = (dir.join("predictions.csv"), dir.join("rand.csv"));
    fs::write(&preds_path, PREDICTIONS).unwrap();
    fs::write(&rand_path, RAND).unwrap();

    let preds = read_predictions_csv(&preds_path, None)?;
    let rand = read_exposure_csv(&rand_path, ExposureKind::Random, Some(&preds.ids))?;
    for policy in [SkipPolicy::Skip, SkipPolicy::Zero] {
        let report = evaluate_scheme(Scheme::Ure, &rand.exposures, &preds.tables, 2, policy)?;
        println!(
            "URE@2 ({policy}): macro {:.3} over {} users, skipped {:?}",
            report.macro_mean,
            report.per_user.len(),
            report.skipped_users
        );
        if policy == SkipPolicy::Skip {
            let out = dir.join("report.json");
            let provenance = Provenance::new("example", None, &serde_json::json!({"k": 2}))?;
            write_report(Report::Eval { report: &report, ids: Some(&preds.ids) }, &provenance, &out, Format::Json)?;
            println!("{}", fs::read_to_string(&out).unwrap());
        }
    }
    Ok(())
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join("ure-csv-eval");
    fs::create_dir_all(&dir).unwrap();
    dir
}
