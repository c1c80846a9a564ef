use std::path::PathBuf;
use std::time::Instant;

use anamorph_core::metrics::{asr_csv, asr_over_range, auc};
use clap::Args;
use serde_json::json;

use super::{create_dir, emit, parse_range, read_text, write_bytes, write_json_pretty, write_manifest, CliError};
use crate::formats::{self, AucSummary, FormatError};
use crate::manifest::RunManifest;

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Trial records, one JSON object per line.
    #[arg(long)]
    pub trials: PathBuf,
    /// Inclusive distance range in meters for the AUC, `lo:hi`.
    #[arg(long, default_value = "3:9")]
    pub range: String,
    /// Output directory for asr.csv, auc.json and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "car")]
    pub target_class: String,
}

pub(super) fn run(a: EvaluateArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let (lo, hi) = parse_range(&a.range)?;
    let text = read_text(&a.trials)?;
    let trials = formats::read_trials(text.as_bytes()).map_err(|e| match e {
        FormatError::Io(e) => CliError::Io(e.to_string()),
        e => CliError::Invalid(format!("{}: {e}", a.trials.display())),
    })?;
    let curve = asr_over_range(&trials, &a.target_class, lo, hi);
    for (bin, n) in &curve.incomplete_bins {
        log::warn!("bin {bin} m has {n} trials");
    }
    let report = auc(&curve, lo, hi).map_err(CliError::invalid)?;

    create_dir(&a.out)?;
    let csv_path = a.out.join("asr.csv");
    let auc_path = a.out.join("auc.json");
    write_bytes(&csv_path, asr_csv(&curve))?;
    write_json_pretty(&auc_path, &AucSummary::new(&report, &curve))?;

    let mut m = RunManifest::new("evaluate");
    m.inputs.push(a.trials.clone());
    m.outputs = vec![csv_path, auc_path];
    m.finish(start.elapsed());
    write_manifest(&m, &a.out.join("manifest.json"))?;

    emit(&json!({"auc": report.auc, "range": [lo, hi], "trials": trials.len()}));
    Ok(())
}
