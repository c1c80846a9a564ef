use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anamorph_core::vanet::{self, ScenarioConfig, SimReport, SweepAxis, VanetError};
use clap::Args;
use serde::Serialize;
use serde_json::json;

use super::{create_dir, emit, path_string, read_text, resolve_seed, write_bytes, write_json_pretty, write_manifest, CliError};
use crate::manifest::RunManifest;
use crate::{formats, parallel, scenarios};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON file, or the name of a bundled scenario (benign_60, attack_60, benign_120,
    /// attack_120).
    #[arg(long)]
    pub scenario: String,
    /// `axis=v1,v2,…` or `axis=start:end:step` (end inclusive). Axes: n_vehicles,
    /// packet_size_bits. Point i runs with seed + i.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Output directory for report.json, paoi.csv and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for sweeps.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Event trace as JSONL (single runs only).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

/// Parses `axis=values`.
pub fn parse_sweep(s: &str) -> Result<(SweepAxis, Vec<u64>), CliError> {
    let (axis, values) = s.split_once('=').ok_or_else(|| CliError::Invalid(format!("sweep {s:?} must be axis=values")))?;
    let axis = match axis.trim() {
        "n_vehicles" | "vehicles" | "density" => SweepAxis::NVehicles,
        "packet_size_bits" | "packet_size" => SweepAxis::PacketSizeBits,
        other => return Err(CliError::Invalid(format!("unknown sweep axis {other:?}"))),
    };
    let num = |v: &str| v.trim().parse::<u64>().map_err(|_| CliError::Invalid(format!("bad sweep value {v:?}")));
    let values: Vec<u64> = if values.contains(':') {
        let parts: Vec<&str> = values.split(':').collect();
        let [start, end, step] = parts[..] else {
            return Err(CliError::Invalid(format!("range {values:?} must be start:end:step")));
        };
        let (start, end, step) = (num(start)?, num(end)?, num(step)?);
        if step == 0 || end < start {
            return Err(CliError::Invalid(format!("range {values:?} is empty")));
        }
        (start..=end).step_by(step as usize).collect()
    } else {
        values.split(',').map(num).collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(CliError::invalid("sweep has no values"));
    }
    Ok((axis, values))
}

fn load_scenario(name: &str) -> Result<(ScenarioConfig, Option<PathBuf>), CliError> {
    let path = PathBuf::from(name);
    if path.exists() {
        let text = read_text(&path)?;
        let cfg = serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{name}: {e}")))?;
        return Ok((cfg, Some(path)));
    }
    match scenarios::bundled(name) {
        Some(cfg) => Ok((cfg, None)),
        None => Err(CliError::Io(format!("{name}: no such scenario file or bundled scenario"))),
    }
}

fn vanet_err(e: VanetError) -> CliError {
    CliError::Invalid(e.to_string())
}

#[derive(Serialize)]
struct SweepPoint<'a> {
    value: u64,
    report: &'a SimReport,
}

fn summary(value: u64, r: &SimReport) -> serde_json::Value {
    json!({"axis_value": value, "mean_paoi_ms": r.mean_paoi_ms, "p95_paoi_ms": r.p95_paoi_ms, "drops": r.dropped})
}

pub(super) fn run(a: SimulateArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let (mut cfg, scenario_path) = load_scenario(&a.scenario)?;
    cfg.rng_seed = resolve_seed(a.seed, cfg.rng_seed)?;
    cfg.validate().map_err(vanet_err)?;
    let sweep = a.sweep.as_deref().map(parse_sweep).transpose()?;
    if sweep.is_some() && a.trace.is_some() {
        return Err(CliError::invalid("--trace applies to single runs, not sweeps"));
    }
    create_dir(&a.out)?;
    let report_path = a.out.join("report.json");
    let csv_path = a.out.join("paoi.csv");
    let mut outputs = vec![report_path.clone(), csv_path.clone()];

    match sweep {
        None => {
            let report = match &a.trace {
                Some(p) => {
                    let mut lines = Vec::new();
                    let mut sink = |rec: &vanet::TraceRecord| {
                        serde_json::to_writer(&mut lines, rec).expect("trace records serialize");
                        lines.push(b'\n');
                    };
                    let r = vanet::run_traced(&cfg, &mut sink).map_err(vanet_err)?;
                    write_bytes(p, lines)?;
                    outputs.push(p.clone());
                    r
                }
                None => vanet::run(&cfg).map_err(vanet_err)?,
            };
            let value = cfg.n_vehicles as u64;
            write_json_pretty(&report_path, &report)?;
            write_bytes(&csv_path, formats::sim_csv(&[(value, &report)]))?;
            emit(&summary(value, &report));
        }
        Some((axis, values)) => {
            let reports = parallel::sweep(&cfg, axis, &values, a.jobs).map_err(vanet_err)?;
            let points: Vec<SweepPoint> = values.iter().zip(&reports).map(|(&value, report)| SweepPoint { value, report }).collect();
            write_json_pretty(&report_path, &json!({"axis": axis, "base_seed": cfg.rng_seed, "points": points}))?;
            let rows: Vec<(u64, &SimReport)> = values.iter().copied().zip(&reports).collect();
            write_bytes(&csv_path, formats::sim_csv(&rows))?;
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for (v, r) in rows {
                let _ = writeln!(lock, "{}", summary(v, r));
            }
        }
    }

    let mut m = RunManifest::new("simulate");
    m.config_path = scenario_path.clone();
    if scenario_path.is_none() {
        log::info!("using bundled scenario {}", a.scenario);
    }
    m.inputs = scenario_path.into_iter().collect();
    m.outputs = outputs;
    m.rng_seed = Some(cfg.rng_seed);
    m.finish(start.elapsed());
    write_manifest(&m, &a.out.join("manifest.json"))?;
    log::info!("wrote {}", path_string(&report_path));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_syntax() {
        let (axis, v) = parse_sweep("n_vehicles=20:120:20").unwrap();
        assert_eq!(axis, SweepAxis::NVehicles);
        assert_eq!(v, vec![20, 40, 60, 80, 100, 120]);
        let (axis, v) = parse_sweep("packet_size_bits=1000,8000").unwrap();
        assert_eq!(axis, SweepAxis::PacketSizeBits);
        assert_eq!(v, vec![1000, 8000]);
        assert_eq!(parse_sweep("density=5:12:5").unwrap().1, vec![5, 10]);
        for bad in ["n_vehicles", "speed=1,2", "n_vehicles=1:2", "n_vehicles=5:1:1", "n_vehicles=1:5:0", "n_vehicles=a,b", "n_vehicles="] {
            assert!(parse_sweep(bad).is_err(), "{bad}");
        }
    }
}
