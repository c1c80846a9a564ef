use std::path::PathBuf;
use std::time::{Duration, Instant};

use anamorph_core::optimizer::{
    Candidate, DecalObjective, DecalSettings, Objective, OptimizeResult, OptimizerConfig, SearchSpace, ViewSettings,
};
use anamorph_core::oracle::{Detector, SyntheticDetector};
use anamorph_core::{RasterImage, TrapezoidSpec};
use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{create_dir, emit, read_json, resolve_seed, write_bytes, write_json_pretty, write_manifest, CliError};
use crate::bridge::{BridgeConfig, BridgeDetector};
use crate::manifest::RunManifest;
use crate::{formats, imageio, parallel};

#[derive(Debug, Args)]
#[command(after_help = "Precedence: flag > PHANTOM_SEED (seed only) > --config file > built-in default.\n\
    The search space comes from --space, else the config's `space`, else a default box for the camera height.")]
pub struct OptimizeArgs {
    /// Source image (PNG or PPM); also the synthetic detector's template.
    #[arg(long)]
    pub source: PathBuf,
    /// Search space JSON: {"d_range":{"min","max","step"},"w_range":…,"h_range":…}.
    #[arg(long)]
    pub space: Option<PathBuf>,
    /// `synthetic` or `bridge:<shell command>`.
    #[arg(long)]
    pub oracle: Option<String>,
    /// Optimization config JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub camera_height: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for the grid; each bridge worker runs its own bridge process.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub target_class: Option<String>,
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub refine_budget: Option<usize>,
    /// Per-request bridge deadline, seconds.
    #[arg(long)]
    pub deadline_s: Option<f64>,
}

/// Contents of the `--config` file; every field is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    pub camera_height_m: f64,
    pub target_class: String,
    pub oracle: String,
    pub space: Option<SearchSpace>,
    pub optimizer: OptimizerConfig,
    pub view: ViewSettings,
    pub decal: DecalSettings,
    pub bridge_deadline_s: f64,
    pub jobs: usize,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        Self {
            camera_height_m: 1.5,
            target_class: "car".into(),
            oracle: "synthetic".into(),
            space: None,
            optimizer: OptimizerConfig::default(),
            view: ViewSettings::default(),
            decal: DecalSettings::default(),
            bridge_deadline_s: crate::bridge::DEFAULT_DEADLINE.as_secs_f64(),
            jobs: 1,
        }
    }
}

enum Oracle {
    Synthetic,
    Bridge(String),
}

fn parse_oracle(s: &str) -> Result<Oracle, CliError> {
    match s.split_once(':') {
        _ if s == "synthetic" => Ok(Oracle::Synthetic),
        Some(("bridge", cmd)) if !cmd.trim().is_empty() => Ok(Oracle::Bridge(cmd.to_string())),
        _ => Err(CliError::Invalid(format!("oracle must be `synthetic` or `bridge:<command>`, got {s:?}"))),
    }
}

#[derive(Debug, Serialize)]
struct ParamsFile<'a> {
    best: &'a Candidate,
    camera_height_m: f64,
    target_class: &'a str,
    oracle: &'a str,
    trapezoid: TrapezoidSpec,
    evaluations: usize,
}

fn search<O, M>(src: &RasterImage, cfg: &OptimizeConfig, space: &SearchSpace, make: M) -> Result<OptimizeResult, CliError>
where
    O: Objective,
    M: Fn() -> Result<O, CliError> + Sync,
{
    parallel::optimize(src, cfg.camera_height_m, space, make, &cfg.optimizer, &cfg.decal, cfg.jobs)
}

pub(super) fn run(a: OptimizeArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let mut cfg: OptimizeConfig = match &a.config {
        Some(p) => read_json(p)?,
        None => OptimizeConfig::default(),
    };
    if let Some(v) = a.camera_height {
        cfg.camera_height_m = v;
    }
    if let Some(v) = &a.target_class {
        cfg.target_class = v.clone();
    }
    if let Some(v) = &a.oracle {
        cfg.oracle = v.clone();
    }
    if let Some(v) = a.jobs {
        cfg.jobs = v;
    }
    if let Some(v) = a.top_k {
        cfg.optimizer.top_k = v;
    }
    if let Some(v) = a.refine_budget {
        cfg.optimizer.refine_budget = v;
    }
    if let Some(v) = a.deadline_s {
        cfg.bridge_deadline_s = v;
    }
    cfg.optimizer.rng_seed = resolve_seed(a.seed, cfg.optimizer.rng_seed)?;
    if let Some(p) = &a.space {
        cfg.space = Some(read_json(p)?);
    }
    let space = cfg.space.unwrap_or_else(|| SearchSpace::default_for(cfg.camera_height_m));
    space.validate(cfg.camera_height_m)?;
    cfg.optimizer.validate()?;
    if cfg.target_class.is_empty() {
        return Err(CliError::invalid("target class must not be empty"));
    }
    if !(cfg.bridge_deadline_s > 0.0 && cfg.bridge_deadline_s.is_finite()) {
        return Err(CliError::invalid("bridge deadline must be a positive number of seconds"));
    }
    let oracle = parse_oracle(&cfg.oracle)?;

    let src = imageio::read_image(&a.source)?;
    create_dir(&a.out_dir)?;

    let objective = |det: Box<dyn Detector>| {
        DecalObjective::new(src.clone(), cfg.camera_height_m, det, cfg.target_class.clone())
            .with_view(cfg.view)
            .with_decal(cfg.decal)
    };
    let result = match &oracle {
        Oracle::Synthetic => {
            search(&src, &cfg, &space, || Ok(objective(Box::new(SyntheticDetector::new(&src)))))?
        }
        Oracle::Bridge(cmd) => {
            let bcfg = BridgeConfig {
                deadline: Duration::from_secs_f64(cfg.bridge_deadline_s),
                ..BridgeConfig::new(cmd.clone())
            };
            search(&src, &cfg, &space, || {
                let b = BridgeDetector::connect(bcfg.clone())?;
                log::info!("bridge connected, model {}", b.model());
                Ok(objective(Box::new(b)))
            })?
        }
    };

    let decal_path = a.out_dir.join("decal.png");
    let params_path = a.out_dir.join("params.json");
    let trace_path = a.out_dir.join("trace.jsonl");
    imageio::write_image(&decal_path, &result.decal.image)?;
    write_json_pretty(
        &params_path,
        &ParamsFile {
            best: &result.best,
            camera_height_m: cfg.camera_height_m,
            target_class: &cfg.target_class,
            oracle: &cfg.oracle,
            trapezoid: result.decal.trapezoid,
            evaluations: result.trace.len(),
        },
    )?;
    let mut trace = Vec::new();
    formats::write_trace(&mut trace, &result.trace).map_err(|e| CliError::Io(e.to_string()))?;
    write_bytes(&trace_path, trace)?;

    let mut m = RunManifest::new("optimize");
    m.config_path = a.config.clone();
    m.inputs.push(a.source.clone());
    m.inputs.extend(a.space.clone());
    m.outputs = vec![decal_path, params_path, trace_path];
    m.rng_seed = Some(cfg.optimizer.rng_seed);
    m.finish(start.elapsed());
    write_manifest(&m, &a.out_dir.join("manifest.json"))?;

    let b = &result.best;
    emit(&json!({"d": b.d, "w": b.w, "h": b.h, "loss": b.loss, "evaluations": result.trace.len()}));
    Ok(())
}
