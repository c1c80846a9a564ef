use std::path::PathBuf;
use std::time::Instant;

use anamorph_core::warp::{generate_anamorphic, PrintConstraints, DEFAULT_RESOLUTION_PX_PER_M};
use anamorph_core::{geometry, CameraGeometry, IllusionSpec, TrapezoidSpec};
use clap::Args;
use serde::Serialize;
use serde_json::json;

use super::{emit, path_string, sibling, write_json_pretty, write_manifest, CliError};
use crate::imageio;
use crate::manifest::RunManifest;

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Source image (PNG or PPM).
    #[arg(long)]
    pub source: PathBuf,
    /// Camera height above the road, meters.
    #[arg(long)]
    pub camera_height: f64,
    /// Ground distance from the camera to the decal's near edge, meters.
    #[arg(long)]
    pub distance: f64,
    /// Apparent height of the illusion, meters.
    #[arg(long)]
    pub illusion_height: f64,
    /// Apparent width of the illusion, meters.
    #[arg(long)]
    pub width: f64,
    /// Decal output; `.png` writes PNG, anything else PPM.
    #[arg(long)]
    pub out: PathBuf,
    /// Print resolution, pixels per meter.
    #[arg(long, default_value_t = DEFAULT_RESOLUTION_PX_PER_M)]
    pub resolution: f64,
    #[arg(long, default_value_t = PrintConstraints::default().channel_min)]
    pub gamut_min: u8,
    #[arg(long, default_value_t = PrintConstraints::default().channel_max)]
    pub gamut_max: u8,
    /// Weight of the 3×3 smoothing pass; 0 disables it.
    #[arg(long, default_value_t = 0.0)]
    pub smoothing: f64,
}

#[derive(Debug, Serialize)]
struct Sidecar {
    camera: CameraGeometry,
    illusion: IllusionSpec,
    trapezoid: TrapezoidSpec,
    resolution_px_per_m: f64,
    decal_px: (usize, usize),
    source_px: (usize, usize),
    constraints: PrintConstraints,
}

pub(super) fn run(a: GenerateArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let cam = CameraGeometry::new(a.camera_height, a.distance).map_err(CliError::invalid)?;
    let spec = IllusionSpec::new(a.illusion_height, a.width).map_err(CliError::invalid)?;
    geometry::build_trapezoid(&cam, &spec).map_err(CliError::invalid)?;
    let constraints =
        PrintConstraints { channel_min: a.gamut_min, channel_max: a.gamut_max, smoothing_weight: a.smoothing };
    constraints.validate().map_err(CliError::invalid)?;

    let src = imageio::read_image(&a.source)?;
    let decal = generate_anamorphic(&src, &cam, &spec, &constraints, a.resolution).map_err(CliError::invalid)?;
    imageio::write_image(&a.out, &decal.image)?;

    let sidecar_path = sibling(&a.out, ".json");
    let sidecar = Sidecar {
        camera: cam,
        illusion: spec,
        trapezoid: decal.trapezoid,
        resolution_px_per_m: a.resolution,
        decal_px: decal.image.dims(),
        source_px: src.dims(),
        constraints,
    };
    write_json_pretty(&sidecar_path, &sidecar)?;

    let mut m = RunManifest::new("generate");
    m.inputs.push(a.source.clone());
    m.outputs = vec![a.out.clone(), sidecar_path.clone()];
    m.finish(start.elapsed());
    write_manifest(&m, &sibling(&a.out, ".manifest.json"))?;

    emit(&json!({
        "decal": path_string(&a.out),
        "sidecar": path_string(&sidecar_path),
        "ground_length_m": decal.trapezoid.ground_length_m,
        "far_width_m": decal.trapezoid.far_width_m,
        "decal_px": decal.image.dims(),
    }));
    Ok(())
}
