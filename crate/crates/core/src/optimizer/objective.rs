use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{DecalSettings, Objective, ObjectiveError, Params};
use crate::geometry::{CameraGeometry, IllusionSpec};
use crate::image::RasterImage;
use crate::oracle::{attack_loss, DetectionSet, Detector};
use crate::render::{self, RenderOptions};
use crate::warp;

/// Wraps a plain loss function; always succeeds.
pub struct FnObjective<F>(pub F);

impl<F: FnMut(&Params) -> f64> Objective for FnObjective<F> {
    fn evaluate(&mut self, params: &Params, _eval_id: &str) -> Result<f64, ObjectiveError> {
        Ok((self.0)(params))
    }
}

/// How the detector sees a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ViewSettings {
    pub fov_deg: f64,
    pub dims: (usize, usize),
    pub supersample: usize,
}

impl Default for ViewSettings {
    fn default() -> Self {
        Self { fov_deg: render::DEFAULT_FOV_DEG, dims: render::DEFAULT_RENDER_DIMS, supersample: 1 }
    }
}

/// Builds the decal for a candidate, renders it from that candidate's sweet spot, and scores
/// the detector's output against a render of the unpainted road from the same pose.
pub struct DecalObjective<D> {
    src: RasterImage,
    camera_height_m: f64,
    view: ViewSettings,
    decal: DecalSettings,
    target_class: String,
    detector: D,
    benign: Vec<([u64; 6], DetectionSet)>,
}

impl<D: Detector> DecalObjective<D> {
    pub fn new(
        src: RasterImage,
        camera_height_m: f64,
        detector: D,
        target_class: impl Into<String>,
    ) -> Self {
        Self {
            src,
            camera_height_m,
            view: ViewSettings::default(),
            decal: DecalSettings::default(),
            target_class: target_class.into(),
            detector,
            benign: Vec::new(),
        }
    }

    pub fn with_view(mut self, view: ViewSettings) -> Self {
        self.view = view;
        self
    }

    pub fn with_decal(mut self, decal: DecalSettings) -> Self {
        self.decal = decal;
        self
    }

    pub fn detector_mut(&mut self) -> &mut D {
        &mut self.detector
    }

    /// The camera's view of the painted road for `params`, plus the camera itself.
    pub fn render_candidate(
        &self,
        params: &Params,
    ) -> Result<(RasterImage, render::PinholeCamera, warp::Decal), ObjectiveError> {
        let cam = CameraGeometry::new(self.camera_height_m, params.d).map_err(warp::WarpError::from)?;
        let spec = IllusionSpec::new(params.h, params.w).map_err(warp::WarpError::from)?;
        let decal = warp::generate_anamorphic(
            &self.src,
            &cam,
            &spec,
            &self.decal.constraints,
            self.decal.resolution_px_per_m,
        )?;
        let camera = render::sweet_spot_camera(&decal.mapping, &cam, self.view.fov_deg, self.view.dims)?;
        let opts = self.render_options();
        let img = render::render_ground(&decal.image, &decal.mapping, &camera, &opts)?;
        Ok((img, camera, decal))
    }

    fn render_options(&self) -> RenderOptions {
        RenderOptions { supersample: self.view.supersample.max(1), ..RenderOptions::default() }
    }
}

impl<D: Detector> Objective for DecalObjective<D> {
    fn evaluate(&mut self, params: &Params, eval_id: &str) -> Result<f64, ObjectiveError> {
        let (img, camera, decal) = self.render_candidate(params)?;
        let adv = self.detector.detect(&img, eval_id)?;

        let pos = camera.position();
        let key = [
            pos[0].to_bits(),
            pos[1].to_bits(),
            pos[2].to_bits(),
            params.d.to_bits(),
            params.h.to_bits(),
            0,
        ];
        // the unpainted view depends only on the pose, not on w
        let benign = match self.benign.iter().find(|(k, _)| *k == key) {
            Some((_, set)) => set.clone(),
            None => {
                let opts = self.render_options();
                let road = RasterImage::filled(1, 1, opts.road).map_err(warp::WarpError::from)?;
                let plain = render::render_ground(&road, &decal.mapping, &camera, &opts)?;
                let set = self.detector.detect(&plain, &alloc::format!("{eval_id}-benign"))?;
                self.benign.push((key, set.clone()));
                set
            }
        };
        Ok(attack_loss(&adv, &benign, &self.target_class)?.value)
    }
}
