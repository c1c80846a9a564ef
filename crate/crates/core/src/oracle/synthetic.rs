//! Deterministic template-matching detector used in place of a neural network.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{BBox, Detection, DetectionSet, Detector, OracleError};
use crate::homography::Homography;
use crate::image::{RasterImage, Rgb};
use crate::math;
use crate::warp::apply_homography;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDetectorConfig {
    pub class_label: String,
    pub scales: Vec<f64>,
    pub stride_px: usize,
    pub threshold: f64,
}

impl Default for SyntheticDetectorConfig {
    fn default() -> Self {
        Self { class_label: "car".into(), scales: vec![0.5, 1.0, 2.0], stride_px: 16, threshold: 0.5 }
    }
}

struct ScaledTemplate {
    width: usize,
    height: usize,
    /// Zero-mean luma.
    centered: Vec<f64>,
    norm: f64,
}

/// Slides a template over the image at a few scales on a fixed stride and reports the single
/// best normalized cross-correlation as one detection.
pub struct SyntheticDetector {
    config: SyntheticDetectorConfig,
    templates: Vec<ScaledTemplate>,
}

impl SyntheticDetector {
    pub fn new(template: &RasterImage) -> Self {
        Self::with_config(template, SyntheticDetectorConfig::default())
    }

    pub fn with_config(template: &RasterImage, config: SyntheticDetectorConfig) -> Self {
        let templates = config
            .scales
            .iter()
            .filter_map(|&s| scaled_template(template, s))
            .collect();
        Self { config, templates }
    }

    pub fn config(&self) -> &SyntheticDetectorConfig {
        &self.config
    }

    /// Best `(ncc, x, y, w, h)` over scales and stride positions; earliest wins ties.
    pub fn best_match(&self, img: &RasterImage) -> Option<(f64, usize, usize, usize, usize)> {
        let (iw, ih) = img.dims();
        let luma = img.luma();
        let integ = Integral::new(&luma, iw, ih);
        let stride = self.config.stride_px.max(1);
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for t in &self.templates {
            if t.width > iw || t.height > ih || t.norm <= 0.0 {
                continue;
            }
            let n = (t.width * t.height) as f64;
            for y in (0..=ih - t.height).step_by(stride) {
                for x in (0..=iw - t.width).step_by(stride) {
                    let (s, s2) = integ.window(x, y, t.width, t.height);
                    let var = s2 - s * s / n;
                    if var <= 1e-9 * n {
                        continue;
                    }
                    let mut dotp = 0.0;
                    for ty in 0..t.height {
                        let row = &luma[(y + ty) * iw + x..(y + ty) * iw + x + t.width];
                        let trow = &t.centered[ty * t.width..(ty + 1) * t.width];
                        dotp += row.iter().zip(trow).map(|(a, b)| a * b).sum::<f64>();
                    }
                    let ncc = dotp / (t.norm * math::sqrt(var));
                    if best.is_none_or(|b| ncc > b.0) {
                        best = Some((ncc, x, y, t.width, t.height));
                    }
                }
            }
        }
        best
    }
}

impl SyntheticDetector {
    pub fn detect_image(&self, img: &RasterImage, image_id: &str) -> DetectionSet {
        let mut out = DetectionSet::empty(image_id);
        if let Some((ncc, x, y, w, h)) = self.best_match(img) {
            if ncc >= self.config.threshold {
                let (iw, ih) = (img.width() as f64, img.height() as f64);
                let bbox = BBox { x: x as f64 / iw, y: y as f64 / ih, w: w as f64 / iw, h: h as f64 / ih };
                out.detections.push(Detection {
                    class_label: self.config.class_label.clone(),
                    confidence: ncc.clamp(0.0, 1.0),
                    bbox,
                });
            }
        }
        out
    }
}

impl Detector for SyntheticDetector {
    fn detect(&mut self, image: &RasterImage, image_id: &str) -> Result<DetectionSet, OracleError> {
        Ok(self.detect_image(image, image_id))
    }
}

fn scaled_template(template: &RasterImage, scale: f64) -> Option<ScaledTemplate> {
    if !(scale > 0.0) {
        return None;
    }
    let (w, h) = template.dims();
    let tw = math::round(w as f64 * scale) as usize;
    let th = math::round(h as f64 * scale) as usize;
    if tw == 0 || th == 0 {
        return None;
    }
    let resized = if (tw, th) == (w, h) {
        template.clone()
    } else {
        let sx = tw as f64 / w as f64;
        let sy = th as f64 / h as f64;
        apply_homography(template, &Homography::scale(sx, sy), (tw, th), Rgb::BLACK).ok()?
    };
    let luma = resized.luma();
    let mean = luma.iter().sum::<f64>() / luma.len() as f64;
    let centered: Vec<f64> = luma.iter().map(|v| v - mean).collect();
    let norm = math::sqrt(centered.iter().map(|v| v * v).sum::<f64>());
    Some(ScaledTemplate { width: tw, height: th, centered, norm })
}

/// Summed-area tables of values and squared values.
struct Integral {
    width: usize,
    sum: Vec<f64>,
    sq: Vec<f64>,
}

impl Integral {
    fn new(v: &[f64], w: usize, h: usize) -> Self {
        let stride = w + 1;
        let mut sum = vec![0.0; stride * (h + 1)];
        let mut sq = vec![0.0; stride * (h + 1)];
        for y in 0..h {
            let (mut rs, mut rq) = (0.0, 0.0);
            for x in 0..w {
                let p = v[y * w + x];
                rs += p;
                rq += p * p;
                sum[(y + 1) * stride + x + 1] = sum[y * stride + x + 1] + rs;
                sq[(y + 1) * stride + x + 1] = sq[y * stride + x + 1] + rq;
            }
        }
        Self { width: w, sum, sq }
    }

    fn window(&self, x: usize, y: usize, w: usize, h: usize) -> (f64, f64) {
        let s = self.width + 1;
        let at = |t: &[f64], xx: usize, yy: usize| t[yy * s + xx];
        let f = |t: &[f64]| at(t, x + w, y + h) - at(t, x, y + h) - at(t, x + w, y) + at(t, x, y);
        (f(&self.sum), f(&self.sq))
    }
}
