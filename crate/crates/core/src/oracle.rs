//! Detector abstraction and the attack objective.
//!
//! The objective is a false-positive one: an adversarial scene scores the confidence of the
//! strongest target-class detection that has no counterpart in the benign scene.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::image::RasterImage;

mod synthetic;

pub use synthetic::{SyntheticDetector, SyntheticDetectorConfig};

/// IoU at or above which an adversarial detection counts as already present in the benign set.
pub const NOVELTY_IOU: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("UnknownClass: target class must be a non-empty label")]
    UnknownClass,
    #[error("invalid detection: {0}")]
    InvalidDetection(String),
    #[error("ProtocolError: {0}")]
    Protocol(String),
    #[error("TimeoutError: detector did not answer for image {image_id} within the deadline")]
    Timeout { image_id: String },
    #[error("detector reported an error for image {image_id}: {message}")]
    Remote { image_id: String, message: String },
    #[error("detector handshake failed: {0}")]
    Handshake(String),
    #[error("detector I/O failure: {0}")]
    Io(String),
}

/// Normalized `(x, y, w, h)` box; `(x, y)` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl From<[f64; 4]> for BBox {
    fn from([x, y, w, h]: [f64; 4]) -> Self {
        Self { x, y, w, h }
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

impl BBox {
    pub fn is_valid(&self) -> bool {
        const EPS: f64 = 1e-9;
        let finite = [self.x, self.y, self.w, self.h].iter().all(|v| v.is_finite());
        finite
            && self.x >= 0.0
            && self.y >= 0.0
            && self.w > 0.0
            && self.h > 0.0
            && self.x + self.w <= 1.0 + EPS
            && self.y + self.h <= 1.0 + EPS
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn iou(&self, other: &BBox) -> f64 {
        let ix = (self.x + self.w).min(other.x + other.w) - self.x.max(other.x);
        let iy = (self.y + self.h).min(other.y + other.h) - self.y.max(other.y);
        if ix <= 0.0 || iy <= 0.0 {
            return 0.0;
        }
        let inter = ix * iy;
        inter / (self.area() + other.area() - inter)
    }

    fn total_cmp(&self, other: &BBox) -> Ordering {
        self.x
            .total_cmp(&other.x)
            .then(self.y.total_cmp(&other.y))
            .then(self.w.total_cmp(&other.w))
            .then(self.h.total_cmp(&other.h))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    #[serde(rename = "class")]
    pub class_label: String,
    pub confidence: f64,
    pub bbox: BBox,
}

impl Detection {
    pub fn new(class_label: impl Into<String>, confidence: f64, bbox: BBox) -> Result<Self, OracleError> {
        let d = Self { class_label: class_label.into(), confidence, bbox };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(OracleError::InvalidDetection(alloc::format!(
                "confidence {} outside [0, 1]",
                self.confidence
            )));
        }
        if !self.bbox.is_valid() {
            return Err(OracleError::InvalidDetection(alloc::format!(
                "bbox {:?} not a positive box inside the unit square",
                <[f64; 4]>::from(self.bbox)
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DetectionSet {
    pub detections: Vec<Detection>,
    pub image_id: String,
}

impl DetectionSet {
    pub fn empty(image_id: impl Into<String>) -> Self {
        Self { detections: Vec::new(), image_id: image_id.into() }
    }
}

/// Scalar objective value and the detection that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackLoss {
    pub value: f64,
    pub best_detection: Option<Detection>,
}

/// Highest confidence among target-class detections in `adv` whose IoU with every benign
/// detection of that class stays below [`NOVELTY_IOU`]; 0 when there is none.
pub fn attack_loss(
    adv: &DetectionSet,
    benign: &DetectionSet,
    target_class: &str,
) -> Result<AttackLoss, OracleError> {
    if target_class.is_empty() {
        return Err(OracleError::UnknownClass);
    }
    let benign_boxes: Vec<&BBox> = benign
        .detections
        .iter()
        .filter(|d| d.class_label == target_class)
        .map(|d| &d.bbox)
        .collect();
    let best = adv
        .detections
        .iter()
        .filter(|d| d.class_label == target_class && d.confidence > 0.0)
        .filter(|d| benign_boxes.iter().all(|b| d.bbox.iou(b) < NOVELTY_IOU))
        .max_by(|a, b| {
            a.confidence
                .total_cmp(&b.confidence)
                // equal confidences: pick the same box whatever the input order
                .then_with(|| b.bbox.total_cmp(&a.bbox))
        });
    Ok(match best {
        Some(d) => AttackLoss { value: d.confidence, best_detection: Some(d.clone()) },
        None => AttackLoss { value: 0.0, best_detection: None },
    })
}

/// Anything that scores an image: the synthetic detector, or an external model behind the
/// wire protocol.
pub trait Detector {
    fn detect(&mut self, image: &RasterImage, image_id: &str) -> Result<DetectionSet, OracleError>;
}

impl<D: Detector + ?Sized> Detector for &mut D {
    fn detect(&mut self, image: &RasterImage, image_id: &str) -> Result<DetectionSet, OracleError> {
        (**self).detect(image, image_id)
    }
}

impl<D: Detector + ?Sized> Detector for alloc::boxed::Box<D> {
    fn detect(&mut self, image: &RasterImage, image_id: &str) -> Result<DetectionSet, OracleError> {
        (**self).detect(image, image_id)
    }
}
