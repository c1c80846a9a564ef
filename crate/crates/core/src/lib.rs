//! Anamorphic adversarial ground patterns and their network-level impact.
//!
//! The crate is `no_std` (with `alloc`) and purely computational:
//!
//! - [`geometry`]: trapezoid construction for a viewpoint-dependent illusion and the
//!   source-image to road-plane homography.
//! - [`warp`]: resampling of the source through the ground mapping, print constraints.
//! - [`render`]: pinhole verification renders of the painted road.
//! - [`oracle`]: detector abstraction, the false-positive attack loss, and a
//!   deterministic template-matching detector.
//! - [`optimizer`]: coarse grid search plus surrogate-guided local refinement.
//! - [`metrics`]: attack success rate per distance bin, cumulative AUC, reaction windows.
//! - [`vanet`]: discrete-event simulator of BSM broadcast to a roadside unit with
//!   peak age-of-information accounting.
//!
//! File formats, the detector wire protocol and the command-line front end live in the
//! companion `anamorph` crate.

#![no_std]

extern crate alloc;

pub mod geometry;
pub mod homography;
pub mod image;
pub mod metrics;
pub mod optimizer;
pub mod oracle;
pub mod render;
pub mod samples;
pub mod vanet;
pub mod warp;

mod math;

pub use geometry::{CameraGeometry, GeometryError, GroundMapping, IllusionSpec, TrapezoidSpec};
pub use homography::Homography;
pub use image::{RasterImage, Rgb};
