//! Pinhole renders of the painted road, used to check that a decal resolves into its source
//! only from the sweet spot.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::{CameraGeometry, GeometryError, GroundMapping};
use crate::image::{normalized_cross_correlation, quantize, ImageError, RasterImage, Rgb};
use crate::math;
use crate::warp::sample_bilinear;

pub const DEFAULT_FOV_DEG: f64 = 90.0;
pub const DEFAULT_RENDER_DIMS: (usize, usize) = (512, 512);

type Vec3 = [f64; 3];

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}
fn unit(a: Vec3) -> Vec3 {
    let n = math::sqrt(dot(a, a));
    [a[0] / n, a[1] / n, a[2] / n]
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RenderError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("field of view must lie in (0, 180) degrees, got {0}")]
    InvalidFov(f64),
    #[error("camera looks straight up or down; no horizontal reference")]
    DegenerateOrientation,
}

/// Rendering colors and antialiasing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderOptions {
    /// Road outside the decal.
    pub road: Rgb,
    pub sky: Rgb,
    /// Subsamples per axis per pixel.
    pub supersample: usize,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { road: Rgb::ASPHALT, sky: Rgb([170, 190, 215]), supersample: 2 }
    }
}

/// A pinhole camera in road coordinates with zero roll.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinholeCamera {
    position: Vec3,
    forward: Vec3,
    right: Vec3,
    down: Vec3,
    focal_px: f64,
    dims: (usize, usize),
}

impl PinholeCamera {
    /// `fov_deg` is the horizontal field of view.
    pub fn look_at(
        position: Vec3,
        target: Vec3,
        fov_deg: f64,
        dims: (usize, usize),
    ) -> Result<Self, RenderError> {
        if position[2] <= 0.0 {
            return Err(GeometryError::CameraBelowGround(position[2]).into());
        }
        if !(fov_deg > 0.0 && fov_deg < 180.0) {
            return Err(RenderError::InvalidFov(fov_deg));
        }
        if dims.0 == 0 || dims.1 == 0 {
            return Err(ImageError::ZeroSize { width: dims.0, height: dims.1 }.into());
        }
        let forward = unit(sub(target, position));
        let r = cross(forward, [0.0, 0.0, 1.0]);
        if dot(r, r) < 1e-18 {
            return Err(RenderError::DegenerateOrientation);
        }
        let right = unit(r);
        let up = cross(right, forward);
        let focal_px = dims.0 as f64 / 2.0 / math::tan(fov_deg.to_radians() / 2.0);
        Ok(Self { position, forward, right, down: [-up[0], -up[1], -up[2]], focal_px, dims })
    }

    pub fn position(&self) -> Vec3 {
        self.position
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    /// Image coordinates (pixel edges at integers) of a world point in front of the camera.
    pub fn project(&self, p: Vec3) -> Option<(f64, f64)> {
        let rel = sub(p, self.position);
        let z = dot(rel, self.forward);
        if z <= 1e-9 {
            return None;
        }
        let (cx, cy) = (self.dims.0 as f64 / 2.0, self.dims.1 as f64 / 2.0);
        Some((
            self.focal_px * dot(rel, self.right) / z + cx,
            self.focal_px * dot(rel, self.down) / z + cy,
        ))
    }

    fn ray(&self, u: f64, v: f64) -> Vec3 {
        let (cx, cy) = (self.dims.0 as f64 / 2.0, self.dims.1 as f64 / 2.0);
        let (a, b) = (u - cx, v - cy);
        let f = self.focal_px;
        core::array::from_fn(|k| self.forward[k] * f + self.right[k] * a + self.down[k] * b)
    }
}

/// Renders the road plane with the decal laid out per `mapping`.
pub fn render_ground(
    decal: &RasterImage,
    mapping: &GroundMapping,
    camera: &PinholeCamera,
    opts: &RenderOptions,
) -> Result<RasterImage, RenderError> {
    let (w, h) = camera.dims;
    let g2r = mapping.ground_to_raster();
    let ss = opts.supersample.max(1);
    let inv_n = 1.0 / (ss * ss) as f64;
    let mut out = RasterImage::filled(w, h, opts.sky)?;
    let pz = camera.position[2];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0f64; 3];
            for sy in 0..ss {
                for sx in 0..ss {
                    let u = x as f64 + (sx as f64 + 0.5) / ss as f64;
                    let v = y as f64 + (sy as f64 + 0.5) / ss as f64;
                    let dir = camera.ray(u, v);
                    let color = if dir[2] >= 0.0 {
                        opts.sky.0.map(f64::from)
                    } else {
                        let t = -pz / dir[2];
                        let gx = camera.position[0] + t * dir[0];
                        let gy = camera.position[1] + t * dir[1];
                        g2r.apply(gx, gy)
                            .and_then(|(rx, ry)| sample_bilinear(decal, rx, ry))
                            .unwrap_or(opts.road.0.map(f64::from))
                    };
                    for k in 0..3 {
                        acc[k] += color[k];
                    }
                }
            }
            out.put(x, y, Rgb(acc.map(|a| quantize(a * inv_n))));
        }
    }
    Ok(out)
}

/// The upright rectangle the illusion is meant to look like: centered on the road axis,
/// standing at the trapezoid's near edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Billboard {
    pub width_m: f64,
    pub height_m: f64,
    pub distance_m: f64,
}

impl Billboard {
    pub fn for_mapping(mapping: &GroundMapping, camera_height_m: f64) -> Self {
        let t = &mapping.trapezoid;
        Self {
            width_m: t.near_width_m,
            height_m: t.illusion_height(camera_height_m),
            distance_m: t.near_edge_distance_m,
        }
    }

    pub fn center(&self) -> Vec3 {
        [0.0, self.distance_m, self.height_m / 2.0]
    }

    /// World point for continuous source coordinates `(u, v)` of a `dims`-sized image.
    pub fn point(&self, u: f64, v: f64, dims: (usize, usize)) -> Vec3 {
        [
            (u / dims.0 as f64 - 0.5) * self.width_m,
            self.distance_m,
            self.height_m * (1.0 - v / dims.1 as f64),
        ]
    }
}

/// Camera at height `H`, `cam.view_distance_m` before the trapezoid's near edge, aimed at the
/// center of the intended illusion.
pub fn sweet_spot_camera(
    mapping: &GroundMapping,
    cam: &CameraGeometry,
    fov_deg: f64,
    out_dims: (usize, usize),
) -> Result<PinholeCamera, RenderError> {
    if cam.camera_height_m <= 0.0 {
        return Err(GeometryError::CameraBelowGround(cam.camera_height_m).into());
    }
    cam.validate()?;
    let board = Billboard::for_mapping(mapping, cam.camera_height_m);
    let position = [0.0, board.distance_m - cam.view_distance_m, cam.camera_height_m];
    PinholeCamera::look_at(position, board.center(), fov_deg, out_dims)
}

/// Renders the decal from the sweet spot defined by `cam`.
pub fn sweet_spot_render(
    ground: &RasterImage,
    mapping: &GroundMapping,
    cam: &CameraGeometry,
    fov_deg: f64,
    out_dims: (usize, usize),
) -> Result<RasterImage, RenderError> {
    let camera = sweet_spot_camera(mapping, cam, fov_deg, out_dims)?;
    render_ground(ground, mapping, &camera, &RenderOptions::default())
}

/// Correlation between `src` and what `render` shows where the upright billboard would
/// appear to `camera`. Points that fall outside the render count as black.
pub fn billboard_correlation(
    src: &RasterImage,
    render: &RasterImage,
    camera: &PinholeCamera,
    board: &Billboard,
) -> f64 {
    let src_luma = src.luma();
    let dims = src.dims();
    let mut seen = Vec::with_capacity(src_luma.len());
    for v in 0..dims.1 {
        for u in 0..dims.0 {
            let p = board.point(u as f64 + 0.5, v as f64 + 0.5, dims);
            let l = camera
                .project(p)
                .and_then(|(x, y)| sample_bilinear(render, x, y))
                .map(|c| Rgb(c.map(quantize)).luma())
                .unwrap_or(0.0);
            seen.push(l);
        }
    }
    normalized_cross_correlation(&src_luma, &seen)
}
