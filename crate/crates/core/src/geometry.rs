//! Trapezoid construction for a perspective-dependent road illusion.
//!
//! Road frame: `x` is lateral and centered on the trapezoid axis, `y` is longitudinal and
//! measured from the camera's ground point, `z` is up. The trapezoid's near edge sits at
//! `y = d`, its far edge at `y = d + L_g`.

use serde::{Deserialize, Serialize};

use crate::homography::{Homography, HomographyError};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("camera height and viewing distance must be positive (H = {height}, d = {distance})")]
    InvalidCamera { height: f64, distance: f64 },
    #[error("illusion height must be >= 0 and object width > 0 (h = {height}, w = {width})")]
    InvalidIllusion { height: f64, width: f64 },
    #[error("DegenerateIllusion: illusion height {illusion} must be below camera height {camera}")]
    DegenerateIllusion { illusion: f64, camera: f64 },
    #[error("DegenerateTrapezoid: {0}")]
    DegenerateTrapezoid(HomographyError),
    #[error("source dimensions must be nonzero and resolution positive")]
    InvalidRaster,
    #[error("CameraBelowGround: camera height {0} must be positive")]
    CameraBelowGround(f64),
}

/// Height `H` and viewing distance `d` of the sweet-spot camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraGeometry {
    pub camera_height_m: f64,
    pub view_distance_m: f64,
}

impl CameraGeometry {
    pub fn new(camera_height_m: f64, view_distance_m: f64) -> Result<Self, GeometryError> {
        let cam = Self { camera_height_m, view_distance_m };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let (h, d) = (self.camera_height_m, self.view_distance_m);
        if !(h > 0.0 && d > 0.0 && h.is_finite() && d.is_finite()) {
            return Err(GeometryError::InvalidCamera { height: h, distance: d });
        }
        Ok(())
    }
}

/// Apparent height `h` and width `w` of the illusion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IllusionSpec {
    pub illusion_height_m: f64,
    pub object_width_m: f64,
}

impl IllusionSpec {
    pub fn new(illusion_height_m: f64, object_width_m: f64) -> Result<Self, GeometryError> {
        let spec = Self { illusion_height_m, object_width_m };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let (h, w) = (self.illusion_height_m, self.object_width_m);
        if !(h >= 0.0 && w > 0.0 && h.is_finite() && w.is_finite()) {
            return Err(GeometryError::InvalidIllusion { height: h, width: w });
        }
        Ok(())
    }

    fn check_against(&self, cam: &CameraGeometry) -> Result<(), GeometryError> {
        cam.validate()?;
        self.validate()?;
        if self.illusion_height_m >= cam.camera_height_m {
            return Err(GeometryError::DegenerateIllusion {
                illusion: self.illusion_height_m,
                camera: cam.camera_height_m,
            });
        }
        Ok(())
    }
}

/// The isosceles ground trapezoid the source image is remapped onto.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapezoidSpec {
    pub near_width_m: f64,
    pub far_width_m: f64,
    pub ground_length_m: f64,
    pub base_angle_rad: f64,
    pub near_edge_distance_m: f64,
}

/// Distance `L_g` from the near edge to the far edge: `d·h / (H − h)`.
pub fn far_edge_distance(cam: &CameraGeometry, spec: &IllusionSpec) -> Result<f64, GeometryError> {
    spec.check_against(cam)?;
    let (big_h, h) = (cam.camera_height_m, spec.illusion_height_m);
    Ok(cam.view_distance_m * h / (big_h - h))
}

/// Far-edge width by similar triangles: `w·H / (H − h)`.
pub fn far_edge_width(cam: &CameraGeometry, spec: &IllusionSpec) -> Result<f64, GeometryError> {
    spec.check_against(cam)?;
    let (big_h, h) = (cam.camera_height_m, spec.illusion_height_m);
    Ok(spec.object_width_m * big_h / (big_h - h))
}

/// Base angle `arctan(w / 2d)`.
pub fn base_angle(spec: &IllusionSpec, cam: &CameraGeometry) -> f64 {
    math::atan(spec.object_width_m / (2.0 * cam.view_distance_m))
}

pub fn build_trapezoid(
    cam: &CameraGeometry,
    spec: &IllusionSpec,
) -> Result<TrapezoidSpec, GeometryError> {
    Ok(TrapezoidSpec {
        near_width_m: spec.object_width_m,
        far_width_m: far_edge_width(cam, spec)?,
        ground_length_m: far_edge_distance(cam, spec)?,
        base_angle_rad: base_angle(spec, cam),
        near_edge_distance_m: cam.view_distance_m,
    })
}

impl TrapezoidSpec {
    /// Corners in source order: far-left, far-right, near-right, near-left.
    ///
    /// `min_length_m` keeps a flat decal (`L_g = 0`) from collapsing to a segment.
    pub fn corners(&self, min_length_m: f64) -> [(f64, f64); 4] {
        let d = self.near_edge_distance_m;
        let far = d + self.ground_length_m.max(min_length_m);
        let (hn, hf) = (self.near_width_m / 2.0, self.far_width_m / 2.0);
        [(-hf, far), (hf, far), (hn, d), (-hn, d)]
    }

    /// Illusion height implied by the trapezoid for a camera at `camera_height_m`.
    pub fn illusion_height(&self, camera_height_m: f64) -> f64 {
        let (d, lg) = (self.near_edge_distance_m, self.ground_length_m);
        camera_height_m * lg / (d + lg)
    }
}

/// Source-pixel to road-plane mapping together with the raster frame of the printed decal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundMapping {
    /// Source pixel coordinates (edges at `0..W`, `0..H`) to road meters.
    pub homography: Homography,
    pub ground_resolution_px_per_m: f64,
    /// `(width_m, length_m)` of the trapezoid's bounding box.
    pub output_extent: (f64, f64),
    pub trapezoid: TrapezoidSpec,
}

/// Builds the four-corner mapping: source row 0 lands on the far edge, the bottom row on
/// the near edge.
pub fn ground_mapping(
    trap: &TrapezoidSpec,
    source_dims: (usize, usize),
    resolution_px_per_m: f64,
) -> Result<GroundMapping, GeometryError> {
    let (w, h) = source_dims;
    if w == 0 || h == 0 || !(resolution_px_per_m > 0.0 && resolution_px_per_m.is_finite()) {
        return Err(GeometryError::InvalidRaster);
    }
    let strip = 1.0 / resolution_px_per_m;
    let dst = trap.corners(strip);
    let (wf, hf) = (w as f64, h as f64);
    let src = [(0.0, 0.0), (wf, 0.0), (wf, hf), (0.0, hf)];
    let homography =
        Homography::from_correspondences(&src, &dst).map_err(GeometryError::DegenerateTrapezoid)?;
    Ok(GroundMapping {
        homography,
        ground_resolution_px_per_m: resolution_px_per_m,
        output_extent: (
            trap.far_width_m.max(trap.near_width_m),
            trap.ground_length_m.max(strip),
        ),
        trapezoid: *trap,
    })
}

impl GroundMapping {
    /// Pixel dimensions of the printed decal.
    pub fn raster_dims(&self) -> (usize, usize) {
        let res = self.ground_resolution_px_per_m;
        let px = |m: f64| (math::ceil(m * res - 1e-9) as usize).max(1);
        (px(self.output_extent.0), px(self.output_extent.1))
    }

    /// Road meters to decal pixel coordinates. Row 0 is the far end, the bottom row the near
    /// edge; the trapezoid axis is the raster's vertical center line.
    pub fn ground_to_raster(&self) -> Homography {
        let res = self.ground_resolution_px_per_m;
        let (wpx, hpx) = self.raster_dims();
        let d = self.trapezoid.near_edge_distance_m;
        Homography([
            res,
            0.0,
            wpx as f64 / 2.0,
            0.0,
            -res,
            d * res + hpx as f64,
            0.0,
            0.0,
            1.0,
        ])
    }

    /// Source pixels straight to decal pixels.
    pub fn source_to_raster(&self) -> Homography {
        self.ground_to_raster().then_after(&self.homography)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam(h: f64, d: f64) -> CameraGeometry {
        CameraGeometry::new(h, d).unwrap()
    }
    fn ill(h: f64, w: f64) -> IllusionSpec {
        IllusionSpec::new(h, w).unwrap()
    }
    fn rel(a: f64, b: f64) -> f64 {
        if b == 0.0 {
            a.abs()
        } else {
            ((a - b) / b).abs()
        }
    }

    #[test]
    fn far_edge_distance_examples() {
        assert!(rel(far_edge_distance(&cam(1.5, 8.0), &ill(0.75, 1.8)).unwrap(), 8.0) < 1e-12);
        assert_eq!(far_edge_distance(&cam(2.0, 10.0), &ill(0.0, 1.0)).unwrap(), 0.0);
        assert!(rel(far_edge_distance(&cam(2.0, 10.0), &ill(1.0, 1.0)).unwrap(), 10.0) < 1e-12);
    }

    #[test]
    fn far_edge_width_examples() {
        assert!(rel(far_edge_width(&cam(1.5, 8.0), &ill(0.75, 1.8)).unwrap(), 3.6) < 1e-12);
        for big_h in [0.5, 1.5, 7.0] {
            assert_eq!(far_edge_width(&cam(big_h, 3.0), &ill(0.0, 2.2)).unwrap(), 2.2);
        }
        assert!(rel(far_edge_width(&cam(2.0, 10.0), &ill(1.5, 2.0)).unwrap(), 8.0) < 1e-12);
    }

    #[test]
    fn base_angle_examples() {
        let q = base_angle(&ill(0.5, 16.0), &cam(1.5, 8.0));
        assert!((q - core::f64::consts::FRAC_PI_4).abs() < 1e-15);
        let t = base_angle(&ill(0.5, 1.8), &cam(1.5, 8.0));
        assert!((t - 0.112_028_962_425_987_88).abs() < 1e-15, "{t}");
        let tiny = base_angle(&IllusionSpec { illusion_height_m: 0.0, object_width_m: 1e-300 }, &cam(1.0, 1.0));
        assert!(tiny < 1e-299);
    }

    #[test]
    fn degenerate_illusion_rejected() {
        for h in [1.5, 2.0] {
            assert!(matches!(
                build_trapezoid(&cam(1.5, 8.0), &ill(h, 1.8)),
                Err(GeometryError::DegenerateIllusion { .. })
            ));
        }
        assert!(CameraGeometry::new(0.0, 1.0).is_err());
        assert!(CameraGeometry::new(1.0, -1.0).is_err());
        assert!(IllusionSpec::new(-0.1, 1.0).is_err());
        assert!(IllusionSpec::new(0.1, 0.0).is_err());
    }

    #[test]
    fn trapezoid_compositions() {
        let t = build_trapezoid(&cam(1.5, 8.0), &ill(0.75, 1.8)).unwrap();
        assert!(rel(t.far_width_m, 3.6) < 1e-12);
        assert!(rel(t.ground_length_m, 8.0) < 1e-12);
        assert!(rel(t.base_angle_rad, libm::atan(0.1125)) < 1e-15);
        assert_eq!((t.near_width_m, t.near_edge_distance_m), (1.8, 8.0));

        let flat = build_trapezoid(&cam(1.5, 8.0), &ill(0.0, 1.8)).unwrap();
        assert_eq!((flat.far_width_m, flat.ground_length_m), (1.8, 0.0));

        let t2 = build_trapezoid(&cam(2.0, 10.0), &ill(1.0, 2.0)).unwrap();
        assert!(rel(t2.far_width_m, 4.0) < 1e-12);
        assert!(rel(t2.ground_length_m, 10.0) < 1e-12);
        assert_eq!(t2.base_angle_rad, libm::atan(0.1));
        assert!((t2.illusion_height(2.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mapping_hits_corners() {
        let t = build_trapezoid(&cam(1.5, 8.0), &ill(0.75, 1.8)).unwrap();
        let m = ground_mapping(&t, (64, 48), 100.0).unwrap();
        let (x, y) = m.homography.apply(64.0, 0.0).unwrap();
        assert!((x - 1.8).abs() < 1e-9 && (y - 16.0).abs() < 1e-9);
        let (x, y) = m.homography.apply(0.0, 48.0).unwrap();
        assert!((x + 0.9).abs() < 1e-9 && (y - 8.0).abs() < 1e-9);
        assert!(m.homography.determinant().abs() > 1e-12);
        assert_eq!(m.raster_dims(), (360, 800));
    }

    #[test]
    fn rectangle_mapping_is_affine() {
        let rect = TrapezoidSpec {
            near_width_m: 2.0,
            far_width_m: 2.0,
            ground_length_m: 3.0,
            base_angle_rad: 0.1,
            near_edge_distance_m: 5.0,
        };
        let m = ground_mapping(&rect, (32, 32), 50.0).unwrap();
        assert!(m.homography.is_affine(1e-12));
    }

    #[test]
    fn flat_decal_uses_single_pixel_strip() {
        let t = build_trapezoid(&cam(1.5, 8.0), &ill(0.0, 1.8)).unwrap();
        let m = ground_mapping(&t, (10, 10), 100.0).unwrap();
        assert_eq!(m.raster_dims(), (180, 1));
        assert!(m.homography.is_affine(1e-12));
    }

    #[test]
    fn raster_frame_places_near_edge_at_bottom() {
        let t = build_trapezoid(&cam(1.5, 8.0), &ill(0.75, 1.8)).unwrap();
        let m = ground_mapping(&t, (64, 48), 100.0).unwrap();
        let s2r = m.source_to_raster();
        let (u, v) = s2r.apply(0.0, 48.0).unwrap();
        assert!((u - 90.0).abs() < 1e-6 && (v - 800.0).abs() < 1e-6, "{u} {v}");
        let (u, v) = s2r.apply(64.0, 0.0).unwrap();
        assert!((u - 360.0).abs() < 1e-6 && v.abs() < 1e-6, "{u} {v}");
    }

    #[test]
    fn invalid_raster_inputs() {
        let t = build_trapezoid(&cam(1.5, 8.0), &ill(0.75, 1.8)).unwrap();
        assert_eq!(ground_mapping(&t, (0, 4), 100.0), Err(GeometryError::InvalidRaster));
        assert_eq!(ground_mapping(&t, (4, 4), 0.0), Err(GeometryError::InvalidRaster));
    }
}
