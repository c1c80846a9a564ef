//! Resampling the source object onto the road plane and print-gamut constraints.

use serde::{Deserialize, Serialize};

use crate::geometry::{self, CameraGeometry, GeometryError, GroundMapping, IllusionSpec, TrapezoidSpec};
use crate::homography::Homography;
use crate::image::{quantize, ImageError, RasterImage, Rgb};
use crate::math;

/// Default decal resolution, pixels per meter.
pub const DEFAULT_RESOLUTION_PX_PER_M: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WarpError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("invalid print constraints: need 0 <= min < max <= 255 and weight >= 0")]
    InvalidConstraints,
}

/// Printable channel range and optional smoothing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrintConstraints {
    pub channel_min: u8,
    pub channel_max: u8,
    pub smoothing_weight: f64,
}

impl Default for PrintConstraints {
    fn default() -> Self {
        Self { channel_min: 20, channel_max: 240, smoothing_weight: 0.0 }
    }
}

impl PrintConstraints {
    /// No clamping, no smoothing.
    pub const NONE: PrintConstraints =
        PrintConstraints { channel_min: 0, channel_max: 255, smoothing_weight: 0.0 };

    pub fn validate(&self) -> Result<(), WarpError> {
        if self.channel_min >= self.channel_max
            || !(self.smoothing_weight >= 0.0 && self.smoothing_weight.is_finite())
        {
            return Err(WarpError::InvalidConstraints);
        }
        Ok(())
    }
}

/// Bilinear sample at continuous coordinates where pixel `(i, j)` covers `[i, i+1) × [j, j+1)`
/// and its center is `(i + 0.5, j + 0.5)`. Edge pixels extend to the image border.
///
/// Returns `None` outside `[0, W] × [0, H]`.
#[inline]
pub fn sample_bilinear(img: &RasterImage, sx: f64, sy: f64) -> Option<[f64; 3]> {
    let (w, h) = (img.width(), img.height());
    if !(sx >= 0.0 && sy >= 0.0 && sx <= w as f64 && sy <= h as f64) {
        return None;
    }
    let (fx, fy) = (sx - 0.5, sy - 0.5);
    let (x0, y0) = (math::floor(fx), math::floor(fy));
    let (tx, ty) = (fx - x0, fy - y0);
    let clamp = |v: f64, n: usize| -> usize { (v.max(0.0) as usize).min(n - 1) };
    let (ix0, ix1) = (clamp(x0, w), clamp(x0 + 1.0, w));
    let (iy0, iy1) = (clamp(y0, h), clamp(y0 + 1.0, h));
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let p00 = f64::from(img.channel(ix0, iy0, c));
        let p10 = f64::from(img.channel(ix1, iy0, c));
        let p01 = f64::from(img.channel(ix0, iy1, c));
        let p11 = f64::from(img.channel(ix1, iy1, c));
        let top = (1.0 - tx) * p00 + tx * p10;
        let bottom = (1.0 - tx) * p01 + tx * p11;
        *o = (1.0 - ty) * top + ty * bottom;
    }
    Some(out)
}

/// Inverse-mapped bilinear resampling. `src_to_out` maps source pixel coordinates to output
/// pixel coordinates; each output pixel center is pulled back through its inverse.
pub fn apply_homography(
    src: &RasterImage,
    src_to_out: &Homography,
    out_dims: (usize, usize),
    fill: Rgb,
) -> Result<RasterImage, WarpError> {
    let inv = src_to_out
        .inverse()
        .map_err(|e| WarpError::Geometry(GeometryError::DegenerateTrapezoid(e)))?;
    let mut out = RasterImage::filled(out_dims.0, out_dims.1, fill)?;
    for y in 0..out_dims.1 {
        for x in 0..out_dims.0 {
            let Some((sx, sy)) = inv.apply(x as f64 + 0.5, y as f64 + 0.5) else {
                continue;
            };
            if let Some(v) = sample_bilinear(src, sx, sy) {
                out.put(x, y, Rgb(v.map(quantize)));
            }
        }
    }
    Ok(out)
}

/// Warps the source into the decal raster described by `mapping`.
pub fn warp_to_ground(
    src: &RasterImage,
    mapping: &GroundMapping,
    fill: Rgb,
) -> Result<RasterImage, WarpError> {
    apply_homography(src, &mapping.source_to_raster(), mapping.raster_dims(), fill)
}

/// Clamps channels to the printable range, then optionally blends in one 3×3 box-filter pass.
pub fn constrain(img: &RasterImage, c: &PrintConstraints) -> RasterImage {
    let (lo, hi) = (c.channel_min, c.channel_max.max(c.channel_min));
    let mut clamped = img.clone().into_raw();
    for v in clamped.iter_mut() {
        *v = (*v).clamp(lo, hi);
    }
    let (w, h) = img.dims();
    let clamped = RasterImage::from_raw(w, h, clamped).expect("same dimensions");
    let weight = c.smoothing_weight.clamp(0.0, 1.0);
    if weight == 0.0 {
        return clamped;
    }
    let mut out = clamped.clone();
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0f64; 3];
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let sx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                    let sy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                    let p = clamped.get(sx, sy).0;
                    for k in 0..3 {
                        acc[k] += f64::from(p[k]);
                    }
                }
            }
            let p = clamped.get(x, y).0;
            let mut px = [0u8; 3];
            for k in 0..3 {
                let blended = (1.0 - weight) * f64::from(p[k]) + weight * acc[k] / 9.0;
                px[k] = quantize(blended).clamp(lo, hi);
            }
            out.put(x, y, Rgb(px));
        }
    }
    out
}

/// A printable decal and the geometry it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Decal {
    pub image: RasterImage,
    pub trapezoid: TrapezoidSpec,
    pub mapping: GroundMapping,
}

/// Trapezoid construction, ground mapping, resampling and print constraints in one step.
/// Pixels outside the trapezoid take the asphalt tone.
pub fn generate_anamorphic(
    src: &RasterImage,
    cam: &CameraGeometry,
    spec: &IllusionSpec,
    constraints: &PrintConstraints,
    resolution_px_per_m: f64,
) -> Result<Decal, WarpError> {
    constraints.validate()?;
    let trapezoid = geometry::build_trapezoid(cam, spec)?;
    let mapping = geometry::ground_mapping(&trapezoid, src.dims(), resolution_px_per_m)?;
    let warped = warp_to_ground(src, &mapping, Rgb::ASPHALT)?;
    Ok(Decal { image: constrain(&warped, constraints), trapezoid, mapping })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checker2() -> RasterImage {
        RasterImage::from_fn(2, 2, |x, y| if (x + y) % 2 == 0 { Rgb([0, 0, 0]) } else { Rgb([255, 255, 255]) })
            .unwrap()
    }

    #[test]
    fn identity_is_a_copy() {
        let src = RasterImage::from_fn(7, 5, |x, y| Rgb([(x * 30) as u8, (y * 40) as u8, 7])).unwrap();
        let out = apply_homography(&src, &Homography::IDENTITY, (7, 5), Rgb::BLACK).unwrap();
        assert_eq!(out, src);
    }

    #[test]
    fn doubling_a_checkerboard() {
        let out = apply_homography(&checker2(), &Homography::scale(2.0, 2.0), (4, 4), Rgb::BLACK).unwrap();
        // centers at 0.25, 0.75, 1.25, 1.75 in source units -> weights 0, .25, .75, 1 toward pixel 1
        let row0: [u8; 4] = core::array::from_fn(|x| out.get(x, 0).0[0]);
        assert_eq!(row0, [0, 64, 191, 255]);
        let col0: [u8; 4] = core::array::from_fn(|y| out.get(0, y).0[0]);
        assert_eq!(col0, [0, 64, 191, 255]);
        // (1,1): tx=ty=0.25 -> 0.75*0.75*0 + 2*0.75*0.25*255 + 0.25*0.25*0 = 95.625
        assert_eq!(out.get(1, 1).0[0], 96);
    }

    #[test]
    fn all_outside_gives_fill() {
        let fill = Rgb([1, 2, 3]);
        let out = apply_homography(&checker2(), &Homography::translation(100.0, 100.0), (5, 5), fill).unwrap();
        assert_eq!(out, RasterImage::filled(5, 5, fill).unwrap());
    }

    #[test]
    fn singular_mapping_is_degenerate() {
        let h = Homography([1.0, 2.0, 0.0, 2.0, 4.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(matches!(
            apply_homography(&checker2(), &h, (2, 2), Rgb::BLACK),
            Err(WarpError::Geometry(GeometryError::DegenerateTrapezoid(_)))
        ));
    }

    #[test]
    fn constrain_cases() {
        let src = RasterImage::from_fn(4, 3, |x, y| Rgb([(x * 80) as u8, 250, (y * 120) as u8])).unwrap();
        assert_eq!(constrain(&src, &PrintConstraints::NONE), src);
        let c = PrintConstraints { channel_min: 10, channel_max: 240, smoothing_weight: 0.0 };
        let out = constrain(&src, &c);
        assert_eq!(out.get(0, 0), Rgb([10, 240, 10]));
        let flat = RasterImage::filled(5, 5, Rgb([100, 120, 140])).unwrap();
        let smooth = PrintConstraints { channel_min: 20, channel_max: 240, smoothing_weight: 0.7 };
        assert_eq!(constrain(&flat, &smooth), flat);
    }

    #[test]
    fn constraint_validation() {
        assert!(PrintConstraints { channel_min: 5, channel_max: 5, smoothing_weight: 0.0 }.validate().is_err());
        assert!(PrintConstraints { channel_min: 0, channel_max: 5, smoothing_weight: -1.0 }.validate().is_err());
        assert!(PrintConstraints::default().validate().is_ok());
    }

    #[test]
    fn flat_decal_is_scaled_source_strip() {
        let src = RasterImage::from_fn(18, 4, |x, _| Rgb([(x * 10 + 30) as u8, 50, 60])).unwrap();
        let cam = CameraGeometry::new(1.5, 8.0).unwrap();
        let spec = IllusionSpec::new(0.0, 1.8).unwrap();
        let decal = generate_anamorphic(&src, &cam, &spec, &PrintConstraints::NONE, 10.0).unwrap();
        assert_eq!(decal.image.dims(), (18, 1));
        assert!(decal.mapping.homography.is_affine(1e-12));
        // one decal pixel per source column, vertically squashed
        for x in 0..18 {
            assert_eq!(decal.image.get(x, 0), Rgb([(x * 10 + 30) as u8, 50, 60]));
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let src = RasterImage::from_fn(16, 16, |x, y| Rgb([(x * 16) as u8, (y * 16) as u8, 128])).unwrap();
        let cam = CameraGeometry::new(1.5, 6.0).unwrap();
        let spec = IllusionSpec::new(0.6, 1.6).unwrap();
        let a = generate_anamorphic(&src, &cam, &spec, &PrintConstraints::default(), 50.0).unwrap();
        let b = generate_anamorphic(&src, &cam, &spec, &PrintConstraints::default(), 50.0).unwrap();
        assert_eq!(a.image.as_raw(), b.image.as_raw());
        assert!(a.image.as_raw().iter().all(|&v| (20..=240).contains(&v)));
    }
}
