use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// 8-bit RGB triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rgb(pub [u8; 3]);

impl Rgb {
    /// Default road tone used outside the painted silhouette.
    pub const ASPHALT: Rgb = Rgb([90, 90, 95]);
    pub const BLACK: Rgb = Rgb([0, 0, 0]);

    pub fn luma(self) -> f64 {
        let [r, g, b] = self.0;
        0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b)
    }
}

/// Row-major RGB raster, 8 bits per channel.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RasterImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum ImageError {
    #[error("image dimensions must be nonzero (got {width}x{height})")]
    ZeroSize { width: usize, height: usize },
    #[error("pixel buffer holds {actual} bytes, expected {expected}")]
    BufferSize { expected: usize, actual: usize },
}

impl RasterImage {
    pub fn filled(width: usize, height: usize, color: Rgb) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::ZeroSize { width, height });
        }
        let mut data = vec![0u8; width * height * 3];
        for px in data.chunks_exact_mut(3) {
            px.copy_from_slice(&color.0);
        }
        Ok(Self { width, height, data })
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::ZeroSize { width, height });
        }
        let expected = width * height * 3;
        if data.len() != expected {
            return Err(ImageError::BufferSize { expected, actual: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> Rgb,
    ) -> Result<Self, ImageError> {
        let mut img = Self::filled(width, height, Rgb::BLACK)?;
        for y in 0..height {
            for x in 0..width {
                img.put(x, y, f(x, y));
            }
        }
        Ok(img)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    /// # Panics
    /// If `(x, y)` is out of bounds.
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Rgb {
        let i = self.offset(x, y);
        Rgb([self.data[i], self.data[i + 1], self.data[i + 2]])
    }

    #[inline]
    pub fn put(&mut self, x: usize, y: usize, c: Rgb) {
        let i = self.offset(x, y);
        self.data[i..i + 3].copy_from_slice(&c.0);
    }

    #[inline]
    pub fn channel(&self, x: usize, y: usize, c: usize) -> u8 {
        self.data[self.offset(x, y) + c]
    }

    /// Per-pixel luminance, row-major.
    pub fn luma(&self) -> Vec<f64> {
        self.data
            .chunks_exact(3)
            .map(|p| Rgb([p[0], p[1], p[2]]).luma())
            .collect()
    }

    /// Copies `other` into `self` with its top-left corner at `(x0, y0)`, clipping at the edges.
    pub fn blit(&mut self, other: &RasterImage, x0: isize, y0: isize) {
        for y in 0..other.height {
            let ty = y0 + y as isize;
            if ty < 0 || ty >= self.height as isize {
                continue;
            }
            for x in 0..other.width {
                let tx = x0 + x as isize;
                if tx < 0 || tx >= self.width as isize {
                    continue;
                }
                self.put(tx as usize, ty as usize, other.get(x, y));
            }
        }
    }

    #[inline]
    fn offset(&self, x: usize, y: usize) -> usize {
        assert!(x < self.width && y < self.height, "pixel ({x},{y}) out of bounds");
        (y * self.width + x) * 3
    }
}

/// Quantizes a real channel value to `u8` (round half away from zero, saturating).
#[inline]
pub(crate) fn quantize(v: f64) -> u8 {
    let r = crate::math::round(v);
    if r <= 0.0 {
        0
    } else if r >= 255.0 {
        255
    } else {
        r as u8
    }
}

/// Normalized cross-correlation of two equal-length sample vectors.
///
/// Returns 0 when either side has zero variance.
pub fn normalized_cross_correlation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    if a.is_empty() {
        return 0.0;
    }
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    // luma variances below this are flat regions for 8-bit data
    if saa <= 1e-9 * n || sbb <= 1e-9 * n {
        return 0.0;
    }
    sab / crate::math::sqrt(saa * sbb)
}
