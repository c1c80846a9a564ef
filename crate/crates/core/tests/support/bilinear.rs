//! Brute-force bilinear resampler sharing no code with the library: its own 3×3 inverse, its
//! own sampling and rounding. Also used by the acceptance suite.

use anamorph_core::{Homography, RasterImage, Rgb};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn invert_gauss_jordan(m: [f64; 9]) -> [f64; 9] {
    let mut a = [[0.0f64; 6]; 3];
    for r in 0..3 {
        for c in 0..3 {
            a[r][c] = m[r * 3 + c];
        }
        a[r][3 + r] = 1.0;
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        let p = a[col][col];
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for r in 0..3 {
            if r != col {
                let f = a[r][col];
                for c in 0..6 {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut inv = [0.0; 9];
    for r in 0..3 {
        for c in 0..3 {
            inv[r * 3 + c] = a[r][3 + c];
        }
    }
    inv
}

pub fn oracle(src: &RasterImage, h: [f64; 9], dims: (usize, usize), fill: Rgb) -> Vec<u8> {
    let inv = invert_gauss_jordan(h);
    let (sw, sh) = (src.width() as i64, src.height() as i64);
    let mut out = Vec::with_capacity(dims.0 * dims.1 * 3);
    for y in 0..dims.1 {
        for x in 0..dims.0 {
            let (ox, oy) = (x as f64 + 0.5, y as f64 + 0.5);
            let z = inv[6] * ox + inv[7] * oy + inv[8];
            let sx = (inv[0] * ox + inv[1] * oy + inv[2]) / z;
            let sy = (inv[3] * ox + inv[4] * oy + inv[5]) / z;
            let inside = sx >= 0.0 && sy >= 0.0 && sx <= sw as f64 && sy <= sh as f64;
            if !inside {
                out.extend_from_slice(&fill.0);
                continue;
            }
            // neighbours of the continuous point, centers at i + 0.5, clamped at the border
            let gx = sx - 0.5;
            let gy = sy - 0.5;
            let x0 = gx.floor() as i64;
            let y0 = gy.floor() as i64;
            let (tx, ty) = (gx - x0 as f64, gy - y0 as f64);
            let px = |i: i64, j: i64, c: usize| {
                let i = i.clamp(0, sw - 1) as usize;
                let j = j.clamp(0, sh - 1) as usize;
                src.as_raw()[(j * src.width() + i) * 3 + c] as f64
            };
            for c in 0..3 {
                let v = (1.0 - ty) * ((1.0 - tx) * px(x0, y0, c) + tx * px(x0 + 1, y0, c))
                    + ty * ((1.0 - tx) * px(x0, y0 + 1, c) + tx * px(x0 + 1, y0 + 1, c));
                // round half away from zero, saturate
                out.push(v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    out
}

pub fn random_case(rng: &mut ChaCha8Rng) -> (RasterImage, Homography, (usize, usize)) {
    let (w, h) = (rng.gen_range(2..=64), rng.gen_range(2..=64));
    let data = (0..w * h * 3).map(|_| rng.gen::<u8>()).collect();
    let src = RasterImage::from_raw(w, h, data).unwrap();
    let dims = (rng.gen_range(1..=64), rng.gen_range(1..=64));
    let (ow, oh) = (dims.0 as f64, dims.1 as f64);
    let mut jitter = |v: f64, s: f64| v + rng.gen_range(-0.25..0.25) * s;
    let dst = [
        (jitter(0.0, ow), jitter(0.0, oh)),
        (jitter(ow, ow), jitter(0.0, oh)),
        (jitter(ow, ow), jitter(oh, oh)),
        (jitter(0.0, ow), jitter(oh, oh)),
    ];
    let corners = [(0.0, 0.0), (w as f64, 0.0), (w as f64, h as f64), (0.0, h as f64)];
    let hom = Homography::from_correspondences(&corners, &dst).unwrap();
    (src, hom, dims)
}
