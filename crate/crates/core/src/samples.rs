//! Procedural source images for demos and tests.
//!
//! Each sample sits on the asphalt tone so the decal blends into the road outside the
//! silhouette. Edges are softened with a few box-blur passes.

use alloc::vec;

use crate::image::{quantize, RasterImage, Rgb};

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 5] = ["car", "pedestrian", "cone", "barrier", "truck"];

pub fn by_name(name: &str, width: usize, height: usize) -> Option<RasterImage> {
    let img = match name {
        "car" => car_rear(width, height),
        "pedestrian" => pedestrian(width, height),
        "cone" => traffic_cone(width, height),
        "barrier" => barrier(width, height),
        "truck" => truck_rear(width, height),
        _ => return None,
    };
    Some(img)
}

fn canvas(w: usize, h: usize) -> RasterImage {
    RasterImage::filled(w.max(1), h.max(1), Rgb::ASPHALT).expect("nonzero")
}

/// Fills the axis-aligned box given in fractions of the image size.
fn fill_rect(img: &mut RasterImage, x0: f64, y0: f64, x1: f64, y1: f64, c: Rgb) {
    let (w, h) = (img.width() as f64, img.height() as f64);
    for y in 0..img.height() {
        let fy = (y as f64 + 0.5) / h;
        if fy < y0 || fy >= y1 {
            continue;
        }
        for x in 0..img.width() {
            let fx = (x as f64 + 0.5) / w;
            if fx >= x0 && fx < x1 {
                img.put(x, y, c);
            }
        }
    }
}

fn fill_ellipse(img: &mut RasterImage, cx: f64, cy: f64, rx: f64, ry: f64, c: Rgb) {
    let (w, h) = (img.width() as f64, img.height() as f64);
    for y in 0..img.height() {
        for x in 0..img.width() {
            let dx = ((x as f64 + 0.5) / w - cx) / rx;
            let dy = ((y as f64 + 0.5) / h - cy) / ry;
            if dx * dx + dy * dy <= 1.0 {
                img.put(x, y, c);
            }
        }
    }
}

/// Separable box blur with edge clamping, `passes` times.
pub fn box_blur(img: &RasterImage, radius: usize, passes: usize) -> RasterImage {
    let (w, h) = img.dims();
    let mut buf: vec::Vec<f64> = img.as_raw().iter().map(|&v| f64::from(v)).collect();
    let mut tmp = vec![0.0; buf.len()];
    let r = radius as isize;
    let n = (2 * radius + 1) as f64;
    for _ in 0..passes {
        for y in 0..h {
            for x in 0..w {
                for c in 0..3 {
                    let mut s = 0.0;
                    for d in -r..=r {
                        let sx = (x as isize + d).clamp(0, w as isize - 1) as usize;
                        s += buf[(y * w + sx) * 3 + c];
                    }
                    tmp[(y * w + x) * 3 + c] = s / n;
                }
            }
        }
        for y in 0..h {
            for x in 0..w {
                for c in 0..3 {
                    let mut s = 0.0;
                    for d in -r..=r {
                        let sy = (y as isize + d).clamp(0, h as isize - 1) as usize;
                        s += tmp[(sy * w + x) * 3 + c];
                    }
                    buf[(y * w + x) * 3 + c] = s / n;
                }
            }
        }
    }
    let data = buf.into_iter().map(quantize).collect();
    RasterImage::from_raw(w, h, data).expect("same dimensions")
}

pub fn car_rear(w: usize, h: usize) -> RasterImage {
    let mut img = canvas(w, h);
    fill_rect(&mut img, 0.08, 0.78, 0.26, 1.0, Rgb([15, 15, 18]));
    fill_rect(&mut img, 0.74, 0.78, 0.92, 1.0, Rgb([15, 15, 18]));
    fill_rect(&mut img, 0.04, 0.40, 0.96, 0.88, Rgb([180, 30, 35]));
    fill_rect(&mut img, 0.18, 0.12, 0.82, 0.42, Rgb([165, 28, 32]));
    fill_rect(&mut img, 0.24, 0.17, 0.76, 0.38, Rgb([40, 55, 70]));
    fill_rect(&mut img, 0.06, 0.48, 0.22, 0.60, Rgb([250, 200, 60]));
    fill_rect(&mut img, 0.78, 0.48, 0.94, 0.60, Rgb([250, 200, 60]));
    fill_rect(&mut img, 0.38, 0.62, 0.62, 0.74, Rgb([235, 235, 235]));
    box_blur(&img, (w / 48).max(1), 2)
}

pub fn truck_rear(w: usize, h: usize) -> RasterImage {
    let mut img = canvas(w, h);
    fill_rect(&mut img, 0.05, 0.05, 0.95, 0.85, Rgb([225, 225, 215]));
    fill_rect(&mut img, 0.48, 0.05, 0.52, 0.85, Rgb([120, 120, 115]));
    fill_rect(&mut img, 0.05, 0.85, 0.95, 0.92, Rgb([30, 30, 30]));
    fill_rect(&mut img, 0.10, 0.88, 0.28, 1.0, Rgb([10, 10, 10]));
    fill_rect(&mut img, 0.72, 0.88, 0.90, 1.0, Rgb([10, 10, 10]));
    fill_rect(&mut img, 0.08, 0.70, 0.18, 0.80, Rgb([220, 40, 30]));
    fill_rect(&mut img, 0.82, 0.70, 0.92, 0.80, Rgb([220, 40, 30]));
    box_blur(&img, (w / 48).max(1), 2)
}

pub fn pedestrian(w: usize, h: usize) -> RasterImage {
    let mut img = canvas(w, h);
    fill_ellipse(&mut img, 0.5, 0.12, 0.12, 0.09, Rgb([230, 190, 160]));
    fill_rect(&mut img, 0.33, 0.22, 0.67, 0.60, Rgb([30, 80, 170]));
    fill_rect(&mut img, 0.22, 0.24, 0.33, 0.52, Rgb([30, 80, 170]));
    fill_rect(&mut img, 0.67, 0.24, 0.78, 0.52, Rgb([30, 80, 170]));
    fill_rect(&mut img, 0.36, 0.60, 0.48, 0.98, Rgb([35, 35, 45]));
    fill_rect(&mut img, 0.52, 0.60, 0.64, 0.98, Rgb([35, 35, 45]));
    box_blur(&img, (w / 48).max(1), 2)
}

pub fn traffic_cone(w: usize, h: usize) -> RasterImage {
    let mut img = canvas(w, h);
    let (wf, hf) = (w as f64, h as f64);
    for y in 0..h {
        let fy = (y as f64 + 0.5) / hf;
        let half = 0.06 + 0.36 * fy;
        for x in 0..w {
            let fx = (x as f64 + 0.5) / wf;
            if (fx - 0.5).abs() <= half && fy > 0.05 && fy < 0.9 {
                let stripe = ((fy * 10.0) as usize) % 3 == 1;
                img.put(x, y, if stripe { Rgb([245, 245, 245]) } else { Rgb([250, 110, 20]) });
            }
        }
    }
    fill_rect(&mut img, 0.02, 0.9, 0.98, 1.0, Rgb([250, 110, 20]));
    box_blur(&img, (w / 48).max(1), 2)
}

pub fn barrier(w: usize, h: usize) -> RasterImage {
    let mut img = canvas(w, h);
    let (wf, hf) = (w as f64, h as f64);
    for y in 0..h {
        let fy = (y as f64 + 0.5) / hf;
        if !(0.15..0.55).contains(&fy) {
            continue;
        }
        for x in 0..w {
            let fx = (x as f64 + 0.5) / wf;
            let band = (((fx + fy) * 5.0) as usize) % 2 == 0;
            img.put(x, y, if band { Rgb([240, 30, 30]) } else { Rgb([245, 245, 245]) });
        }
    }
    fill_rect(&mut img, 0.12, 0.55, 0.2, 1.0, Rgb([60, 60, 60]));
    fill_rect(&mut img, 0.8, 0.55, 0.88, 1.0, Rgb([60, 60, 60]));
    box_blur(&img, (w / 48).max(1), 2)
}
