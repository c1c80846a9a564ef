//! Reading and writing rasters as binary PPM (P6) or PNG.
//!
//! The format is chosen by file extension on write and by magic bytes on read.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use anamorph_core::RasterImage;

#[derive(Debug, thiserror::Error)]
pub enum ImageIoError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: not a valid image: {reason}")]
    Format { path: String, reason: String },
}

impl ImageIoError {
    fn format(path: &Path, reason: impl Into<String>) -> Self {
        Self::Format { path: path.display().to_string(), reason: reason.into() }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        Self::Io { path: path.display().to_string(), source }
    }
}

/// Encodes as P6 with maxval 255.
pub fn encode_ppm(img: &RasterImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.as_raw());
    out
}

/// Decodes a P6 file with maxval 255. Header comments are accepted.
pub fn decode_ppm(bytes: &[u8]) -> Result<RasterImage, String> {
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < bytes.len() && bytes[pos] == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| "non-ASCII header")?);
    }
    if fields[0] != "P6" {
        return Err(format!("unsupported magic {:?}", fields[0]));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| format!("bad header number {s:?}"));
    let (w, h, maxval) = (num(fields[1])?, num(fields[2])?, num(fields[3])?);
    if maxval != 255 {
        return Err(format!("only maxval 255 is supported, got {maxval}"));
    }
    // exactly one whitespace byte separates the header from the pixels
    pos += 1;
    let len = w.checked_mul(h).and_then(|n| n.checked_mul(3)).ok_or("image too large")?;
    let data = bytes.get(pos..pos + len).ok_or("truncated pixel data")?;
    RasterImage::from_raw(w, h, data.to_vec()).map_err(|e| e.to_string())
}

fn is_png(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

pub fn read_image(path: &Path) -> Result<RasterImage, ImageIoError> {
    let mut bytes = Vec::new();
    File::open(path).and_then(|f| BufReader::new(f).read_to_end(&mut bytes)).map_err(|e| ImageIoError::io(path, e))?;
    if bytes.starts_with(b"\x89PNG") {
        decode_png(&bytes).map_err(|r| ImageIoError::format(path, r))
    } else {
        decode_ppm(&bytes).map_err(|r| ImageIoError::format(path, r))
    }
}

/// Writes PNG for a `.png` extension and PPM otherwise.
pub fn write_image(path: &Path, img: &RasterImage) -> Result<(), ImageIoError> {
    let bytes = if is_png(path) { encode_png(img) } else { encode_ppm(img) };
    let mut f = BufWriter::new(File::create(path).map_err(|e| ImageIoError::io(path, e))?);
    f.write_all(&bytes).and_then(|_| f.flush()).map_err(|e| ImageIoError::io(path, e))
}

pub fn encode_png(img: &RasterImage) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width() as u32, img.height() as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().expect("writing to a Vec cannot fail");
        w.write_image_data(img.as_raw()).expect("buffer size matches header");
    }
    out
}

/// Decodes 8-bit PNGs; gray and alpha channels are expanded or dropped to RGB.
pub fn decode_png(bytes: &[u8]) -> Result<RasterImage, String> {
    let mut dec = png::Decoder::new(bytes);
    dec.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = dec.read_info().map_err(|e| e.to_string())?;
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf).map_err(|e| e.to_string())?;
    let (w, h) = (info.width as usize, info.height as usize);
    let px = &buf[..info.buffer_size()];
    let rgb: Vec<u8> = match info.color_type {
        png::ColorType::Rgb => px.to_vec(),
        png::ColorType::Rgba => px.chunks(4).flat_map(|p| [p[0], p[1], p[2]]).collect(),
        png::ColorType::Grayscale => px.iter().flat_map(|&g| [g, g, g]).collect(),
        png::ColorType::GrayscaleAlpha => px.chunks(2).flat_map(|p| [p[0], p[0], p[0]]).collect(),
        png::ColorType::Indexed => return Err("palette not expanded".into()),
    };
    RasterImage::from_raw(w, h, rgb).map_err(|e| e.to_string())
}
