//! Image file I/O and resampling for dataset sources.

use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageBuffer, ImageReader, Rgb};

use crate::error::{Error, Result};
use crate::image::{ColorState, PlanarImage};

/// Reads an 8- or 16-bit RGB(A) PNG/PNM as normalized sRGB. Alpha is dropped.
pub fn ingest(path: &Path) -> Result<PlanarImage> {
    let decoded = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|source| Error::Decode {
            path: path.to_path_buf(),
            source,
        })?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let hwc: Vec<f32> = match decoded {
        DynamicImage::ImageRgb8(buf) => buf.into_raw().iter().map(|&v| v as f32 / 255.0).collect(),
        DynamicImage::ImageRgba8(buf) => buf
            .into_raw()
            .chunks_exact(4)
            .flat_map(|p| p[..3].iter().map(|&v| v as f32 / 255.0))
            .collect(),
        DynamicImage::ImageRgb16(buf) => {
            buf.into_raw().iter().map(|&v| v as f32 / 65535.0).collect()
        }
        DynamicImage::ImageRgba16(buf) => buf
            .into_raw()
            .chunks_exact(4)
            .flat_map(|p| p[..3].iter().map(|&v| v as f32 / 65535.0))
            .collect(),
        DynamicImage::ImageLuma8(_)
        | DynamicImage::ImageLuma16(_)
        | DynamicImage::ImageLumaA8(_)
        | DynamicImage::ImageLumaA16(_) => {
            return Err(Error::Channels {
                path: path.to_path_buf(),
                channels: decoded.color().channel_count(),
            })
        }
        other => {
            return Err(Error::BitDepth {
                path: path.to_path_buf(),
                detail: format!("{:?}", other.color()),
            })
        }
    };
    PlanarImage::from_interleaved(h, w, &hwc, ColorState::SrgbNonlinear)
}

/// 2x2 box average. An odd trailing row or column is dropped first.
pub fn downscale2(img: &PlanarImage) -> PlanarImage {
    let (h, w) = (img.height() / 2, img.width() / 2);
    let src_w = img.width();
    let mut data = Vec::with_capacity(3 * h * w);
    for c in 0..3 {
        let p = img.plane(c);
        for y in 0..h {
            let r0 = 2 * y * src_w;
            let r1 = r0 + src_w;
            for x in 0..w {
                let s = p[r0 + 2 * x] + p[r0 + 2 * x + 1] + p[r1 + 2 * x] + p[r1 + 2 * x + 1];
                data.push(s * 0.25);
            }
        }
    }
    PlanarImage::new(h, w, data, img.state()).expect("sized for 3 planes")
}

/// Repeated [`downscale2`] until the image is `factor` times smaller.
pub fn downscale(img: &PlanarImage, factor: usize) -> PlanarImage {
    let mut out = img.clone();
    let mut f = factor;
    while f > 1 {
        out = downscale2(&out);
        f /= 2;
    }
    out
}

/// Rounds to the nearest code of the given bit depth.
pub fn quantize(v: f32, max: f32) -> f32 {
    (v.clamp(0.0, 1.0) * max).round()
}

/// Writes an sRGB image as a PNG of the given bit depth.
pub fn write_png(img: &PlanarImage, path: &Path, bit_depth: u8) -> Result<()> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let hwc = img.to_interleaved();
    let encoded = match bit_depth {
        8 => {
            let raw: Vec<u8> = hwc.iter().map(|&v| quantize(v, 255.0) as u8).collect();
            let buf: ImageBuffer<Rgb<u8>, _> =
                ImageBuffer::from_raw(w, h, raw).expect("buffer sized for image");
            DynamicImage::ImageRgb8(buf)
        }
        16 => {
            let raw: Vec<u16> = hwc.iter().map(|&v| quantize(v, 65535.0) as u16).collect();
            let buf: ImageBuffer<Rgb<u16>, _> =
                ImageBuffer::from_raw(w, h, raw).expect("buffer sized for image");
            DynamicImage::ImageRgb16(buf)
        }
        other => {
            return Err(Error::BitDepth {
                path: path.to_path_buf(),
                detail: format!("cannot write {other}-bit output"),
            })
        }
    };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    encoded
        .save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Decode {
            path: path.to_path_buf(),
            source,
        })
}

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "ppm", "pnm", "pgm"];

pub(crate) fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Image files directly inside `dir`, sorted by name.
pub fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && is_image(&path) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}
