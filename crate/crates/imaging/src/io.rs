//! PNG interchange and the on-disk sequence layout:
//! `seq_name/frame_000.png ... frame_00F.png` with an optional `clean/`
//! subdirectory mirroring the frame names.

use crate::{Image, ImageSequence, ImagingError, Result};
use std::fs;
use std::path::Path;

fn io_err(path: &Path, source: std::io::Error) -> ImagingError {
    ImagingError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Loads an 8-bit PNG as float sRGB. Grayscale is replicated to three
/// channels; an alpha channel, if any, is dropped.
pub fn load_png(path: &Path) -> Result<Image> {
    let decoded = image::open(path).map_err(|source| ImagingError::Decode {
        path: path.display().to_string(),
        source,
    })?;
    let rgb = decoded.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let data = rgb.as_raw().iter().map(|&v| v as f32 / 255.0).collect();
    Image::new(h, w, data)
}

/// Writes an image as 8-bit RGB PNG, rounding to the nearest code value.
pub fn save_png(img: &Image, path: &Path) -> Result<()> {
    let bytes: Vec<u8> = img
        .data()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    let buf: image::RgbImage =
        image::ImageBuffer::from_raw(img.width() as u32, img.height() as u32, bytes)
            .expect("sized buffer");
    buf.save(path).map_err(|source| ImagingError::Decode {
        path: path.display().to_string(),
        source,
    })
}

pub fn frame_name(index: usize) -> String {
    format!("frame_{index:03}.png")
}

/// Reads a sequence directory: all `frame_*.png` in name order plus the
/// optional `clean/` mirror.
pub fn load_sequence(dir: &Path) -> Result<ImageSequence> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().to_string_lossy().into_owned();
            (name.starts_with("frame_") && name.ends_with(".png")).then_some(name)
        })
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(ImagingError::BadSequence(format!(
            "{} contains no frame_*.png",
            dir.display()
        )));
    }
    let frames = names
        .iter()
        .map(|n| load_png(&dir.join(n)))
        .collect::<Result<Vec<_>>>()?;

    let clean_dir = dir.join("clean");
    let clean = if clean_dir.is_dir() {
        Some(
            names
                .iter()
                .map(|n| load_png(&clean_dir.join(n)))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    ImageSequence::new(frames, clean)
}

/// Writes a sequence directory in the layout `load_sequence` reads.
pub fn save_sequence(seq: &ImageSequence, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for (i, f) in seq.frames.iter().enumerate() {
        save_png(f, &dir.join(frame_name(i)))?;
    }
    if let Some(clean) = &seq.clean {
        let cdir = dir.join("clean");
        fs::create_dir_all(&cdir).map_err(|e| io_err(&cdir, e))?;
        for (i, f) in clean.iter().enumerate() {
            save_png(f, &cdir.join(frame_name(i)))?;
        }
    }
    Ok(())
}
