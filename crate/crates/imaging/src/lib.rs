//! Image handling for the burst pipeline: sRGB color conversion,
//! resampling, crop/flip augmentation, the PSNR metric, and PNG sequence
//! I/O. Pixel data is float sRGB in `[0, 1]`, row-major HWC with three
//! channels.

pub mod augment;
pub mod color;
pub mod io;
pub mod metrics;
pub mod resample;

pub use augment::random_crop_flip;
pub use color::{linear_to_srgb, srgb_to_linear};
pub use metrics::{psnr, sequence_psnr, PSNR_CAP_DB};
pub use resample::{area_downsample_4x, bilinear_resize};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("image dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("frame is {0}x{1}, smaller than the requested {2}x{2} crop")]
    UndersizedCrop(usize, usize, usize),
    #[error("sequence is invalid: {0}")]
    BadSequence(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("could not decode {path}: {source}")]
    Decode {
        path: String,
        source: image::ImageError,
    },
}

pub type Result<T> = std::result::Result<T, ImagingError>;

/// An sRGB image: three-channel float data in `[0, 1]`, row-major HWC.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl Image {
    pub const CHANNELS: usize = 3;

    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != height * width * Self::CHANNELS {
            return Err(ImagingError::BadSequence(format!(
                "pixel buffer has {} values, expected {}",
                data.len(),
                height * width * Self::CHANNELS
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            data: vec![0.0; height * width * Self::CHANNELS],
        }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> [f32; 3]) -> Self {
        let mut data = Vec::with_capacity(height * width * Self::CHANNELS);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(y, x));
            }
        }
        Self {
            height,
            width,
            data,
        }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * Self::CHANNELS + c]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, c: usize, v: f32) {
        self.data[(y * self.width + x) * Self::CHANNELS + c] = v;
    }

    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> [f32; 3] {
        let i = (y * self.width + x) * Self::CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn same_size(&self, other: &Image) -> Result<()> {
        if self.height != other.height || self.width != other.width {
            return Err(ImagingError::DimensionMismatch(
                self.height,
                self.width,
                other.height,
                other.width,
            ));
        }
        Ok(())
    }

    /// Clamps every value into `[0, 1]` in place.
    pub fn clamp01(&mut self) {
        for v in &mut self.data {
            *v = v.clamp(0.0, 1.0);
        }
    }

    /// Rec. 709 luma of the gamma-encoded image, one value per pixel.
    pub fn luma709(&self) -> Vec<f32> {
        self.data
            .chunks_exact(3)
            .map(|p| 0.2126 * p[0] + 0.7152 * p[1] + 0.0722 * p[2])
            .collect()
    }

    /// Crops a `size_h` x `size_w` window with top-left corner `(oy, ox)`.
    pub fn crop(&self, oy: usize, ox: usize, size_h: usize, size_w: usize) -> Image {
        assert!(oy + size_h <= self.height && ox + size_w <= self.width);
        let mut data = Vec::with_capacity(size_h * size_w * Self::CHANNELS);
        for y in 0..size_h {
            let start = ((oy + y) * self.width + ox) * Self::CHANNELS;
            data.extend_from_slice(&self.data[start..start + size_w * Self::CHANNELS]);
        }
        Image {
            height: size_h,
            width: size_w,
            data,
        }
    }

    /// Mirrors the image horizontally.
    pub fn flip_horizontal(&self) -> Image {
        let mut out = Image::zeros(self.height, self.width);
        for y in 0..self.height {
            for x in 0..self.width {
                let p = self.pixel(y, x);
                let i = (y * self.width + (self.width - 1 - x)) * Self::CHANNELS;
                out.data[i..i + 3].copy_from_slice(&p);
            }
        }
        out
    }
}

/// An ordered burst of equally sized frames, optionally paired with clean
/// ground-truth frames of the same geometry.
#[derive(Clone, Debug)]
pub struct ImageSequence {
    pub frames: Vec<Image>,
    pub clean: Option<Vec<Image>>,
}

impl ImageSequence {
    pub fn new(frames: Vec<Image>, clean: Option<Vec<Image>>) -> Result<Self> {
        if frames.is_empty() {
            return Err(ImagingError::BadSequence("no frames".into()));
        }
        for f in &frames[1..] {
            frames[0].same_size(f)?;
        }
        if let Some(clean) = &clean {
            if clean.len() != frames.len() {
                return Err(ImagingError::BadSequence(format!(
                    "{} clean frames for {} noisy frames",
                    clean.len(),
                    frames.len()
                )));
            }
            for c in clean {
                frames[0].same_size(c)?;
            }
        }
        Ok(Self { frames, clean })
    }

    /// A sequence whose noisy frames double as their own clean targets.
    pub fn from_clean(frames: Vec<Image>) -> Result<Self> {
        let clean = frames.clone();
        Self::new(frames, Some(clean))
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn height(&self) -> usize {
        self.frames[0].height()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width()
    }
}
