//! Synthetic degradations for burst training and evaluation.
//!
//! Two noise families: additive white Gaussian noise applied in the sRGB
//! domain on the 0-255 scale, and signal-dependent Poisson noise applied
//! in linear light (the `a`-parameterized clipped Poissonian model).
//! Either can be followed by a Bayer mosaic / bilinear-demosaic round trip.

pub mod bayer;
pub mod sample;

pub use bayer::{bayer_mosaic, bilinear_demosaic};
pub use sample::{add_gaussian, add_poisson};

use burstdn_imaging::{Image, ImageSequence};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("sigma must be non-negative, got {0}")]
    NegativeSigma(f64),
    #[error("poisson intensity must be positive, got {0}")]
    NonPositiveIntensity(f64),
    #[error("poisson intensity {0} outside the canonical [0.001, 0.01] range")]
    IntensityOutOfRange(f64),
    #[error("degrade_sequence needs clean targets on the input sequence")]
    MissingCleanTargets,
    #[error("cannot parse noise spec: {0}")]
    Parse(String),
    #[error(transparent)]
    Imaging(#[from] burstdn_imaging::ImagingError),
}

pub type Result<T> = std::result::Result<T, NoiseError>;

/// Which noise family to synthesize, with its single active parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseKind {
    /// AWGN with sigma on the 0-255 scale, applied in sRGB.
    Gaussian { sigma: f64 },
    /// `z = a * Poisson(y / a)` in linear light.
    Poisson { intensity_a: f64 },
}

/// A full degradation description: noise family, optional Bayer round
/// trip, and the RNG seed that makes it reproducible.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub bayer: bool,
    pub seed: u64,
}

/// Where in the pipeline the degradation is applied. The noise math is
/// identical either way; the tag orders the surrounding pipeline and is
/// recorded in run metadata. The default is before stabilization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DegradeStage {
    #[default]
    BeforeStabilization,
    AfterStabilization,
}

impl NoiseSpec {
    pub fn gaussian(sigma: f64, bayer: bool, seed: u64) -> Result<Self> {
        if sigma < 0.0 {
            return Err(NoiseError::NegativeSigma(sigma));
        }
        Ok(Self {
            kind: NoiseKind::Gaussian { sigma },
            bayer,
            seed,
        })
    }

    /// Poisson spec restricted to the canonical intensity range.
    pub fn poisson(intensity_a: f64, bayer: bool, seed: u64) -> Result<Self> {
        if !(0.001..=0.01).contains(&intensity_a) {
            return Err(NoiseError::IntensityOutOfRange(intensity_a));
        }
        Self::poisson_with_any_intensity(intensity_a, bayer, seed)
    }

    /// Poisson spec with an explicitly overridden intensity (any a > 0).
    pub fn poisson_with_any_intensity(intensity_a: f64, bayer: bool, seed: u64) -> Result<Self> {
        if intensity_a <= 0.0 {
            return Err(NoiseError::NonPositiveIntensity(intensity_a));
        }
        Ok(Self {
            kind: NoiseKind::Poisson { intensity_a },
            bayer,
            seed,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// `key=value` text form, e.g. `kind=gaussian sigma=50 bayer=false seed=1234`.
    pub fn serialize(&self) -> String {
        match self.kind {
            NoiseKind::Gaussian { sigma } => {
                format!("kind=gaussian sigma={sigma} bayer={} seed={}", self.bayer, self.seed)
            }
            NoiseKind::Poisson { intensity_a } => {
                format!("kind=poisson a={intensity_a} bayer={} seed={}", self.bayer, self.seed)
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut kind: Option<&str> = None;
        let mut sigma: Option<f64> = None;
        let mut a: Option<f64> = None;
        let mut bayer = false;
        let mut seed = 0u64;
        for tok in text.split_whitespace() {
            let (key, value) = tok
                .split_once('=')
                .ok_or_else(|| NoiseError::Parse(format!("token `{tok}` is not key=value")))?;
            let bad = || NoiseError::Parse(format!("bad value in `{tok}`"));
            match key {
                "kind" => kind = Some(value),
                "sigma" => sigma = Some(value.parse().map_err(|_| bad())?),
                "a" => a = Some(value.parse().map_err(|_| bad())?),
                "bayer" => bayer = value.parse().map_err(|_| bad())?,
                "seed" => seed = value.parse().map_err(|_| bad())?,
                _ => return Err(NoiseError::Parse(format!("unknown key `{key}`"))),
            }
        }
        match (kind, sigma, a) {
            (Some("gaussian"), Some(s), None) => Self::gaussian(s, bayer, seed),
            (Some("poisson"), None, Some(a)) => Self::poisson_with_any_intensity(a, bayer, seed),
            _ => Err(NoiseError::Parse(
                "expected kind=gaussian with sigma= or kind=poisson with a=".into(),
            )),
        }
    }

    /// The RNG stream for one frame: derived from (seed, frame index) so a
    /// sequence degrades identically regardless of processing order.
    pub fn frame_rng(&self, frame_index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(frame_index as u64);
        rng
    }

    /// Degrades a single clean frame according to the spec.
    pub fn degrade_frame(&self, clean: &Image, frame_index: usize) -> Result<Image> {
        let mut rng = self.frame_rng(frame_index);
        let noisy = match self.kind {
            NoiseKind::Gaussian { sigma } => add_gaussian(clean, sigma, &mut rng)?,
            NoiseKind::Poisson { intensity_a } => add_poisson(clean, intensity_a, &mut rng)?,
        };
        Ok(if self.bayer {
            bilinear_demosaic(&bayer_mosaic(&noisy))
        } else {
            noisy
        })
    }
}

/// Synthesizes noisy frames from the sequence's clean targets, one
/// independent RNG substream per frame. The clean targets are carried
/// through unchanged.
pub fn degrade_sequence(
    seq: &ImageSequence,
    spec: &NoiseSpec,
    _when: DegradeStage,
) -> Result<ImageSequence> {
    let clean = seq
        .clean
        .as_ref()
        .ok_or(NoiseError::MissingCleanTargets)?;
    let frames = clean
        .iter()
        .enumerate()
        .map(|(i, img)| spec.degrade_frame(img, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(ImageSequence::new(frames, Some(clean.clone()))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_round_trip() {
        let g = NoiseSpec::gaussian(50.0, false, 1234).unwrap();
        assert_eq!(g.serialize(), "kind=gaussian sigma=50 bayer=false seed=1234");
        assert_eq!(NoiseSpec::parse(&g.serialize()).unwrap(), g);

        let p = NoiseSpec::poisson(0.01, true, 7).unwrap();
        assert_eq!(NoiseSpec::parse(&p.serialize()).unwrap(), p);
    }

    #[test]
    fn poisson_range_enforced_unless_overridden() {
        assert!(matches!(
            NoiseSpec::poisson(0.5, false, 0),
            Err(NoiseError::IntensityOutOfRange(_))
        ));
        assert!(NoiseSpec::poisson_with_any_intensity(0.5, false, 0).is_ok());
        assert!(NoiseSpec::poisson_with_any_intensity(0.0, false, 0).is_err());
    }

    #[test]
    fn frames_get_distinct_streams() {
        let base = Image::from_fn(16, 16, |_, _| [0.5, 0.5, 0.5]);
        let seq = ImageSequence::from_clean(vec![base.clone(), base]).unwrap();
        let spec = NoiseSpec::gaussian(25.0, false, 1).unwrap();
        let out = degrade_sequence(&seq, &spec, DegradeStage::default()).unwrap();
        assert_ne!(out.frames[0].data(), out.frames[1].data());
    }

    #[test]
    fn zero_sigma_is_identity() {
        let base = Image::from_fn(8, 8, |y, x| [y as f32 / 8.0, x as f32 / 8.0, 0.2]);
        let seq = ImageSequence::from_clean(vec![base.clone()]).unwrap();
        let spec = NoiseSpec::gaussian(0.0, false, 3).unwrap();
        let out = degrade_sequence(&seq, &spec, DegradeStage::default()).unwrap();
        assert_eq!(out.frames[0].data(), base.data());
    }

    #[test]
    fn missing_clean_targets_rejected() {
        let base = Image::zeros(8, 8);
        let seq = ImageSequence::new(vec![base], None).unwrap();
        let spec = NoiseSpec::gaussian(25.0, false, 3).unwrap();
        assert!(matches!(
            degrade_sequence(&seq, &spec, DegradeStage::default()),
            Err(NoiseError::MissingCleanTargets)
        ));
    }

    #[test]
    fn per_frame_psnr_consistent_on_uniform_burst() {
        let base = Image::from_fn(96, 96, |_, _| [0.5, 0.5, 0.5]);
        let seq = ImageSequence::from_clean(vec![base.clone(); 4]).unwrap();
        let spec = NoiseSpec::gaussian(25.0, false, 11).unwrap();
        let out = degrade_sequence(&seq, &spec, DegradeStage::default()).unwrap();
        let clean = out.clean.as_ref().unwrap();
        let psnrs: Vec<f64> = out
            .frames
            .iter()
            .zip(clean)
            .map(|(f, c)| burstdn_imaging::psnr(f, c, 1.0).unwrap())
            .collect();
        let lo = psnrs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = psnrs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(hi - lo < 0.5, "per-frame psnr spread {}", hi - lo);
    }
}
