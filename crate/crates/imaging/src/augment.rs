//! Sequence-consistent crop and flip augmentation.

use crate::{Image, ImageSequence, ImagingError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Samples one crop origin and one horizontal-flip decision and applies
/// them identically to every frame (and clean target) of the sequence, so
/// pixel alignment between frames and targets is preserved.
pub fn random_crop_flip(seq: &ImageSequence, size: usize, rng_seed: u64) -> Result<ImageSequence> {
    let (h, w) = (seq.height(), seq.width());
    if h < size || w < size {
        return Err(ImagingError::UndersizedCrop(h, w, size));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let oy = rng.gen_range(0..=h - size);
    let ox = rng.gen_range(0..=w - size);
    let flip = rng.gen_bool(0.5);

    let apply = |img: &Image| {
        let c = img.crop(oy, ox, size, size);
        if flip {
            c.flip_horizontal()
        } else {
            c
        }
    };
    let frames: Vec<Image> = seq.frames.iter().map(apply).collect();
    let clean = seq
        .clean
        .as_ref()
        .map(|cl| cl.iter().map(apply).collect::<Vec<_>>());
    ImageSequence::new(frames, clean)
}

/// The crop origin and flip that `random_crop_flip` would sample for this
/// seed; exposed for samplers that need the decision without the pixels.
pub fn crop_decision(h: usize, w: usize, size: usize, rng_seed: u64) -> (usize, usize, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let oy = rng.gen_range(0..=h - size);
    let ox = rng.gen_range(0..=w - size);
    (oy, ox, rng.gen_bool(0.5))
}
