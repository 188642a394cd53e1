//! Gaussian and Poisson noise synthesis.

use crate::{NoiseError, Result};
use burstdn_imaging::color::{linear_value_to_srgb, srgb_value_to_linear};
use burstdn_imaging::Image;
use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

/// Additive white Gaussian noise in the sRGB domain, sigma on the 0-255
/// scale, without the final clip. Exposed so noise statistics can be
/// measured pre-clip; use [`add_gaussian`] in pipelines.
pub fn add_gaussian_unclipped(img: &Image, sigma: f64, rng: &mut impl Rng) -> Result<Image> {
    if sigma < 0.0 {
        return Err(NoiseError::NegativeSigma(sigma));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let normal = Normal::new(0.0, sigma / 255.0).expect("validated sigma");
    let data = img
        .data()
        .iter()
        .map(|&v| v + normal.sample(rng) as f32)
        .collect();
    Ok(Image::new(img.height(), img.width(), data).expect("same size"))
}

/// `out = clip(img + n / 255)` with `n ~ N(0, sigma^2)` i.i.d. per subpixel.
pub fn add_gaussian(img: &Image, sigma: f64, rng: &mut impl Rng) -> Result<Image> {
    let mut out = add_gaussian_unclipped(img, sigma, rng)?;
    out.clamp01();
    Ok(out)
}

/// One draw of the linear-domain Poisson model `z = a * Poisson(y / a)`.
/// `Poisson(0)` is identically zero, so black stays exactly black.
#[inline]
pub fn poisson_linear_sample(y: f64, a: f64, rng: &mut impl Rng) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    let pois = Poisson::new(y / a).expect("positive lambda");
    a * pois.sample(rng)
}

/// Signal-dependent Poisson noise: converts to linear light, samples
/// `a * Poisson(y / a)` per subpixel (mean-preserving before clipping),
/// converts back to sRGB and clips.
pub fn add_poisson(img: &Image, intensity_a: f64, rng: &mut impl Rng) -> Result<Image> {
    if intensity_a <= 0.0 {
        return Err(NoiseError::NonPositiveIntensity(intensity_a));
    }
    let data = img
        .data()
        .iter()
        .map(|&v| {
            let y = srgb_value_to_linear(v as f64);
            let z = poisson_linear_sample(y, intensity_a, rng);
            linear_value_to_srgb(z).clamp(0.0, 1.0) as f32
        })
        .collect();
    Ok(Image::new(img.height(), img.width(), data).expect("same size"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gaussian_rejects_negative_sigma() {
        let img = Image::zeros(4, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(add_gaussian(&img, -1.0, &mut rng).is_err());
    }

    #[test]
    fn gaussian_std_matches_target_pre_clip() {
        // mid-gray so the statistic is untouched by clipping anyway
        let img = Image::from_fn(640, 640, |_, _| [0.5, 0.5, 0.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let sigma = 25.0;
        let noisy = add_gaussian_unclipped(&img, sigma, &mut rng).unwrap();
        let n = noisy.data().len() as f64; // 1.2288e6 samples
        let mean: f64 = noisy.data().iter().map(|&v| v as f64).sum::<f64>() / n;
        let var: f64 = noisy
            .data()
            .iter()
            .map(|&v| (v as f64 - mean) * (v as f64 - mean))
            .sum::<f64>()
            / n;
        let target = sigma / 255.0;
        assert!((mean - 0.5).abs() < 1e-3, "mean shift {mean}");
        assert!(
            (var.sqrt() - target).abs() / target < 0.01,
            "std {} vs {target}",
            var.sqrt()
        );
    }

    #[test]
    fn gaussian_sigma50_psnr_near_analytic() {
        let img = Image::from_fn(512, 512, |_, _| [0.5, 0.5, 0.5]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let noisy = add_gaussian(&img, 50.0, &mut rng).unwrap();
        let p = burstdn_imaging::psnr(&noisy, &img, 1.0).unwrap();
        // 20*log10(255/50) = 14.15 dB; mid-gray clipping is negligible
        assert!((p - 14.2).abs() < 0.2, "psnr {p}");
    }

    #[test]
    fn poisson_vanishing_intensity_is_near_identity() {
        let img = Image::from_fn(64, 64, |y, x| {
            [y as f32 / 64.0, x as f32 / 64.0, 0.5]
        });
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let out = add_poisson(&img, 1e-6, &mut rng).unwrap();
        let close = img
            .data()
            .iter()
            .zip(out.data())
            .filter(|(a, b)| (**a - **b).abs() < 1.0 / 255.0)
            .count();
        let frac = close as f64 / img.data().len() as f64;
        assert!(frac > 0.999, "only {frac} of subpixels within 1/255");
    }

    #[test]
    fn poisson_black_stays_black() {
        let img = Image::zeros(16, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = add_poisson(&img, 0.01, &mut rng).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn poisson_linear_variance_and_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for &(y, a) in &[(0.1, 0.01), (0.5, 0.01), (0.9, 0.001)] {
            let n = 1_000_000usize;
            let mut acc = 0.0f64;
            let mut acc2 = 0.0f64;
            for _ in 0..n {
                let z = poisson_linear_sample(y, a, &mut rng);
                acc += z;
                acc2 += z * z;
            }
            let mean = acc / n as f64;
            let var = acc2 / n as f64 - mean * mean;
            assert!((mean - y).abs() / y < 0.005, "mean {mean} vs {y}");
            let target = a * y;
            assert!(
                (var - target).abs() / target < 0.02,
                "var {var} vs {target} (y={y}, a={a})"
            );
        }
    }
}
