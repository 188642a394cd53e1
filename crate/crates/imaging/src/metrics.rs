//! Peak signal-to-noise ratio.

use crate::{Image, ImagingError, Result};

/// Declared PSNR for (near-)identical images; returned whenever the MSE
/// drops below 1e-10.
pub const PSNR_CAP_DB: f64 = 100.0;

/// `10 * log10(peak^2 / MSE)` over all subpixels, capped at
/// [`PSNR_CAP_DB`].
pub fn psnr(pred: &Image, target: &Image, peak: f64) -> Result<f64> {
    pred.same_size(target)?;
    let mut acc = 0.0f64;
    for (a, b) in pred.data().iter().zip(target.data()) {
        let d = (*a - *b) as f64;
        acc += d * d;
    }
    let mse = acc / pred.data().len() as f64;
    if mse < 1e-10 {
        return Ok(PSNR_CAP_DB);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// Mean of per-frame PSNRs across two equally long frame lists.
pub fn sequence_psnr(pred: &[Image], target: &[Image], peak: f64) -> Result<f64> {
    if pred.len() != target.len() || pred.is_empty() {
        return Err(ImagingError::BadSequence(format!(
            "psnr over {} predictions vs {} targets",
            pred.len(),
            target.len()
        )));
    }
    let mut acc = 0.0;
    for (p, t) in pred.iter().zip(target) {
        acc += psnr(p, t, peak)?;
    }
    Ok(acc / pred.len() as f64)
}
