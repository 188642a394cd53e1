//! sRGB transfer function and its inverse.

use crate::Image;

/// sRGB-encoded value to linear light. Input is clamped to `[0, 1]`.
#[inline]
pub fn srgb_value_to_linear(v: f64) -> f64 {
    let v = v.clamp(0.0, 1.0);
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

/// Linear-light value to sRGB encoding. Input is clamped to `[0, 1]`.
#[inline]
pub fn linear_value_to_srgb(v: f64) -> f64 {
    let v = v.clamp(0.0, 1.0);
    if v <= 0.0031308 {
        v * 12.92
    } else if v >= 1.0 {
        // keep 1.0 an exact fixed point (the gamma branch lands at 1-eps)
        1.0
    } else {
        1.055 * v.powf(1.0 / 2.4) - 0.055
    }
}

pub fn srgb_to_linear(img: &Image) -> Image {
    let data = img
        .data()
        .iter()
        .map(|&v| srgb_value_to_linear(v as f64) as f32)
        .collect();
    Image::new(img.height(), img.width(), data).expect("same size")
}

pub fn linear_to_srgb(img: &Image) -> Image {
    let data = img
        .data()
        .iter()
        .map(|&v| linear_value_to_srgb(v as f64) as f32)
        .collect();
    Image::new(img.height(), img.width(), data).expect("same size")
}
