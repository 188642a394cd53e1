//! Area downsampling and bilinear resizing.

use crate::Image;

/// Averages each 4x4 block. Dimensions not divisible by four are cropped
/// (top-left anchored) to the nearest multiple first.
pub fn area_downsample_4x(img: &Image) -> Image {
    let h = img.height() / 4 * 4;
    let w = img.width() / 4 * 4;
    let src = if h != img.height() || w != img.width() {
        img.crop(0, 0, h, w)
    } else {
        img.clone()
    };
    let mut out = Image::zeros(h / 4, w / 4);
    for oy in 0..h / 4 {
        for ox in 0..w / 4 {
            let mut acc = [0.0f32; 3];
            for dy in 0..4 {
                for dx in 0..4 {
                    let p = src.pixel(oy * 4 + dy, ox * 4 + dx);
                    for c in 0..3 {
                        acc[c] += p[c];
                    }
                }
            }
            for c in 0..3 {
                out.set(oy, ox, c, acc[c] / 16.0);
            }
        }
    }
    out
}

/// Bilinear resize with pixel-center sampling (align-corners=false);
/// samples outside the source are clamped to the border.
pub fn bilinear_resize(img: &Image, out_h: usize, out_w: usize) -> Image {
    assert!(out_h > 0 && out_w > 0);
    let (h, w) = (img.height(), img.width());
    let sy = h as f64 / out_h as f64;
    let sx = w as f64 / out_w as f64;
    let mut out = Image::zeros(out_h, out_w);
    for oy in 0..out_h {
        let fy = ((oy as f64 + 0.5) * sy - 0.5).clamp(0.0, (h - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let wy = (fy - y0 as f64) as f32;
        for ox in 0..out_w {
            let fx = ((ox as f64 + 0.5) * sx - 0.5).clamp(0.0, (w - 1) as f64);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let wx = (fx - x0 as f64) as f32;
            let (p00, p01) = (img.pixel(y0, x0), img.pixel(y0, x1));
            let (p10, p11) = (img.pixel(y1, x0), img.pixel(y1, x1));
            for c in 0..3 {
                let top = p00[c] + wx * (p01[c] - p00[c]);
                let bot = p10[c] + wx * (p11[c] - p10[c]);
                out.set(oy, ox, c, top + wy * (bot - top));
            }
        }
    }
    out
}
