//! RGGB Bayer mosaic and bilinear demosaic.
//!
//! The pattern is anchored at pixel (0, 0):
//!
//! ```text
//! R G R G ...
//! G B G B ...
//! ```
//!
//! Borders use mirror indexing without repeating the edge sample
//! (..., 2, 1, 0, 1, 2, ...), which preserves the Bayer phase.

use burstdn_imaging::Image;

const R: usize = 0;
const G: usize = 1;
const B: usize = 2;

/// The sampled channel at a site of the RGGB pattern.
#[inline]
fn site_channel(y: usize, x: usize) -> usize {
    match (y % 2, x % 2) {
        (0, 0) => R,
        (1, 1) => B,
        _ => G,
    }
}

/// Mirror index without edge repetition; preserves coordinate parity.
#[inline]
fn refl(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    if i < 0 {
        i = -i;
    }
    if i >= n {
        i = 2 * n - 2 - i;
    }
    i as usize
}

/// Keeps one subpixel per site (per the RGGB pattern) and zeroes the other
/// two channels. Odd dimensions are cropped to even first.
pub fn bayer_mosaic(img: &Image) -> Image {
    let h = img.height() / 2 * 2;
    let w = img.width() / 2 * 2;
    let src = if h != img.height() || w != img.width() {
        img.crop(0, 0, h, w)
    } else {
        img.clone()
    };
    let mut out = Image::zeros(h, w);
    for y in 0..h {
        for x in 0..w {
            let c = site_channel(y, x);
            out.set(y, x, c, src.get(y, x, c));
        }
    }
    out
}

/// Fills the missing subpixels of a mosaic by bilinear interpolation of
/// same-color neighbors.
pub fn bilinear_demosaic(mosaic: &Image) -> Image {
    let (h, w) = (mosaic.height(), mosaic.width());
    assert!(h % 2 == 0 && w % 2 == 0, "mosaic must have even dimensions");
    let mut out = Image::zeros(h, w);

    let at = |y: isize, x: isize, c: usize| mosaic.get(refl(y, h), refl(x, w), c);
    let cross = |y: isize, x: isize, c: usize| {
        (at(y - 1, x, c) + at(y + 1, x, c) + at(y, x - 1, c) + at(y, x + 1, c)) / 4.0
    };
    let diag = |y: isize, x: isize, c: usize| {
        (at(y - 1, x - 1, c) + at(y - 1, x + 1, c) + at(y + 1, x - 1, c) + at(y + 1, x + 1, c))
            / 4.0
    };
    let horiz = |y: isize, x: isize, c: usize| (at(y, x - 1, c) + at(y, x + 1, c)) / 2.0;
    let vert = |y: isize, x: isize, c: usize| (at(y - 1, x, c) + at(y + 1, x, c)) / 2.0;

    for y in 0..h {
        for x in 0..w {
            let (yi, xi) = (y as isize, x as isize);
            let (r, g, b) = match (y % 2, x % 2) {
                // R site
                (0, 0) => (at(yi, xi, R), cross(yi, xi, G), diag(yi, xi, B)),
                // G site in an R row
                (0, 1) => (horiz(yi, xi, R), at(yi, xi, G), vert(yi, xi, B)),
                // G site in a B row
                (1, 0) => (vert(yi, xi, R), at(yi, xi, G), horiz(yi, xi, B)),
                // B site
                _ => (diag(yi, xi, R), cross(yi, xi, G), at(yi, xi, B)),
            };
            out.set(y, x, R, r);
            out.set(y, x, G, g);
            out.set(y, x, B, b);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_color_reconstructed_exactly() {
        let img = Image::from_fn(8, 10, |_, _| [0.6, 0.3, 0.8]);
        let out = bilinear_demosaic(&bayer_mosaic(&img));
        for (a, b) in img.data().iter().zip(out.data()) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn mosaic_keeps_one_subpixel_per_site() {
        let img = Image::from_fn(4, 4, |_, _| [0.2, 0.4, 0.6]);
        let m = bayer_mosaic(&img);
        assert_eq!(m.pixel(0, 0), [0.2, 0.0, 0.0]);
        assert_eq!(m.pixel(0, 1), [0.0, 0.4, 0.0]);
        assert_eq!(m.pixel(1, 0), [0.0, 0.4, 0.0]);
        assert_eq!(m.pixel(1, 1), [0.0, 0.0, 0.6]);
    }

    #[test]
    fn odd_dimensions_cropped_to_even() {
        let img = Image::from_fn(5, 7, |_, _| [0.1, 0.2, 0.3]);
        let m = bayer_mosaic(&img);
        assert_eq!((m.height(), m.width()), (4, 6));
    }

    #[test]
    fn gray_ramp_is_exact_in_the_interior() {
        let w = 32;
        let img = Image::from_fn(16, w, |_, x| {
            let v = x as f32 / (w - 1) as f32;
            [v, v, v]
        });
        let out = bilinear_demosaic(&bayer_mosaic(&img));
        for y in 1..15 {
            for x in 1..w - 1 {
                for c in 0..3 {
                    let err = (out.get(y, x, c) - img.get(y, x, c)).abs();
                    assert!(err < 1.0 / 255.0, "y={y} x={x} c={c} err={err}");
                }
            }
        }
    }

    /// Independent reference: mask-based normalized convolution with the
    /// classic bilinear kernels, mirror-indexed like the implementation.
    fn demosaic_reference(mosaic: &Image) -> Image {
        let (h, w) = (mosaic.height(), mosaic.width());
        let kern_g = [[0.0, 1.0, 0.0], [1.0, 4.0, 1.0], [0.0, 1.0, 0.0]];
        let kern_rb = [[1.0, 2.0, 1.0], [2.0, 4.0, 2.0], [1.0, 2.0, 1.0]];
        let mut out = Image::zeros(h, w);
        for y in 0..h as isize {
            for x in 0..w as isize {
                for c in 0..3 {
                    let kern = if c == G { &kern_g } else { &kern_rb };
                    let mut num = 0.0f32;
                    let mut den = 0.0f32;
                    for (dy, row) in kern.iter().enumerate() {
                        for (dx, &k) in row.iter().enumerate() {
                            let sy = refl(y + dy as isize - 1, h);
                            let sx = refl(x + dx as isize - 1, w);
                            if site_channel(sy, sx) == c {
                                num += k * mosaic.get(sy, sx, c);
                                den += k;
                            }
                        }
                    }
                    out.set(y as usize, x as usize, c, num / den);
                }
            }
        }
        out
    }

    #[test]
    fn single_white_pixel_footprint_matches_reference() {
        for (py, px) in [(6, 6), (6, 7), (7, 6), (7, 7)] {
            let img = Image::from_fn(12, 12, |y, x| {
                if y == py && x == px {
                    [1.0, 1.0, 1.0]
                } else {
                    [0.0, 0.0, 0.0]
                }
            });
            let mosaic = bayer_mosaic(&img);
            let ours = bilinear_demosaic(&mosaic);
            let reference = demosaic_reference(&mosaic);
            for (a, b) in ours.data().iter().zip(reference.data()) {
                assert!((a - b).abs() < 1e-6, "site ({py},{px})");
            }
        }
    }
}
