//! Inverse warping and the common-crop computation.

use crate::homography::HomographyTransform;
use crate::{Point, StabilizeError};
use burstdn_imaging::{Image, ImageSequence};
use nalgebra::Vector3;

#[inline]
fn sample_bilinear(img: &Image, x: f64, y: f64) -> [f32; 3] {
    let x = x.clamp(0.0, (img.width() - 1) as f64);
    let y = y.clamp(0.0, (img.height() - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(img.width() - 1);
    let y1 = (y0 + 1).min(img.height() - 1);
    let (fx, fy) = ((x - x0 as f64) as f32, (y - y0 as f64) as f32);
    let (p00, p01) = (img.pixel(y0, x0), img.pixel(y0, x1));
    let (p10, p11) = (img.pixel(y1, x0), img.pixel(y1, x1));
    let mut out = [0.0f32; 3];
    for c in 0..3 {
        let top = p00[c] + fx * (p01[c] - p00[c]);
        let bot = p10[c] + fx * (p11[c] - p10[c]);
        out[c] = top + fy * (bot - top);
    }
    out
}

type Poly = Vec<(f64, f64)>;

/// Clips a convex polygon to the half-plane `n . p >= d`.
fn clip_halfplane(poly: &Poly, n: (f64, f64), d: f64) -> Poly {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let side = |p: (f64, f64)| n.0 * p.0 + n.1 * p.1 - d;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let (sa, sb) = (side(a), side(b));
        if sa >= 0.0 {
            out.push(a);
        }
        if (sa > 0.0 && sb < 0.0) || (sa < 0.0 && sb > 0.0) {
            let t = sa / (sa - sb);
            out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
        }
    }
    out
}

/// Clips `poly` to the inside of a convex quad (any winding).
fn clip_to_quad(poly: Poly, quad: &[(f64, f64); 4]) -> Poly {
    let cx = quad.iter().map(|p| p.0).sum::<f64>() / 4.0;
    let cy = quad.iter().map(|p| p.1).sum::<f64>() / 4.0;
    let mut poly = poly;
    for i in 0..4 {
        let a = quad[i];
        let b = quad[(i + 1) % 4];
        // normal pointing toward the quad centroid
        let mut n = (-(b.1 - a.1), b.0 - a.0);
        let mut d = n.0 * a.0 + n.1 * a.1;
        if n.0 * cx + n.1 * cy - d < 0.0 {
            n = (-n.0, -n.1);
            d = -d;
        }
        poly = clip_halfplane(&poly, n, d);
        if poly.is_empty() {
            break;
        }
    }
    poly
}

fn centroid(poly: &Poly) -> (f64, f64) {
    let n = poly.len() as f64;
    (
        poly.iter().map(|p| p.0).sum::<f64>() / n,
        poly.iter().map(|p| p.1).sum::<f64>() / n,
    )
}

/// Erodes a convex polygon by an axis-aligned `w x h` rectangle: the
/// remaining set is where the rectangle's center may sit. Empty when the
/// rectangle does not fit.
fn erode_by_rect(poly: &Poly, half_w: f64, half_h: f64) -> Poly {
    if poly.len() < 3 {
        return Vec::new();
    }
    let c = centroid(poly);
    let mut out = poly.clone();
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let mut n = (-(b.1 - a.1), b.0 - a.0);
        let len = (n.0 * n.0 + n.1 * n.1).sqrt();
        if len < 1e-12 {
            continue;
        }
        n = (n.0 / len, n.1 / len);
        let mut d = n.0 * a.0 + n.1 * a.1;
        if n.0 * c.0 + n.1 * c.1 - d < 0.0 {
            n = (-n.0, -n.1);
            d = -d;
        }
        // support of the rectangle in direction -n
        d += half_w * n.0.abs() + half_h * n.1.abs();
        out = clip_halfplane(&out, n, d);
        if out.is_empty() {
            return out;
        }
    }
    out
}

/// The crop rectangle shared by all warped frames: the largest axis-aligned
/// rectangle of the reference aspect ratio inside the intersection of all
/// warped valid regions. Returned as (x0, y0, width, height) in reference
/// pixel coordinates.
pub(crate) fn common_crop(
    width: usize,
    height: usize,
    transforms: &[HomographyTransform],
) -> Result<(f64, f64, f64, f64), StabilizeError> {
    let (wf, hf) = (width as f64, height as f64);
    // image footprint in pixel-center coordinates
    let corners = [
        (-0.5, -0.5),
        (wf - 0.5, -0.5),
        (wf - 0.5, hf - 0.5),
        (-0.5, hf - 0.5),
    ];
    let mut poly: Poly = corners.to_vec();
    for t in transforms {
        let quad: Vec<(f64, f64)> = corners
            .iter()
            .map(|&(x, y)| {
                let v = t.h * Vector3::new(x, y, 1.0);
                (v.x / v.z, v.y / v.z)
            })
            .collect();
        let quad: [(f64, f64); 4] = [quad[0], quad[1], quad[2], quad[3]];
        poly = clip_to_quad(poly, &quad);
        if poly.len() < 3 {
            return Err(StabilizeError::EmptyIntersection);
        }
    }

    // binary search the largest feasible scale of the reference aspect
    let feasible = |s: f64| -> Option<(f64, f64)> {
        let eroded = erode_by_rect(&poly, s * wf / 2.0, s * hf / 2.0);
        (!eroded.is_empty()).then(|| centroid(&eroded))
    };
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut best = feasible(0.0).map(|c| (0.0, c));
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        match feasible(mid) {
            Some(c) => {
                best = Some((mid, c));
                lo = mid;
            }
            None => hi = mid,
        }
    }
    let (s, (cx, cy)) = best.ok_or(StabilizeError::EmptyIntersection)?;
    if s * wf < 2.0 || s * hf < 2.0 {
        return Err(StabilizeError::EmptyIntersection);
    }
    Ok((cx - s * wf / 2.0, cy - s * hf / 2.0, s * wf, s * hf))
}

/// Warps every frame (and clean target) into the reference pose, crops the
/// common region and rescales it back to the original size. `transforms[t]`
/// maps frame t pixels into reference coordinates; entry 0 is the identity.
pub fn warp_and_crop(
    seq: &ImageSequence,
    transforms: &[HomographyTransform],
) -> Result<ImageSequence, StabilizeError> {
    if transforms.len() != seq.len() {
        return Err(StabilizeError::TransformCount {
            frames: seq.len(),
            transforms: transforms.len(),
        });
    }
    let (h, w) = (seq.height(), seq.width());
    let (x0, y0, crop_w, crop_h) = common_crop(w, h, transforms)?;

    let warp_one = |img: &Image, inv: &nalgebra::Matrix3<f64>| -> Image {
        Image::from_fn(h, w, |oy, ox| {
            let xr = x0 + (ox as f64 + 0.5) * crop_w / w as f64;
            let yr = y0 + (oy as f64 + 0.5) * crop_h / h as f64;
            let v = inv * Vector3::new(xr, yr, 1.0);
            sample_bilinear(img, v.x / v.z, v.y / v.z)
        })
    };

    let inverses: Vec<nalgebra::Matrix3<f64>> = transforms
        .iter()
        .map(|t| {
            t.h.try_inverse()
                .ok_or(StabilizeError::SingularTransform)
        })
        .collect::<Result<_, _>>()?;

    let frames: Vec<Image> = seq
        .frames
        .iter()
        .zip(&inverses)
        .map(|(f, inv)| warp_one(f, inv))
        .collect();
    let clean = seq.clean.as_ref().map(|clean| {
        clean
            .iter()
            .zip(&inverses)
            .map(|(f, inv)| warp_one(f, inv))
            .collect::<Vec<_>>()
    });
    Ok(ImageSequence::new(frames, clean)?)
}

/// Corner positions of the crop rectangle mapped back into a frame;
/// useful for reprojection-error diagnostics.
pub fn crop_aspect_ratio(
    width: usize,
    height: usize,
    transforms: &[HomographyTransform],
) -> Result<f64, StabilizeError> {
    let (_, _, cw, ch) = common_crop(width, height, transforms)?;
    Ok(cw / ch)
}
