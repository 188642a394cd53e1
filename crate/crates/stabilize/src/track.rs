//! Corner selection and pyramidal Lucas-Kanade tracking with a
//! forward-backward consistency gate.

use crate::gray::{GrayImage, Pyramid, PyramidLevel};
use crate::{Point, StabilizeError};
use burstdn_imaging::Image;

/// Tracking configuration. The defaults are the values used everywhere in
/// the pipeline.
#[derive(Clone, Copy, Debug)]
pub struct TrackParams {
    /// Pyramid levels (level 0 = full resolution).
    pub levels: usize,
    /// Integration window radius; the window is `2r+1` squared.
    pub window_radius: usize,
    /// Gauss-Newton iteration cap per level.
    pub max_iters: usize,
    /// Convergence threshold on the update step, in pixels.
    pub epsilon: f64,
    /// Corner budget.
    pub max_points: usize,
    /// Keep corners above `quality_ratio * best_response`.
    pub quality_ratio: f64,
    /// Minimum spacing between selected corners, in pixels.
    pub min_distance: f64,
    /// Forward-backward round-trip gate, in pixels.
    pub fb_threshold: f64,
    /// Minimum number of surviving tracks before a frame counts as
    /// trackable.
    pub min_tracks: usize,
}

impl Default for TrackParams {
    fn default() -> Self {
        Self {
            levels: 3,
            window_radius: 10,
            max_iters: 30,
            epsilon: 0.01,
            max_points: 400,
            quality_ratio: 0.01,
            min_distance: 8.0,
            fb_threshold: 1.0,
            min_tracks: 8,
        }
    }
}

/// Minimum-eigenvalue (Shi-Tomasi) corners with greedy spacing.
pub(crate) fn min_eig_corners(g: &GrayImage, params: &TrackParams) -> Vec<Point> {
    let margin = params.window_radius + 2;
    if g.h <= 2 * margin || g.w <= 2 * margin {
        return Vec::new();
    }
    let (gx, gy) = g.gradients();
    let mut responses: Vec<(f32, usize, usize)> = Vec::new();
    for y in margin..g.h - margin {
        for x in margin..g.w - margin {
            // structure tensor over a 3x3 block
            let (mut a, mut b, mut c) = (0.0f32, 0.0f32, 0.0f32);
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let yy = (y as isize + dy) as usize;
                    let xx = (x as isize + dx) as usize;
                    let (ix, iy) = (gx.at(yy, xx), gy.at(yy, xx));
                    a += ix * ix;
                    b += ix * iy;
                    c += iy * iy;
                }
            }
            let half_tr = 0.5 * (a + c);
            let det_part = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            let min_eig = half_tr - det_part;
            if min_eig > 0.0 {
                responses.push((min_eig, y, x));
            }
        }
    }
    if responses.is_empty() {
        return Vec::new();
    }
    responses.sort_by(|l, r| r.0.partial_cmp(&l.0).expect("finite responses"));
    let threshold = responses[0].0 * params.quality_ratio as f32;
    let min_d2 = params.min_distance * params.min_distance;

    let mut kept: Vec<Point> = Vec::new();
    for &(resp, y, x) in &responses {
        if resp < threshold || kept.len() >= params.max_points {
            break;
        }
        let p = Point {
            x: x as f64,
            y: y as f64,
        };
        let spaced = kept
            .iter()
            .all(|q| (q.x - p.x).powi(2) + (q.y - p.y).powi(2) >= min_d2);
        if spaced {
            kept.push(p);
        }
    }
    kept
}

/// Tracks one point through one pyramid level with forward-additive LK.
/// `d` is the current displacement estimate at this level's scale.
fn lk_level(
    prev: &PyramidLevel,
    next: &PyramidLevel,
    px: f64,
    py: f64,
    mut d: (f64, f64),
    params: &TrackParams,
) -> Option<(f64, f64)> {
    let r = params.window_radius as isize;
    let (h, w) = (prev.image.h as f64, prev.image.w as f64);
    // the fixed window must stay inside the previous image
    if px - r as f64 - 1.0 < 0.0
        || py - r as f64 - 1.0 < 0.0
        || px + r as f64 + 1.0 > w - 1.0
        || py + r as f64 + 1.0 > h - 1.0
    {
        return None;
    }

    // spatial gradient matrix over the window (constant across iterations)
    let (mut gxx, mut gxy, mut gyy) = (0.0f64, 0.0f64, 0.0f64);
    for dy in -r..=r {
        for dx in -r..=r {
            let (sx, sy) = (px + dx as f64, py + dy as f64);
            let ix = prev.gx.sample(sx, sy);
            let iy = prev.gy.sample(sx, sy);
            gxx += ix * ix;
            gxy += ix * iy;
            gyy += iy * iy;
        }
    }
    let det = gxx * gyy - gxy * gxy;
    if det.abs() < 1e-12 {
        return None;
    }

    for _ in 0..params.max_iters {
        let (mut bx, mut by) = (0.0f64, 0.0f64);
        let (qx, qy) = (px + d.0, py + d.1);
        if qx - r as f64 - 1.0 < 0.0
            || qy - r as f64 - 1.0 < 0.0
            || qx + r as f64 + 1.0 > w - 1.0
            || qy + r as f64 + 1.0 > h - 1.0
        {
            return None;
        }
        for dy in -r..=r {
            for dx in -r..=r {
                let (sx, sy) = (px + dx as f64, py + dy as f64);
                let delta = prev.image.sample(sx, sy) - next.image.sample(sx + d.0, sy + d.1);
                bx += delta * prev.gx.sample(sx, sy);
                by += delta * prev.gy.sample(sx, sy);
            }
        }
        let ux = (gyy * bx - gxy * by) / det;
        let uy = (gxx * by - gxy * bx) / det;
        d.0 += ux;
        d.1 += uy;
        if (ux * ux + uy * uy).sqrt() < params.epsilon {
            break;
        }
    }
    Some(d)
}

/// Tracks points from the `prev` pyramid into the `next` pyramid,
/// coarse to fine. Returns `None` per point when tracking fails.
pub(crate) fn track_points(
    prev: &Pyramid,
    next: &Pyramid,
    points: &[Point],
    params: &TrackParams,
) -> Vec<Option<Point>> {
    points
        .iter()
        .map(|p| {
            let mut d = (0.0f64, 0.0f64);
            for lvl in (0..prev.levels.len()).rev() {
                let scale = (1 << lvl) as f64;
                let (px, py) = (p.x / scale, p.y / scale);
                match lk_level(&prev.levels[lvl], &next.levels[lvl], px, py, d, params) {
                    Some(dl) => {
                        d = if lvl > 0 { (dl.0 * 2.0, dl.1 * 2.0) } else { dl };
                    }
                    None => return None,
                }
            }
            Some(Point {
                x: p.x + d.0,
                y: p.y + d.1,
            })
        })
        .collect()
}

/// Finds correspondences between successive frames: corners on `prev`,
/// pyramidal LK into `next`, and a forward-backward round trip to reject
/// bad tracks. Fails with `Untrackable` below `min_tracks` survivors.
pub fn track_correspondences(
    prev: &Image,
    next: &Image,
    params: &TrackParams,
) -> Result<Vec<(Point, Point)>, StabilizeError> {
    let pyr_prev = Pyramid::build(prev, params.levels);
    let pyr_next = Pyramid::build(next, params.levels);
    let corners = min_eig_corners(&pyr_prev.levels[0].image, params);

    let forward = track_points(&pyr_prev, &pyr_next, &corners, params);
    let tracked: Vec<(Point, Point)> = corners
        .iter()
        .zip(&forward)
        .filter_map(|(p, q)| q.map(|q| (*p, q)))
        .collect();

    let back = track_points(
        &pyr_next,
        &pyr_prev,
        &tracked.iter().map(|(_, q)| *q).collect::<Vec<_>>(),
        params,
    );
    let pairs: Vec<(Point, Point)> = tracked
        .iter()
        .zip(&back)
        .filter_map(|(&(p, q), r)| {
            let r = (*r)?;
            let fb = ((r.x - p.x).powi(2) + (r.y - p.y).powi(2)).sqrt();
            (fb < params.fb_threshold).then_some((p, q))
        })
        .collect();

    if pairs.len() < params.min_tracks {
        return Err(StabilizeError::Untrackable {
            surviving: pairs.len(),
            needed: params.min_tracks,
        });
    }
    Ok(pairs)
}
