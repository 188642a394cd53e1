//! Rotation-only homography fitting on the unit sphere.

use crate::{Point, StabilizeError};
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Pinhole intrinsics with square pixels.
#[derive(Clone, Copy, Debug)]
pub struct Intrinsics {
    /// Focal length in pixels.
    pub f: f64,
    pub cx: f64,
    pub cy: f64,
}

impl Intrinsics {
    /// The static guess used throughout: f = max(width, height) pixels
    /// (about a 53-degree horizontal field of view), principal point at
    /// the image center.
    pub fn guess(height: usize, width: usize) -> Self {
        Self {
            f: height.max(width) as f64,
            cx: (width as f64 - 1.0) / 2.0,
            cy: (height as f64 - 1.0) / 2.0,
        }
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.f, 0.0, self.cx, 0.0, self.f, self.cy, 0.0, 0.0, 1.0)
    }

    pub fn inverse(&self) -> Matrix3<f64> {
        Matrix3::new(
            1.0 / self.f,
            0.0,
            -self.cx / self.f,
            0.0,
            1.0 / self.f,
            -self.cy / self.f,
            0.0,
            0.0,
            1.0,
        )
    }

    /// Unit direction of a pixel.
    pub fn direction(&self, p: Point) -> Vector3<f64> {
        Vector3::new((p.x - self.cx) / self.f, (p.y - self.cy) / self.f, 1.0).normalize()
    }
}

/// A fitted projective transform, normalized so `h[2][2] = 1`.
#[derive(Clone, Debug)]
pub struct HomographyTransform {
    pub h: Matrix3<f64>,
    pub inlier_count: usize,
    /// Mean reprojection residual over the inliers, in pixels.
    pub mean_residual: f64,
}

impl HomographyTransform {
    pub fn identity() -> Self {
        Self {
            h: Matrix3::identity(),
            inlier_count: 0,
            mean_residual: 0.0,
        }
    }

    pub fn from_matrix(m: Matrix3<f64>, inlier_count: usize, mean_residual: f64) -> Self {
        Self {
            h: m / m[(2, 2)],
            inlier_count,
            mean_residual,
        }
    }

    /// Applies the transform to a pixel.
    pub fn project(&self, p: Point) -> Point {
        let v = self.h * Vector3::new(p.x, p.y, 1.0);
        Point {
            x: v.x / v.z,
            y: v.y / v.z,
        }
    }

    /// Row-major flattening, for the sidecar matrix files.
    pub fn row_major(&self) -> [f64; 9] {
        let m = &self.h;
        [
            m[(0, 0)],
            m[(0, 1)],
            m[(0, 2)],
            m[(1, 0)],
            m[(1, 1)],
            m[(1, 2)],
            m[(2, 0)],
            m[(2, 1)],
            m[(2, 2)],
        ]
    }

    pub fn from_row_major(v: &[f64; 9]) -> Self {
        Self::from_matrix(
            Matrix3::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]),
            0,
            0.0,
        )
    }
}

/// RANSAC settings for the rotation fit; the defaults are the values the
/// pipeline always uses.
#[derive(Clone, Copy, Debug)]
pub struct RansacParams {
    pub iterations: usize,
    /// Inlier gate on the pixel reprojection residual.
    pub threshold_px: f64,
    /// Fits with a lower inlier ratio are reported degenerate.
    pub min_inlier_ratio: f64,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self {
            iterations: 500,
            threshold_px: 2.0,
            min_inlier_ratio: 0.30,
            seed: 0x5eed_cafe,
        }
    }
}

/// Orthogonal Procrustes: the rotation best aligning paired unit
/// directions, `prev ~ R * next`.
fn procrustes(dirs: &[(Vector3<f64>, Vector3<f64>)], idx: &[usize]) -> Option<Matrix3<f64>> {
    let mut m = Matrix3::zeros();
    for &i in idx {
        let (dp, dn) = dirs[i];
        m += dp * dn.transpose();
    }
    let svd = m.svd(true, true);
    let u = svd.u?;
    let v_t = svd.v_t?;
    let det = (u * v_t).determinant();
    let r = u * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, det.signum())) * v_t;
    r.determinant().is_finite().then_some(r)
}

fn residual(h: &Matrix3<f64>, pair: &(Point, Point)) -> f64 {
    let v = h * Vector3::new(pair.1.x, pair.1.y, 1.0);
    if v.z.abs() < 1e-12 {
        return f64::INFINITY;
    }
    let (px, py) = (v.x / v.z, v.y / v.z);
    ((px - pair.0.x).powi(2) + (py - pair.0.y).powi(2)).sqrt()
}

/// Robust rotation-only fit from (previous, next) pixel pairs: RANSAC over
/// two-pair Procrustes seeds on normalized directions, then a
/// least-squares refit on the winning inlier set. The result maps the
/// next frame's pixels into the previous frame, `H = K R K^-1`.
pub fn fit_rotation_homography(
    pairs: &[(Point, Point)],
    k: &Intrinsics,
    params: &RansacParams,
) -> Result<HomographyTransform, StabilizeError> {
    if pairs.len() < 8 {
        return Err(StabilizeError::TooFewPairs(pairs.len()));
    }
    let dirs: Vec<(Vector3<f64>, Vector3<f64>)> = pairs
        .iter()
        .map(|(p, q)| (k.direction(*p), k.direction(*q)))
        .collect();
    let kmat = k.matrix();
    let kinv = k.inverse();
    let to_h = |r: &Matrix3<f64>| kmat * r * kinv;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best_inliers: Vec<usize> = Vec::new();
    for _ in 0..params.iterations {
        let i = rng.gen_range(0..pairs.len());
        let mut j = rng.gen_range(0..pairs.len());
        if i == j {
            j = (j + 1) % pairs.len();
        }
        let Some(r) = procrustes(&dirs, &[i, j]) else {
            continue;
        };
        let h = to_h(&r);
        let inliers: Vec<usize> = (0..pairs.len())
            .filter(|&n| residual(&h, &pairs[n]) < params.threshold_px)
            .collect();
        if inliers.len() > best_inliers.len() {
            best_inliers = inliers;
        }
    }

    let ratio = best_inliers.len() as f64 / pairs.len() as f64;
    if ratio < params.min_inlier_ratio {
        return Err(StabilizeError::DegenerateFit {
            inlier_ratio: ratio,
        });
    }

    let r = procrustes(&dirs, &best_inliers).ok_or(StabilizeError::DegenerateFit {
        inlier_ratio: ratio,
    })?;
    let h = to_h(&r);
    let mean_residual = best_inliers
        .iter()
        .map(|&n| residual(&h, &pairs[n]))
        .sum::<f64>()
        / best_inliers.len() as f64;
    Ok(HomographyTransform::from_matrix(
        h,
        best_inliers.len(),
        mean_residual,
    ))
}

/// `|R^T R - I|` of the conjugated matrix; small for rotation-only fits.
pub fn rotation_constraint_error(h: &HomographyTransform, k: &Intrinsics) -> f64 {
    let r = k.inverse() * h.h * k.matrix();
    let r = r / (r.determinant().abs().powf(1.0 / 3.0));
    (r.transpose() * r - Matrix3::identity()).norm()
}
