//! Burst stabilization: registers every frame of a sequence to the first
//! frame with a rotation-only homography (Lucas-Kanade correspondences,
//! RANSAC on the unit sphere, static focal-length guess), then inverse
//! warps, crops to the common valid region and rescales to the original
//! size.
//!
//! A frame that cannot be tracked or fitted marks the whole sequence as
//! unstabilizable; callers drop such sequences rather than patch frames.

mod gray;
pub mod homography;
pub mod track;
pub mod warp;

pub use homography::{
    fit_rotation_homography, rotation_constraint_error, HomographyTransform, Intrinsics,
    RansacParams,
};
pub use track::{track_correspondences, TrackParams};
pub use warp::warp_and_crop;

use burstdn_imaging::ImageSequence;
use thiserror::Error;

/// A 2D pixel position.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Error)]
pub enum StabilizeError {
    #[error("untrackable frame: only {surviving} tracks survive, need {needed}")]
    Untrackable { surviving: usize, needed: usize },
    #[error("need at least 8 correspondence pairs, got {0}")]
    TooFewPairs(usize),
    #[error("degenerate fit: inlier ratio {inlier_ratio:.2} below 0.30")]
    DegenerateFit { inlier_ratio: f64 },
    #[error("warped frames share no common region")]
    EmptyIntersection,
    #[error("{frames} frames but {transforms} transforms")]
    TransformCount { frames: usize, transforms: usize },
    #[error("transform is not invertible")]
    SingularTransform,
    #[error(transparent)]
    Imaging(#[from] burstdn_imaging::ImagingError),
}

/// A stabilized sequence together with the per-frame transforms into the
/// reference (frame 0) pose.
pub struct Stabilized {
    pub sequence: ImageSequence,
    pub transforms: Vec<HomographyTransform>,
}

/// Full stabilization of one burst: track successive pairs, fit
/// rotation-only homographies, chain them to the reference frame, and
/// warp/crop/rescale. Noisy frames and clean targets are warped with
/// identical transforms and resampling.
pub fn stabilize_sequence(seq: &ImageSequence) -> Result<Stabilized, StabilizeError> {
    let track_params = TrackParams::default();
    let ransac = RansacParams::default();
    let k = Intrinsics::guess(seq.height(), seq.width());

    let mut transforms = vec![HomographyTransform::identity()];
    for t in 1..seq.len() {
        let pairs = track_correspondences(&seq.frames[t - 1], &seq.frames[t], &track_params)?;
        let pair_fit = fit_rotation_homography(&pairs, &k, &ransac)?;
        // chain through the previous frame's transform into the reference
        let prev: &HomographyTransform = &transforms[t - 1];
        let chained = prev.h * pair_fit.h;
        transforms.push(HomographyTransform::from_matrix(
            chained,
            pair_fit.inlier_count,
            pair_fit.mean_residual,
        ));
    }

    let sequence = warp_and_crop(seq, &transforms)?;
    Ok(Stabilized {
        sequence,
        transforms,
    })
}
