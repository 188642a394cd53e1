//! Procedural scenes and synthetic bursts.
//!
//! A [`Scene`] is a smooth function from continuous pixel coordinates to
//! RGB, assembled from seeded primitives (gradients, soft disks, oriented
//! gratings, strokes). Because it can be sampled anywhere, a burst can be
//! rendered with subpixel camera drift or an arbitrary per-frame warp,
//! which is what multi-frame denoising and super-resolution need from
//! their data. A given seed always produces the same scene.

use burstdn_imaging::{Image, ImageSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

#[derive(Clone, Debug)]
enum Primitive {
    /// Affine ramp per channel.
    Gradient { gx: [f64; 3], gy: [f64; 3] },
    /// Disk with a smoothstep edge.
    Disk {
        cx: f64,
        cy: f64,
        radius: f64,
        edge: f64,
        color: [f64; 3],
    },
    /// Oriented sinusoid under a Gaussian envelope.
    Grating {
        cx: f64,
        cy: f64,
        ux: f64,
        uy: f64,
        freq: f64,
        sigma: f64,
        amp: [f64; 3],
    },
    /// Soft line segment of a given half-width.
    Stroke {
        x0: f64,
        y0: f64,
        x1: f64,
        y1: f64,
        halfwidth: f64,
        color: [f64; 3],
    },
}

#[inline]
fn smoothstep(e0: f64, e1: f64, x: f64) -> f64 {
    let t = ((x - e0) / (e1 - e0)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// A deterministic, smooth RGB scene over nominal `extent x extent` pixel
/// coordinates (sampling outside the extent is fine).
#[derive(Clone, Debug)]
pub struct Scene {
    base: [f64; 3],
    prims: Vec<Primitive>,
    extent: f64,
}

impl Scene {
    /// Builds a random scene for a nominal canvas size.
    pub fn generate(seed: u64, extent: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut prims = Vec::new();

        let base = [
            rng.gen_range(0.25..0.75),
            rng.gen_range(0.25..0.75),
            rng.gen_range(0.25..0.75),
        ];
        let mut ch3 = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| {
            [
                rng.gen_range(lo..hi),
                rng.gen_range(lo..hi),
                rng.gen_range(lo..hi),
            ]
        };

        prims.push(Primitive::Gradient {
            gx: ch3(&mut rng, -0.25, 0.25),
            gy: ch3(&mut rng, -0.25, 0.25),
        });

        for _ in 0..rng.gen_range(6..10) {
            prims.push(Primitive::Disk {
                cx: rng.gen_range(0.0..extent),
                cy: rng.gen_range(0.0..extent),
                radius: rng.gen_range(0.06..0.30) * extent,
                edge: rng.gen_range(0.8..2.5),
                color: ch3(&mut rng, -0.45, 0.45),
            });
        }
        for _ in 0..rng.gen_range(2..5) {
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
            prims.push(Primitive::Grating {
                cx: rng.gen_range(0.0..extent),
                cy: rng.gen_range(0.0..extent),
                ux: theta.cos(),
                uy: theta.sin(),
                freq: rng.gen_range(0.05..0.22),
                sigma: rng.gen_range(0.10..0.25) * extent,
                amp: ch3(&mut rng, -0.22, 0.22),
            });
        }
        for _ in 0..rng.gen_range(2..5) {
            let x0 = rng.gen_range(0.0..extent);
            let y0 = rng.gen_range(0.0..extent);
            prims.push(Primitive::Stroke {
                x0,
                y0,
                x1: x0 + rng.gen_range(-0.6..0.6) * extent,
                y1: y0 + rng.gen_range(-0.6..0.6) * extent,
                halfwidth: rng.gen_range(0.7..2.0),
                color: ch3(&mut rng, -0.4, 0.4),
            });
        }

        Self {
            base,
            prims,
            extent,
        }
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// RGB at a continuous position. A smooth squash keeps values inside
    /// (0, 1) so later noise is not dominated by clipping.
    pub fn sample(&self, x: f64, y: f64) -> [f64; 3] {
        let mut v = self.base;
        for p in &self.prims {
            match *p {
                Primitive::Gradient { gx, gy } => {
                    for c in 0..3 {
                        v[c] += gx[c] * (x / self.extent - 0.5) + gy[c] * (y / self.extent - 0.5);
                    }
                }
                Primitive::Disk {
                    cx,
                    cy,
                    radius,
                    edge,
                    color,
                } => {
                    let d = ((x - cx).powi(2) + (y - cy).powi(2)).sqrt();
                    let m = 1.0 - smoothstep(radius - edge, radius + edge, d);
                    if m > 0.0 {
                        for c in 0..3 {
                            v[c] += color[c] * m;
                        }
                    }
                }
                Primitive::Grating {
                    cx,
                    cy,
                    ux,
                    uy,
                    freq,
                    sigma,
                    amp,
                } => {
                    let (dx, dy) = (x - cx, y - cy);
                    let env = (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp();
                    if env > 1e-4 {
                        let s = (freq * (ux * dx + uy * dy) * std::f64::consts::TAU).sin() * env;
                        for c in 0..3 {
                            v[c] += amp[c] * s;
                        }
                    }
                }
                Primitive::Stroke {
                    x0,
                    y0,
                    x1,
                    y1,
                    halfwidth,
                    color,
                } => {
                    let (ex, ey) = (x1 - x0, y1 - y0);
                    let len2 = ex * ex + ey * ey;
                    let t = if len2 > 0.0 {
                        (((x - x0) * ex + (y - y0) * ey) / len2).clamp(0.0, 1.0)
                    } else {
                        0.0
                    };
                    let (px, py) = (x0 + t * ex, y0 + t * ey);
                    let d = ((x - px).powi(2) + (y - py).powi(2)).sqrt();
                    let m = 1.0 - smoothstep(halfwidth * 0.5, halfwidth * 1.5, d);
                    if m > 0.0 {
                        for c in 0..3 {
                            v[c] += color[c] * m;
                        }
                    }
                }
            }
        }
        // gentle sigmoid squash centered at 0.5, ~identity in the mid range
        let squash = |u: f64| 0.5 + 0.46 * ((u - 0.5) * 2.4).tanh();
        [squash(v[0]), squash(v[1]), squash(v[2])]
    }

    /// Renders with an arbitrary map from output pixel coordinates to
    /// scene coordinates (point sampling).
    pub fn render_mapped(
        &self,
        height: usize,
        width: usize,
        map: impl Fn(f64, f64) -> (f64, f64),
    ) -> Image {
        Image::from_fn(height, width, |y, x| {
            let (sx, sy) = map(x as f64, y as f64);
            let v = self.sample(sx, sy);
            [v[0] as f32, v[1] as f32, v[2] as f32]
        })
    }

    /// Renders with a pure translation of the sampling grid.
    pub fn render(&self, height: usize, width: usize, offset: (f64, f64)) -> Image {
        self.render_mapped(height, width, |x, y| (x + offset.0, y + offset.1))
    }
}

/// Parameters of a synthetic burst: F frames with a Gaussian random-walk
/// camera drift (zero drift for the first frame).
#[derive(Clone, Copy, Debug)]
pub struct BurstSpec {
    pub frames: usize,
    pub height: usize,
    pub width: usize,
    /// Per-frame random-walk step (pixels); 0 gives a static burst.
    pub drift_step: f64,
    pub seed: u64,
}

/// The per-frame drift offsets a burst seed produces.
pub fn drift_offsets(spec: &BurstSpec) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
    let step = Normal::new(0.0, spec.drift_step.max(1e-12)).expect("positive std");
    let mut offsets = Vec::with_capacity(spec.frames);
    let (mut dx, mut dy) = (0.0f64, 0.0f64);
    for t in 0..spec.frames {
        if t > 0 && spec.drift_step > 0.0 {
            dx += step.sample(&mut rng);
            dy += step.sample(&mut rng);
        }
        offsets.push((dx, dy));
    }
    offsets
}

/// Renders a clean burst: per-frame drifted samplings of one scene. The
/// frames double as their own clean targets.
pub fn synth_burst(spec: &BurstSpec) -> ImageSequence {
    let extent = spec.height.max(spec.width) as f64;
    let scene = Scene::generate(spec.seed, extent);
    let frames: Vec<Image> = drift_offsets(spec)
        .into_iter()
        .map(|off| scene.render(spec.height, spec.width, off))
        .collect();
    ImageSequence::from_clean(frames).expect("frames match")
}

/// Renders `count` independent clean bursts with per-sequence seeds
/// derived from `seed`.
pub fn synth_dataset(count: usize, template: &BurstSpec, seed: u64) -> Vec<ImageSequence> {
    (0..count)
        .map(|i| {
            let spec = BurstSpec {
                seed: seed.wrapping_mul(0x100_0003).wrapping_add(i as u64),
                ..*template
            };
            synth_burst(&spec)
        })
        .collect()
}
