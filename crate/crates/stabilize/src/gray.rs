//! Grayscale planes, pyramids and gradients for tracking.

use burstdn_imaging::Image;

#[derive(Clone, Debug)]
pub(crate) struct GrayImage {
    pub h: usize,
    pub w: usize,
    pub data: Vec<f32>,
}

impl GrayImage {
    pub fn from_rgb(img: &Image) -> Self {
        Self {
            h: img.height(),
            w: img.width(),
            data: img.luma709(),
        }
    }

    #[inline]
    pub fn at(&self, y: usize, x: usize) -> f32 {
        self.data[y * self.w + x]
    }

    #[inline]
    fn at_clamped(&self, y: isize, x: isize) -> f32 {
        let y = y.clamp(0, self.h as isize - 1) as usize;
        let x = x.clamp(0, self.w as isize - 1) as usize;
        self.at(y, x)
    }

    /// Bilinear sample with border clamp.
    pub fn sample(&self, x: f64, y: f64) -> f64 {
        let x = x.clamp(0.0, (self.w - 1) as f64);
        let y = y.clamp(0.0, (self.h - 1) as f64);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.w - 1);
        let y1 = (y0 + 1).min(self.h - 1);
        let (fx, fy) = (x - x0 as f64, y - y0 as f64);
        let top = self.at(y0, x0) as f64 * (1.0 - fx) + self.at(y0, x1) as f64 * fx;
        let bot = self.at(y1, x0) as f64 * (1.0 - fx) + self.at(y1, x1) as f64 * fx;
        top * (1.0 - fy) + bot * fy
    }

    /// Central-difference gradient planes.
    pub fn gradients(&self) -> (GrayImage, GrayImage) {
        let mut gx = vec![0.0f32; self.h * self.w];
        let mut gy = vec![0.0f32; self.h * self.w];
        for y in 0..self.h {
            for x in 0..self.w {
                let (yi, xi) = (y as isize, x as isize);
                gx[y * self.w + x] =
                    0.5 * (self.at_clamped(yi, xi + 1) - self.at_clamped(yi, xi - 1));
                gy[y * self.w + x] =
                    0.5 * (self.at_clamped(yi + 1, xi) - self.at_clamped(yi - 1, xi));
            }
        }
        (
            GrayImage {
                h: self.h,
                w: self.w,
                data: gx,
            },
            GrayImage {
                h: self.h,
                w: self.w,
                data: gy,
            },
        )
    }

    /// Gaussian [1 4 6 4 1]/16 blur, then decimation by two.
    pub fn downsample2(&self) -> GrayImage {
        const K: [f32; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
        let mut rows = vec![0.0f32; self.h * self.w];
        for y in 0..self.h {
            for x in 0..self.w {
                let mut acc = 0.0;
                for (i, k) in K.iter().enumerate() {
                    acc += k * self.at_clamped(y as isize, x as isize + i as isize - 2);
                }
                rows[y * self.w + x] = acc;
            }
        }
        let (oh, ow) = ((self.h + 1) / 2, (self.w + 1) / 2);
        let mut out = vec![0.0f32; oh * ow];
        for oy in 0..oh {
            for ox in 0..ow {
                let (sy, sx) = (oy * 2, ox * 2);
                let mut acc = 0.0;
                for (i, k) in K.iter().enumerate() {
                    let yy = (sy as isize + i as isize - 2).clamp(0, self.h as isize - 1) as usize;
                    acc += k * rows[yy * self.w + sx];
                }
                out[oy * ow + ox] = acc;
            }
        }
        GrayImage {
            h: oh,
            w: ow,
            data: out,
        }
    }
}

/// Coarse-to-fine pyramid; `levels[0]` is full resolution.
pub(crate) struct Pyramid {
    pub levels: Vec<PyramidLevel>,
}

pub(crate) struct PyramidLevel {
    pub image: GrayImage,
    pub gx: GrayImage,
    pub gy: GrayImage,
}

impl Pyramid {
    pub fn build(img: &Image, n_levels: usize) -> Self {
        let mut grays = vec![GrayImage::from_rgb(img)];
        for _ in 1..n_levels {
            grays.push(grays.last().expect("nonempty").downsample2());
        }
        let levels = grays
            .into_iter()
            .map(|g| {
                let (gx, gy) = g.gradients();
                PyramidLevel { image: g, gx, gy }
            })
            .collect();
        Self { levels }
    }
}
