//! Numeric kernels behind the graph operations.
//!
//! All kernels are deterministic: parallel loops write disjoint output
//! chunks and every reduction runs in a fixed order, so results are
//! bit-identical across runs of the same build regardless of thread count.

use crate::Elem;
use rayon::prelude::*;

/// Dot product with eight independent accumulator lanes. The fixed lane
/// structure keeps the summation order deterministic while still letting
/// the compiler vectorize it.
#[inline]
pub fn dot<T: Elem>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut lanes = [T::zero(); 8];
    let chunks = a.len() / 8;
    for i in 0..chunks {
        let (ca, cb) = (&a[i * 8..i * 8 + 8], &b[i * 8..i * 8 + 8]);
        for l in 0..8 {
            lanes[l] = lanes[l] + ca[l] * cb[l];
        }
    }
    let mut tail = T::zero();
    for i in chunks * 8..a.len() {
        tail += a[i] * b[i];
    }
    let mut acc = tail;
    for l in lanes {
        acc += l;
    }
    acc
}

/// Sum with the same deterministic lane structure as [`dot`].
#[inline]
pub fn sum<T: Elem>(a: &[T]) -> T {
    let mut lanes = [T::zero(); 8];
    let chunks = a.len() / 8;
    for i in 0..chunks {
        let c = &a[i * 8..i * 8 + 8];
        for l in 0..8 {
            lanes[l] += c[l];
        }
    }
    let mut tail = T::zero();
    for i in chunks * 8..a.len() {
        tail += a[i];
    }
    let mut acc = tail;
    for l in lanes {
        acc += l;
    }
    acc
}

/// 3x3 stride-1 cross-correlation with one-pixel zero padding.
///
/// `x` is `[n, cin, h, w]`, `wgt` is `[cout, cin, 3, 3]`, `bias` (when
/// present) is `[cout]`, `out` is `[n, cout, h, w]`. Spatial size is
/// preserved by construction.
pub fn conv3x3<T: Elem>(
    x: &[T],
    n: usize,
    cin: usize,
    h: usize,
    w: usize,
    wgt: &[T],
    cout: usize,
    bias: Option<&[T]>,
    out: &mut [T],
) {
    debug_assert_eq!(x.len(), n * cin * h * w);
    debug_assert_eq!(wgt.len(), cout * cin * 9);
    debug_assert_eq!(out.len(), n * cout * h * w);
    let plane = h * w;

    out.par_chunks_mut(plane).enumerate().for_each(|(idx, op)| {
        let (ni, co) = (idx / cout, idx % cout);
        let init = bias.map_or(T::zero(), |b| b[co]);
        op.fill(init);
        for ci in 0..cin {
            let xplane = &x[(ni * cin + ci) * plane..(ni * cin + ci + 1) * plane];
            let wk = &wgt[(co * cin + ci) * 9..(co * cin + ci + 1) * 9];
            for ky in 0..3usize {
                let (w0, w1, w2) = (wk[ky * 3], wk[ky * 3 + 1], wk[ky * 3 + 2]);
                // input row index iy = oy + ky - 1 must stay in [0, h)
                let oy_lo = 1usize.saturating_sub(ky);
                let oy_hi = (h + 1 - ky).min(h);
                for oy in oy_lo..oy_hi {
                    let iy = oy + ky - 1;
                    let xrow = &xplane[iy * w..(iy + 1) * w];
                    let orow = &mut op[oy * w..(oy + 1) * w];
                    if w == 1 {
                        orow[0] += w1 * xrow[0];
                        continue;
                    }
                    orow[0] += w1 * xrow[0] + w2 * xrow[1];
                    for (o, win) in orow[1..w - 1].iter_mut().zip(xrow.windows(3)) {
                        *o += w0 * win[0] + w1 * win[1] + w2 * win[2];
                    }
                    orow[w - 1] += w0 * xrow[w - 2] + w1 * xrow[w - 1];
                }
            }
        }
    });
}

/// Gradient of [`conv3x3`] with respect to its input: a 3x3 correlation of
/// `dy` with the channel-transposed, 180-degree-rotated weights.
pub fn conv3x3_backward_input<T: Elem>(
    dy: &[T],
    n: usize,
    cin: usize,
    h: usize,
    w: usize,
    wgt: &[T],
    cout: usize,
    dx: &mut [T],
) {
    let mut flipped = vec![T::zero(); cin * cout * 9];
    for co in 0..cout {
        for ci in 0..cin {
            for k in 0..9 {
                flipped[(ci * cout + co) * 9 + (8 - k)] = wgt[(co * cin + ci) * 9 + k];
            }
        }
    }
    conv3x3(dy, n, cout, h, w, &flipped, cin, None, dx);
}

/// Gradient of [`conv3x3`] with respect to the weights, accumulated into
/// `dw` (`[cout, cin, 3, 3]`).
pub fn conv3x3_backward_weights<T: Elem>(
    x: &[T],
    dy: &[T],
    n: usize,
    cin: usize,
    h: usize,
    w: usize,
    cout: usize,
    dw: &mut [T],
) {
    debug_assert_eq!(dw.len(), cout * cin * 9);
    let plane = h * w;
    dw.par_chunks_mut(cin * 9).enumerate().for_each(|(co, dwc)| {
        for ni in 0..n {
            let dyplane = &dy[(ni * cout + co) * plane..(ni * cout + co + 1) * plane];
            for ci in 0..cin {
                let xplane = &x[(ni * cin + ci) * plane..(ni * cin + ci + 1) * plane];
                for ky in 0..3usize {
                    let oy_lo = 1usize.saturating_sub(ky);
                    let oy_hi = (h + 1 - ky).min(h);
                    let mut acc = [T::zero(); 3];
                    for oy in oy_lo..oy_hi {
                        let iy = oy + ky - 1;
                        let dyrow = &dyplane[oy * w..(oy + 1) * w];
                        let xrow = &xplane[iy * w..(iy + 1) * w];
                        if w > 1 {
                            acc[0] += dot(&dyrow[1..], &xrow[..w - 1]);
                            acc[2] += dot(&dyrow[..w - 1], &xrow[1..]);
                        }
                        acc[1] += dot(dyrow, xrow);
                    }
                    for kx in 0..3 {
                        dwc[ci * 9 + ky * 3 + kx] += acc[kx];
                    }
                }
            }
        }
    });
}

/// Gradient of [`conv3x3`] with respect to the bias: `dy` summed over
/// batch and space, accumulated into `db` (`[cout]`).
pub fn conv3x3_backward_bias<T: Elem>(
    dy: &[T],
    n: usize,
    h: usize,
    w: usize,
    cout: usize,
    db: &mut [T],
) {
    let plane = h * w;
    for co in 0..cout {
        let mut acc = T::zero();
        for ni in 0..n {
            acc += sum(&dy[(ni * cout + co) * plane..(ni * cout + co + 1) * plane]);
        }
        db[co] += acc;
    }
}
