//! Central finite differences for verifying analytic gradients.
//!
//! These helpers evaluate a closure on perturbed copies of the input and
//! never touch the backward pass, so they stay independent of the code they
//! check. Intended for `f64`; h = 1e-4 is the usual step there.

use crate::Elem;

/// Central-difference gradient of `f` at `x`: `(f(x+h*e_i) - f(x-h*e_i)) / 2h`.
pub fn central_difference<T: Elem, F>(mut f: F, x: &[T], h: T) -> Vec<T>
where
    F: FnMut(&[T]) -> T,
{
    let mut grad = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let fp = f(&probe);
        probe[i] = x[i] - h;
        let fm = f(&probe);
        probe[i] = x[i];
        grad.push((fp - fm) / (h + h));
    }
    grad
}

/// Relative error between an analytic and a numeric gradient entry,
/// normalized by `max(|a|, |b|, floor)`.
pub fn relative_error<T: Elem>(a: T, b: T, floor: T) -> T {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Largest relative error over two gradients, skipping entries where
/// `mask` says the function is too close to a non-differentiable point.
pub fn max_relative_error<T: Elem>(
    analytic: &[T],
    numeric: &[T],
    floor: T,
    mask: impl Fn(usize) -> bool,
) -> T {
    assert_eq!(analytic.len(), numeric.len());
    let mut worst = T::zero();
    for (i, (&a, &n)) in analytic.iter().zip(numeric).enumerate() {
        if !mask(i) {
            continue;
        }
        worst = worst.max(relative_error(a, n, floor));
    }
    worst
}
