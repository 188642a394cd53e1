//! Minimal dense-tensor engine with reverse-mode automatic differentiation.
//!
//! Supports exactly the operations the denoising networks need: 3x3
//! stride-1 zero-padded convolution, ReLU, channel concatenation, mean L1
//! loss, and elementwise add/scale for combining losses. Recording happens
//! on a [`Graph`] (an append-only tape); [`Graph::backward`] replays it in
//! reverse to populate leaf gradients, accumulating when a leaf feeds
//! several nodes (the weight-sharing case of an unrolled recurrent net).
//!
//! Training runs in `f32`; gradient checks instantiate the same code with
//! `f64` through the [`Elem`] parameter.

pub mod gradcheck;
pub mod graph;
pub mod ops;
pub mod tensor;

pub use graph::{Graph, Var};
pub use tensor::{Tensor, TensorError};

use std::fmt::{Debug, Display};
use std::ops::AddAssign;

/// Scalar element type of tensors. Implemented for `f32` and `f64`.
pub trait Elem:
    num_traits::Float + AddAssign + Send + Sync + Debug + Display + Default + 'static
{
    fn from_f64(v: f64) -> Self;
    fn into_f64(self) -> f64;
}

impl Elem for f32 {
    #[inline(always)]
    fn from_f64(v: f64) -> Self {
        v as f32
    }
    #[inline(always)]
    fn into_f64(self) -> f64 {
        self as f64
    }
}

impl Elem for f64 {
    #[inline(always)]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline(always)]
    fn into_f64(self) -> f64 {
        self
    }
}

pub type Result<T> = std::result::Result<T, TensorError>;
