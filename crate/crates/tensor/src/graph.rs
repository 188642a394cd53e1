//! Append-only computation graph (Wengert tape).
//!
//! Every operation appends one node holding its output tensor; inputs are
//! referenced by [`Var`] indices that always point earlier in the list, so
//! walking the nodes in reverse append order is a valid reverse topological
//! traversal for backpropagation. A graph is confined to one thread while
//! recording and during backward.

use crate::ops;
use crate::tensor::{Tensor, TensorError};
use crate::{Elem, Result};

/// Handle to a node of one specific [`Graph`]. Only meaningful for the
/// graph that created it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Clone, Debug)]
enum Op<T> {
    Leaf,
    Conv2d,
    Relu,
    ConcatChannels,
    L1Loss,
    Add,
    Scale(T),
}

struct Node<T> {
    op: Op<T>,
    inputs: Vec<Var>,
    tensor: Tensor<T>,
}

pub struct Graph<T: Elem> {
    nodes: Vec<Node<T>>,
}

impl<T: Elem> Default for Graph<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Elem> Graph<T> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Inserts a tensor as a leaf. Its `requires_grad` flag decides whether
    /// backward produces a gradient for it.
    pub fn leaf(&mut self, tensor: Tensor<T>) -> Var {
        self.push(Op::Leaf, vec![], tensor)
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].tensor
    }

    /// Gradient of a node after [`Graph::backward`]; `None` if the node does
    /// not require gradients or backward has not run.
    pub fn grad(&self, v: Var) -> Option<&[T]> {
        self.nodes[v.0].tensor.grad()
    }

    fn push(&mut self, op: Op<T>, inputs: Vec<Var>, tensor: Tensor<T>) -> Var {
        debug_assert!(
            tensor.data().iter().all(|v| v.is_finite()),
            "non-finite value produced by {op:?}"
        );
        self.nodes.push(Node { op, inputs, tensor });
        Var(self.nodes.len() - 1)
    }

    fn any_requires_grad(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].tensor.requires_grad)
    }

    /// 3x3 stride-1 zero-padded convolution plus per-channel bias.
    /// `input` is `[n, cin, h, w]`, `weight` `[cout, cin, 3, 3]`, `bias`
    /// `[cout]`; the output keeps the spatial size.
    pub fn conv2d(&mut self, input: Var, weight: Var, bias: Var) -> Result<Var> {
        let (n, cin, h, w) = self.value(input).dims4("conv2d input")?;
        let wshape = self.value(weight).shape().to_vec();
        let (cout, wcin, kh, kw) = self.value(weight).dims4("conv2d weight")?;
        if kh != 3 || kw != 3 || wcin != cin {
            return Err(TensorError::ShapeMismatch {
                context: "conv2d weight (expects [cout, cin, 3, 3] matching input channels)",
                expected: vec![cout, cin, 3, 3],
                got: wshape,
            });
        }
        if self.value(bias).shape() != [cout] {
            return Err(TensorError::ShapeMismatch {
                context: "conv2d bias",
                expected: vec![cout],
                got: self.value(bias).shape().to_vec(),
            });
        }

        let mut out = Tensor::zeros(vec![n, cout, h, w]);
        ops::conv3x3(
            self.value(input).data(),
            n,
            cin,
            h,
            w,
            self.value(weight).data(),
            cout,
            Some(self.value(bias).data()),
            out.data_mut(),
        );
        out.requires_grad = self.any_requires_grad(&[input, weight, bias]);
        Ok(self.push(Op::Conv2d, vec![input, weight, bias], out))
    }

    /// Elementwise `max(0, x)`.
    pub fn relu(&mut self, input: Var) -> Var {
        let x = self.value(input);
        let mut out = Tensor::new(
            x.shape().to_vec(),
            x.data().iter().map(|&v| v.max(T::zero())).collect(),
        )
        .expect("same shape");
        out.requires_grad = x.requires_grad;
        self.push(Op::Relu, vec![input], out)
    }

    /// Concatenates along the channel axis in argument order.
    pub fn concat_channels(&mut self, inputs: &[Var]) -> Result<Var> {
        let first = *inputs.first().ok_or(TensorError::EmptyConcat)?;
        let (n, _, h, w) = self.value(first).dims4("concat_channels")?;
        let mut ctotal = 0;
        for &v in inputs {
            let (ni, ci, hi, wi) = self.value(v).dims4("concat_channels")?;
            if ni != n || hi != h || wi != w {
                return Err(TensorError::ShapeMismatch {
                    context: "concat_channels (inputs must agree on N, H, W)",
                    expected: vec![n, ci, h, w],
                    got: self.value(v).shape().to_vec(),
                });
            }
            ctotal += ci;
        }

        let plane = h * w;
        let mut data = vec![T::zero(); n * ctotal * plane];
        for ni in 0..n {
            let mut coff = 0;
            for &v in inputs {
                let t = self.value(v);
                let ci = t.shape()[1];
                let src = &t.data()[ni * ci * plane..(ni + 1) * ci * plane];
                data[(ni * ctotal + coff) * plane..(ni * ctotal + coff + ci) * plane]
                    .copy_from_slice(src);
                coff += ci;
            }
        }
        let mut out = Tensor::new(vec![n, ctotal, h, w], data).expect("sized above");
        out.requires_grad = self.any_requires_grad(inputs);
        Ok(self.push(Op::ConcatChannels, inputs.to_vec(), out))
    }

    /// Mean absolute difference over all elements (a scalar node).
    pub fn l1_loss(&mut self, pred: Var, target: Var) -> Result<Var> {
        if self.value(pred).shape() != self.value(target).shape() {
            return Err(TensorError::ShapeMismatch {
                context: "l1_loss",
                expected: self.value(pred).shape().to_vec(),
                got: self.value(target).shape().to_vec(),
            });
        }
        let p = self.value(pred).data();
        let t = self.value(target).data();
        let abs: Vec<T> = p.iter().zip(t).map(|(&a, &b)| (a - b).abs()).collect();
        let mean = ops::sum(&abs) / T::from_f64(abs.len() as f64);
        let mut out = Tensor::scalar(mean);
        out.requires_grad = self.any_requires_grad(&[pred, target]);
        Ok(self.push(Op::L1Loss, vec![pred, target], out))
    }

    /// Elementwise sum of two same-shape tensors.
    pub fn add(&mut self, lhs: Var, rhs: Var) -> Result<Var> {
        if self.value(lhs).shape() != self.value(rhs).shape() {
            return Err(TensorError::ShapeMismatch {
                context: "add",
                expected: self.value(lhs).shape().to_vec(),
                got: self.value(rhs).shape().to_vec(),
            });
        }
        let data: Vec<T> = self
            .value(lhs)
            .data()
            .iter()
            .zip(self.value(rhs).data())
            .map(|(&a, &b)| a + b)
            .collect();
        let mut out = Tensor::new(self.value(lhs).shape().to_vec(), data).expect("same shape");
        out.requires_grad = self.any_requires_grad(&[lhs, rhs]);
        Ok(self.push(Op::Add, vec![lhs, rhs], out))
    }

    /// Multiplication by a constant.
    pub fn scale(&mut self, input: Var, factor: T) -> Var {
        let x = self.value(input);
        let mut out = Tensor::new(
            x.shape().to_vec(),
            x.data().iter().map(|&v| v * factor).collect(),
        )
        .expect("same shape");
        out.requires_grad = x.requires_grad;
        self.push(Op::Scale(factor), vec![input], out)
    }

    /// Reverse-mode sweep from a scalar loss. Populates gradients on every
    /// node with `requires_grad`, accumulating where a node feeds several
    /// consumers (including reuse of the same weights across time steps).
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        let loss_node = &self.nodes[loss.0];
        if loss_node.tensor.numel() != 1 {
            return Err(TensorError::NonScalarLoss(
                loss_node.tensor.shape().to_vec(),
            ));
        }
        if !loss_node.tensor.requires_grad || matches!(loss_node.op, Op::Leaf) {
            return Err(TensorError::NoGraph);
        }

        for node in &mut self.nodes {
            if node.tensor.requires_grad {
                node.tensor.grad = Some(vec![T::zero(); node.tensor.numel()]);
            }
        }
        self.nodes[loss.0]
            .tensor
            .grad
            .as_mut()
            .expect("loss requires grad")[0] = T::one();

        for i in (0..=loss.0).rev() {
            let (before, rest) = self.nodes.split_at_mut(i);
            let node = &rest[0];
            if node.tensor.grad.is_none() {
                continue;
            }
            let grad = node.tensor.grad.as_deref().expect("checked above");
            match node.op {
                Op::Leaf => {}
                Op::Conv2d => backward_conv2d(before, node, grad),
                Op::Relu => {
                    let input = &mut before[node.inputs[0].0];
                    if let Some(mut dx) = input.tensor.grad.take() {
                        // gradient at exactly 0 is defined as 0
                        for ((d, &g), &v) in
                            dx.iter_mut().zip(grad).zip(input.tensor.data().iter())
                        {
                            if v > T::zero() {
                                *d += g;
                            }
                        }
                        input.tensor.grad = Some(dx);
                    }
                }
                Op::ConcatChannels => backward_concat(before, node, grad),
                Op::L1Loss => backward_l1(before, node, grad[0]),
                Op::Add => {
                    for &v in &node.inputs {
                        if let Some(dx) = before[v.0].tensor.grad.as_mut() {
                            for (d, &g) in dx.iter_mut().zip(grad) {
                                *d += g;
                            }
                        }
                    }
                }
                Op::Scale(factor) => {
                    if let Some(dx) = before[node.inputs[0].0].tensor.grad.as_mut() {
                        for (d, &g) in dx.iter_mut().zip(grad) {
                            *d += factor * g;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn backward_conv2d<T: Elem>(before: &mut [Node<T>], node: &Node<T>, dy: &[T]) {
    let (input, weight, bias) = (node.inputs[0], node.inputs[1], node.inputs[2]);
    let (n, cin, h, w) = before[input.0]
        .tensor
        .dims4("conv2d backward")
        .expect("validated at forward");
    let cout = before[weight.0].tensor.shape()[0];

    if before[input.0].tensor.grad.is_some() {
        let wdata = before[weight.0].tensor.data().to_vec();
        let dx = before[input.0]
            .tensor
            .grad
            .as_mut()
            .expect("checked above");
        let mut dxi = vec![T::zero(); dx.len()];
        ops::conv3x3_backward_input(dy, n, cin, h, w, &wdata, cout, &mut dxi);
        for (d, g) in dx.iter_mut().zip(dxi) {
            *d += g;
        }
    }
    if before[weight.0].tensor.grad.is_some() {
        let xdata = before[input.0].tensor.data().to_vec();
        let dw = before[weight.0]
            .tensor
            .grad
            .as_mut()
            .expect("checked above");
        ops::conv3x3_backward_weights(&xdata, dy, n, cin, h, w, cout, dw);
    }
    if let Some(db) = before[bias.0].tensor.grad.as_mut() {
        ops::conv3x3_backward_bias(dy, n, h, w, cout, db);
    }
}

fn backward_concat<T: Elem>(before: &mut [Node<T>], node: &Node<T>, dy: &[T]) {
    let out_c: usize = node.tensor.shape()[1];
    let (n, _, h, w) = node.tensor.dims4("concat backward").expect("rank 4");
    let plane = h * w;
    let mut coff = 0;
    for &v in &node.inputs {
        let ci = before[v.0].tensor.shape()[1];
        if let Some(dx) = before[v.0].tensor.grad.as_mut() {
            for ni in 0..n {
                let src = &dy[(ni * out_c + coff) * plane..(ni * out_c + coff + ci) * plane];
                let dst = &mut dx[ni * ci * plane..(ni + 1) * ci * plane];
                for (d, &g) in dst.iter_mut().zip(src) {
                    *d += g;
                }
            }
        }
        coff += ci;
    }
}

fn backward_l1<T: Elem>(before: &mut [Node<T>], node: &Node<T>, upstream: T) {
    let (pred, target) = (node.inputs[0], node.inputs[1]);
    let numel = before[pred.0].tensor.numel();
    let scale = upstream / T::from_f64(numel as f64);
    // sign(pred - target) with the subgradient at 0 fixed to 0
    let signs: Vec<T> = before[pred.0]
        .tensor
        .data()
        .iter()
        .zip(before[target.0].tensor.data())
        .map(|(&p, &t)| {
            if p > t {
                T::one()
            } else if p < t {
                -T::one()
            } else {
                T::zero()
            }
        })
        .collect();
    if let Some(dp) = before[pred.0].tensor.grad.as_mut() {
        for (d, &s) in dp.iter_mut().zip(&signs) {
            *d += scale * s;
        }
    }
    if let Some(dt) = before[target.0].tensor.grad.as_mut() {
        for (d, &s) in dt.iter_mut().zip(&signs) {
            *d += -(scale * s);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conv_constant_input_all_ones_kernel() {
        let mut g = Graph::<f64>::new();
        let c = 0.7;
        let x = g.leaf(Tensor::full(vec![1, 1, 3, 3], c));
        let w = g.leaf(Tensor::full(vec![1, 1, 3, 3], 1.0));
        let b = g.leaf(Tensor::zeros(vec![1]));
        let y = g.conv2d(x, w, b).unwrap();
        let out = g.value(y).data();
        // zero padding: center sees all 9 taps, corners see 4
        assert!((out[4] - 9.0 * c).abs() < 1e-12);
        for corner in [0, 2, 6, 8] {
            assert!((out[corner] - 4.0 * c).abs() < 1e-12);
        }
    }

    #[test]
    fn conv_identity_kernel() {
        let mut g = Graph::<f64>::new();
        let data: Vec<f64> = (0..2 * 4 * 5).map(|i| i as f64 * 0.1).collect();
        let x = g.leaf(Tensor::new(vec![1, 2, 4, 5], data.clone()).unwrap());
        let mut wdata = vec![0.0; 2 * 2 * 9];
        // per-output-channel identity: center tap of the matching input channel
        wdata[4] = 1.0;
        wdata[(1 * 2 + 1) * 9 + 4] = 1.0;
        let w = g.leaf(Tensor::new(vec![2, 2, 3, 3], wdata).unwrap());
        let b = g.leaf(Tensor::zeros(vec![2]));
        let y = g.conv2d(x, w, b).unwrap();
        assert_eq!(g.value(y).data(), data.as_slice());
    }

    #[test]
    fn conv_rejects_channel_mismatch() {
        let mut g = Graph::<f32>::new();
        let x = g.leaf(Tensor::zeros(vec![1, 3, 4, 4]));
        let w = g.leaf(Tensor::zeros(vec![2, 4, 3, 3]));
        let b = g.leaf(Tensor::zeros(vec![2]));
        assert!(matches!(
            g.conv2d(x, w, b),
            Err(TensorError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn relu_basic() {
        let mut g = Graph::<f32>::new();
        let x = g.leaf(Tensor::new(vec![3], vec![-1.0, 0.0, 2.0]).unwrap());
        let y = g.relu(x);
        assert_eq!(g.value(y).data(), &[0.0, 0.0, 2.0]);
    }

    #[test]
    fn relu_all_negative_zero_grad() {
        let mut g = Graph::<f64>::new();
        let x = g.leaf(Tensor::full(vec![2, 3], -1.5).tracked());
        let y = g.relu(x);
        let t = g.leaf(Tensor::zeros(vec![2, 3]));
        let loss = g.l1_loss(y, t).unwrap();
        g.backward(loss).unwrap();
        assert!(g.value(y).data().iter().all(|&v| v == 0.0));
        assert!(g.grad(x).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn concat_orders_channels_and_handles_single_input() {
        let mut g = Graph::<f32>::new();
        let a = g.leaf(Tensor::full(vec![1, 2, 2, 2], 1.0));
        let b = g.leaf(Tensor::full(vec![1, 3, 2, 2], 2.0));
        let y = g.concat_channels(&[a, b]).unwrap();
        assert_eq!(g.value(y).shape(), &[1, 5, 2, 2]);
        assert!(g.value(y).data()[..8].iter().all(|&v| v == 1.0));
        assert!(g.value(y).data()[8..].iter().all(|&v| v == 2.0));

        let single = g.concat_channels(&[a]).unwrap();
        assert_eq!(g.value(single).data(), g.value(a).data());
    }

    #[test]
    fn concat_grad_is_identity_on_inputs() {
        let mut g = Graph::<f64>::new();
        let a = g.leaf(Tensor::full(vec![1, 2, 2, 2], 0.3).tracked());
        let b = g.leaf(Tensor::full(vec![1, 1, 2, 2], 0.8).tracked());
        let y = g.concat_channels(&[a, b]).unwrap();
        // target one below the output: sign is +1 everywhere, so the
        // numel-scaled loss has gradient exactly 1 per element
        let t = g.leaf(Tensor::new(
            vec![1, 3, 2, 2],
            g.value(y).data().iter().map(|v| v - 1.0).collect(),
        )
        .unwrap());
        let l1 = g.l1_loss(y, t).unwrap();
        let numel = g.value(y).numel() as f64;
        let loss = g.scale(l1, numel);
        g.backward(loss).unwrap();
        assert!(g.grad(a).unwrap().iter().all(|&v| (v - 1.0).abs() < 1e-12));
        assert!(g.grad(b).unwrap().iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn concat_rejects_spatial_mismatch() {
        let mut g = Graph::<f32>::new();
        let a = g.leaf(Tensor::zeros(vec![1, 2, 2, 2]));
        let b = g.leaf(Tensor::zeros(vec![1, 2, 3, 2]));
        assert!(matches!(
            g.concat_channels(&[a, b]),
            Err(TensorError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn l1_identity_and_offset() {
        let mut g = Graph::<f64>::new();
        let a = g.leaf(Tensor::full(vec![4, 4], 0.25));
        let same = g.l1_loss(a, a).unwrap();
        assert_eq!(g.value(same).item(), 0.0);

        let b = g.leaf(Tensor::full(vec![4, 4], 0.75));
        let off = g.l1_loss(b, a).unwrap();
        assert!((g.value(off).item() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn backward_accumulates_shared_weight_across_steps() {
        // y2 = w * (w * x) through two center-tap convolutions; with
        // pred > 0 the loss |y2 - 0| has d/dw = 2 * w * x.
        let mut g = Graph::<f64>::new();
        let x = g.leaf(Tensor::new(vec![1, 1, 1, 1], vec![3.0]).unwrap());
        let mut wdata = vec![0.0; 9];
        wdata[4] = 0.5;
        let w = g.leaf(Tensor::new(vec![1, 1, 3, 3], wdata).unwrap().tracked());
        let b = g.leaf(Tensor::zeros(vec![1]));
        let y1 = g.conv2d(x, w, b).unwrap();
        let y2 = g.conv2d(y1, w, b).unwrap();
        let zero = g.leaf(Tensor::zeros(vec![1, 1, 1, 1]));
        let loss = g.l1_loss(y2, zero).unwrap();
        g.backward(loss).unwrap();
        let dw = g.grad(w).unwrap();
        assert!((dw[4] - 2.0 * 0.5 * 3.0).abs() < 1e-12);
    }

    #[test]
    fn leaf_off_path_keeps_zero_grad() {
        let mut g = Graph::<f64>::new();
        let a = g.leaf(Tensor::full(vec![2], 1.0).tracked());
        let unused = g.leaf(Tensor::full(vec![2], 5.0).tracked());
        let t = g.leaf(Tensor::zeros(vec![2]));
        let loss = g.l1_loss(a, t).unwrap();
        g.backward(loss).unwrap();
        assert!(g.grad(unused).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn backward_errors() {
        let mut g = Graph::<f64>::new();
        let leaf = g.leaf(Tensor::scalar(1.0).tracked());
        assert!(matches!(g.backward(leaf), Err(TensorError::NoGraph)));

        let a = g.leaf(Tensor::full(vec![2], 1.0).tracked());
        let b = g.leaf(Tensor::full(vec![2], 1.0));
        let y = g.add(a, b).unwrap();
        assert!(matches!(
            g.backward(y),
            Err(TensorError::NonScalarLoss(_))
        ));

        let untracked = g.leaf(Tensor::full(vec![1], 1.0));
        let t = g.leaf(Tensor::zeros(vec![1]));
        let loss = g.l1_loss(untracked, t).unwrap();
        assert!(matches!(g.backward(loss), Err(TensorError::NoGraph)));
    }
}
