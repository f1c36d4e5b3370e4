//! Recording tape for reverse-mode differentiation.
//!
//! Every op appends a node holding its forward value, so nodes are already
//! in topological order and backward is a single reverse sweep.

use std::collections::{HashMap, HashSet};

use rand::Rng;

use crate::error::{CoreError, Result};
use crate::kernels::{self, ConvGeom, NormCache};
use crate::param::{ParamId, ParamSet};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Activation {
    LeakyRelu(f64),
    Relu,
    Tanh,
    Sigmoid,
}

enum Op<T> {
    Leaf,
    Conv2d {
        input: Var,
        weight: Var,
        bias: Option<Var>,
        geom: ConvGeom,
    },
    ConvTranspose2d {
        input: Var,
        weight: Var,
        bias: Option<Var>,
        geom: ConvGeom,
    },
    InstanceNorm {
        input: Var,
        gamma: Var,
        beta: Var,
        cache: NormCache<T>,
    },
    Act {
        input: Var,
        kind: Activation,
    },
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, T),
    AddScalar(Var),
    Sum(Var),
    Mean(Var),
    Concat(Vec<Var>),
    AvgPool2(Var),
    Dropout {
        input: Var,
        mask: Vec<T>,
    },
    L1 {
        a: Var,
        b: Var,
    },
    NegLogMean {
        input: Var,
        complement: bool,
        eps: T,
    },
}

struct Node<T> {
    value: Tensor<T>,
    grad: Option<Tensor<T>>,
    requires_grad: bool,
    op: Op<T>,
    param: Option<(u64, ParamId)>,
}

pub struct Tape<T> {
    nodes: Vec<Node<T>>,
    frozen: HashSet<u64>,
    bound: HashMap<(u64, ParamId), Var>,
}

impl<T: Scalar> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Tape<T> {
    pub fn new() -> Self {
        Self {
            nodes: Vec::new(),
            frozen: HashSet::new(),
            bound: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Tensor<T>, requires_grad: bool, op: Op<T>) -> Var {
        self.nodes.push(Node {
            value,
            grad: None,
            requires_grad,
            op,
            param: None,
        });
        Var(self.nodes.len() - 1)
    }

    fn node(&self, v: Var) -> &Node<T> {
        &self.nodes[v.0]
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    pub fn value(&self, v: Var) -> &Tensor<T> {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    pub fn grad(&self, v: Var) -> Option<&Tensor<T>> {
        self.nodes[v.0].grad.as_ref()
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.needs(v)
    }

    /// Leaf that receives a gradient.
    pub fn variable(&mut self, value: Tensor<T>) -> Var {
        self.push(value, true, Op::Leaf)
    }

    /// Leaf excluded from differentiation.
    pub fn constant(&mut self, value: Tensor<T>) -> Var {
        self.push(value, false, Op::Leaf)
    }

    /// Copy of `v` as a constant leaf; gradients stop here.
    pub fn detach(&mut self, v: Var) -> Var {
        let value = self.nodes[v.0].value.clone();
        self.constant(value)
    }

    /// Parameters of `set` bound after this call enter the tape as
    /// constants, so no gradient flows into them.
    pub fn freeze(&mut self, set: &ParamSet<T>) {
        self.frozen.insert(set.uid());
    }

    /// Leaf for a parameter. Repeated calls return the same node, so a
    /// network applied twice accumulates both contributions.
    pub fn param(&mut self, set: &ParamSet<T>, id: ParamId) -> Var {
        let key = (set.uid(), id);
        if let Some(&v) = self.bound.get(&key) {
            return v;
        }
        let trainable = !self.frozen.contains(&set.uid());
        let v = self.push(set.get(id).value.clone(), trainable, Op::Leaf);
        self.nodes[v.0].param = Some(key);
        self.bound.insert(key, v);
        v
    }

    pub fn conv2d(
        &mut self,
        input: Var,
        weight: Var,
        bias: Option<Var>,
        stride: usize,
        padding: usize,
    ) -> Result<Var> {
        let (n, c, h, w) = self.value(input).dims4()?;
        let (o, i, kh, kw) = self.value(weight).dims4()?;
        let mismatch = || CoreError::ShapeMismatch {
            op: "conv2d",
            lhs: self.shape(input).to_vec(),
            rhs: self.shape(weight).to_vec(),
        };
        if i != c || kh != kw {
            return Err(mismatch());
        }
        if stride == 0 {
            return Err(CoreError::contract("conv2d", "stride must be positive"));
        }
        if h + 2 * padding < kh || w + 2 * padding < kw {
            return Err(mismatch());
        }
        if let Some(b) = bias {
            if self.shape(b) != [o] {
                return Err(CoreError::ShapeMismatch {
                    op: "conv2d bias",
                    lhs: self.shape(weight).to_vec(),
                    rhs: self.shape(b).to_vec(),
                });
            }
        }
        let geom = ConvGeom {
            channels: c,
            height: h,
            width: w,
            kernel: kh,
            stride,
            padding,
            out_height: (h + 2 * padding - kh) / stride + 1,
            out_width: (w + 2 * padding - kw) / stride + 1,
        };
        let data = kernels::conv2d_forward(
            &geom,
            n,
            o,
            self.value(input).data(),
            self.value(weight).data(),
            bias.map(|b| self.value(b).data()),
        );
        let value = Tensor::new([n, o, geom.out_height, geom.out_width], data)?;
        let rg = self.needs(input) || self.needs(weight) || bias.is_some_and(|b| self.needs(b));
        Ok(self.push(
            value,
            rg,
            Op::Conv2d {
                input,
                weight,
                bias,
                geom,
            },
        ))
    }

    /// Transposed convolution with weight laid out `Cin × Cout × K × K`.
    pub fn conv_transpose2d(
        &mut self,
        input: Var,
        weight: Var,
        bias: Option<Var>,
        stride: usize,
        padding: usize,
    ) -> Result<Var> {
        let (n, cin, h, w) = self.value(input).dims4()?;
        let (wi, cout, kh, kw) = self.value(weight).dims4()?;
        let mismatch = || CoreError::ShapeMismatch {
            op: "conv_transpose2d",
            lhs: self.shape(input).to_vec(),
            rhs: self.shape(weight).to_vec(),
        };
        if wi != cin || kh != kw {
            return Err(mismatch());
        }
        if stride == 0 {
            return Err(CoreError::contract("conv_transpose2d", "stride must be positive"));
        }
        let oh = (h - 1) * stride + kh;
        let ow = (w - 1) * stride + kw;
        if oh <= 2 * padding || ow <= 2 * padding {
            return Err(mismatch());
        }
        if let Some(b) = bias {
            if self.shape(b) != [cout] {
                return Err(CoreError::ShapeMismatch {
                    op: "conv_transpose2d bias",
                    lhs: self.shape(weight).to_vec(),
                    rhs: self.shape(b).to_vec(),
                });
            }
        }
        let geom = ConvGeom {
            channels: cout,
            height: oh - 2 * padding,
            width: ow - 2 * padding,
            kernel: kh,
            stride,
            padding,
            out_height: h,
            out_width: w,
        };
        let data = kernels::conv_transpose2d_forward(
            &geom,
            n,
            cin,
            self.value(input).data(),
            self.value(weight).data(),
            bias.map(|b| self.value(b).data()),
        );
        let value = Tensor::new([n, cout, geom.height, geom.width], data)?;
        let rg = self.needs(input) || self.needs(weight) || bias.is_some_and(|b| self.needs(b));
        Ok(self.push(
            value,
            rg,
            Op::ConvTranspose2d {
                input,
                weight,
                bias,
                geom,
            },
        ))
    }

    pub fn instance_norm(&mut self, input: Var, gamma: Var, beta: Var, eps: f64) -> Result<Var> {
        let (n, c, h, w) = self.value(input).dims4()?;
        for p in [gamma, beta] {
            if self.shape(p) != [c] {
                return Err(CoreError::ShapeMismatch {
                    op: "instance_norm",
                    lhs: self.shape(input).to_vec(),
                    rhs: self.shape(p).to_vec(),
                });
            }
        }
        if eps <= 0.0 {
            return Err(CoreError::contract("instance_norm", "eps must be positive"));
        }
        let (data, cache) = kernels::instance_norm_forward(
            self.value(input).data(),
            n,
            c,
            h * w,
            self.value(gamma).data(),
            self.value(beta).data(),
            T::from_f64_lossy(eps),
        );
        let value = Tensor::new([n, c, h, w], data)?;
        let rg = self.needs(input) || self.needs(gamma) || self.needs(beta);
        Ok(self.push(
            value,
            rg,
            Op::InstanceNorm {
                input,
                gamma,
                beta,
                cache,
            },
        ))
    }

    pub fn activation(&mut self, input: Var, kind: Activation) -> Var {
        let x = self.value(input);
        let f: Box<dyn Fn(T) -> T> = match kind {
            Activation::LeakyRelu(slope) => {
                let s = T::from_f64_lossy(slope);
                Box::new(move |v| if v > T::zero() { v } else { v * s })
            }
            Activation::Relu => Box::new(|v: T| v.max(T::zero())),
            Activation::Tanh => Box::new(|v: T| v.tanh()),
            Activation::Sigmoid => Box::new(|v: T| T::one() / (T::one() + (-v).exp())),
        };
        let value = Tensor::new(x.shape().to_vec(), x.data().iter().map(|&v| f(v)).collect())
            .expect("same shape");
        let rg = self.needs(input);
        self.push(value, rg, Op::Act { input, kind })
    }

    pub fn leaky_relu(&mut self, input: Var, slope: f64) -> Var {
        self.activation(input, Activation::LeakyRelu(slope))
    }

    pub fn relu(&mut self, input: Var) -> Var {
        self.activation(input, Activation::Relu)
    }

    pub fn tanh(&mut self, input: Var) -> Var {
        self.activation(input, Activation::Tanh)
    }

    pub fn sigmoid(&mut self, input: Var) -> Var {
        self.activation(input, Activation::Sigmoid)
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        if self.shape(a) != self.shape(b) {
            return Err(CoreError::ShapeMismatch {
                op,
                lhs: self.shape(a).to_vec(),
                rhs: self.shape(b).to_vec(),
            });
        }
        Ok(())
    }

    fn zip_map(&self, a: Var, b: Var, f: impl Fn(T, T) -> T) -> Tensor<T> {
        let (x, y) = (self.value(a), self.value(b));
        Tensor::new(
            x.shape().to_vec(),
            x.data().iter().zip(y.data()).map(|(&p, &q)| f(p, q)).collect(),
        )
        .expect("same shape")
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("add", a, b)?;
        let value = self.zip_map(a, b, |p, q| p + q);
        let rg = self.needs(a) || self.needs(b);
        Ok(self.push(value, rg, Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("sub", a, b)?;
        let value = self.zip_map(a, b, |p, q| p - q);
        let rg = self.needs(a) || self.needs(b);
        Ok(self.push(value, rg, Op::Sub(a, b)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("mul", a, b)?;
        let value = self.zip_map(a, b, |p, q| p * q);
        let rg = self.needs(a) || self.needs(b);
        Ok(self.push(value, rg, Op::Mul(a, b)))
    }

    pub fn scale(&mut self, a: Var, factor: T) -> Var {
        let x = self.value(a);
        let value = Tensor::new(x.shape().to_vec(), x.data().iter().map(|&v| v * factor).collect())
            .expect("same shape");
        let rg = self.needs(a);
        self.push(value, rg, Op::Scale(a, factor))
    }

    pub fn add_scalar(&mut self, a: Var, offset: T) -> Var {
        let x = self.value(a);
        let value = Tensor::new(x.shape().to_vec(), x.data().iter().map(|&v| v + offset).collect())
            .expect("same shape");
        let rg = self.needs(a);
        self.push(value, rg, Op::AddScalar(a))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).data().iter().copied().sum::<T>();
        let rg = self.needs(a);
        self.push(Tensor::scalar(s), rg, Op::Sum(a))
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let s = x.data().iter().copied().sum::<T>() / T::from_usize_lossy(x.numel());
        let rg = self.needs(a);
        self.push(Tensor::scalar(s), rg, Op::Mean(a))
    }

    /// Concatenate 4-D tensors along the channel axis.
    pub fn concat_channels(&mut self, parts: &[Var]) -> Result<Var> {
        let first = *parts
            .first()
            .ok_or_else(|| CoreError::contract("concat_channels", "nothing to concatenate"))?;
        let (n, _, h, w) = self.value(first).dims4()?;
        let mut channels = Vec::with_capacity(parts.len());
        for &p in parts {
            let (pn, pc, ph, pw) = self.value(p).dims4()?;
            if (pn, ph, pw) != (n, h, w) {
                return Err(CoreError::ShapeMismatch {
                    op: "concat_channels",
                    lhs: self.shape(first).to_vec(),
                    rhs: self.shape(p).to_vec(),
                });
            }
            channels.push(pc);
        }
        let total: usize = channels.iter().sum();
        let plane = h * w;
        let mut data = Vec::with_capacity(n * total * plane);
        for b in 0..n {
            for (&p, &c) in parts.iter().zip(&channels) {
                data.extend_from_slice(&self.value(p).data()[b * c * plane..(b + 1) * c * plane]);
            }
        }
        let value = Tensor::new([n, total, h, w], data)?;
        let rg = parts.iter().any(|&p| self.needs(p));
        Ok(self.push(value, rg, Op::Concat(parts.to_vec())))
    }

    /// 2×2 average pooling with stride 2; spatial extents must be even.
    pub fn avg_pool2(&mut self, input: Var) -> Result<Var> {
        let (n, c, h, w) = self.value(input).dims4()?;
        if h % 2 != 0 || w % 2 != 0 {
            return Err(CoreError::InvalidShape {
                shape: self.shape(input).to_vec(),
                reason: "avg_pool2 needs even spatial extents".into(),
            });
        }
        let (oh, ow) = (h / 2, w / 2);
        let x = self.value(input).data();
        let quarter = T::from_f64_lossy(0.25);
        let mut data = vec![T::zero(); n * c * oh * ow];
        for plane in 0..n * c {
            let src = &x[plane * h * w..(plane + 1) * h * w];
            let dst = &mut data[plane * oh * ow..(plane + 1) * oh * ow];
            for y in 0..oh {
                for xx in 0..ow {
                    let s = src[2 * y * w + 2 * xx]
                        + src[2 * y * w + 2 * xx + 1]
                        + src[(2 * y + 1) * w + 2 * xx]
                        + src[(2 * y + 1) * w + 2 * xx + 1];
                    dst[y * ow + xx] = s * quarter;
                }
            }
        }
        let value = Tensor::new([n, c, oh, ow], data)?;
        let rg = self.needs(input);
        Ok(self.push(value, rg, Op::AvgPool2(input)))
    }

    /// Inverted dropout: kept units are scaled by `1 / (1 - rate)`.
    pub fn dropout(&mut self, input: Var, rate: f64, rng: &mut impl Rng) -> Result<Var> {
        if !(0.0..1.0).contains(&rate) {
            return Err(CoreError::contract("dropout", format!("rate {rate} outside [0, 1)")));
        }
        let keep = T::from_f64_lossy(1.0 / (1.0 - rate));
        let n = self.value(input).numel();
        let mask: Vec<T> = (0..n)
            .map(|_| if rng.random::<f64>() < rate { T::zero() } else { keep })
            .collect();
        let x = self.value(input);
        let value = Tensor::new(
            x.shape().to_vec(),
            x.data().iter().zip(&mask).map(|(&v, &m)| v * m).collect(),
        )?;
        let rg = self.needs(input);
        Ok(self.push(value, rg, Op::Dropout { input, mask }))
    }

    /// Mean absolute difference.
    pub fn l1_loss(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("l1_loss", a, b)?;
        let (x, y) = (self.value(a), self.value(b));
        let s = x
            .data()
            .iter()
            .zip(y.data())
            .map(|(&p, &q)| (p - q).abs())
            .sum::<T>()
            / T::from_usize_lossy(x.numel());
        let rg = self.needs(a) || self.needs(b);
        Ok(self.push(Tensor::scalar(s), rg, Op::L1 { a, b }))
    }

    /// `-mean(log s)` or, with `complement`, `-mean(log(1 - s))`, with
    /// scores clamped to `[eps, 1 - eps]`. Scores outside `[0, 1]` are
    /// rejected.
    pub fn neg_log_mean(&mut self, scores: Var, complement: bool, eps: f64) -> Result<Var> {
        let x = self.value(scores);
        if x.data().iter().any(|v| !v.is_finite()) {
            return Err(CoreError::NonFinite("neg_log_mean: non-finite discriminator score".into()));
        }
        if let Some(bad) = x.data().iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(CoreError::contract(
                "neg_log_mean",
                format!("score {bad} outside [0, 1]"),
            ));
        }
        let e = T::from_f64_lossy(eps);
        let hi = T::one() - e;
        let s = x
            .data()
            .iter()
            .map(|&v| {
                let c = v.max(e).min(hi);
                -(if complement { T::one() - c } else { c }).ln()
            })
            .sum::<T>()
            / T::from_usize_lossy(x.numel());
        let rg = self.needs(scores);
        Ok(self.push(
            Tensor::scalar(s),
            rg,
            Op::NegLogMean {
                input: scores,
                complement,
                eps: e,
            },
        ))
    }

    /// Reverse sweep from a scalar `loss`. Gradients accumulate into every
    /// reachable node that requires them; call again to add more.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if loss.0 >= self.nodes.len() {
            return Err(CoreError::contract("backward", "loss is not on this tape"));
        }
        if self.node(loss).value.numel() != 1 {
            return Err(CoreError::contract(
                "backward",
                format!("loss must be scalar, got shape {:?}", self.shape(loss)),
            ));
        }
        if !self.needs(loss) {
            return Ok(());
        }
        let mut grads: Vec<Option<Vec<T>>> = (0..=loss.0).map(|_| None).collect();
        grads[loss.0] = Some(vec![T::one()]);
        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else {
                continue;
            };
            for (target, contrib) in self.contributions(idx, &g) {
                match grads[target.0].as_mut() {
                    Some(acc) => {
                        for (a, c) in acc.iter_mut().zip(contrib) {
                            *a += c;
                        }
                    }
                    None => grads[target.0] = Some(contrib),
                }
            }
            let node = &mut self.nodes[idx];
            match node.grad.as_mut() {
                Some(acc) => {
                    for (a, &c) in acc.data_mut().iter_mut().zip(&g) {
                        *a += c;
                    }
                }
                None => {
                    node.grad = Some(Tensor::new(node.value.shape().to_vec(), g)?);
                }
            }
        }
        Ok(())
    }

    /// Add the gradients of `set`'s parameter leaves into `set`. Returns the
    /// number of parameters that received a gradient.
    pub fn accumulate_param_grads(&self, set: &mut ParamSet<T>) -> usize {
        let mut touched = 0;
        for node in &self.nodes {
            if let (Some((uid, id)), Some(g)) = (node.param, node.grad.as_ref()) {
                if uid == set.uid() {
                    set.accumulate(id, g.data());
                    touched += 1;
                }
            }
        }
        touched
    }

    fn contributions(&self, idx: usize, g: &[T]) -> Vec<(Var, Vec<T>)> {
        let node = &self.nodes[idx];
        let mut out = Vec::new();
        match &node.op {
            Op::Leaf => {}
            Op::Conv2d {
                input,
                weight,
                bias,
                geom,
            } => {
                let (n, o) = (node.value.shape()[0], node.value.shape()[1]);
                let want = (
                    self.needs(*input),
                    self.needs(*weight),
                    bias.is_some_and(|b| self.needs(b)),
                );
                let grads = kernels::conv2d_backward(
                    geom,
                    n,
                    o,
                    self.value(*input).data(),
                    self.value(*weight).data(),
                    g,
                    want,
                );
                push_opt(&mut out, *input, grads.input);
                push_opt(&mut out, *weight, grads.weight);
                if let Some(b) = bias {
                    push_opt(&mut out, *b, grads.bias);
                }
            }
            Op::ConvTranspose2d {
                input,
                weight,
                bias,
                geom,
            } => {
                let (n, cin) = (self.shape(*input)[0], self.shape(*input)[1]);
                let want = (
                    self.needs(*input),
                    self.needs(*weight),
                    bias.is_some_and(|b| self.needs(b)),
                );
                let grads = kernels::conv_transpose2d_backward(
                    geom,
                    n,
                    cin,
                    self.value(*input).data(),
                    self.value(*weight).data(),
                    g,
                    want,
                );
                push_opt(&mut out, *input, grads.input);
                push_opt(&mut out, *weight, grads.weight);
                if let Some(b) = bias {
                    push_opt(&mut out, *b, grads.bias);
                }
            }
            Op::InstanceNorm {
                input,
                gamma,
                beta,
                cache,
            } => {
                let [n, c, h, w] = node.value.shape()[..] else {
                    unreachable!("instance norm output is 4-D")
                };
                let (dx, dg, db) = kernels::instance_norm_backward(
                    cache,
                    n,
                    c,
                    h * w,
                    self.value(*gamma).data(),
                    g,
                );
                if self.needs(*input) {
                    out.push((*input, dx));
                }
                if self.needs(*gamma) {
                    out.push((*gamma, dg));
                }
                if self.needs(*beta) {
                    out.push((*beta, db));
                }
            }
            Op::Act { input, kind } => {
                let x = self.value(*input).data();
                let y = node.value.data();
                let d: Vec<T> = match *kind {
                    Activation::LeakyRelu(slope) => {
                        let s = T::from_f64_lossy(slope);
                        x.iter()
                            .zip(g)
                            .map(|(&v, &gv)| {
                                if v > T::zero() {
                                    gv
                                } else if v < T::zero() {
                                    gv * s
                                } else {
                                    T::zero()
                                }
                            })
                            .collect()
                    }
                    Activation::Relu => x
                        .iter()
                        .zip(g)
                        .map(|(&v, &gv)| if v > T::zero() { gv } else { T::zero() })
                        .collect(),
                    Activation::Tanh => y
                        .iter()
                        .zip(g)
                        .map(|(&v, &gv)| gv * (T::one() - v * v))
                        .collect(),
                    Activation::Sigmoid => y
                        .iter()
                        .zip(g)
                        .map(|(&v, &gv)| gv * v * (T::one() - v))
                        .collect(),
                };
                out.push((*input, d));
            }
            Op::Add(a, b) => {
                if self.needs(*a) {
                    out.push((*a, g.to_vec()));
                }
                if self.needs(*b) {
                    out.push((*b, g.to_vec()));
                }
            }
            Op::Sub(a, b) => {
                if self.needs(*a) {
                    out.push((*a, g.to_vec()));
                }
                if self.needs(*b) {
                    out.push((*b, g.iter().map(|&v| -v).collect()));
                }
            }
            Op::Mul(a, b) => {
                if self.needs(*a) {
                    let y = self.value(*b).data();
                    out.push((*a, g.iter().zip(y).map(|(&p, &q)| p * q).collect()));
                }
                if self.needs(*b) {
                    let x = self.value(*a).data();
                    out.push((*b, g.iter().zip(x).map(|(&p, &q)| p * q).collect()));
                }
            }
            Op::Scale(a, factor) => out.push((*a, g.iter().map(|&v| v * *factor).collect())),
            Op::AddScalar(a) => out.push((*a, g.to_vec())),
            Op::Sum(a) => out.push((*a, vec![g[0]; self.value(*a).numel()])),
            Op::Mean(a) => {
                let n = self.value(*a).numel();
                out.push((*a, vec![g[0] / T::from_usize_lossy(n); n]));
            }
            Op::Concat(parts) => {
                let [n, total, h, w] = node.value.shape()[..] else {
                    unreachable!("concat output is 4-D")
                };
                let plane = h * w;
                let mut offset = 0;
                for &p in parts {
                    let c = self.shape(p)[1];
                    if self.needs(p) {
                        let mut d = Vec::with_capacity(n * c * plane);
                        for b in 0..n {
                            let start = (b * total + offset) * plane;
                            d.extend_from_slice(&g[start..start + c * plane]);
                        }
                        out.push((p, d));
                    }
                    offset += c;
                }
            }
            Op::AvgPool2(input) => {
                let [n, c, h, w] = self.shape(*input)[..] else {
                    unreachable!("pool input is 4-D")
                };
                let (oh, ow) = (h / 2, w / 2);
                let quarter = T::from_f64_lossy(0.25);
                let mut d = vec![T::zero(); n * c * h * w];
                for plane in 0..n * c {
                    for y in 0..h {
                        for x in 0..w {
                            d[plane * h * w + y * w + x] =
                                g[plane * oh * ow + (y / 2) * ow + x / 2] * quarter;
                        }
                    }
                }
                out.push((*input, d));
            }
            Op::Dropout { input, mask } => {
                out.push((*input, g.iter().zip(mask).map(|(&p, &m)| p * m).collect()))
            }
            Op::L1 { a, b } => {
                let (x, y) = (self.value(*a).data(), self.value(*b).data());
                let scale = g[0] / T::from_usize_lossy(x.len());
                let sign: Vec<T> = x
                    .iter()
                    .zip(y)
                    .map(|(&p, &q)| {
                        let d = p - q;
                        if d > T::zero() {
                            scale
                        } else if d < T::zero() {
                            -scale
                        } else {
                            T::zero()
                        }
                    })
                    .collect();
                if self.needs(*b) {
                    out.push((*b, sign.iter().map(|&v| -v).collect()));
                }
                if self.needs(*a) {
                    out.push((*a, sign));
                }
            }
            Op::NegLogMean {
                input,
                complement,
                eps,
            } => {
                let x = self.value(*input).data();
                let scale = g[0] / T::from_usize_lossy(x.len());
                let hi = T::one() - *eps;
                let d = x
                    .iter()
                    .map(|&v| {
                        if v < *eps || v > hi {
                            T::zero()
                        } else if *complement {
                            scale / (T::one() - v)
                        } else {
                            -scale / v
                        }
                    })
                    .collect();
                out.push((*input, d));
            }
        }
        out
    }
}

fn push_opt<T>(out: &mut Vec<(Var, Vec<T>)>, v: Var, g: Option<Vec<T>>) {
    if let Some(g) = g {
        out.push((v, g));
    }
}
