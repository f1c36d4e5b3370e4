//! Slice-level numeric kernels behind the tape ops.
//!
//! Convolutions go through im2col followed by a single GEMM per sample.
//! The column buffer is `(C·K·K) × (OH·OW)`, row-major.

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvGeom {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
    pub out_height: usize,
    pub out_width: usize,
}

impl ConvGeom {
    pub fn col_rows(&self) -> usize {
        self.channels * self.kernel * self.kernel
    }

    pub fn col_cols(&self) -> usize {
        self.out_height * self.out_width
    }

    pub fn image_len(&self) -> usize {
        self.channels * self.height * self.width
    }

    /// Output columns `lo..hi` whose source column for kernel offset `k`
    /// lies inside the image.
    #[inline]
    fn valid_range(&self, k: usize) -> (usize, usize) {
        let (s, p) = (self.stride, self.padding);
        let lo = if k >= p { 0 } else { (p - k).div_ceil(s) };
        // largest ox with ox*s + k - p <= width - 1
        let hi = if self.width + p > k {
            ((self.width + p - k - 1) / s + 1).min(self.out_width)
        } else {
            0
        };
        (lo.min(hi), hi)
    }

    #[inline]
    fn source(&self, out: usize, k: usize, limit: usize) -> Option<usize> {
        let pos = (out * self.stride + k) as isize - self.padding as isize;
        (pos >= 0 && (pos as usize) < limit).then_some(pos as usize)
    }
}

pub fn im2col<T: Scalar>(g: &ConvGeom, image: &[T], cols: &mut [T]) {
    let ncols = g.col_cols();
    for c in 0..g.channels {
        let plane = &image[c * g.height * g.width..(c + 1) * g.height * g.width];
        for ki in 0..g.kernel {
            for kj in 0..g.kernel {
                let row = (c * g.kernel + ki) * g.kernel + kj;
                let dst = &mut cols[row * ncols..(row + 1) * ncols];
                let (lo, hi) = g.valid_range(kj);
                for oy in 0..g.out_height {
                    let line = &mut dst[oy * g.out_width..(oy + 1) * g.out_width];
                    let Some(iy) = g.source(oy, ki, g.height) else {
                        line.fill(T::zero());
                        continue;
                    };
                    let src = &plane[iy * g.width..(iy + 1) * g.width];
                    line[..lo].fill(T::zero());
                    line[hi..].fill(T::zero());
                    if lo < hi {
                        let start = lo * g.stride + kj - g.padding;
                        if g.stride == 1 {
                            line[lo..hi].copy_from_slice(&src[start..start + hi - lo]);
                        } else {
                            for (v, &s) in line[lo..hi].iter_mut().zip(src[start..].iter().step_by(g.stride)) {
                                *v = s;
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Scatter-add columns back onto an image (adjoint of [`im2col`]).
pub fn col2im<T: Scalar>(g: &ConvGeom, cols: &[T], image: &mut [T]) {
    let ncols = g.col_cols();
    for c in 0..g.channels {
        let plane = &mut image[c * g.height * g.width..(c + 1) * g.height * g.width];
        for ki in 0..g.kernel {
            for kj in 0..g.kernel {
                let row = (c * g.kernel + ki) * g.kernel + kj;
                let src = &cols[row * ncols..(row + 1) * ncols];
                let (lo, hi) = g.valid_range(kj);
                if lo >= hi {
                    continue;
                }
                let start = lo * g.stride + kj - g.padding;
                for oy in 0..g.out_height {
                    let Some(iy) = g.source(oy, ki, g.height) else {
                        continue;
                    };
                    let dst = &mut plane[iy * g.width..(iy + 1) * g.width];
                    let line = &src[oy * g.out_width + lo..oy * g.out_width + hi];
                    if g.stride == 1 {
                        for (d, &v) in dst[start..start + hi - lo].iter_mut().zip(line) {
                            *d += v;
                        }
                    } else {
                        for (d, &v) in dst[start..].iter_mut().step_by(g.stride).zip(line) {
                            *d += v;
                        }
                    }
                }
            }
        }
    }
}

/// Stride-1 convolutions with very few input or output channels skip
/// im2col: the column buffer would dwarf the arithmetic.
fn use_direct(g: &ConvGeom, out_channels: usize) -> bool {
    g.stride == 1 && (g.channels <= 4 || out_channels <= 4)
}

/// Visit every kernel tap as `(ki, kj, oy, iy, lo, hi, ix0)`: output row `oy`
/// columns `lo..hi` read input row `iy` from column `ix0` on.
fn for_each_tap(g: &ConvGeom, mut f: impl FnMut(usize, usize, usize, usize, usize, usize, usize)) {
    for ki in 0..g.kernel {
        for kj in 0..g.kernel {
            let (lo, hi) = g.valid_range(kj);
            if lo >= hi {
                continue;
            }
            let ix0 = lo + kj - g.padding;
            for oy in 0..g.out_height {
                if let Some(iy) = g.source(oy, ki, g.height) {
                    f(ki, kj, oy, iy, lo, hi, ix0);
                }
            }
        }
    }
}

fn direct_forward<T: Scalar>(g: &ConvGeom, batch: usize, out_channels: usize, input: &[T], weight: &[T], out: &mut [T]) {
    let (hw_in, hw_out, kk) = (g.height * g.width, g.col_cols(), g.kernel * g.kernel);
    for n in 0..batch {
        for o in 0..out_channels {
            let dst = &mut out[(n * out_channels + o) * hw_out..(n * out_channels + o + 1) * hw_out];
            for c in 0..g.channels {
                let src = &input[(n * g.channels + c) * hw_in..(n * g.channels + c + 1) * hw_in];
                let w = &weight[(o * g.channels + c) * kk..(o * g.channels + c + 1) * kk];
                for_each_tap(g, |ki, kj, oy, iy, lo, hi, ix0| {
                    let wv = w[ki * g.kernel + kj];
                    let d = &mut dst[oy * g.out_width + lo..oy * g.out_width + hi];
                    let s = &src[iy * g.width + ix0..iy * g.width + ix0 + hi - lo];
                    for (a, &b) in d.iter_mut().zip(s) {
                        *a += wv * b;
                    }
                });
            }
        }
    }
}

fn direct_backward<T: Scalar>(
    g: &ConvGeom,
    batch: usize,
    out_channels: usize,
    input: &[T],
    weight: &[T],
    grad_out: &[T],
    mut d_input: Option<&mut [T]>,
    mut d_weight: Option<&mut [T]>,
) {
    let (hw_in, hw_out, kk) = (g.height * g.width, g.col_cols(), g.kernel * g.kernel);
    for n in 0..batch {
        for o in 0..out_channels {
            let dout = &grad_out[(n * out_channels + o) * hw_out..(n * out_channels + o + 1) * hw_out];
            for c in 0..g.channels {
                let in_off = (n * g.channels + c) * hw_in;
                let w_off = (o * g.channels + c) * kk;
                if let Some(dx) = d_input.as_deref_mut() {
                    let dx = &mut dx[in_off..in_off + hw_in];
                    for_each_tap(g, |ki, kj, oy, iy, lo, hi, ix0| {
                        let wv = weight[w_off + ki * g.kernel + kj];
                        let s = &dout[oy * g.out_width + lo..oy * g.out_width + hi];
                        let d = &mut dx[iy * g.width + ix0..iy * g.width + ix0 + hi - lo];
                        for (a, &b) in d.iter_mut().zip(s) {
                            *a += wv * b;
                        }
                    });
                }
                if let Some(dw) = d_weight.as_deref_mut() {
                    let src = &input[in_off..in_off + hw_in];
                    let dw = &mut dw[w_off..w_off + kk];
                    for_each_tap(g, |ki, kj, oy, iy, lo, hi, ix0| {
                        let a = &dout[oy * g.out_width + lo..oy * g.out_width + hi];
                        let b = &src[iy * g.width + ix0..iy * g.width + ix0 + hi - lo];
                        let dot: T = a.iter().zip(b).map(|(&x, &y)| x * y).sum();
                        dw[ki * g.kernel + kj] += dot;
                    });
                }
            }
        }
    }
}

/// Forward convolution. `weight` is `O × (C·K·K)`, output `N × O × OH × OW`.
pub fn conv2d_forward<T: Scalar>(
    g: &ConvGeom,
    batch: usize,
    out_channels: usize,
    input: &[T],
    weight: &[T],
    bias: Option<&[T]>,
) -> Vec<T> {
    let (rows, ncols) = (g.col_rows(), g.col_cols());
    if use_direct(g, out_channels) {
        let mut out = vec![T::zero(); batch * out_channels * ncols];
        if let Some(b) = bias {
            for (i, chunk) in out.chunks_mut(ncols).enumerate() {
                chunk.fill(b[i % out_channels]);
            }
        }
        direct_forward(g, batch, out_channels, input, weight, &mut out);
        return out;
    }
    let mut cols = vec![T::zero(); rows * ncols];
    let mut out = vec![T::zero(); batch * out_channels * ncols];
    for n in 0..batch {
        im2col(g, &input[n * g.image_len()..(n + 1) * g.image_len()], &mut cols);
        let dst = &mut out[n * out_channels * ncols..(n + 1) * out_channels * ncols];
        if let Some(b) = bias {
            for (o, chunk) in dst.chunks_mut(ncols).enumerate() {
                chunk.fill(b[o]);
            }
        }
        T::gemm(
            out_channels,
            rows,
            ncols,
            T::one(),
            weight,
            (rows as isize, 1),
            &cols,
            (ncols as isize, 1),
            T::one(),
            dst,
            (ncols as isize, 1),
        );
    }
    out
}

pub struct ConvGrads<T> {
    pub input: Option<Vec<T>>,
    pub weight: Option<Vec<T>>,
    pub bias: Option<Vec<T>>,
}

#[allow(clippy::too_many_arguments)]
pub fn conv2d_backward<T: Scalar>(
    g: &ConvGeom,
    batch: usize,
    out_channels: usize,
    input: &[T],
    weight: &[T],
    grad_out: &[T],
    want: (bool, bool, bool),
) -> ConvGrads<T> {
    let (rows, ncols) = (g.col_rows(), g.col_cols());
    let mut d_input = want.0.then(|| vec![T::zero(); batch * g.image_len()]);
    let mut d_weight = want.1.then(|| vec![T::zero(); out_channels * rows]);
    let d_bias = want.2.then(|| {
        let mut db = vec![T::zero(); out_channels];
        for n in 0..batch {
            for (o, acc) in db.iter_mut().enumerate() {
                let start = (n * out_channels + o) * ncols;
                *acc += grad_out[start..start + ncols].iter().copied().sum::<T>();
            }
        }
        db
    });
    if use_direct(g, out_channels) {
        direct_backward(g, batch, out_channels, input, weight, grad_out, d_input.as_deref_mut(), d_weight.as_deref_mut());
        return ConvGrads {
            input: d_input,
            weight: d_weight,
            bias: d_bias,
        };
    }
    let mut cols = vec![T::zero(); rows * ncols];
    for n in 0..batch {
        let dout = &grad_out[n * out_channels * ncols..(n + 1) * out_channels * ncols];
        if let Some(dw) = d_weight.as_mut() {
            im2col(g, &input[n * g.image_len()..(n + 1) * g.image_len()], &mut cols);
            // dW += dOut · colsᵀ
            T::gemm(
                out_channels,
                ncols,
                rows,
                T::one(),
                dout,
                (ncols as isize, 1),
                &cols,
                (1, ncols as isize),
                T::one(),
                dw,
                (rows as isize, 1),
            );
        }
        if let Some(dx) = d_input.as_mut() {
            // dcols = Wᵀ · dOut
            T::gemm(
                rows,
                out_channels,
                ncols,
                T::one(),
                weight,
                (1, rows as isize),
                dout,
                (ncols as isize, 1),
                T::zero(),
                &mut cols,
                (ncols as isize, 1),
            );
            col2im(g, &cols, &mut dx[n * g.image_len()..(n + 1) * g.image_len()]);
        }
    }
    ConvGrads {
        input: d_input,
        weight: d_weight,
        bias: d_bias,
    }
}

/// Transposed convolution as the adjoint of [`conv2d_forward`].
///
/// `g` describes the *adjoint* convolution: its image is the transposed
/// conv's output (`channels` = output channels) and its column grid is the
/// transposed conv's input. `weight` is `Cin × (Cout·K·K)`.
pub fn conv_transpose2d_forward<T: Scalar>(
    g: &ConvGeom,
    batch: usize,
    in_channels: usize,
    input: &[T],
    weight: &[T],
    bias: Option<&[T]>,
) -> Vec<T> {
    let (rows, ncols) = (g.col_rows(), g.col_cols());
    let mut cols = vec![T::zero(); rows * ncols];
    let mut out = vec![T::zero(); batch * g.image_len()];
    for n in 0..batch {
        let x = &input[n * in_channels * ncols..(n + 1) * in_channels * ncols];
        T::gemm(
            rows,
            in_channels,
            ncols,
            T::one(),
            weight,
            (1, rows as isize),
            x,
            (ncols as isize, 1),
            T::zero(),
            &mut cols,
            (ncols as isize, 1),
        );
        let dst = &mut out[n * g.image_len()..(n + 1) * g.image_len()];
        if let Some(b) = bias {
            for (c, plane) in dst.chunks_mut(g.height * g.width).enumerate() {
                plane.fill(b[c]);
            }
        }
        col2im(g, &cols, dst);
    }
    out
}

#[allow(clippy::too_many_arguments)]
pub fn conv_transpose2d_backward<T: Scalar>(
    g: &ConvGeom,
    batch: usize,
    in_channels: usize,
    input: &[T],
    weight: &[T],
    grad_out: &[T],
    want: (bool, bool, bool),
) -> ConvGrads<T> {
    let (rows, ncols) = (g.col_rows(), g.col_cols());
    let mut cols = vec![T::zero(); rows * ncols];
    let mut d_input = want.0.then(|| vec![T::zero(); batch * in_channels * ncols]);
    let mut d_weight = want.1.then(|| vec![T::zero(); in_channels * rows]);
    let plane = g.height * g.width;
    let d_bias = want.2.then(|| {
        let mut db = vec![T::zero(); g.channels];
        for n in 0..batch {
            for (c, acc) in db.iter_mut().enumerate() {
                let start = (n * g.channels + c) * plane;
                *acc += grad_out[start..start + plane].iter().copied().sum::<T>();
            }
        }
        db
    });
    if d_input.is_none() && d_weight.is_none() {
        return ConvGrads {
            input: None,
            weight: None,
            bias: d_bias,
        };
    }
    for n in 0..batch {
        im2col(g, &grad_out[n * g.image_len()..(n + 1) * g.image_len()], &mut cols);
        if let Some(dx) = d_input.as_mut() {
            T::gemm(
                in_channels,
                rows,
                ncols,
                T::one(),
                weight,
                (rows as isize, 1),
                &cols,
                (ncols as isize, 1),
                T::zero(),
                &mut dx[n * in_channels * ncols..(n + 1) * in_channels * ncols],
                (ncols as isize, 1),
            );
        }
        if let Some(dw) = d_weight.as_mut() {
            let x = &input[n * in_channels * ncols..(n + 1) * in_channels * ncols];
            T::gemm(
                in_channels,
                ncols,
                rows,
                T::one(),
                x,
                (ncols as isize, 1),
                &cols,
                (1, ncols as isize),
                T::one(),
                dw,
                (rows as isize, 1),
            );
        }
    }
    ConvGrads {
        input: d_input,
        weight: d_weight,
        bias: d_bias,
    }
}

/// Per-(sample, channel) statistics saved by the instance-norm forward.
pub struct NormCache<T> {
    pub normalized: Vec<T>,
    pub inv_std: Vec<T>,
}

pub fn instance_norm_forward<T: Scalar>(
    input: &[T],
    batch: usize,
    channels: usize,
    plane: usize,
    gamma: &[T],
    beta: &[T],
    eps: T,
) -> (Vec<T>, NormCache<T>) {
    let count = T::from_usize_lossy(plane);
    let mut out = vec![T::zero(); input.len()];
    let mut normalized = vec![T::zero(); input.len()];
    let mut inv_std = vec![T::zero(); batch * channels];
    for n in 0..batch {
        for c in 0..channels {
            let idx = n * channels + c;
            let x = &input[idx * plane..(idx + 1) * plane];
            let mean = x.iter().copied().sum::<T>() / count;
            let var = x.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / count;
            let inv = T::one() / (var + eps).sqrt();
            inv_std[idx] = inv;
            let xhat = &mut normalized[idx * plane..(idx + 1) * plane];
            let y = &mut out[idx * plane..(idx + 1) * plane];
            for i in 0..plane {
                xhat[i] = (x[i] - mean) * inv;
                y[i] = gamma[c] * xhat[i] + beta[c];
            }
        }
    }
    (out, NormCache { normalized, inv_std })
}

/// Returns `(d_input, d_gamma, d_beta)`.
pub fn instance_norm_backward<T: Scalar>(
    cache: &NormCache<T>,
    batch: usize,
    channels: usize,
    plane: usize,
    gamma: &[T],
    grad_out: &[T],
) -> (Vec<T>, Vec<T>, Vec<T>) {
    let count = T::from_usize_lossy(plane);
    let mut dx = vec![T::zero(); grad_out.len()];
    let mut dgamma = vec![T::zero(); channels];
    let mut dbeta = vec![T::zero(); channels];
    for n in 0..batch {
        for c in 0..channels {
            let idx = n * channels + c;
            let range = idx * plane..(idx + 1) * plane;
            let dy = &grad_out[range.clone()];
            let xhat = &cache.normalized[range.clone()];
            let mut sum_dxhat = T::zero();
            let mut sum_dxhat_xhat = T::zero();
            for i in 0..plane {
                dgamma[c] += dy[i] * xhat[i];
                dbeta[c] += dy[i];
                let d = dy[i] * gamma[c];
                sum_dxhat += d;
                sum_dxhat_xhat += d * xhat[i];
            }
            let scale = cache.inv_std[idx] / count;
            let out = &mut dx[range];
            for i in 0..plane {
                let d = dy[i] * gamma[c];
                out[i] = scale * (count * d - sum_dxhat - xhat[i] * sum_dxhat_xhat);
            }
        }
    }
    (dx, dgamma, dbeta)
}
