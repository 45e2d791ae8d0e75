//! Forward operations and their vector-Jacobian products.
//!
//! Every op here is pure: it reads its inputs and returns fresh tensors.
//! Backward functions take whatever forward context they need explicitly
//! (inputs or saved outputs) and return gradients in input order.

use super::scalar::{sc, Scalar};
use super::tensor::Tensor;
use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// GEMM wrappers
// ---------------------------------------------------------------------------

/// c = alpha * a(m x k) * b(k x n) + beta * c, all row-major.
pub(crate) fn mm_nn<T: Scalar>(m: usize, k: usize, n: usize, alpha: T, a: &[T], b: &[T], beta: T, c: &mut [T]) {
    debug_assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || k == 0 || n == 0 {
        return;
    }
    unsafe {
        T::gemm(m, k, n, alpha, a.as_ptr(), k as isize, 1, b.as_ptr(), n as isize, 1, beta, c.as_mut_ptr(), n as isize, 1);
    }
}

/// c = alpha * a(m x k) * b(n x k)^T + beta * c.
pub(crate) fn mm_nt<T: Scalar>(m: usize, k: usize, n: usize, alpha: T, a: &[T], b: &[T], beta: T, c: &mut [T]) {
    debug_assert!(a.len() >= m * k && b.len() >= n * k && c.len() >= m * n);
    if m == 0 || k == 0 || n == 0 {
        return;
    }
    unsafe {
        T::gemm(m, k, n, alpha, a.as_ptr(), k as isize, 1, b.as_ptr(), 1, k as isize, beta, c.as_mut_ptr(), n as isize, 1);
    }
}

/// c = alpha * a(k x m)^T * b(k x n) + beta * c.
pub(crate) fn mm_tn<T: Scalar>(m: usize, k: usize, n: usize, alpha: T, a: &[T], b: &[T], beta: T, c: &mut [T]) {
    debug_assert!(a.len() >= k * m && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || k == 0 || n == 0 {
        return;
    }
    unsafe {
        T::gemm(m, k, n, alpha, a.as_ptr(), 1, m as isize, b.as_ptr(), n as isize, 1, beta, c.as_mut_ptr(), n as isize, 1);
    }
}

// ---------------------------------------------------------------------------
// matmul
// ---------------------------------------------------------------------------

/// Matrix product of `a` (M x K) and `b` (K x P).
pub fn matmul<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Result<Tensor<T>> {
    let (m, k) = a.dims2()?;
    let (kb, p) = b.dims2()?;
    if k != kb {
        return Err(Error::shape(format!("matmul: inner dims {k} vs {kb}")));
    }
    let mut out = Tensor::zeros(&[m, p]);
    mm_nn(m, k, p, T::one(), a.data(), b.data(), T::zero(), out.data_mut());
    Ok(out)
}

/// Gradients of [`matmul`] for both operands.
pub fn matmul_backward<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>, grad_out: &Tensor<T>) -> (Tensor<T>, Tensor<T>) {
    let (m, k) = a.dims2().expect("matmul_backward: a not 2-d");
    let (_, p) = b.dims2().expect("matmul_backward: b not 2-d");
    let mut ga = Tensor::zeros(&[m, k]);
    let mut gb = Tensor::zeros(&[k, p]);
    // dA = dC * B^T,  dB = A^T * dC
    mm_nt(m, p, k, T::one(), grad_out.data(), b.data(), T::zero(), ga.data_mut());
    mm_tn(k, m, p, T::one(), a.data(), grad_out.data(), T::zero(), gb.data_mut());
    (ga, gb)
}

// ---------------------------------------------------------------------------
// conv2d (im2col + GEMM)
// ---------------------------------------------------------------------------

/// Border handling for convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PadMode {
    /// Out-of-range taps read zero.
    Zeros,
    /// Out-of-range taps read the nearest border pixel.
    Replicate,
}

#[derive(Debug, Clone, Copy)]
pub struct Conv2dSpec {
    pub stride: usize,
    pub pad: usize,
    pub dilation: usize,
    pub pad_mode: PadMode,
}

impl Conv2dSpec {
    /// Stride-1 same-padded convolution for a k x k kernel with dilation d.
    pub fn same(kernel: usize, dilation: usize) -> Self {
        Conv2dSpec { stride: 1, pad: dilation * (kernel - 1) / 2, dilation, pad_mode: PadMode::Zeros }
    }

    fn out_extent(&self, input: usize, kernel: usize) -> Option<usize> {
        let span = self.dilation * (kernel - 1) + 1;
        let padded = input + 2 * self.pad;
        if padded < span {
            return None;
        }
        Some((padded - span) / self.stride + 1)
    }
}

impl Default for Conv2dSpec {
    fn default() -> Self {
        Conv2dSpec { stride: 1, pad: 0, dilation: 1, pad_mode: PadMode::Zeros }
    }
}

fn conv_shapes<T: Scalar>(x: &Tensor<T>, w: &Tensor<T>, b: &Tensor<T>, spec: &Conv2dSpec) -> Result<(usize, usize, usize, usize, usize, usize, usize, usize)> {
    let (n, ci, h, wd) = x.dims4()?;
    let (co, ciw, kh, kw) = w.dims4()?;
    if kh != kw {
        return Err(Error::shape(format!("conv2d: non-square kernel {kh}x{kw}")));
    }
    if ciw != ci {
        return Err(Error::shape(format!("conv2d: input channels {ci} vs weight {ciw}")));
    }
    if b.dims() != [co] {
        return Err(Error::shape(format!("conv2d: bias shape {:?}, expected [{co}]", b.dims())));
    }
    if spec.dilation == 0 || spec.stride == 0 {
        return Err(Error::domain("conv2d: stride and dilation must be >= 1".to_string()));
    }
    let ho = spec
        .out_extent(h, kh)
        .ok_or_else(|| Error::shape(format!("conv2d: kernel span exceeds padded input ({h} rows)")))?;
    let wo = spec
        .out_extent(wd, kw)
        .ok_or_else(|| Error::shape(format!("conv2d: kernel span exceeds padded input ({wd} cols)")))?;
    Ok((n, ci, h, wd, co, kh, ho, wo))
}

/// Writes the im2col matrix (ci*k*k rows, ho*wo cols) for one batch item.
fn im2col<T: Scalar>(x: &[T], ci: usize, h: usize, w: usize, k: usize, spec: &Conv2dSpec, ho: usize, wo: usize, cols: &mut [T]) {
    let d = spec.dilation as isize;
    let pad = spec.pad as isize;
    let stride = spec.stride as isize;
    let plane = h * w;
    let mut row = 0usize;
    for c in 0..ci {
        let xc = &x[c * plane..(c + 1) * plane];
        for ky in 0..k as isize {
            for kx in 0..k as isize {
                let dst = &mut cols[row * (ho * wo)..(row + 1) * (ho * wo)];
                let mut idx = 0usize;
                for oy in 0..ho as isize {
                    let iy = oy * stride - pad + ky * d;
                    for ox in 0..wo as isize {
                        let ix = ox * stride - pad + kx * d;
                        dst[idx] = match spec.pad_mode {
                            PadMode::Zeros => {
                                if iy >= 0 && iy < h as isize && ix >= 0 && ix < w as isize {
                                    xc[(iy as usize) * w + ix as usize]
                                } else {
                                    T::zero()
                                }
                            }
                            PadMode::Replicate => {
                                let cy = iy.clamp(0, h as isize - 1) as usize;
                                let cx = ix.clamp(0, w as isize - 1) as usize;
                                xc[cy * w + cx]
                            }
                        };
                        idx += 1;
                    }
                }
                row += 1;
            }
        }
    }
}

/// Scatters im2col-layout gradients back onto the input plane.
fn col2im<T: Scalar>(cols: &[T], ci: usize, h: usize, w: usize, k: usize, spec: &Conv2dSpec, ho: usize, wo: usize, gx: &mut [T]) {
    let d = spec.dilation as isize;
    let pad = spec.pad as isize;
    let stride = spec.stride as isize;
    let plane = h * w;
    let mut row = 0usize;
    for c in 0..ci {
        let gc = &mut gx[c * plane..(c + 1) * plane];
        for ky in 0..k as isize {
            for kx in 0..k as isize {
                let src = &cols[row * (ho * wo)..(row + 1) * (ho * wo)];
                let mut idx = 0usize;
                for oy in 0..ho as isize {
                    let iy = oy * stride - pad + ky * d;
                    for ox in 0..wo as isize {
                        let ix = ox * stride - pad + kx * d;
                        match spec.pad_mode {
                            PadMode::Zeros => {
                                if iy >= 0 && iy < h as isize && ix >= 0 && ix < w as isize {
                                    gc[(iy as usize) * w + ix as usize] += src[idx];
                                }
                            }
                            PadMode::Replicate => {
                                let cy = iy.clamp(0, h as isize - 1) as usize;
                                let cx = ix.clamp(0, w as isize - 1) as usize;
                                gc[cy * w + cx] += src[idx];
                            }
                        }
                        idx += 1;
                    }
                }
                row += 1;
            }
        }
    }
}

/// Dilated 2-d cross-correlation plus bias.
///
/// `x` is N x Ci x H x W, `w` is Co x Ci x K x K, `b` is length Co.
pub fn conv2d<T: Scalar>(x: &Tensor<T>, w: &Tensor<T>, b: &Tensor<T>, spec: &Conv2dSpec) -> Result<Tensor<T>> {
    let (n, ci, h, wd, co, k, ho, wo) = conv_shapes(x, w, b, spec)?;
    let mut out = Tensor::zeros(&[n, co, ho, wo]);
    let ckk = ci * k * k;
    let onhw = ho * wo;

    if k == 1 && spec.stride == 1 && spec.pad == 0 {
        // 1x1 fast path: plain per-item GEMM on the raw feature matrix.
        for i in 0..n {
            let xi = &x.data()[i * ci * h * wd..(i + 1) * ci * h * wd];
            let oi = &mut out.data_mut()[i * co * onhw..(i + 1) * co * onhw];
            mm_nn(co, ci, onhw, T::one(), w.data(), xi, T::zero(), oi);
        }
    } else {
        let mut cols = vec![T::zero(); ckk * onhw];
        for i in 0..n {
            let xi = &x.data()[i * ci * h * wd..(i + 1) * ci * h * wd];
            im2col(xi, ci, h, wd, k, spec, ho, wo, &mut cols);
            let oi = &mut out.data_mut()[i * co * onhw..(i + 1) * co * onhw];
            mm_nn(co, ckk, onhw, T::one(), w.data(), &cols, T::zero(), oi);
        }
    }

    for i in 0..n {
        for c in 0..co {
            let base = (i * co + c) * onhw;
            let bv = b.data()[c];
            for v in &mut out.data_mut()[base..base + onhw] {
                *v += bv;
            }
        }
    }
    Ok(out)
}

/// Gradients of [`conv2d`] w.r.t. input, weight and bias.
pub fn conv2d_backward<T: Scalar>(
    x: &Tensor<T>,
    w: &Tensor<T>,
    spec: &Conv2dSpec,
    grad_out: &Tensor<T>,
) -> (Tensor<T>, Tensor<T>, Tensor<T>) {
    let (co, ci, k, _) = w.dims4().expect("conv2d_backward: weight not 4-d");
    let (n, _, h, wd) = x.dims4().expect("conv2d_backward: input not 4-d");
    let (_, _, ho, wo) = grad_out.dims4().expect("conv2d_backward: grad not 4-d");
    let ckk = ci * k * k;
    let onhw = ho * wo;

    let mut gx = Tensor::zeros(x.dims());
    let mut gw = Tensor::zeros(w.dims());
    let mut gb = Tensor::zeros(&[co]);

    let mut cols = vec![T::zero(); ckk * onhw];
    let mut gcols = vec![T::zero(); ckk * onhw];
    for i in 0..n {
        let xi = &x.data()[i * ci * h * wd..(i + 1) * ci * h * wd];
        let gi = &grad_out.data()[i * co * onhw..(i + 1) * co * onhw];

        im2col(xi, ci, h, wd, k, spec, ho, wo, &mut cols);
        // dW += dOut * cols^T
        mm_nt(co, onhw, ckk, T::one(), gi, &cols, T::one(), gw.data_mut());
        // dCols = W^T * dOut
        mm_tn(ckk, co, onhw, T::one(), w.data(), gi, T::zero(), &mut gcols);
        let gxi = &mut gx.data_mut()[i * ci * h * wd..(i + 1) * ci * h * wd];
        col2im(&gcols, ci, h, wd, k, spec, ho, wo, gxi);

        for c in 0..co {
            let mut s = T::zero();
            for &v in &gi[c * onhw..(c + 1) * onhw] {
                s += v;
            }
            gb.data_mut()[c] += s;
        }
    }
    (gx, gw, gb)
}

// ---------------------------------------------------------------------------
// softmax
// ---------------------------------------------------------------------------

fn axis_layout<T: Scalar>(x: &Tensor<T>, axis: usize) -> Result<(usize, usize, usize)> {
    let dims = x.dims();
    if axis >= dims.len() {
        return Err(Error::shape(format!("axis {axis} out of range for shape {:?}", dims)));
    }
    let outer: usize = dims[..axis].iter().product();
    let lane = dims[axis];
    let inner: usize = dims[axis + 1..].iter().product();
    Ok((outer, lane, inner))
}

/// Numerically stable softmax along `axis`.
pub fn softmax<T: Scalar>(x: &Tensor<T>, axis: usize) -> Result<Tensor<T>> {
    let (outer, lane, inner) = axis_layout(x, axis)?;
    let mut out = Tensor::zeros(x.dims());
    let xd = x.data();
    let od = out.data_mut();
    for o in 0..outer {
        for i in 0..inner {
            let base = o * lane * inner + i;
            let mut mx = xd[base];
            for l in 1..lane {
                let v = xd[base + l * inner];
                if v > mx {
                    mx = v;
                }
            }
            let mut sum = T::zero();
            for l in 0..lane {
                let e = (xd[base + l * inner] - mx).exp();
                od[base + l * inner] = e;
                sum += e;
            }
            let inv = T::one() / sum;
            for l in 0..lane {
                od[base + l * inner] *= inv;
            }
        }
    }
    Ok(out)
}

/// Backward of [`softmax`] given the saved forward output `y`.
pub fn softmax_backward<T: Scalar>(y: &Tensor<T>, grad_out: &Tensor<T>, axis: usize) -> Tensor<T> {
    let (outer, lane, inner) = axis_layout(y, axis).expect("softmax_backward: bad axis");
    let mut gx = Tensor::zeros(y.dims());
    let yd = y.data();
    let gd = grad_out.data();
    let gxd = gx.data_mut();
    for o in 0..outer {
        for i in 0..inner {
            let base = o * lane * inner + i;
            let mut dot = T::zero();
            for l in 0..lane {
                dot += yd[base + l * inner] * gd[base + l * inner];
            }
            for l in 0..lane {
                let idx = base + l * inner;
                gxd[idx] = yd[idx] * (gd[idx] - dot);
            }
        }
    }
    gx
}

// ---------------------------------------------------------------------------
// activations
// ---------------------------------------------------------------------------

/// Elementwise nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    /// Slope 0.1 on the negative side; x = 0 takes the positive-side slope.
    LeakyRelu,
    /// tanh-form Gaussian error linear unit.
    Gelu,
}

const LEAKY_SLOPE: f64 = 0.1;
const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044_715;

/// Applies `kind` elementwise.
pub fn activation<T: Scalar>(x: &Tensor<T>, kind: Activation) -> Tensor<T> {
    match kind {
        Activation::LeakyRelu => {
            let slope = sc::<T>(LEAKY_SLOPE);
            x.map(|v| if v >= T::zero() { v } else { v * slope })
        }
        Activation::Gelu => {
            let c = sc::<T>(GELU_C);
            let a = sc::<T>(GELU_A);
            let half = sc::<T>(0.5);
            x.map(|v| {
                let u = c * (v + a * v * v * v);
                half * v * (T::one() + u.tanh())
            })
        }
    }
}

/// Backward of [`activation`] given the saved forward input.
pub fn activation_backward<T: Scalar>(x: &Tensor<T>, grad_out: &Tensor<T>, kind: Activation) -> Tensor<T> {
    debug_assert!(x.same_shape(grad_out));
    match kind {
        Activation::LeakyRelu => {
            let slope = sc::<T>(LEAKY_SLOPE);
            let data = x
                .data()
                .iter()
                .zip(grad_out.data().iter())
                .map(|(&v, &g)| if v >= T::zero() { g } else { g * slope })
                .collect();
            Tensor::from_vec(x.dims(), data).expect("activation_backward shape")
        }
        Activation::Gelu => {
            let c = sc::<T>(GELU_C);
            let a = sc::<T>(GELU_A);
            let half = sc::<T>(0.5);
            let three = sc::<T>(3.0);
            let data = x
                .data()
                .iter()
                .zip(grad_out.data().iter())
                .map(|(&v, &g)| {
                    let u = c * (v + a * v * v * v);
                    let t = u.tanh();
                    let du = c * (T::one() + three * a * v * v);
                    let d = half * (T::one() + t) + half * v * (T::one() - t * t) * du;
                    g * d
                })
                .collect();
            Tensor::from_vec(x.dims(), data).expect("activation_backward shape")
        }
    }
}

// ---------------------------------------------------------------------------
// layer norm (over the channel axis of NCHW)
// ---------------------------------------------------------------------------

pub const LAYER_NORM_EPS: f64 = 1e-6;

/// Per-position normalization over channels followed by a per-channel affine.
pub fn layer_norm<T: Scalar>(x: &Tensor<T>, gamma: &Tensor<T>, beta: &Tensor<T>) -> Result<Tensor<T>> {
    let (n, c, h, w) = x.dims4()?;
    if gamma.dims() != [c] || beta.dims() != [c] {
        return Err(Error::shape(format!(
            "layer_norm: gamma {:?} / beta {:?}, expected [{c}]",
            gamma.dims(),
            beta.dims()
        )));
    }
    if c == 0 {
        return Err(Error::domain("layer_norm: channel extent must be >= 1".to_string()));
    }
    let eps = sc::<T>(LAYER_NORM_EPS);
    let inv_c = T::one() / sc::<T>(c as f64);
    let plane = h * w;
    let mut out = Tensor::zeros(x.dims());
    let xd = x.data();
    let od = out.data_mut();
    let gd = gamma.data();
    let bd = beta.data();
    for i in 0..n {
        for p in 0..plane {
            let base = i * c * plane + p;
            let mut mean = T::zero();
            for ch in 0..c {
                mean += xd[base + ch * plane];
            }
            mean *= inv_c;
            let mut var = T::zero();
            for ch in 0..c {
                let d = xd[base + ch * plane] - mean;
                var += d * d;
            }
            var *= inv_c;
            let inv_std = T::one() / (var + eps).sqrt();
            for ch in 0..c {
                let xhat = (xd[base + ch * plane] - mean) * inv_std;
                od[base + ch * plane] = gd[ch] * xhat + bd[ch];
            }
        }
    }
    Ok(out)
}

/// Backward of [`layer_norm`]; returns (dx, dgamma, dbeta).
pub fn layer_norm_backward<T: Scalar>(
    x: &Tensor<T>,
    gamma: &Tensor<T>,
    grad_out: &Tensor<T>,
) -> (Tensor<T>, Tensor<T>, Tensor<T>) {
    let (n, c, h, w) = x.dims4().expect("layer_norm_backward: input not 4-d");
    let eps = sc::<T>(LAYER_NORM_EPS);
    let inv_c = T::one() / sc::<T>(c as f64);
    let plane = h * w;
    let mut gx = Tensor::zeros(x.dims());
    let mut ggamma = Tensor::zeros(&[c]);
    let mut gbeta = Tensor::zeros(&[c]);
    let xd = x.data();
    let gd = grad_out.data();
    let gmd = gamma.data();
    for i in 0..n {
        for p in 0..plane {
            let base = i * c * plane + p;
            let mut mean = T::zero();
            for ch in 0..c {
                mean += xd[base + ch * plane];
            }
            mean *= inv_c;
            let mut var = T::zero();
            for ch in 0..c {
                let d = xd[base + ch * plane] - mean;
                var += d * d;
            }
            var *= inv_c;
            let inv_std = T::one() / (var + eps).sqrt();

            // dxhat = g * gamma; reduce dxhat and dxhat .* xhat over channels
            let mut sum_dxhat = T::zero();
            let mut sum_dxhat_xhat = T::zero();
            for ch in 0..c {
                let idx = base + ch * plane;
                let xhat = (xd[idx] - mean) * inv_std;
                let dxhat = gd[idx] * gmd[ch];
                sum_dxhat += dxhat;
                sum_dxhat_xhat += dxhat * xhat;
                ggamma.data_mut()[ch] += gd[idx] * xhat;
                gbeta.data_mut()[ch] += gd[idx];
            }
            for ch in 0..c {
                let idx = base + ch * plane;
                let xhat = (xd[idx] - mean) * inv_std;
                let dxhat = gd[idx] * gmd[ch];
                gx.data_mut()[idx] = inv_std * (dxhat - inv_c * sum_dxhat - inv_c * xhat * sum_dxhat_xhat);
            }
        }
    }
    (gx, ggamma, gbeta)
}

// ---------------------------------------------------------------------------
// pixel shuffle
// ---------------------------------------------------------------------------

/// Depth-to-space: N x (C*s^2) x H x W -> N x C x sH x sW.
pub fn pixel_shuffle<T: Scalar>(x: &Tensor<T>, s: usize) -> Result<Tensor<T>> {
    let (n, c_in, h, w) = x.dims4()?;
    if s == 0 {
        return Err(Error::domain("pixel_shuffle: scale must be >= 1".to_string()));
    }
    if c_in % (s * s) != 0 {
        return Err(Error::shape(format!("pixel_shuffle: channels {c_in} not divisible by {}", s * s)));
    }
    let c = c_in / (s * s);
    let mut out = Tensor::zeros(&[n, c, h * s, w * s]);
    let xd = x.data();
    let od = out.data_mut();
    let (oh, ow) = (h * s, w * s);
    for i in 0..n {
        for ch in 0..c {
            for dy in 0..s {
                for dx in 0..s {
                    let c_src = ch * s * s + dy * s + dx;
                    for y in 0..h {
                        let src = ((i * c_in + c_src) * h + y) * w;
                        let dst = ((i * c + ch) * oh + y * s + dy) * ow + dx;
                        for x_ in 0..w {
                            od[dst + x_ * s] = xd[src + x_];
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Space-to-depth inverse of [`pixel_shuffle`].
pub fn pixel_unshuffle<T: Scalar>(x: &Tensor<T>, s: usize) -> Result<Tensor<T>> {
    let (n, c, oh, ow) = x.dims4()?;
    if s == 0 {
        return Err(Error::domain("pixel_unshuffle: scale must be >= 1".to_string()));
    }
    if oh % s != 0 || ow % s != 0 {
        return Err(Error::shape(format!("pixel_unshuffle: spatial {oh}x{ow} not divisible by {s}")));
    }
    let (h, w) = (oh / s, ow / s);
    let c_out = c * s * s;
    let mut out = Tensor::zeros(&[n, c_out, h, w]);
    let xd = x.data();
    let od = out.data_mut();
    for i in 0..n {
        for ch in 0..c {
            for dy in 0..s {
                for dx in 0..s {
                    let c_dst = ch * s * s + dy * s + dx;
                    for y in 0..h {
                        let dst = ((i * c_out + c_dst) * h + y) * w;
                        let src = ((i * c + ch) * oh + y * s + dy) * ow + dx;
                        for x_ in 0..w {
                            od[dst + x_] = xd[src + x_ * s];
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Backward of [`pixel_shuffle`] is the inverse rearrangement of the gradient.
pub fn pixel_shuffle_backward<T: Scalar>(grad_out: &Tensor<T>, s: usize) -> Tensor<T> {
    pixel_unshuffle(grad_out, s).expect("pixel_shuffle_backward: invalid gradient shape")
}

// ---------------------------------------------------------------------------
// reflect padding (used to round spatial dims up to the attention window)
// ---------------------------------------------------------------------------

/// Mirror padding without edge duplication; pad must be <= dim - 1.
pub fn reflect_pad<T: Scalar>(x: &Tensor<T>, pad_bottom: usize, pad_right: usize) -> Result<Tensor<T>> {
    let (n, c, h, w) = x.dims4()?;
    if (pad_bottom > 0 && pad_bottom > h - 1) || (pad_right > 0 && pad_right > w - 1) {
        return Err(Error::shape(format!(
            "reflect_pad: pad ({pad_bottom}, {pad_right}) too large for {h}x{w}"
        )));
    }
    let (oh, ow) = (h + pad_bottom, w + pad_right);
    let mut out = Tensor::zeros(&[n, c, oh, ow]);
    for i in 0..n {
        for ch in 0..c {
            for y in 0..oh {
                let sy = if y < h { y } else { 2 * h - 2 - y };
                for x_ in 0..ow {
                    let sx = if x_ < w { x_ } else { 2 * w - 2 - x_ };
                    let v = x.at4(i, ch, sy, sx);
                    out.set4(i, ch, y, x_, v);
                }
            }
        }
    }
    Ok(out)
}

/// Backward of [`reflect_pad`]: folds mirrored gradients back onto sources.
pub fn reflect_pad_backward<T: Scalar>(grad_out: &Tensor<T>, h: usize, w: usize) -> Tensor<T> {
    let (n, c, oh, ow) = grad_out.dims4().expect("reflect_pad_backward: grad not 4-d");
    let mut gx = Tensor::zeros(&[n, c, h, w]);
    for i in 0..n {
        for ch in 0..c {
            for y in 0..oh {
                let sy = if y < h { y } else { 2 * h - 2 - y };
                for x_ in 0..ow {
                    let sx = if x_ < w { x_ } else { 2 * w - 2 - x_ };
                    let v = gx.at4(i, ch, sy, sx) + grad_out.at4(i, ch, y, x_);
                    gx.set4(i, ch, sy, sx, v);
                }
            }
        }
    }
    gx
}
