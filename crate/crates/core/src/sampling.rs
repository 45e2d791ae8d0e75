//! Bilinear sampling of feature maps at continuous, offset-perturbed
//! coordinates: the shared primitive of distortion-guided warping and the
//! deformable convolutions. All samplers clamp coordinates to the valid
//! pixel box (replicate border), which keeps every output a convex
//! combination of inputs.
//!
//! Offset channel order: warp fields carry (x-displacement, y-displacement);
//! kernel fields are tap-major with an (x, y) pair per tap, taps in row-major
//! kernel order. Displacements are in pixels.

use crate::error::{Error, Result};
use crate::numerics::{Scalar, Tensor};

/// What an offset field perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffsetKind {
    /// One (x, y) displacement per pixel; 2 channels.
    Warp,
    /// One (x, y) displacement per kernel tap per pixel; 2*k*k channels.
    Kernel { kernel: usize },
}

/// Per-pixel sampling displacements produced by an offset network.
#[derive(Debug, Clone)]
pub struct OffsetField<T> {
    kind: OffsetKind,
    values: Tensor<T>,
}

impl<T: Scalar> OffsetField<T> {
    pub fn new(kind: OffsetKind, values: Tensor<T>) -> Result<Self> {
        let (_, c, _, _) = values.dims4()?;
        let expect = match kind {
            OffsetKind::Warp => 2,
            OffsetKind::Kernel { kernel } => 2 * kernel * kernel,
        };
        if c != expect {
            return Err(Error::shape(format!(
                "offset field of kind {kind:?} needs {expect} channels, got {c}"
            )));
        }
        Ok(OffsetField { kind, values })
    }

    pub fn kind(&self) -> OffsetKind {
        self.kind
    }

    pub fn values(&self) -> &Tensor<T> {
        &self.values
    }

    pub fn into_values(self) -> Tensor<T> {
        self.values
    }
}

#[inline(always)]
fn clamp_coord<T: Scalar>(v: T, max: T) -> T {
    if v < T::zero() {
        T::zero()
    } else if v > max {
        max
    } else {
        v
    }
}

/// Corner indices and interpolation weights for one clamped coordinate pair.
#[inline(always)]
#[allow(clippy::type_complexity)]
fn corners<T: Scalar>(cx: T, cy: T, w: usize, h: usize) -> (usize, usize, usize, usize, T, T) {
    let x0 = cx.floor();
    let y0 = cy.floor();
    let tx = cx - x0;
    let ty = cy - y0;
    let x0 = x0.as_f64() as usize;
    let y0 = y0.as_f64() as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    (x0, x1, y0, y1, tx, ty)
}

/// Samples `f` (N x C x H x W) at absolute positions `coords`
/// (N x 2 x H x W; channel 0 is x, channel 1 is y). Out-of-range
/// coordinates are clamped to [0, W-1] x [0, H-1] before interpolation.
pub fn bilinear_sample<T: Scalar>(f: &Tensor<T>, coords: &Tensor<T>) -> Result<Tensor<T>> {
    let (n, c, h, w) = f.dims4()?;
    let (nc, two, hc, wc) = coords.dims4()?;
    if nc != n || two != 2 || hc != h || wc != w {
        return Err(Error::shape(format!(
            "bilinear_sample: coords {:?} incompatible with features {:?}",
            coords.dims(),
            f.dims()
        )));
    }
    if h == 0 || w == 0 {
        return Err(Error::domain("bilinear_sample: empty feature map".to_string()));
    }
    let mut out = Tensor::zeros(f.dims());
    let plane = h * w;
    let fx = f.data();
    let cd = coords.data();
    let od = out.data_mut();
    let max_x = T::from_f64((w - 1) as f64);
    let max_y = T::from_f64((h - 1) as f64);
    for i in 0..n {
        let cbase = i * 2 * plane;
        for p in 0..plane {
            let cx = clamp_coord(cd[cbase + p], max_x);
            let cy = clamp_coord(cd[cbase + plane + p], max_y);
            let (x0, x1, y0, y1, tx, ty) = corners(cx, cy, w, h);
            let w00 = (T::one() - ty) * (T::one() - tx);
            let w01 = (T::one() - ty) * tx;
            let w10 = ty * (T::one() - tx);
            let w11 = ty * tx;
            for ch in 0..c {
                let base = (i * c + ch) * plane;
                od[base + p] = w00 * fx[base + y0 * w + x0]
                    + w01 * fx[base + y0 * w + x1]
                    + w10 * fx[base + y1 * w + x0]
                    + w11 * fx[base + y1 * w + x1];
            }
        }
    }
    Ok(out)
}

/// Backward of [`bilinear_sample`]: gradients w.r.t. features and
/// coordinates. At exactly-integer coordinates the coordinate gradient is
/// the right-sided derivative; coordinates clamped at the border get zero
/// coordinate gradient.
pub fn bilinear_sample_backward<T: Scalar>(
    f: &Tensor<T>,
    coords: &Tensor<T>,
    grad_out: &Tensor<T>,
) -> (Tensor<T>, Tensor<T>) {
    let (n, c, h, w) = f.dims4().expect("bilinear backward: features not 4-d");
    let plane = h * w;
    let mut gf = Tensor::zeros(f.dims());
    let mut gc = Tensor::zeros(coords.dims());
    let fx = f.data();
    let cd = coords.data();
    let gd = grad_out.data();
    let max_x = T::from_f64((w - 1) as f64);
    let max_y = T::from_f64((h - 1) as f64);
    for i in 0..n {
        let cbase = i * 2 * plane;
        for p in 0..plane {
            let rx = cd[cbase + p];
            let ry = cd[cbase + plane + p];
            let cx = clamp_coord(rx, max_x);
            let cy = clamp_coord(ry, max_y);
            // Right-sided derivative of the clamp: zero once at/past the
            // upper edge or below zero.
            let live_x = rx >= T::zero() && rx < max_x;
            let live_y = ry >= T::zero() && ry < max_y;
            let (x0, x1, y0, y1, tx, ty) = corners(cx, cy, w, h);
            let w00 = (T::one() - ty) * (T::one() - tx);
            let w01 = (T::one() - ty) * tx;
            let w10 = ty * (T::one() - tx);
            let w11 = ty * tx;
            let mut dx_acc = T::zero();
            let mut dy_acc = T::zero();
            for ch in 0..c {
                let base = (i * c + ch) * plane;
                let g = gd[base + p];
                let f00 = fx[base + y0 * w + x0];
                let f01 = fx[base + y0 * w + x1];
                let f10 = fx[base + y1 * w + x0];
                let f11 = fx[base + y1 * w + x1];
                gf.data_mut()[base + y0 * w + x0] += g * w00;
                gf.data_mut()[base + y0 * w + x1] += g * w01;
                gf.data_mut()[base + y1 * w + x0] += g * w10;
                gf.data_mut()[base + y1 * w + x1] += g * w11;
                if live_x {
                    dx_acc += g * ((T::one() - ty) * (f01 - f00) + ty * (f11 - f10));
                }
                if live_y {
                    dy_acc += g * ((T::one() - tx) * (f10 - f00) + tx * (f11 - f01));
                }
            }
            gc.data_mut()[cbase + p] = dx_acc;
            gc.data_mut()[cbase + plane + p] = dy_acc;
        }
    }
    (gf, gc)
}

/// The regular pixel grid as absolute coordinates (N x 2 x H x W).
pub fn identity_grid<T: Scalar>(n: usize, h: usize, w: usize) -> Tensor<T> {
    let mut g = Tensor::zeros(&[n, 2, h, w]);
    let plane = h * w;
    for i in 0..n {
        for y in 0..h {
            for x in 0..w {
                g.data_mut()[i * 2 * plane + y * w + x] = T::from_f64(x as f64);
                g.data_mut()[i * 2 * plane + plane + y * w + x] = T::from_f64(y as f64);
            }
        }
    }
    g
}

/// Warps `f` by sampling at the regular grid plus `offsets`.
pub fn warp<T: Scalar>(f: &Tensor<T>, offsets: &OffsetField<T>) -> Result<Tensor<T>> {
    if offsets.kind() != OffsetKind::Warp {
        return Err(Error::domain(format!("warp: expected a warp offset field, got {:?}", offsets.kind())));
    }
    let (n, _, h, w) = f.dims4()?;
    let (no, _, ho, wo) = offsets.values().dims4()?;
    if no != n || ho != h || wo != w {
        return Err(Error::shape(format!(
            "warp: offsets {:?} incompatible with features {:?}",
            offsets.values().dims(),
            f.dims()
        )));
    }
    let mut coords = identity_grid::<T>(n, h, w);
    coords.add_assign(offsets.values());
    bilinear_sample(f, &coords)
}

/// Backward of [`warp`]: gradients w.r.t. features and the offset values.
pub fn warp_backward<T: Scalar>(f: &Tensor<T>, offsets: &OffsetField<T>, grad_out: &Tensor<T>) -> (Tensor<T>, Tensor<T>) {
    let (n, _, h, w) = f.dims4().expect("warp backward: features not 4-d");
    let mut coords = identity_grid::<T>(n, h, w);
    coords.add_assign(offsets.values());
    // d coords / d offsets is the identity.
    bilinear_sample_backward(f, &coords, grad_out)
}

/// Gathers bilinear samples for every kernel tap of a dilated deformable
/// convolution: output channel `c*k*k + tap` holds the sample of input
/// channel `c` at the tap's nominal dilated displacement plus its learned
/// offset. Same-padded: the nominal grid is centered on each pixel and
/// out-of-range positions clamp to the border.
pub fn deform_gather<T: Scalar>(
    f: &Tensor<T>,
    offsets: &OffsetField<T>,
    dilation: usize,
    kernel: usize,
) -> Result<Tensor<T>> {
    let kk = match offsets.kind() {
        OffsetKind::Kernel { kernel: k } if k == kernel => kernel * kernel,
        other => {
            return Err(Error::domain(format!(
                "deform_gather: expected kernel-{kernel} offsets, got {other:?}"
            )))
        }
    };
    if dilation == 0 {
        return Err(Error::domain("deform_gather: dilation must be >= 1".to_string()));
    }
    if kernel % 2 == 0 {
        return Err(Error::domain("deform_gather: kernel size must be odd".to_string()));
    }
    let (n, c, h, w) = f.dims4()?;
    let (no, _, ho, wo) = offsets.values().dims4()?;
    if no != n || ho != h || wo != w {
        return Err(Error::shape(format!(
            "deform_gather: offsets {:?} incompatible with features {:?}",
            offsets.values().dims(),
            f.dims()
        )));
    }
    let mut out = Tensor::zeros(&[n, c * kk, h, w]);
    let plane = h * w;
    let fx = f.data();
    let offd = offsets.values().data();
    let od = out.data_mut();
    let max_x = T::from_f64((w - 1) as f64);
    let max_y = T::from_f64((h - 1) as f64);
    let half = (kernel as isize - 1) / 2;
    let d = dilation as isize;
    for i in 0..n {
        let obase = i * 2 * kk * plane;
        for y in 0..h {
            for x in 0..w {
                let p = y * w + x;
                for ky in 0..kernel {
                    for kx in 0..kernel {
                        let tap = ky * kernel + kx;
                        let nom_x = x as isize + d * (kx as isize - half);
                        let nom_y = y as isize + d * (ky as isize - half);
                        let sx = T::from_f64(nom_x as f64) + offd[obase + (2 * tap) * plane + p];
                        let sy = T::from_f64(nom_y as f64) + offd[obase + (2 * tap + 1) * plane + p];
                        let cx = clamp_coord(sx, max_x);
                        let cy = clamp_coord(sy, max_y);
                        let (x0, x1, y0, y1, tx, ty) = corners(cx, cy, w, h);
                        let w00 = (T::one() - ty) * (T::one() - tx);
                        let w01 = (T::one() - ty) * tx;
                        let w10 = ty * (T::one() - tx);
                        let w11 = ty * tx;
                        for ch in 0..c {
                            let fb = (i * c + ch) * plane;
                            let v = w00 * fx[fb + y0 * w + x0]
                                + w01 * fx[fb + y0 * w + x1]
                                + w10 * fx[fb + y1 * w + x0]
                                + w11 * fx[fb + y1 * w + x1];
                            od[(i * c * kk + ch * kk + tap) * plane + p] = v;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Backward of [`deform_gather`]: gradients w.r.t. features and offsets.
pub fn deform_gather_backward<T: Scalar>(
    f: &Tensor<T>,
    offsets: &OffsetField<T>,
    dilation: usize,
    kernel: usize,
    grad_out: &Tensor<T>,
) -> (Tensor<T>, Tensor<T>) {
    let kk = kernel * kernel;
    let (n, c, h, w) = f.dims4().expect("deform backward: features not 4-d");
    let plane = h * w;
    let mut gf = Tensor::zeros(f.dims());
    let mut goff = Tensor::zeros(offsets.values().dims());
    let fx = f.data();
    let offd = offsets.values().data();
    let gd = grad_out.data();
    let max_x = T::from_f64((w - 1) as f64);
    let max_y = T::from_f64((h - 1) as f64);
    let half = (kernel as isize - 1) / 2;
    let d = dilation as isize;
    for i in 0..n {
        let obase = i * 2 * kk * plane;
        for y in 0..h {
            for x in 0..w {
                let p = y * w + x;
                for ky in 0..kernel {
                    for kx in 0..kernel {
                        let tap = ky * kernel + kx;
                        let nom_x = x as isize + d * (kx as isize - half);
                        let nom_y = y as isize + d * (ky as isize - half);
                        let rx = T::from_f64(nom_x as f64) + offd[obase + (2 * tap) * plane + p];
                        let ry = T::from_f64(nom_y as f64) + offd[obase + (2 * tap + 1) * plane + p];
                        let cx = clamp_coord(rx, max_x);
                        let cy = clamp_coord(ry, max_y);
                        let live_x = rx >= T::zero() && rx < max_x;
                        let live_y = ry >= T::zero() && ry < max_y;
                        let (x0, x1, y0, y1, tx, ty) = corners(cx, cy, w, h);
                        let w00 = (T::one() - ty) * (T::one() - tx);
                        let w01 = (T::one() - ty) * tx;
                        let w10 = ty * (T::one() - tx);
                        let w11 = ty * tx;
                        let mut dx_acc = T::zero();
                        let mut dy_acc = T::zero();
                        for ch in 0..c {
                            let fb = (i * c + ch) * plane;
                            let g = gd[(i * c * kk + ch * kk + tap) * plane + p];
                            let f00 = fx[fb + y0 * w + x0];
                            let f01 = fx[fb + y0 * w + x1];
                            let f10 = fx[fb + y1 * w + x0];
                            let f11 = fx[fb + y1 * w + x1];
                            gf.data_mut()[fb + y0 * w + x0] += g * w00;
                            gf.data_mut()[fb + y0 * w + x1] += g * w01;
                            gf.data_mut()[fb + y1 * w + x0] += g * w10;
                            gf.data_mut()[fb + y1 * w + x1] += g * w11;
                            if live_x {
                                dx_acc += g * ((T::one() - ty) * (f01 - f00) + ty * (f11 - f10));
                            }
                            if live_y {
                                dy_acc += g * ((T::one() - tx) * (f10 - f00) + tx * (f11 - f01));
                            }
                        }
                        goff.data_mut()[obase + (2 * tap) * plane + p] += dx_acc;
                        goff.data_mut()[obase + (2 * tap + 1) * plane + p] += dy_acc;
                    }
                }
            }
        }
    }
    (gf, goff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{conv2d, finite_diff_check, Conv2dSpec, PadMode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(shape: &[usize], data: &[f64]) -> Tensor<f64> {
        Tensor::from_vec(shape, data.to_vec()).unwrap()
    }

    #[test]
    fn identity_grid_sampling_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = Tensor::<f64>::rand_uniform(&mut rng, &[2, 3, 5, 7], -1.0, 1.0);
        let grid = identity_grid::<f64>(2, 5, 7);
        let out = bilinear_sample(&f, &grid).unwrap();
        assert_eq!(out, f);
    }

    #[test]
    fn half_pixel_interpolation() {
        let f = t(&[1, 1, 1, 2], &[0.0, 1.0]);
        let mut coords = Tensor::<f64>::zeros(&[1, 2, 1, 2]);
        coords.data_mut()[0] = 0.5; // x for the first output pixel
        let out = bilinear_sample(&f, &coords).unwrap();
        assert_eq!(out.data()[0], 0.5);
    }

    #[test]
    fn out_of_range_coordinates_clamp() {
        let f = t(&[1, 1, 1, 3], &[4.0, 5.0, 6.0]);
        let mut coords = identity_grid::<f64>(1, 1, 3);
        coords.data_mut()[0] = -3.7;
        let out = bilinear_sample(&f, &coords).unwrap();
        assert_eq!(out.data()[0], 4.0);
    }

    #[test]
    fn output_stays_within_input_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = Tensor::<f64>::rand_uniform(&mut rng, &[1, 2, 6, 6], -2.0, 3.0);
        let coords = Tensor::<f64>::rand_uniform(&mut rng, &[1, 2, 6, 6], -4.0, 10.0);
        let out = bilinear_sample(&f, &coords).unwrap();
        let lo = f.data().iter().cloned().fold(f64::MAX, f64::min);
        let hi = f.data().iter().cloned().fold(f64::MIN, f64::max);
        for &v in out.data() {
            assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }

    #[test]
    fn warp_zero_offsets_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = Tensor::<f64>::rand_uniform(&mut rng, &[1, 4, 6, 8], -1.0, 1.0);
        let off = OffsetField::new(OffsetKind::Warp, Tensor::zeros(&[1, 2, 6, 8])).unwrap();
        let out = warp(&f, &off).unwrap();
        assert_eq!(out, f);
    }

    #[test]
    fn warp_rejects_wrong_kind() {
        let f = Tensor::<f64>::zeros(&[1, 1, 4, 4]);
        let off = OffsetField::new(OffsetKind::Kernel { kernel: 3 }, Tensor::zeros(&[1, 18, 4, 4])).unwrap();
        assert!(warp(&f, &off).is_err());
    }

    #[test]
    fn constant_shift_on_ramp() {
        // Horizontal ramp of slope 1: shifting sampling +1 in x adds 1 inside.
        let w = 8;
        let data: Vec<f64> = (0..w).map(|x| x as f64).collect();
        let f = t(&[1, 1, 1, w], &data);
        let mut off = Tensor::<f64>::zeros(&[1, 2, 1, w]);
        for x in 0..w {
            off.data_mut()[x] = 1.0;
        }
        let field = OffsetField::new(OffsetKind::Warp, off).unwrap();
        let out = warp(&f, &field).unwrap();
        for x in 0..w - 1 {
            assert!((out.data()[x] - (x as f64 + 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_half_warps_compose_on_linear_images() {
        let (h, w) = (5, 9);
        let mut data = vec![0.0; h * w];
        for y in 0..h {
            for x in 0..w {
                data[y * w + x] = 2.0 * x as f64 - 0.5 * y as f64 + 1.0;
            }
        }
        let f = t(&[1, 1, h, w], &data);
        let half = {
            let mut off = Tensor::<f64>::zeros(&[1, 2, h, w]);
            for p in 0..h * w {
                off.data_mut()[p] = 0.5;
            }
            OffsetField::new(OffsetKind::Warp, off).unwrap()
        };
        let full = {
            let mut off = Tensor::<f64>::zeros(&[1, 2, h, w]);
            for p in 0..h * w {
                off.data_mut()[p] = 1.0;
            }
            OffsetField::new(OffsetKind::Warp, off).unwrap()
        };
        let twice = warp(&warp(&f, &half).unwrap(), &half).unwrap();
        let once = warp(&f, &full).unwrap();
        for y in 0..h {
            for x in 0..w - 2 {
                let i = y * w + x;
                assert!((twice.data()[i] - once.data()[i]).abs() < 1e-12, "({y},{x})");
            }
        }
    }

    #[test]
    fn zero_offset_gather_matches_replicate_im2col() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = Tensor::<f64>::rand_uniform(&mut rng, &[1, 3, 6, 7], -1.0, 1.0);
        let off = OffsetField::new(OffsetKind::Kernel { kernel: 3 }, Tensor::zeros(&[1, 18, 6, 7])).unwrap();
        let cols = deform_gather(&f, &off, 1, 3).unwrap();
        // Compare against a replicate-border convolution with delta kernels.
        for tap in 0..9 {
            let mut w = Tensor::<f64>::zeros(&[3, 3, 3, 3]);
            for ch in 0..3 {
                w.set4(ch, ch, tap / 3, tap % 3, 1.0);
            }
            let spec = Conv2dSpec { stride: 1, pad: 1, dilation: 1, pad_mode: PadMode::Replicate };
            let y = conv2d(&f, &w, &Tensor::zeros(&[3]), &spec).unwrap();
            for ch in 0..3 {
                for p in 0..42 {
                    let got = cols.data()[(ch * 9 + tap) * 42 + p];
                    let want = y.data()[ch * 42 + p];
                    assert!((got - want).abs() < 1e-12, "tap {tap} ch {ch} p {p}");
                }
            }
        }
    }

    #[test]
    fn dilated_gather_footprint_on_delta() {
        let mut f = Tensor::<f64>::zeros(&[1, 1, 9, 9]);
        f.set4(0, 0, 4, 4, 1.0);
        let off = OffsetField::new(OffsetKind::Kernel { kernel: 3 }, Tensor::zeros(&[1, 18, 9, 9])).unwrap();
        let cols = deform_gather(&f, &off, 2, 3).unwrap();
        // Tap (ky,kx) at output pixel (y,x) reads (y + 2(ky-1), x + 2(kx-1)):
        // the delta shows up only when that lands on (4,4).
        for tap in 0..9 {
            let (ky, kx) = (tap / 3, tap % 3);
            for y in 0..9usize {
                for x in 0..9usize {
                    let v = cols.at4(0, tap, y, x);
                    let hit = y as isize + 2 * (ky as isize - 1) == 4 && x as isize + 2 * (kx as isize - 1) == 4;
                    assert_eq!(v != 0.0, hit, "tap {tap} at ({y},{x})");
                }
            }
        }
    }

    #[test]
    fn uniform_tap_shift_equals_shifted_gather_in_interior() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (h, w) = (6, 10);
        let f = Tensor::<f64>::rand_uniform(&mut rng, &[1, 2, h, w], -1.0, 1.0);
        let d = 1usize;
        // +d on x for every tap.
        let mut offv = Tensor::<f64>::zeros(&[1, 18, h, w]);
        for tap in 0..9 {
            for p in 0..h * w {
                offv.data_mut()[(2 * tap) * h * w + p] = d as f64;
            }
        }
        let off = OffsetField::new(OffsetKind::Kernel { kernel: 3 }, offv).unwrap();
        let zero = OffsetField::new(OffsetKind::Kernel { kernel: 3 }, Tensor::zeros(&[1, 18, h, w])).unwrap();
        let shifted_cols = deform_gather(&f, &off, d, 3).unwrap();
        let plain_cols = deform_gather(&f, &zero, d, 3).unwrap();
        // Interior: column at x of the shifted gather = column at x+d plain.
        for ch in 0..2 * 9 {
            for y in 2..h - 2 {
                for x in 2..w - 3 {
                    let a = shifted_cols.at4(0, ch, y, x);
                    let b = plain_cols.at4(0, ch, y, x + d);
                    assert!((a - b).abs() < 1e-12, "ch {ch} ({y},{x})");
                }
            }
        }
    }

    #[test]
    fn gather_rejects_mismatched_kind_and_kernel() {
        let f = Tensor::<f64>::zeros(&[1, 1, 4, 4]);
        let warp_field = OffsetField::new(OffsetKind::Warp, Tensor::zeros(&[1, 2, 4, 4])).unwrap();
        assert!(deform_gather(&f, &warp_field, 1, 3).is_err());
        let k5 = OffsetField::new(OffsetKind::Kernel { kernel: 5 }, Tensor::zeros(&[1, 50, 4, 4])).unwrap();
        assert!(deform_gather(&f, &k5, 1, 3).is_err());
    }

    #[test]
    fn bilinear_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = Tensor::<f64>::rand_uniform(&mut rng, &[1, 2, 4, 5], -1.0, 1.0);
        // Keep coordinates strictly inside and away from integers.
        let mut coords = identity_grid::<f64>(1, 4, 5);
        for v in coords.data_mut() {
            *v += 0.3;
        }
        for v in coords.data_mut() {
            *v = v.min(3.3);
        }
        let report = finite_diff_check(
            &[f, coords],
            1e-6,
            None,
            13,
            &|ins| bilinear_sample(&ins[0], &ins[1]),
            &|ins, cot| {
                let (gf, gc) = bilinear_sample_backward(&ins[0], &ins[1], cot);
                Ok(vec![gf, gc])
            },
        )
        .unwrap();
        assert!(report.max_rel_err <= 1e-6, "rel err {}", report.max_rel_err);
    }

    #[test]
    fn deform_gather_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = Tensor::<f64>::rand_uniform(&mut rng, &[1, 2, 5, 5], -1.0, 1.0);
        let offv = Tensor::<f64>::rand_uniform(&mut rng, &[1, 18, 5, 5], 0.1, 0.4);
        let report = finite_diff_check(
            &[f, offv],
            1e-6,
            None,
            14,
            &|ins| {
                let off = OffsetField::new(OffsetKind::Kernel { kernel: 3 }, ins[1].clone())?;
                deform_gather(&ins[0], &off, 2, 3)
            },
            &|ins, cot| {
                let off = OffsetField::new(OffsetKind::Kernel { kernel: 3 }, ins[1].clone())?;
                let (gf, go) = deform_gather_backward(&ins[0], &off, 2, 3, cot);
                Ok(vec![gf, go])
            },
        )
        .unwrap();
        assert!(report.max_rel_err <= 1e-6, "rel err {}", report.max_rel_err);
    }
}
