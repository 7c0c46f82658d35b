//! Layer primitives: 3x3 same-padding convolution, ReLU, 2x2 max pooling,
//! fixed bilinear upsampling, and 1x1 projections.
//!
//! Everything is written as shifted-slice passes over contiguous rows so the
//! hot loops vectorize, and every reduction runs in a fixed order, so results
//! are bit-identical regardless of how callers schedule work.

use super::tensor::Tensor;

/// Dot product with four fixed-order accumulators. The grouping
/// (a0+a2)+(a1+a3) is part of the contract: it never changes, so sums are
/// reproducible while still giving the compiler independent chains.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let j = i * 4;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut tail = 0.0;
    for j in chunks * 4..a.len() {
        tail += a[j] * b[j];
    }
    (acc[0] + acc[2]) + (acc[1] + acc[3]) + tail
}

/// `out += scale * input` over matching slices.
#[inline]
fn axpy(out: &mut [f64], input: &[f64], scale: f64) {
    debug_assert_eq!(out.len(), input.len());
    for (o, &i) in out.iter_mut().zip(input) {
        *o += scale * i;
    }
}

/// Accumulates one 3x3 tap pass: `out[y][x] += w * inp[y+dy][x+dx]` over the
/// valid range.
fn conv_tap(out: &mut [f64], inp: &[f64], h: usize, w: usize, dy: isize, dx: isize, weight: f64) {
    let y0 = (-dy).max(0) as usize;
    let y1 = (h as isize).min(h as isize - dy) as usize;
    let x0 = (-dx).max(0) as usize;
    let x1 = (w as isize).min(w as isize - dx) as usize;
    if x0 >= x1 {
        return;
    }
    let ix0 = (x0 as isize + dx) as usize;
    let ix1 = (x1 as isize + dx) as usize;
    for y in y0..y1 {
        let iy = (y as isize + dy) as usize;
        axpy(&mut out[y * w + x0..y * w + x1], &inp[iy * w + ix0..iy * w + ix1], weight);
    }
}

/// 3x3 convolution, stride 1, zero padding 1: output spatial size equals the
/// input. Weights are laid out `[out_c][in_c][3][3]`.
pub fn conv3x3_forward(input: &Tensor, weights: &[f64], bias: &[f64], out_c: usize) -> Tensor {
    let (in_c, h, w) = (input.channels, input.height, input.width);
    debug_assert_eq!(weights.len(), out_c * in_c * 9);
    debug_assert_eq!(bias.len(), out_c);
    let mut out = Tensor::zeros(out_c, h, w);
    for o in 0..out_c {
        let plane = out.plane_mut(o);
        plane.fill(bias[o]);
        for i in 0..in_c {
            let inp = input.plane(i);
            let w9 = &weights[(o * in_c + i) * 9..(o * in_c + i) * 9 + 9];
            for ky in 0..3isize {
                for kx in 0..3isize {
                    conv_tap(plane, inp, h, w, ky - 1, kx - 1, w9[(ky * 3 + kx) as usize]);
                }
            }
        }
    }
    out
}

/// Gradients of [`conv3x3_forward`]: returns (d_input, d_weights, d_bias).
pub fn conv3x3_backward(
    input: &Tensor,
    weights: &[f64],
    out_c: usize,
    d_out: &Tensor,
) -> (Tensor, Vec<f64>, Vec<f64>) {
    let (in_c, h, w) = (input.channels, input.height, input.width);
    let mut d_input = Tensor::zeros(in_c, h, w);
    let mut d_weights = vec![0.0; weights.len()];
    let mut d_bias = vec![0.0; out_c];

    for o in 0..out_c {
        let dout = d_out.plane(o);
        d_bias[o] = dout.iter().sum();
        for i in 0..in_c {
            let inp = input.plane(i);
            let base = (o * in_c + i) * 9;
            for ky in 0..3isize {
                for kx in 0..3isize {
                    let (dy, dx) = (ky - 1, kx - 1);
                    // dW[o][i][ky][kx] = sum over valid (y,x) of dout[y][x] * in[y+dy][x+dx]
                    let y0 = (-dy).max(0) as usize;
                    let y1 = (h as isize).min(h as isize - dy) as usize;
                    let x0 = (-dx).max(0) as usize;
                    let x1 = (w as isize).min(w as isize - dx) as usize;
                    if x0 >= x1 {
                        continue;
                    }
                    let mut acc = 0.0;
                    for y in y0..y1 {
                        let iy = (y as isize + dy) as usize;
                        let ix0 = (x0 as isize + dx) as usize;
                        let ix1 = (x1 as isize + dx) as usize;
                        acc += dot(&dout[y * w + x0..y * w + x1], &inp[iy * w + ix0..iy * w + ix1]);
                    }
                    d_weights[base + (ky * 3 + kx) as usize] = acc;
                    // dIn[i][y+dy][x+dx] += w * dout[y][x]: same tap shifted the other way
                    let din = d_input.plane_mut(i);
                    let wv = weights[base + (ky * 3 + kx) as usize];
                    for y in y0..y1 {
                        let iy = (y as isize + dy) as usize;
                        let ix0 = (x0 as isize + dx) as usize;
                        let ix1 = (x1 as isize + dx) as usize;
                        axpy(&mut din[iy * w + ix0..iy * w + ix1], &dout[y * w + x0..y * w + x1], wv);
                    }
                }
            }
        }
    }
    (d_input, d_weights, d_bias)
}

pub fn relu_forward(t: &Tensor) -> Tensor {
    let mut out = t.clone();
    for v in &mut out.data {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    out
}

/// ReLU gradient masked by the forward *output* (positive output means the
/// unit was active).
pub fn relu_backward(output: &Tensor, d_out: &Tensor) -> Tensor {
    let mut d_in = d_out.clone();
    for (d, &o) in d_in.data.iter_mut().zip(&output.data) {
        if o <= 0.0 {
            *d = 0.0;
        }
    }
    d_in
}

/// 2x2 max pooling, stride 2. Ties pick the first maximum in scan order so
/// gradient routing is deterministic. Returns the pooled tensor and the flat
/// argmax index per output element.
pub fn maxpool2_forward(t: &Tensor) -> (Tensor, Vec<u32>) {
    let (c, h, w) = (t.channels, t.height, t.width);
    debug_assert!(h % 2 == 0 && w % 2 == 0);
    let (oh, ow) = (h / 2, w / 2);
    let mut out = Tensor::zeros(c, oh, ow);
    let mut argmax = vec![0u32; c * oh * ow];
    for ch in 0..c {
        let inp = t.plane(ch);
        for oy in 0..oh {
            for ox in 0..ow {
                let mut best = f64::NEG_INFINITY;
                let mut best_idx = 0usize;
                for dy in 0..2 {
                    for dx in 0..2 {
                        let idx = (oy * 2 + dy) * w + ox * 2 + dx;
                        if inp[idx] > best {
                            best = inp[idx];
                            best_idx = idx;
                        }
                    }
                }
                let o_idx = (ch * oh + oy) * ow + ox;
                out.data[o_idx] = best;
                argmax[o_idx] = best_idx as u32;
            }
        }
    }
    (out, argmax)
}

pub fn maxpool2_backward(input_shape: (usize, usize, usize), argmax: &[u32], d_out: &Tensor) -> Tensor {
    let (c, h, w) = input_shape;
    let mut d_in = Tensor::zeros(c, h, w);
    let plane = h * w;
    let (oh, ow) = (d_out.height, d_out.width);
    for ch in 0..c {
        for oy in 0..oh {
            for ox in 0..ow {
                let o_idx = (ch * oh + oy) * ow + ox;
                d_in.data[ch * plane + argmax[o_idx] as usize] += d_out.data[o_idx];
            }
        }
    }
    d_in
}

/// 1D bilinear interpolation kernel for an even integer factor: length
/// `2*factor`, the classic fixed upsampling filter.
pub fn bilinear_kernel(factor: usize) -> Vec<f64> {
    debug_assert!(factor >= 2 && factor % 2 == 0);
    let center = factor as f64 - 0.5;
    (0..2 * factor)
        .map(|i| 1.0 - (i as f64 - center).abs() / factor as f64)
        .collect()
}

/// Fixed bilinear upsampling of a single-channel map by an integer factor
/// (transposed convolution with the bilinear kernel, stride = factor,
/// padding = factor/2). Factor 1 is the identity. The kernel is frozen: it
/// carries no learnable parameters.
pub fn upsample_forward(t: &Tensor, factor: usize) -> Tensor {
    debug_assert_eq!(t.channels, 1);
    if factor == 1 {
        return t.clone();
    }
    let k = bilinear_kernel(factor);
    let (h, w) = (t.height, t.width);
    let (oh, ow) = (h * factor, w * factor);
    let pad = factor / 2;
    let mut out = Tensor::zeros(1, oh, ow);
    for iy in 0..h {
        for (ky, &wy) in k.iter().enumerate() {
            let oy = iy as isize * factor as isize - pad as isize + ky as isize;
            if oy < 0 || oy >= oh as isize {
                continue;
            }
            let oy = oy as usize;
            for ix in 0..w {
                let v = t.data[iy * w + ix];
                if v == 0.0 {
                    continue;
                }
                for (kx, &wx) in k.iter().enumerate() {
                    let ox = ix as isize * factor as isize - pad as isize + kx as isize;
                    if ox < 0 || ox >= ow as isize {
                        continue;
                    }
                    out.data[oy * ow + ox as usize] += v * wy * wx;
                }
            }
        }
    }
    out
}

/// Adjoint of [`upsample_forward`].
pub fn upsample_backward(d_out: &Tensor, factor: usize, in_h: usize, in_w: usize) -> Tensor {
    debug_assert_eq!(d_out.channels, 1);
    if factor == 1 {
        return d_out.clone();
    }
    let k = bilinear_kernel(factor);
    let (oh, ow) = (d_out.height, d_out.width);
    let pad = factor / 2;
    let mut d_in = Tensor::zeros(1, in_h, in_w);
    for iy in 0..in_h {
        for (ky, &wy) in k.iter().enumerate() {
            let oy = iy as isize * factor as isize - pad as isize + ky as isize;
            if oy < 0 || oy >= oh as isize {
                continue;
            }
            let oy = oy as usize;
            for ix in 0..in_w {
                let mut acc = 0.0;
                for (kx, &wx) in k.iter().enumerate() {
                    let ox = ix as isize * factor as isize - pad as isize + kx as isize;
                    if ox < 0 || ox >= ow as isize {
                        continue;
                    }
                    acc += d_out.data[oy * ow + ox as usize] * wy * wx;
                }
                d_in.data[iy * in_w + ix] += acc;
            }
        }
    }
    d_in
}

/// 1x1 projection of a multi-channel tensor to a single-channel map.
pub fn project_forward(input: &Tensor, weights: &[f64], bias: f64) -> Tensor {
    debug_assert_eq!(weights.len(), input.channels);
    let (h, w) = (input.height, input.width);
    let mut out = Tensor::zeros(1, h, w);
    out.data.fill(bias);
    for (c, &wv) in weights.iter().enumerate() {
        axpy(&mut out.data, input.plane(c), wv);
    }
    out
}

/// Gradients of [`project_forward`]: (d_input, d_weights, d_bias).
pub fn project_backward(input: &Tensor, weights: &[f64], d_out: &Tensor) -> (Tensor, Vec<f64>, f64) {
    let (c, h, w) = (input.channels, input.height, input.width);
    let mut d_input = Tensor::zeros(c, h, w);
    let mut d_weights = vec![0.0; c];
    for ch in 0..c {
        d_weights[ch] = dot(&d_out.data, input.plane(ch));
        axpy(d_input.plane_mut(ch), &d_out.data, weights[ch]);
    }
    let d_bias = d_out.data.iter().sum();
    (d_input, d_weights, d_bias)
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^x) without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}
