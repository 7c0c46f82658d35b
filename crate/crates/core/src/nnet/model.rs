//! The two-headed fully-convolutional model.
//!
//! Encoder: S stages of (3x3 conv + relu, 3x3 conv + relu), with 2x2 max
//! pooling between stages. Each stage feeds a 1x1 side head per task; side
//! outputs are restored to full resolution by frozen bilinear upsamplers and
//! combined by a learned 1x1 fusion. The foreground and contour heads share
//! the encoder.
//!
//! All learnable parameters live in one flat `Vec<f64>` with a fixed layout,
//! which makes SGD, checkpointing, and finite-difference checks uniform.
//! The upsampling kernels are not parameters and never receive gradients.

use super::loss::{balanced_bce_loss, PosWeightMode};
use super::ops;
use super::tensor::Tensor;
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::mask::Mask;
use crate::probmap::ProbMap;
use crate::synth::rng::SplitMix64;

/// Architecture: input channel count and per-stage channel widths.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FcnArch {
    pub in_channels: usize,
    pub stage_channels: Vec<usize>,
}

/// One named span of the flat parameter vector.
#[derive(Clone, Debug)]
pub struct ParamEntry {
    pub name: String,
    pub offset: usize,
    pub len: usize,
    /// He-init fan-in of the tensor (bias entries use 0 and stay zero).
    fan_in: usize,
}

pub const TASK_NAMES: [&str; 2] = ["fg", "contour"];

impl FcnArch {
    /// Desk-scale default: color input, three stages of widths 8/16/32.
    pub fn desk_default() -> Self {
        FcnArch {
            in_channels: 3,
            stage_channels: vec![8, 16, 32],
        }
    }

    pub fn stages(&self) -> usize {
        self.stage_channels.len()
    }

    /// Input dimensions must be divisible by this (one pooling per stage
    /// transition).
    pub fn divisor(&self) -> usize {
        1 << (self.stages() - 1)
    }

    /// Fixed parameter order: encoder stages, then the side heads and fusion
    /// of each task. Checkpoints and optimizers rely on this order.
    pub fn param_layout(&self) -> Vec<ParamEntry> {
        let mut entries = Vec::new();
        let mut offset = 0;
        let mut push = |name: String, len: usize, fan_in: usize, offset: &mut usize| {
            entries.push(ParamEntry {
                name,
                offset: *offset,
                len,
                fan_in,
            });
            *offset += len;
        };
        let mut prev = self.in_channels;
        for (s, &c) in self.stage_channels.iter().enumerate() {
            push(format!("enc.s{s}.conv0.weight"), c * prev * 9, prev * 9, &mut offset);
            push(format!("enc.s{s}.conv0.bias"), c, 0, &mut offset);
            push(format!("enc.s{s}.conv1.weight"), c * c * 9, c * 9, &mut offset);
            push(format!("enc.s{s}.conv1.bias"), c, 0, &mut offset);
            prev = c;
        }
        for task in TASK_NAMES {
            for (s, &c) in self.stage_channels.iter().enumerate() {
                push(format!("{task}.side{s}.weight"), c, c, &mut offset);
                push(format!("{task}.side{s}.bias"), 1, 0, &mut offset);
            }
            let s_count = self.stages();
            push(format!("{task}.fuse.weight"), s_count, s_count, &mut offset);
            push(format!("{task}.fuse.bias"), 1, 0, &mut offset);
        }
        entries
    }

    pub fn param_count(&self) -> usize {
        self.param_layout().iter().map(|e| e.len).sum()
    }
}

/// Model = architecture + flat parameter vector.
#[derive(Clone, PartialEq, Debug)]
pub struct FcnModel {
    arch: FcnArch,
    params: Vec<f64>,
}

/// Index bundle for one task's head parameters.
struct HeadSpans {
    side_w: Vec<(usize, usize)>,
    side_b: Vec<usize>,
    fuse_w: (usize, usize),
    fuse_b: usize,
}

struct Spans {
    conv0_w: Vec<(usize, usize)>,
    conv0_b: Vec<(usize, usize)>,
    conv1_w: Vec<(usize, usize)>,
    conv1_b: Vec<(usize, usize)>,
    heads: Vec<HeadSpans>,
}

impl FcnModel {
    pub fn zeros(arch: FcnArch) -> Self {
        let n = arch.param_count();
        FcnModel {
            arch,
            params: vec![0.0; n],
        }
    }

    /// He-style fan-in init from the seeded generator; biases zero. This is
    /// the "base" initialization the training protocol starts from.
    pub fn init_seeded(arch: FcnArch, seed: u64) -> Self {
        let layout = arch.param_layout();
        let mut rng = SplitMix64::new(seed);
        let mut params = vec![0.0; arch.param_count()];
        for entry in &layout {
            if entry.fan_in == 0 {
                continue; // bias
            }
            let std = (2.0 / entry.fan_in as f64).sqrt();
            for p in &mut params[entry.offset..entry.offset + entry.len] {
                *p = std * rng.next_gaussian();
            }
        }
        FcnModel { arch, params }
    }

    pub fn from_params(arch: FcnArch, params: Vec<f64>) -> Result<Self> {
        if params.len() != arch.param_count() {
            return Err(Error::LengthMismatch {
                what: "parameter vector",
                expected: arch.param_count(),
                got: params.len(),
            });
        }
        Ok(FcnModel { arch, params })
    }

    pub fn arch(&self) -> &FcnArch {
        &self.arch
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn spans(&self) -> Spans {
        let layout = self.arch.param_layout();
        let find = |name: &str| {
            let e = layout
                .iter()
                .find(|e| e.name == name)
                .unwrap_or_else(|| panic!("missing param {name}"));
            (e.offset, e.len)
        };
        let s_count = self.arch.stages();
        Spans {
            conv0_w: (0..s_count).map(|s| find(&format!("enc.s{s}.conv0.weight"))).collect(),
            conv0_b: (0..s_count).map(|s| find(&format!("enc.s{s}.conv0.bias"))).collect(),
            conv1_w: (0..s_count).map(|s| find(&format!("enc.s{s}.conv1.weight"))).collect(),
            conv1_b: (0..s_count).map(|s| find(&format!("enc.s{s}.conv1.bias"))).collect(),
            heads: TASK_NAMES
                .iter()
                .map(|task| HeadSpans {
                    side_w: (0..s_count).map(|s| find(&format!("{task}.side{s}.weight"))).collect(),
                    side_b: (0..s_count).map(|s| find(&format!("{task}.side{s}.bias")).0).collect(),
                    fuse_w: find(&format!("{task}.fuse.weight")),
                    fuse_b: find(&format!("{task}.fuse.bias")).0,
                })
                .collect(),
        }
    }

    fn input_tensor(&self, frame: &Frame) -> Result<Tensor> {
        if frame.channels() != self.arch.in_channels {
            return Err(Error::InvalidParameter {
                name: "frame",
                reason: format!(
                    "{} channels, model expects {}",
                    frame.channels(),
                    self.arch.in_channels
                ),
            });
        }
        let div = self.arch.divisor();
        if frame.width() % div != 0 || frame.height() % div != 0 {
            return Err(Error::PaddingRequired {
                width: frame.width(),
                height: frame.height(),
                divisor: div,
            });
        }
        let mut data = Vec::with_capacity(frame.channels() * frame.height() * frame.width());
        for c in 0..frame.channels() {
            data.extend_from_slice(frame.plane(c));
        }
        let t = Tensor::from_data(frame.channels(), frame.height(), frame.width(), data);
        t.assert_finite("input frame")?;
        Ok(t)
    }

    /// Full forward pass keeping every intermediate needed for backprop.
    fn run_forward(&self, input: &Tensor) -> Pass {
        let sp = self.spans();
        let s_count = self.arch.stages();
        let p = &self.params;

        let mut stage_inputs = Vec::with_capacity(s_count);
        let mut act_a = Vec::with_capacity(s_count);
        let mut act_h = Vec::with_capacity(s_count);
        let mut pool_argmax = Vec::with_capacity(s_count.saturating_sub(1));

        let mut x = input.clone();
        for s in 0..s_count {
            let c = self.arch.stage_channels[s];
            let (w0, l0) = sp.conv0_w[s];
            let (b0, lb0) = sp.conv0_b[s];
            let a = ops::relu_forward(&ops::conv3x3_forward(&x, &p[w0..w0 + l0], &p[b0..b0 + lb0], c));
            let (w1, l1) = sp.conv1_w[s];
            let (b1, lb1) = sp.conv1_b[s];
            let h = ops::relu_forward(&ops::conv3x3_forward(&a, &p[w1..w1 + l1], &p[b1..b1 + lb1], c));
            stage_inputs.push(x);
            act_a.push(a);
            if s + 1 < s_count {
                let (pooled, argmax) = ops::maxpool2_forward(&h);
                pool_argmax.push(argmax);
                x = pooled;
            } else {
                x = Tensor::zeros(1, 1, 1); // unused after the last stage
            }
            act_h.push(h);
        }

        let mut heads = Vec::with_capacity(TASK_NAMES.len());
        for head_spans in &sp.heads {
            let mut side_logits = Vec::with_capacity(s_count);
            let mut side_up = Vec::with_capacity(s_count);
            for s in 0..s_count {
                let (sw, sl) = head_spans.side_w[s];
                let logit = ops::project_forward(&act_h[s], &p[sw..sw + sl], p[head_spans.side_b[s]]);
                side_up.push(ops::upsample_forward(&logit, 1 << s));
                side_logits.push(logit);
            }
            let (fw, fl) = head_spans.fuse_w;
            let fuse_w = &p[fw..fw + fl];
            let mut fused = Tensor::zeros(1, input.height, input.width);
            fused.data.fill(p[head_spans.fuse_b]);
            for (s, up) in side_up.iter().enumerate() {
                for (dst, &src) in fused.data.iter_mut().zip(&up.data) {
                    *dst += fuse_w[s] * src;
                }
            }
            heads.push(HeadPass {
                side_logits,
                side_up,
                fused,
            });
        }

        Pass {
            stage_inputs,
            act_a,
            act_h,
            pool_argmax,
            heads,
        }
    }

    /// Per-frame inference: full-resolution foreground and contour
    /// probability maps (sigmoid of the fused logits). Deterministic and
    /// stateless: the output for a frame never depends on any other frame.
    pub fn forward(&self, frame: &Frame) -> Result<(ProbMap, ProbMap)> {
        let input = self.input_tensor(frame)?;
        let pass = self.run_forward(&input);
        let mut maps = Vec::with_capacity(2);
        for head in &pass.heads {
            head.fused.assert_finite("fused logits")?;
            let probs: Vec<f64> = head.fused.data.iter().map(|&x| ops::sigmoid(x)).collect();
            maps.push(ProbMap::from_values(frame.width(), frame.height(), probs)?);
        }
        let contour = maps.pop().expect("two heads");
        let fg = maps.pop().expect("two heads");
        Ok((fg, contour))
    }

    /// Total loss only (no gradients): forward pass plus the two balanced
    /// BCE terms. Used by finite-difference probes and training logs.
    pub fn loss(
        &self,
        frame: &Frame,
        fg_target: &Mask,
        contour_target: &Mask,
        lambda: f64,
        mode: PosWeightMode,
    ) -> Result<f64> {
        let input = self.input_tensor(frame)?;
        let pass = self.run_forward(&input);
        let (fg_loss, _) = balanced_bce_loss(&pass.heads[0].fused, fg_target, mode)?;
        let (contour_loss, _) = balanced_bce_loss(&pass.heads[1].fused, contour_target, mode)?;
        Ok(fg_loss + lambda * contour_loss)
    }

    /// Loss and exact reverse-mode gradients for all learnable parameters.
    /// Total loss is `fg + lambda * contour`, each a class-balanced BCE on
    /// the fused logits.
    pub fn backward(
        &self,
        frame: &Frame,
        fg_target: &Mask,
        contour_target: &Mask,
        lambda: f64,
        mode: PosWeightMode,
    ) -> Result<TrainStep> {
        let input = self.input_tensor(frame)?;
        let pass = self.run_forward(&input);
        let sp = self.spans();
        let s_count = self.arch.stages();
        let p = &self.params;
        let mut grad = vec![0.0; p.len()];

        let targets = [fg_target, contour_target];
        let scales = [1.0, lambda];
        let mut losses = [0.0; 2];

        // d(total loss)/d(stage activation h_s), accumulated across heads
        let mut d_act_h: Vec<Tensor> = pass
            .act_h
            .iter()
            .map(|h| Tensor::zeros(h.channels, h.height, h.width))
            .collect();

        for (hi, head) in pass.heads.iter().enumerate() {
            let (loss, mut d_fused) = balanced_bce_loss(&head.fused, targets[hi], mode)?;
            losses[hi] = loss;
            if scales[hi] != 1.0 {
                for v in &mut d_fused.data {
                    *v *= scales[hi];
                }
            }
            let head_spans = &sp.heads[hi];
            let (fw, _) = head_spans.fuse_w;

            // fusion: fused = b + sum_s w_s * up_s
            let mut d_fuse_b = 0.0;
            for &v in &d_fused.data {
                d_fuse_b += v;
            }
            grad[head_spans.fuse_b] += d_fuse_b;
            for s in 0..s_count {
                let up = &head.side_up[s];
                let mut dw = 0.0;
                for (&d, &u) in d_fused.data.iter().zip(&up.data) {
                    dw += d * u;
                }
                grad[fw + s] += dw;

                let mut d_up = d_fused.clone();
                for v in &mut d_up.data {
                    *v *= p[fw + s];
                }
                // frozen upsampler: gradient flows through, none is stored
                let logit = &head.side_logits[s];
                let d_logit = ops::upsample_backward(&d_up, 1 << s, logit.height, logit.width);

                let (sw, sl) = head_spans.side_w[s];
                let (d_h, d_side_w, d_side_b) =
                    ops::project_backward(&pass.act_h[s], &p[sw..sw + sl], &d_logit);
                for (g, d) in grad[sw..sw + sl].iter_mut().zip(&d_side_w) {
                    *g += d;
                }
                grad[head_spans.side_b[s]] += d_side_b;
                for (acc, d) in d_act_h[s].data.iter_mut().zip(&d_h.data) {
                    *acc += d;
                }
            }
        }

        // encoder, deepest stage first
        let mut d_stage_input: Option<Tensor> = None;
        for s in (0..s_count).rev() {
            let mut d_h = std::mem::replace(&mut d_act_h[s], Tensor::zeros(1, 1, 1));
            if let Some(d_pooled) = d_stage_input.take() {
                let h = &pass.act_h[s];
                let up = ops::maxpool2_backward(
                    (h.channels, h.height, h.width),
                    &pass.pool_argmax[s],
                    &d_pooled,
                );
                for (acc, d) in d_h.data.iter_mut().zip(&up.data) {
                    *acc += d;
                }
            }
            let c = self.arch.stage_channels[s];

            let d_pre1 = ops::relu_backward(&pass.act_h[s], &d_h);
            let (w1, l1) = sp.conv1_w[s];
            let (d_a_conv, d_w1, d_b1) = ops::conv3x3_backward(&pass.act_a[s], &p[w1..w1 + l1], c, &d_pre1);
            for (g, d) in grad[w1..w1 + l1].iter_mut().zip(&d_w1) {
                *g += d;
            }
            let (b1, lb1) = sp.conv1_b[s];
            for (g, d) in grad[b1..b1 + lb1].iter_mut().zip(&d_b1) {
                *g += d;
            }

            let d_pre0 = ops::relu_backward(&pass.act_a[s], &d_a_conv);
            let (w0, l0) = sp.conv0_w[s];
            let (d_x, d_w0, d_b0) =
                ops::conv3x3_backward(&pass.stage_inputs[s], &p[w0..w0 + l0], c, &d_pre0);
            for (g, d) in grad[w0..w0 + l0].iter_mut().zip(&d_w0) {
                *g += d;
            }
            let (b0, lb0) = sp.conv0_b[s];
            for (g, d) in grad[b0..b0 + lb0].iter_mut().zip(&d_b0) {
                *g += d;
            }

            if s > 0 {
                d_stage_input = Some(d_x);
            }
        }

        Ok(TrainStep {
            fg_loss: losses[0],
            contour_loss: losses[1],
            gradients: grad,
        })
    }
}

struct HeadPass {
    side_logits: Vec<Tensor>,
    side_up: Vec<Tensor>,
    fused: Tensor,
}

struct Pass {
    stage_inputs: Vec<Tensor>,
    act_a: Vec<Tensor>,
    act_h: Vec<Tensor>,
    pool_argmax: Vec<Vec<u32>>,
    heads: Vec<HeadPass>,
}

/// One backward pass: per-head losses plus the flat gradient vector.
pub struct TrainStep {
    pub fg_loss: f64,
    pub contour_loss: f64,
    pub gradients: Vec<f64>,
}

impl TrainStep {
    pub fn total_loss(&self, lambda: f64) -> f64 {
        self.fg_loss + lambda * self.contour_loss
    }
}

/// Supervision target for the contour head: the ground-truth boundary
/// dilated by one pixel (3x3 structuring element).
pub fn contour_target(gt: &Mask) -> Mask {
    gt.boundary_mask().dilate3x3()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gray_frame(w: usize, h: usize, value: f64) -> Frame {
        Frame::from_planes(w, h, vec![vec![value; w * h]])
    }

    #[test]
    fn zero_weights_give_constant_half_maps() {
        let model = FcnModel::zeros(FcnArch {
            in_channels: 1,
            stage_channels: vec![4, 8],
        });
        let (fg, contour) = model.forward(&gray_frame(8, 8, 0.3)).unwrap();
        assert!(fg.values().iter().all(|&v| v == 0.5));
        assert!(contour.values().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn forward_is_deterministic() {
        let model = FcnModel::init_seeded(FcnArch::desk_default(), 5);
        let frame = Frame::from_planes(
            16,
            16,
            (0..3)
                .map(|c| (0..256).map(|i| ((i * (c + 2)) % 97) as f64 / 96.0).collect())
                .collect(),
        );
        let a = model.forward(&frame).unwrap();
        let b = model.forward(&frame).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn output_dims_match_input_dims() {
        let model = FcnModel::init_seeded(FcnArch::desk_default(), 1);
        for (w, h) in [(16, 16), (32, 16), (64, 64)] {
            let frame = Frame::new(w, h, 3);
            let (fg, _) = model.forward(&frame).unwrap();
            assert_eq!((fg.width(), fg.height()), (w, h));
        }
    }

    #[test]
    fn indivisible_dimensions_require_padding() {
        let model = FcnModel::init_seeded(FcnArch::desk_default(), 1);
        let frame = Frame::new(18, 16, 3);
        assert!(matches!(
            model.forward(&frame),
            Err(Error::PaddingRequired { divisor: 4, .. })
        ));
    }

    /// Scalar trace through a 1-stage 1-channel network: only center conv
    /// taps are set, so every pixel carries the same hand-computed value.
    #[test]
    fn scalar_trace_matches_hand_computation() {
        let arch = FcnArch {
            in_channels: 1,
            stage_channels: vec![1],
        };
        let mut model = FcnModel::zeros(arch.clone());
        let layout = arch.param_layout();
        fn set(model: &mut FcnModel, layout: &[ParamEntry], name: &str, values: &[f64]) {
            let e = layout.iter().find(|e| e.name == name).unwrap();
            model.params_mut()[e.offset..e.offset + values.len()].copy_from_slice(values);
        }
        let set = |model: &mut FcnModel, name: &str, values: &[f64]| set(model, &layout, name, values);
        let mut conv0 = vec![0.0; 9];
        conv0[4] = 2.0;
        set(&mut model, "enc.s0.conv0.weight", &conv0);
        set(&mut model, "enc.s0.conv0.bias", &[0.1]);
        let mut conv1 = vec![0.0; 9];
        conv1[4] = 1.5;
        set(&mut model, "enc.s0.conv1.weight", &conv1);
        set(&mut model, "enc.s0.conv1.bias", &[-0.15]);
        set(&mut model, "fg.side0.weight", &[0.8]);
        set(&mut model, "fg.side0.bias", &[0.05]);
        set(&mut model, "fg.fuse.weight", &[2.0]);
        set(&mut model, "fg.fuse.bias", &[-0.5]);

        // a = relu(2*0.5 + 0.1) = 1.1; h = relu(1.5*1.1 - 0.15) = 1.5
        // side = 0.8*1.5 + 0.05 = 1.25; fused = 2*1.25 - 0.5 = 2.0
        let (fg, contour) = model.forward(&gray_frame(4, 4, 0.5)).unwrap();
        let expected = 1.0 / (1.0 + (-2.0f64).exp());
        assert_abs_diff_eq!(fg.get(2, 2), expected, epsilon = 1e-15);
        // doubling fusion weight and bias doubles the fused logit
        set(&mut model, "fg.fuse.weight", &[4.0]);
        set(&mut model, "fg.fuse.bias", &[-1.0]);
        let (fg2, _) = model.forward(&gray_frame(4, 4, 0.5)).unwrap();
        let expected2 = 1.0 / (1.0 + (-4.0f64).exp());
        assert_abs_diff_eq!(fg2.get(2, 2), expected2, epsilon = 1e-15);
        // untouched contour head stays at sigmoid(0)
        assert!(contour.values().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn frozen_upsamplers_have_no_parameters() {
        let layout = FcnArch::desk_default().param_layout();
        assert!(layout.iter().all(|e| !e.name.contains("upsample")));
        // layout is contiguous and complete
        let mut expected_offset = 0;
        for e in &layout {
            assert_eq!(e.offset, expected_offset);
            expected_offset += e.len;
        }
        assert_eq!(expected_offset, FcnArch::desk_default().param_count());
    }

    #[test]
    fn contour_target_cases() {
        assert!(contour_target(&Mask::new(5, 5)).is_empty());

        let mut single = Mask::new(5, 5);
        single.set(0, 0, true);
        let t = contour_target(&single);
        // 3x3 blob clipped to the corner
        assert_eq!(t.area(), 4);
        assert!(t.get(0, 0) && t.get(1, 0) && t.get(0, 1) && t.get(1, 1));

        let square = Mask::from_fn(8, 8, |x, y| (2..6).contains(&x) && (2..6).contains(&y));
        let got = contour_target(&square);
        // brute force: boundary then dilate
        let boundary: Vec<(usize, usize)> = square
            .foreground_pixels()
            .into_iter()
            .filter(|&(x, y)| {
                [(x.wrapping_sub(1), y), (x + 1, y), (x, y.wrapping_sub(1)), (x, y + 1)]
                    .iter()
                    .any(|&(nx, ny)| nx >= 8 || ny >= 8 || !square.get(nx, ny))
            })
            .collect();
        let mut expected = Mask::new(8, 8);
        for (x, y) in boundary {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let nx = x as i64 + dx;
                    let ny = y as i64 + dy;
                    if (0..8).contains(&nx) && (0..8).contains(&ny) {
                        expected.set(nx as usize, ny as usize, true);
                    }
                }
            }
        }
        assert_eq!(got, expected);
    }

    #[test]
    fn saturated_targets_give_near_zero_gradients() {
        let arch = FcnArch {
            in_channels: 1,
            stage_channels: vec![2],
        };
        // bias the fg fusion head hard positive, target all-foreground
        let mut model = FcnModel::zeros(arch.clone());
        let layout = arch.param_layout();
        let e = layout.iter().find(|e| e.name == "fg.fuse.bias").unwrap();
        model.params_mut()[e.offset] = 60.0;
        let e2 = layout.iter().find(|e| e.name == "contour.fuse.bias").unwrap();
        model.params_mut()[e2.offset] = 60.0;
        let frame = gray_frame(4, 4, 0.5);
        let all_fg = Mask::from_fn(4, 4, |_, _| true);
        let step = model
            .backward(&frame, &all_fg, &all_fg, 1.0, PosWeightMode::Balanced)
            .unwrap();
        assert!(step.fg_loss < 1e-20);
        assert!(step.gradients.iter().all(|g| g.abs() < 1e-20));
    }
}
