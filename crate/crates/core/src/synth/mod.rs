//! Deterministic generator of synthetic multi-object video sequences:
//! textured shapes on textured backgrounds with linear motion, optional
//! wobble and spin, distractors, an optional occluder window, and per-pixel
//! noise. Every sequence carries exact ground truth for its target shape.
//!
//! The frame at time `t` is a pure function of the scene spec and `t`, never
//! of previous renders, so frames can be produced in any order or in
//! parallel with identical results.

pub mod rng;

use std::collections::{BTreeMap, BTreeSet};

use crate::frame::{Attribute, Frame, VideoSequence};
use crate::mask::Mask;
use rng::{gaussian_from_word, mix64, SplitMix64};

/// Target speed (px/frame) at and above which a sequence is tagged FM.
pub const FAST_MOTION_THRESHOLD: f64 = 2.5;

#[derive(Clone, Debug, PartialEq)]
pub enum ShapeKind {
    Ellipse { rx: f64, ry: f64 },
    /// Convex, counterclockwise, vertices relative to the shape center.
    Polygon { points: Vec<(f64, f64)> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Texture {
    Checker { period: f64, a: [f64; 3], b: [f64; 3] },
    Gradient { angle: f64, wavelength: f64, a: [f64; 3], b: [f64; 3] },
    Speckle { cell: f64, a: [f64; 3], b: [f64; 3], seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MotionPath {
    pub start: (f64, f64),
    pub velocity: (f64, f64),
    pub wobble_amp: f64,
    pub wobble_freq: f64,
    /// Radians per frame.
    pub spin: f64,
}

impl MotionPath {
    pub fn fixed(x: f64, y: f64) -> Self {
        MotionPath {
            start: (x, y),
            velocity: (0.0, 0.0),
            wobble_amp: 0.0,
            wobble_freq: 0.0,
            spin: 0.0,
        }
    }

    pub fn position(&self, t: usize) -> (f64, f64) {
        let tf = t as f64;
        (
            self.start.0 + self.velocity.0 * tf,
            self.start.1 + self.velocity.1 * tf + self.wobble_amp * (self.wobble_freq * tf).sin(),
        )
    }

    pub fn angle(&self, t: usize) -> f64 {
        self.spin * t as f64
    }

    pub fn speed(&self) -> f64 {
        (self.velocity.0 * self.velocity.0 + self.velocity.1 * self.velocity.1).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShapeDesc {
    pub kind: ShapeKind,
    pub texture: Texture,
    pub path: MotionPath,
    /// 0 disables; > 0 darkens the shape over the course of the sequence.
    pub appearance_drift: f64,
    /// First frame the shape is rendered; earlier frames skip it entirely.
    /// The target always uses 0.
    pub appear_from: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Occluder {
    pub shape: ShapeDesc,
    /// Active frame range `[start, end)`.
    pub window: (usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneSpec {
    pub seed: u64,
    pub frame_size: usize,
    pub num_frames: usize,
    pub background: Texture,
    pub target: ShapeDesc,
    pub distractors: Vec<ShapeDesc>,
    pub occluder: Option<Occluder>,
    pub noise_sigma: f64,
    pub dynamic_background: bool,
    pub motion_blur: bool,
}

/// Train/validation split with full ground truth and the scene seed of every
/// sequence (recorded in the dataset manifest).
#[derive(Clone, Debug)]
pub struct SynthDataset {
    pub train: Vec<VideoSequence>,
    pub val: Vec<VideoSequence>,
    pub seeds: BTreeMap<String, u64>,
}

impl ShapeDesc {
    /// Point-in-shape test in world coordinates at frame `t`.
    fn contains(&self, t: usize, px: f64, py: f64) -> bool {
        if t < self.appear_from {
            return false;
        }
        let (cx, cy) = self.path.position(t);
        self.contains_at(px, py, cx, cy, self.path.angle(t))
    }

    fn contains_at(&self, px: f64, py: f64, cx: f64, cy: f64, angle: f64) -> bool {
        let (sin, cos) = angle.sin_cos();
        // rotate into the shape frame
        let dx = px - cx;
        let dy = py - cy;
        let lx = dx * cos + dy * sin;
        let ly = -dx * sin + dy * cos;
        match &self.kind {
            ShapeKind::Ellipse { rx, ry } => {
                let nx = lx / rx;
                let ny = ly / ry;
                nx * nx + ny * ny <= 1.0
            }
            ShapeKind::Polygon { points } => {
                let n = points.len();
                for i in 0..n {
                    let (ax, ay) = points[i];
                    let (bx, by) = points[(i + 1) % n];
                    let cross = (bx - ax) * (ly - ay) - (by - ay) * (lx - ax);
                    if cross < 0.0 {
                        return false;
                    }
                }
                true
            }
        }
    }

    /// Texture color in shape-local coordinates.
    fn color(&self, t: usize, num_frames: usize, px: f64, py: f64) -> [f64; 3] {
        let (cx, cy) = self.path.position(t);
        let (sin, cos) = self.path.angle(t).sin_cos();
        let dx = px - cx;
        let dy = py - cy;
        let lx = dx * cos + dy * sin;
        let ly = -dx * sin + dy * cos;
        let mut c = self.texture.sample(lx, ly);
        if self.appearance_drift > 0.0 {
            let span = (num_frames.saturating_sub(1)).max(1) as f64;
            let fade = 1.0 - 0.5 * self.appearance_drift * t as f64 / span;
            for ch in &mut c {
                *ch *= fade;
            }
        }
        c
    }
}

impl Texture {
    fn sample(&self, x: f64, y: f64) -> [f64; 3] {
        match self {
            Texture::Checker { period, a, b } => {
                let ix = (x / period).floor() as i64;
                let iy = (y / period).floor() as i64;
                if (ix + iy).rem_euclid(2) == 0 {
                    *a
                } else {
                    *b
                }
            }
            Texture::Gradient {
                angle,
                wavelength,
                a,
                b,
            } => {
                let proj = x * angle.cos() + y * angle.sin();
                let s = 0.5 + 0.5 * (std::f64::consts::TAU * proj / wavelength).sin();
                lerp3(*a, *b, s)
            }
            Texture::Speckle { cell, a, b, seed } => {
                let ix = (x / cell).floor() as i64 as u64;
                let iy = (y / cell).floor() as i64 as u64;
                let word = mix64(seed ^ ix.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ iy.rotate_left(32));
                let s = (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                lerp3(*a, *b, s)
            }
        }
    }
}

fn lerp3(a: [f64; 3], b: [f64; 3], s: f64) -> [f64; 3] {
    [
        a[0] + (b[0] - a[0]) * s,
        a[1] + (b[1] - a[1]) * s,
        a[2] + (b[2] - a[2]) * s,
    ]
}

fn occluder_active(spec: &SceneSpec, t: usize) -> bool {
    spec.occluder
        .as_ref()
        .map(|o| t >= o.window.0 && t < o.window.1)
        .unwrap_or(false)
}

/// Exact rasterization of the target shape at frame `t`, before occlusion is
/// applied. Ground truth is always a subset of this silhouette.
pub fn target_silhouette(spec: &SceneSpec, t: usize) -> Mask {
    let n = spec.frame_size;
    Mask::from_fn(n, n, |x, y| {
        spec.target.contains(t, x as f64 + 0.5, y as f64 + 0.5)
    })
}

/// Ground truth at frame `t`: the target silhouette with occluded pixels
/// removed while the occluder window is active.
pub fn ground_truth(spec: &SceneSpec, t: usize) -> Mask {
    let mut gt = target_silhouette(spec, t);
    if occluder_active(spec, t) {
        let occ = &spec.occluder.as_ref().unwrap().shape;
        for y in 0..spec.frame_size {
            for x in 0..spec.frame_size {
                if gt.get(x, y) && occ.contains(t, x as f64 + 0.5, y as f64 + 0.5) {
                    gt.set(x, y, false);
                }
            }
        }
    }
    gt
}

/// Renders frame `t` of the scene. Pure in `(spec, t)`; intensities are
/// quantized to the 8-bit grid so file round trips are lossless.
pub fn render_frame(spec: &SceneSpec, t: usize) -> Frame {
    let n = spec.frame_size;
    let mut frame = Frame::new(n, n, 3);
    // sub-frame offsets for motion blur; weights sum to 1
    let blur_taps: &[(f64, f64)] = if spec.motion_blur {
        &[(-0.3, 0.25), (0.0, 0.5), (0.3, 0.25)]
    } else {
        &[(0.0, 1.0)]
    };
    for y in 0..n {
        for x in 0..n {
            let px = x as f64 + 0.5;
            let py = y as f64 + 0.5;

            // Background; animated backgrounds scroll with t.
            let (bx, by) = if spec.dynamic_background {
                (px + 1.5 * t as f64, py - 0.8 * t as f64)
            } else {
                (px, py)
            };
            let mut color = spec.background.sample(bx, by);

            for d in &spec.distractors {
                if d.contains(t, px, py) {
                    color = d.color(t, spec.num_frames, px, py);
                }
            }

            // Target on top of distractors, blended over blur taps.
            let mut cov = 0.0;
            let mut tcolor = [0.0; 3];
            for &(dt, wgt) in blur_taps {
                let tf = t as f64 + dt;
                let (cx0, cy0) = spec.target.path.position(t);
                let cx = cx0 + spec.target.path.velocity.0 * dt;
                let cy = cy0 + spec.target.path.velocity.1 * dt;
                let angle = spec.target.path.spin * tf;
                if spec.target.contains_at(px, py, cx, cy, angle) {
                    cov += wgt;
                    let c = spec.target.color(t, spec.num_frames, px, py);
                    tcolor = lerp3(tcolor, c, 1.0);
                }
            }
            if cov > 0.0 {
                color = lerp3(color, tcolor, cov);
            }

            if occluder_active(spec, t) {
                let occ = &spec.occluder.as_ref().unwrap().shape;
                if occ.contains(t, px, py) {
                    color = occ.color(t, spec.num_frames, px, py);
                }
            }

            for (c, &base) in color.iter().enumerate() {
                let mut v = base;
                if spec.noise_sigma > 0.0 {
                    let key = ((t as u64) << 34) | ((c as u64) << 32) | ((y as u64) << 16) | x as u64;
                    v += spec.noise_sigma * gaussian_from_word(spec.seed ^ mix64(key));
                }
                let q = (v.clamp(0.0, 1.0) * 255.0).round() / 255.0;
                frame.set(c, x, y, q);
            }
        }
    }
    frame
}

fn sequence_attributes(spec: &SceneSpec) -> BTreeSet<Attribute> {
    let mut attrs = BTreeSet::new();
    if spec.occluder.is_some() {
        attrs.insert(Attribute::Occlusion);
    }
    if spec.target.path.speed() >= FAST_MOTION_THRESHOLD {
        attrs.insert(Attribute::FastMotion);
    }
    if spec.target.appearance_drift > 0.0 {
        attrs.insert(Attribute::AppearanceChange);
    }
    if spec.dynamic_background {
        attrs.insert(Attribute::DynamicBackground);
    }
    if spec.motion_blur {
        attrs.insert(Attribute::MotionBlur);
    }
    attrs
}

/// Renders the full sequence with ground truth and attribute tags.
pub fn render_sequence(name: impl Into<String>, spec: &SceneSpec) -> VideoSequence {
    assert!(spec.num_frames >= 2, "sequence needs at least 2 frames");
    let frames: Vec<Frame> = (0..spec.num_frames).map(|t| render_frame(spec, t)).collect();
    let gt: Vec<Mask> = (0..spec.num_frames).map(|t| ground_truth(spec, t)).collect();
    VideoSequence::new(name, frames, Some(gt), sequence_attributes(spec))
}

fn random_texture(rng: &mut SplitMix64) -> Texture {
    let a = [
        rng.uniform(0.05, 0.95),
        rng.uniform(0.05, 0.95),
        rng.uniform(0.05, 0.95),
    ];
    let b = [
        rng.uniform(0.05, 0.95),
        rng.uniform(0.05, 0.95),
        rng.uniform(0.05, 0.95),
    ];
    match rng.next_below(3) {
        0 => Texture::Checker {
            period: rng.uniform(2.0, 5.0),
            a,
            b,
        },
        1 => Texture::Gradient {
            angle: rng.uniform(0.0, std::f64::consts::TAU),
            wavelength: rng.uniform(8.0, 24.0),
            a,
            b,
        },
        _ => Texture::Speckle {
            cell: rng.uniform(1.5, 3.5),
            a,
            b,
            seed: rng.next_u64(),
        },
    }
}

fn texture_mean(t: &Texture) -> [f64; 3] {
    let (a, b) = match t {
        Texture::Checker { a, b, .. } => (a, b),
        Texture::Gradient { a, b, .. } => (a, b),
        Texture::Speckle { a, b, .. } => (a, b),
    };
    [
        0.5 * (a[0] + b[0]),
        0.5 * (a[1] + b[1]),
        0.5 * (a[2] + b[2]),
    ]
}

fn mean_abs_diff(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).abs() + (a[1] - b[1]).abs() + (a[2] - b[2]).abs()) / 3.0
}

/// Texture visibly distinct from `against`, drawn from the stream.
fn contrasting_texture(rng: &mut SplitMix64, against: &Texture) -> Texture {
    // Bounded resampling keeps the stream deterministic; after 16 tries take
    // whatever came out (vanishingly unlikely).
    let mut tex = random_texture(rng);
    for _ in 0..16 {
        if mean_abs_diff(texture_mean(&tex), texture_mean(against)) >= 0.15 {
            break;
        }
        tex = random_texture(rng);
    }
    tex
}

// Shapes must stay large relative to the contour head's predicted boundary
// band (a few pixels wide), or partitioning finds no interior seed region.
const SHAPE_RADIUS_MIN: f64 = 8.0;
const SHAPE_RADIUS_MAX: f64 = 13.0;

fn random_shape_kind(rng: &mut SplitMix64) -> ShapeKind {
    if rng.next_below(2) == 0 {
        ShapeKind::Ellipse {
            rx: rng.uniform(SHAPE_RADIUS_MIN, SHAPE_RADIUS_MAX),
            ry: rng.uniform(SHAPE_RADIUS_MIN, SHAPE_RADIUS_MAX),
        }
    } else {
        let sides = 4 + rng.next_below(3) as usize;
        let base = rng.uniform(0.0, std::f64::consts::TAU);
        let mut points = Vec::with_capacity(sides);
        for i in 0..sides {
            let ang = base + std::f64::consts::TAU * i as f64 / sides as f64;
            let r = rng.uniform(SHAPE_RADIUS_MIN, SHAPE_RADIUS_MAX);
            points.push((r * ang.cos(), r * ang.sin()));
        }
        ShapeKind::Polygon { points }
    }
}

fn random_path(rng: &mut SplitMix64, size: f64, num_frames: usize) -> MotionPath {
    let margin = 15.0;
    let start = (
        rng.uniform(margin, size - margin),
        rng.uniform(margin, size - margin),
    );
    let end = (
        rng.uniform(margin, size - margin),
        rng.uniform(margin, size - margin),
    );
    let span = (num_frames - 1).max(1) as f64;
    let wobble = rng.next_f64() < 0.4;
    MotionPath {
        start,
        velocity: ((end.0 - start.0) / span, (end.1 - start.1) / span),
        wobble_amp: if wobble { rng.uniform(0.5, 2.0) } else { 0.0 },
        wobble_freq: if wobble { rng.uniform(0.2, 0.8) } else { 0.0 },
        spin: if rng.next_f64() < 0.4 {
            rng.uniform(-0.12, 0.12)
        } else {
            0.0
        },
    }
}

/// Options steering [`random_scene`] toward guaranteed benchmark cases.
#[derive(Clone, Copy, Default)]
struct SceneConstraints {
    /// Occluder fully covering the target for a mid-sequence window.
    force_full_occlusion: bool,
    /// One distractor sharing the target's shape and texture.
    force_twin_distractor: bool,
    /// One distractor entering the scene mid-sequence.
    force_late_distractor: bool,
    min_distractors: usize,
}

fn random_scene(seed: u64, frame_size: usize, num_frames: usize, cons: SceneConstraints) -> SceneSpec {
    let mut rng = SplitMix64::new(seed);
    let background = random_texture(&mut rng);
    let target_kind = random_shape_kind(&mut rng);
    let target_tex = contrasting_texture(&mut rng, &background);
    let target_path = random_path(&mut rng, frame_size as f64, num_frames);
    let appearance_drift = if rng.next_f64() < 0.25 {
        rng.uniform(0.3, 0.8)
    } else {
        0.0
    };
    let target = ShapeDesc {
        kind: target_kind,
        texture: target_tex,
        path: target_path,
        appearance_drift,
        appear_from: 0,
    };

    let n_distract = cons
        .min_distractors
        .max(rng.next_below(3) as usize)
        .min(2)
        .max(if cons.force_twin_distractor || cons.force_late_distractor { 1 } else { 0 });
    let mut distractors = Vec::new();
    for i in 0..n_distract {
        let twin = cons.force_twin_distractor && i == 0;
        let kind = if twin {
            target.kind.clone()
        } else {
            random_shape_kind(&mut rng)
        };
        let texture = if twin {
            target.texture.clone()
        } else {
            contrasting_texture(&mut rng, &target.texture)
        };
        // Some distractors enter mid-sequence: a one-shot model tuned on the
        // first frame has never seen them.
        let late = (cons.force_late_distractor && i == n_distract - 1)
            || (!twin && rng.next_f64() < 0.35);
        let appear_from = if late {
            num_frames / 3 + rng.next_below((num_frames / 3) as u64) as usize
        } else {
            0
        };
        distractors.push(ShapeDesc {
            kind,
            texture,
            path: random_path(&mut rng, frame_size as f64, num_frames),
            appearance_drift: 0.0,
            appear_from,
        });
    }

    let occluder = if cons.force_full_occlusion {
        // A box wider than any target shape, riding the target's own path so
        // the ground truth is empty for the whole window.
        let half = SHAPE_RADIUS_MAX + 3.0;
        let w0 = num_frames / 2 - 2;
        Some(Occluder {
            shape: ShapeDesc {
                kind: ShapeKind::Polygon {
                    points: vec![(-half, -half), (half, -half), (half, half), (-half, half)],
                },
                texture: contrasting_texture(&mut rng, &target.texture),
                path: target.path.clone(),
                appearance_drift: 0.0,
                appear_from: 0,
            },
            window: (w0, w0 + 4),
        })
    } else if rng.next_f64() < 0.3 {
        let w0 = 3 + rng.next_below((num_frames - 8) as u64) as usize;
        let len = 3 + rng.next_below(3) as usize;
        Some(Occluder {
            shape: ShapeDesc {
                kind: random_shape_kind(&mut rng),
                texture: contrasting_texture(&mut rng, &target.texture),
                path: random_path(&mut rng, frame_size as f64, num_frames),
                appearance_drift: 0.0,
                appear_from: 0,
            },
            window: (w0, (w0 + len).min(num_frames - 1)),
        })
    } else {
        None
    };

    SceneSpec {
        seed,
        frame_size,
        num_frames,
        background,
        target,
        distractors,
        occluder,
        // strong enough that per-pixel evidence is genuinely noisy and
        // region-level aggregation has something to contribute
        noise_sigma: rng.uniform(0.06, 0.12),
        dynamic_background: rng.next_f64() < 0.25,
        motion_blur: rng.next_f64() < 0.2,
    }
}

pub const DEFAULT_FRAME_SIZE: usize = 64;
pub const DEFAULT_NUM_FRAMES: usize = 20;

/// Builds the train/validation benchmark. Guarantees at least one validation
/// sequence with a full occlusion window (empty ground truth mid-sequence)
/// and one with a distractor of identical appearance to the target.
pub fn make_benchmark(master_seed: u64, n_train: usize, n_val: usize) -> SynthDataset {
    assert!(n_train >= 1 && n_val >= 1);
    let mut rng = SplitMix64::new(master_seed);
    let mut seeds = BTreeMap::new();

    let mut train = Vec::with_capacity(n_train);
    for i in 0..n_train {
        let seed = rng.next_u64();
        let name = format!("train{i:02}");
        let spec = random_scene(
            seed,
            DEFAULT_FRAME_SIZE,
            DEFAULT_NUM_FRAMES,
            SceneConstraints::default(),
        );
        train.push(render_sequence(&name, &spec));
        seeds.insert(name, seed);
    }

    let mut val = Vec::with_capacity(n_val);
    for i in 0..n_val {
        let seed = rng.next_u64();
        let name = format!("val{i:02}");
        let cons = SceneConstraints {
            force_full_occlusion: i == 0,
            force_twin_distractor: i == 1 || (n_val == 1 && i == 0),
            force_late_distractor: true,
            min_distractors: 1,
        };
        let spec = random_scene(seed, DEFAULT_FRAME_SIZE, DEFAULT_NUM_FRAMES, cons);
        val.push(render_sequence(&name, &spec));
        seeds.insert(name, seed);
    }

    SynthDataset { train, val, seeds }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain_spec(seed: u64) -> SceneSpec {
        SceneSpec {
            seed,
            frame_size: 32,
            num_frames: 16,
            background: Texture::Gradient {
                angle: 0.3,
                wavelength: 12.0,
                a: [0.2, 0.2, 0.2],
                b: [0.4, 0.4, 0.4],
            },
            target: ShapeDesc {
                kind: ShapeKind::Ellipse { rx: 5.0, ry: 4.0 },
                texture: Texture::Checker {
                    period: 3.0,
                    a: [0.9, 0.5, 0.1],
                    b: [0.7, 0.3, 0.1],
                },
                path: MotionPath::fixed(16.0, 16.0),
                appearance_drift: 0.0,
                appear_from: 0,
            },
            distractors: vec![],
            occluder: None,
            noise_sigma: 0.0,
            dynamic_background: false,
            motion_blur: false,
        }
    }

    #[test]
    fn static_target_has_identical_gt_everywhere() {
        let seq = render_sequence("s", &plain_spec(1));
        let gt = seq.gt.as_ref().unwrap();
        for m in &gt[1..] {
            assert_eq!(m, &gt[0]);
        }
        assert!(!gt[0].is_empty());
    }

    #[test]
    fn full_occlusion_window_empties_gt_exactly_there() {
        let mut spec = plain_spec(2);
        spec.occluder = Some(Occluder {
            shape: ShapeDesc {
                kind: ShapeKind::Polygon {
                    points: vec![(-8.0, -8.0), (8.0, -8.0), (8.0, 8.0), (-8.0, 8.0)],
                },
                texture: Texture::Gradient {
                    angle: 0.0,
                    wavelength: 10.0,
                    a: [0.1; 3],
                    b: [0.2; 3],
                },
                path: MotionPath::fixed(16.0, 16.0),
                appearance_drift: 0.0,
                appear_from: 0,
            },
            window: (8, 12),
        });
        let seq = render_sequence("s", &spec);
        let gt = seq.gt.as_ref().unwrap();
        for (t, m) in gt.iter().enumerate() {
            if (8..12).contains(&t) {
                assert!(m.is_empty(), "frame {t} should be fully occluded");
            } else {
                assert!(!m.is_empty(), "frame {t} should be visible");
            }
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        let mut spec = plain_spec(3);
        spec.noise_sigma = 0.02;
        spec.motion_blur = true;
        spec.dynamic_background = true;
        let a = render_sequence("s", &spec);
        let b = render_sequence("s", &spec);
        assert_eq!(a, b);
    }

    #[test]
    fn frame_at_t_is_independent_of_render_order() {
        let mut spec = plain_spec(4);
        spec.noise_sigma = 0.01;
        spec.target.path.velocity = (0.5, 0.3);
        let seq = render_sequence("s", &spec);
        // render a late frame standalone, no earlier frames computed
        assert_eq!(render_frame(&spec, 13), seq.frames[13]);
        assert_eq!(ground_truth(&spec, 13), *seq.gt_frame(13));
    }

    #[test]
    fn gt_is_subset_of_target_silhouette() {
        for seed in 0..6u64 {
            let spec = random_scene(seed, 48, 12, SceneConstraints::default());
            for t in 0..spec.num_frames {
                let gt = ground_truth(&spec, t);
                let sil = target_silhouette(&spec, t);
                for (g, s) in gt.bits().iter().zip(sil.bits()) {
                    assert!(!g | s);
                }
            }
        }
    }

    #[test]
    fn benchmark_cardinality_and_determinism() {
        let a = make_benchmark(77, 3, 2);
        assert_eq!(a.train.len(), 3);
        assert_eq!(a.val.len(), 2);
        for s in a.train.iter().chain(&a.val) {
            assert!(s.gt.is_some());
        }
        let b = make_benchmark(77, 3, 2);
        assert_eq!(a.train, b.train);
        assert_eq!(a.val, b.val);
        assert_eq!(a.seeds, b.seeds);

        let c = make_benchmark(78, 3, 2);
        assert_ne!(a.train[0].frames[0], c.train[0].frames[0]);
    }

    #[test]
    fn val_contains_mid_sequence_full_occlusion() {
        let ds = make_benchmark(123, 2, 2);
        let has_empty_mid = ds.val.iter().any(|s| {
            let gt = s.gt.as_ref().unwrap();
            gt[1..gt.len() - 1].iter().any(|m| m.is_empty())
        });
        assert!(has_empty_mid);
        assert!(ds.val.iter().any(|s| s.attributes.contains(&Attribute::Occlusion)));
    }

    #[test]
    fn val_contains_twin_distractor_sequence() {
        let ds = make_benchmark(123, 2, 2);
        // the constructed twin sequence is val01
        assert_eq!(ds.val[1].name, "val01");
        // every val sequence has at least one distractor by construction;
        // check indirectly: gt never covers the whole frame and frames have
        // non-target structure. The twin guarantee is structural, so just
        // re-derive the spec and inspect it.
        let seed = ds.seeds["val01"];
        let spec = random_scene(
            seed,
            DEFAULT_FRAME_SIZE,
            DEFAULT_NUM_FRAMES,
            SceneConstraints {
                force_full_occlusion: false,
                force_twin_distractor: true,
                force_late_distractor: true,
                min_distractors: 1,
            },
        );
        assert!(!spec.distractors.is_empty());
        assert_eq!(spec.distractors[0].kind, spec.target.kind);
        assert_eq!(spec.distractors[0].texture, spec.target.texture);
    }
}
