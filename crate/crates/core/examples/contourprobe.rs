use voslab_core::nnet::{contour_target, FcnArch, PosWeightMode, TrainConfig};
use voslab_core::protocol::*;
use voslab_core::synth::make_benchmark;
use voslab_core::metrics::region_similarity;

fn stats(v: &[f64]) -> (f64, f64, f64) {
    let mn = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let mx = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (mn, mean, mx)
}

fn main() {
    let ds = make_benchmark(7, 8, 4);
    let arch = FcnArch::desk_default();
    let cfg = TrainConfig {
        learning_rate: DEFAULT_LEARNING_RATE, momentum: DEFAULT_MOMENTUM,
        iterations: DEFAULT_PARENT_ITERS, seed: 7, pos_weight_mode: PosWeightMode::Balanced,
    };
    let (parent, _) = train_parent(&ds.train, &arch, &cfg, 1.0).unwrap();

    // on a TRAIN frame (seen data): does the contour head fire at all?
    let tseq = &ds.train[0];
    let (fg, c) = parent.model.forward(&tseq.frames[5]).unwrap();
    println!("train frame: fg (min,mean,max) {:?}  contour {:?}", stats(fg.values()), stats(c.values()));
    let j = region_similarity(&fg.threshold(0.5).unwrap(), tseq.gt_frame(5)).unwrap();
    println!("train frame J {:.3}", j);
    // compare against its contour target density
    let ct = contour_target(tseq.gt_frame(5));
    println!("contour target density {:.4}", ct.area() as f64 / 4096.0);
    // how high is contour prob ON the target ring vs off it?
    let mut on = vec![]; let mut off = vec![];
    for y in 0..64 { for x in 0..64 {
        if ct.get(x, y) { on.push(c.get(x, y)); } else { off.push(c.get(x, y)); }
    }}
    println!("contour prob on-ring {:?} off-ring {:?}", stats(&on), stats(&off));

    // val frame, one-shot
    let seq = &ds.val[2];
    let w = finetune_oneshot(&parent, seq, &first_frame_annotation(seq), DEFAULT_ONESHOT_ITERS, &cfg).unwrap();
    let (fgv, cv) = w.model.forward(&seq.frames[10]).unwrap();
    println!("val frame(one-shot): fg {:?} contour {:?}", stats(fgv.values()), stats(cv.values()));
    let ctv = contour_target(seq.gt_frame(10));
    let mut on = vec![]; let mut off = vec![];
    for y in 0..64 { for x in 0..64 {
        if ctv.get(x, y) { on.push(cv.get(x, y)); } else { off.push(cv.get(x, y)); }
    }}
    println!("val contour prob on-ring {:?} off-ring {:?}", stats(&on), stats(&off));
    // annotated frame 0 of the same sequence
    let (fa, ca) = w.model.forward(&seq.frames[0]).unwrap();
    println!("val frame0 (annotated): fg {:?} contour {:?}", stats(fa.values()), stats(ca.values()));
}
