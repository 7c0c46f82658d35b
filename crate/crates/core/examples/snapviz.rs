use voslab_core::nnet::{FcnArch, PosWeightMode, TrainConfig};
use voslab_core::protocol::*;
use voslab_core::snap::{partition_from_contours, snap_mask};
use voslab_core::synth::make_benchmark;

fn main() {
    let ds = make_benchmark(7, 8, 4);
    let arch = FcnArch::desk_default();
    let cfg = TrainConfig {
        learning_rate: DEFAULT_LEARNING_RATE, momentum: DEFAULT_MOMENTUM,
        iterations: DEFAULT_PARENT_ITERS, seed: 7, pos_weight_mode: PosWeightMode::Balanced,
    };
    let (parent, _) = train_parent(&ds.train, &arch, &cfg, 1.0).unwrap();
    let seq = &ds.val[3];
    let w = finetune_oneshot(&parent, seq, &first_frame_annotation(seq), DEFAULT_ONESHOT_ITERS, &cfg).unwrap();
    let t = 10;
    let (fg_os, _c_os) = w.model.forward(&seq.frames[t]).unwrap();
    let (_fg_p, c_p) = parent.model.forward(&seq.frames[t]).unwrap();
    let part = partition_from_contours(&c_p, 0.5).unwrap();
    let snapped = snap_mask(&fg_os, &part, 0.5).unwrap();
    let gt = seq.gt_frame(t);

    println!("regions: {}", part.region_count());
    // region mean fg prob
    let mut sums = vec![0.0; part.region_count()];
    let mut counts = vec![0usize; part.region_count()];
    for (l, p) in part.labels().iter().zip(fg_os.values()) {
        sums[*l as usize] += p; counts[*l as usize] += 1;
    }
    for i in 0..part.region_count() {
        println!("region {i}: {} px, mean fg {:.3}", counts[i], sums[i]/counts[i] as f64);
    }
    for y in (0..64).step_by(2) {
        let mut row = String::new();
        for x in (0..64).step_by(1) {
            let ch = if gt.get(x, y) && snapped.get(x, y) { '#' }
                else if gt.get(x, y) { 'g' }
                else if snapped.get(x, y) { 's' }
                else if c_p.get(x, y) >= 0.5 { '|' }
                else if fg_os.get(x, y) >= 0.5 { '+' }
                else { '.' };
            row.push(ch);
        }
        println!("{row}");
    }
}
