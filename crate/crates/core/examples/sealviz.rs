use voslab_core::nnet::{FcnArch, PosWeightMode, TrainConfig};
use voslab_core::protocol::*;
use voslab_core::metrics::region_similarity;
use voslab_core::snap::{partition_from_contours, snap_mask};
use voslab_core::synth::make_benchmark;

fn main() {
    let ds = make_benchmark(7, 8, 4);
    let arch = FcnArch::desk_default();
    let pcfg = TrainConfig {
        learning_rate: 0.005, momentum: DEFAULT_MOMENTUM,
        iterations: DEFAULT_PARENT_ITERS, seed: 7, pos_weight_mode: PosWeightMode::Balanced,
    };
    let (parent, _) = train_parent(&ds.train, &arch, &pcfg, 1.0).unwrap();
    let ocfg = TrainConfig { learning_rate: 0.01, ..pcfg };
    let seq = &ds.val[0];
    let w = finetune_oneshot(&parent, seq, &first_frame_annotation(seq), 200, &ocfg).unwrap();
    let maps = infer_sequence(&w.model, seq).unwrap();
    let gt = seq.gt.as_ref().unwrap();
    for t in [2usize, 5] {
        let (fg, c) = &maps[t];
        let part = partition_from_contours(c, 0.5).unwrap();
        let snapped = snap_mask(fg, &part, 0.5).unwrap();
        let base = fg.threshold(0.5).unwrap();
        println!("t={t} regions {} | J_snap {:.3} J_base {:.3}", part.region_count(),
            region_similarity(&snapped, &gt[t]).unwrap(),
            region_similarity(&base, &gt[t]).unwrap());
        // legend: # = gt&snap, g = gt only, s = snap only, b = base-only-fg, . = none
        for y in (6..46).step_by(1) {
            let mut row = String::new();
            for x in 6..58 {
                let ch = match (gt[t].get(x,y), snapped.get(x,y), base.get(x,y)) {
                    (true, true, _) => '#',
                    (true, false, true) => 'G',  // gt, base caught it, snap lost it
                    (true, false, false) => 'g',
                    (false, true, _) => 's',
                    (false, false, true) => 'b',
                    _ => if c.get(x,y) >= 0.5 { '|' } else { '.' },
                };
                row.push(ch);
            }
            println!("{row}");
        }
    }
}
