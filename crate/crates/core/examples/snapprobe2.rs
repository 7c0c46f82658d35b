use voslab_core::nnet::{FcnArch, PosWeightMode, TrainConfig};
use voslab_core::protocol::*;
use voslab_core::metrics::evaluate_sequence;
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

    let mut oneshot_maps = Vec::new();
    let mut parent_maps = Vec::new();
    for seq in &ds.val {
        let w = finetune_oneshot(&parent, seq, &first_frame_annotation(seq), DEFAULT_ONESHOT_ITERS, &cfg).unwrap();
        oneshot_maps.push(infer_sequence(&w.model, seq).unwrap());
        parent_maps.push(infer_sequence(&parent.model, seq).unwrap());
    }

    let mut report = |label: &str, use_parent_contour: bool, ct: f64| {
        let mut js = Vec::new();
        let mut regions = 0usize; let mut n = 0usize;
        for ((seq, osm), pm) in ds.val.iter().zip(&oneshot_maps).zip(&parent_maps) {
            let preds: Vec<_> = osm.iter().zip(pm).map(|((fg, oc), (_, pc))| {
                let cmap = if use_parent_contour { pc } else { oc };
                let part = partition_from_contours(cmap, ct).unwrap();
                regions += part.region_count(); n += 1;
                snap_mask(fg, &part, 0.5).unwrap()
            }).collect();
            let r = evaluate_sequence(&seq.name, &preds, seq.gt.as_ref().unwrap()).unwrap();
            js.push(r.j.mean);
        }
        println!("{label} ct {ct:.2}: mean {:.4} per-seq {:?} (avg regions {:.1})",
            js.iter().sum::<f64>()/4.0,
            js.iter().map(|j|(j*1000.0).round()/1000.0).collect::<Vec<_>>(),
            regions as f64 / n as f64);
    };

    for ct in [0.5, 0.6, 0.7, 0.4, 0.3] {
        report("parent-contours ", true, ct);
    }
    for ct in [0.5, 0.7] {
        report("oneshot-contours", false, ct);
    }
}
