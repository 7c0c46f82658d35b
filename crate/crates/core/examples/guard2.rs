use voslab_core::nnet::{FcnArch, PosWeightMode, TrainConfig};
use voslab_core::protocol::*;
use voslab_core::metrics::region_similarity;
use voslab_core::snap::{partition_from_contours, snap_mask};
use voslab_core::synth::make_benchmark;
use voslab_core::probmap::ProbMap;
use voslab_core::mask::Mask;

/// largest 4-connected component of a mask
fn main_component(m: &Mask) -> Mask {
    let (w, h) = (m.width(), m.height());
    let mut best = Mask::new(w, h);
    let mut best_size = 0usize;
    let mut visited = vec![false; w * h];
    for start in 0..w * h {
        if visited[start] || !m.bits()[start] { continue; }
        let mut comp = vec![start];
        let mut stack = vec![start];
        visited[start] = true;
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            for (dx, dy) in [(-1i64,0i64),(1,0),(0,-1),(0,1)] {
                let nx = x as i64 + dx; let ny = y as i64 + dy;
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 { continue; }
                let n = ny as usize * w + nx as usize;
                if !visited[n] && m.bits()[n] { visited[n] = true; comp.push(n); stack.push(n); }
            }
        }
        if comp.len() > best_size {
            best_size = comp.len();
            best = Mask::new(w, h);
            let mut bb = best.clone();
            for &i in &comp { bb.set(i % w, i / w, true); }
            best = bb;
        }
    }
    best
}

fn guarded(fg: &ProbMap, cmap: &ProbMap, taus: &[f64], majority: f64) -> Mask {
    let base = fg.threshold(0.5).unwrap();
    if base.is_empty() { return base; }
    let main = main_component(&base);
    let main_area = main.area() as f64;
    let base_area = base.area() as f64;
    for &tau in taus {
        let part = partition_from_contours(cmap, tau).unwrap();
        let snapped = snap_mask(fg, &part, majority).unwrap();
        let retained = main.bits().iter().zip(snapped.bits()).filter(|(&m, &s)| m && s).count() as f64;
        let added = snapped.difference_count(&base) as f64;
        if retained / main_area >= 0.85 && added <= 0.10 * base_area && snapped != base {
            return snapped;
        }
    }
    base
}

fn main() {
    let ds = make_benchmark(7, 8, 4);
    let arch = FcnArch::desk_default();
    let pcfg = TrainConfig {
        learning_rate: 0.005, momentum: DEFAULT_MOMENTUM,
        iterations: DEFAULT_PARENT_ITERS, seed: 7, pos_weight_mode: PosWeightMode::Balanced,
    };
    let (parent, _) = train_parent(&ds.train, &arch, &pcfg, 1.0).unwrap();
    let ocfg = TrainConfig { learning_rate: 0.01, ..pcfg };
    let mut cache = Vec::new();
    for seq in &ds.val {
        let w = finetune_oneshot(&parent, seq, &first_frame_annotation(seq), 200, &ocfg).unwrap();
        cache.push((infer_sequence(&w.model, seq).unwrap(), infer_sequence(&parent.model, seq).unwrap()));
    }
    let taus = [0.5, 0.4, 0.3, 0.2];
    for union in [false, true] {
        let mut tot_snap = 0.0; let mut tot_thr = 0.0;
        let mut fp_snap = 0u64; let mut fp_thr = 0u64;
        let mut wins = 0; let mut losses = 0; let mut snaps = 0;
        for (seq, (os_maps, p_maps)) in ds.val.iter().zip(&cache) {
            let gt = seq.gt.as_ref().unwrap();
            let mut js = 0.0; let mut jt = 0.0;
            for (t, ((fg, oc), (_, pc))) in os_maps.iter().zip(p_maps).enumerate() {
                let cmap = if union {
                    ProbMap::from_values(64, 64, oc.values().iter().zip(pc.values())
                        .map(|(a, b)| a.max(*b)).collect()).unwrap()
                } else { oc.clone() };
                let snapped = guarded(fg, &cmap, &taus, 0.5);
                let base = fg.threshold(0.5).unwrap();
                if snapped != base { snaps += 1; }
                let j_s = region_similarity(&snapped, &gt[t]).unwrap();
                let j_t = region_similarity(&base, &gt[t]).unwrap();
                if j_s > j_t + 1e-12 { wins += 1; }
                if j_s < j_t - 1e-12 { losses += 1; }
                js += j_s; jt += j_t;
                fp_snap += snapped.difference_count(&gt[t]) as u64;
                fp_thr += base.difference_count(&gt[t]) as u64;
            }
            tot_snap += js / gt.len() as f64;
            tot_thr += jt / gt.len() as f64;
        }
        println!("union {union}: J_ours {:.4} J_bs {:.4} d={:+.4} | wins {wins} losses {losses} snapped {snaps}/80 | FP {fp_snap} vs {fp_thr}",
            tot_snap/4.0, tot_thr/4.0, tot_snap/4.0 - tot_thr/4.0);
    }
}
