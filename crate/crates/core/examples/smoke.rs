use std::time::Instant;
use voslab_core::nnet::{FcnArch, PosWeightMode, TrainConfig};
use voslab_core::protocol::*;
use voslab_core::synth::make_benchmark;

fn main() {
    let t_gen = Instant::now();
    let ds = make_benchmark(7, 8, 4);
    println!("benchmark generated in {:?}", t_gen.elapsed());
    let arch = FcnArch::desk_default();
    let cfg = TrainConfig {
        learning_rate: DEFAULT_LEARNING_RATE,
        momentum: DEFAULT_MOMENTUM,
        iterations: DEFAULT_PARENT_ITERS,
        seed: 7,
        pos_weight_mode: PosWeightMode::Balanced,
    };

    // time a few steps first
    let mut probe_cfg = cfg;
    probe_cfg.iterations = 20;
    let t0 = Instant::now();
    let (_w, log) = train_parent(&ds.train, &arch, &probe_cfg, 1.0).unwrap();
    let per_step = t0.elapsed().as_secs_f64() / 20.0;
    println!("per-step: {:.1} ms, first losses {:?}", per_step * 1000.0, &log[..3]);

    let t1 = Instant::now();
    let (parent, log) = train_parent(&ds.train, &arch, &cfg, 1.0).unwrap();
    println!("parent {} iters in {:?}", cfg.iterations, t1.elapsed());
    let n = log.len();
    println!("loss: start {:.4} mid {:.4} end(avg last 100) {:.4}",
        log[0], log[n/2], log[n-100..].iter().sum::<f64>()/100.0);

    let base = base_init(&arch, cfg.seed);
    let snap = SnapParams::default();

    let t2 = Instant::now();
    let outcomes = run_ablation(&ds, &parent, &base, DEFAULT_ONESHOT_ITERS, &cfg, snap, &AblationMode::ALL).unwrap();
    println!("ablation in {:?}", t2.elapsed());
    for o in &outcomes {
        let js: Vec<f64> = o.result.sequences.iter().map(|s| s.j.mean).collect();
        println!("{:>10}: mean J {:.4}  per-seq {:?}", o.mode.tag(), o.result.mean_j(),
            js.iter().map(|j| (j*1000.0).round()/1000.0).collect::<Vec<_>>());
    }

    // per-sequence detail for Ours: J/F/T
    for o in outcomes.iter().filter(|o| o.mode == AblationMode::Full) {
        for s in &o.result.sequences {
            println!("  {}: J {:.3} (O {:.2}, D {:+.3}) F {:.3} T {:.2}",
                s.sequence, s.j.mean, s.j.recall, s.j.decay, s.f.mean, s.t_mean);
        }
    }

}
