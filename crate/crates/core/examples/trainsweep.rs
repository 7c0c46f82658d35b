use voslab_core::nnet::{FcnArch, PosWeightMode, TrainConfig};
use voslab_core::protocol::*;
use voslab_core::synth::make_benchmark;
use voslab_core::metrics::evaluate_sequence;

fn main() {
    let arch = FcnArch::desk_default();
    for n_train in [8usize, 16, 24] {
        let ds = make_benchmark(7, n_train, 4);
        let cfg = TrainConfig {
            learning_rate: DEFAULT_LEARNING_RATE, momentum: DEFAULT_MOMENTUM,
            iterations: DEFAULT_PARENT_ITERS, seed: 7, pos_weight_mode: PosWeightMode::Balanced,
        };
        let t = std::time::Instant::now();
        let (parent, log) = train_parent(&ds.train, &arch, &cfg, 1.0).unwrap();
        let base = base_init(&arch, cfg.seed);
        let outcomes = run_ablation(&ds, &parent, &base, DEFAULT_ONESHOT_ITERS, &cfg,
            SnapParams::default(), &AblationMode::ALL).unwrap();
        println!("== n_train {n_train} (parent+ablation {:?}, end loss {:.4})", t.elapsed(),
            log[log.len()-100..].iter().sum::<f64>()/100.0);
        for o in &outcomes {
            println!("{:>10}: mean J {:.4} per-seq {:?}", o.mode.tag(), o.result.mean_j(),
                o.result.sequences.iter().map(|s|(s.j.mean*1000.0).round()/1000.0).collect::<Vec<_>>());
        }
        let _ = evaluate_sequence("x", &[], &[]).err();
    }
}
