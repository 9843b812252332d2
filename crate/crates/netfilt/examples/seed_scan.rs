// Scan seeds for instances usable in the acceptance suite.
use netfilt::experiment::{ExperimentConfig, Topology, WeightMode, TargetPolicy};
use netfilt::{graph, model::PrecisionModel, seed, theory};

fn main() {
    // BA p=100 m=2 at q=1.25: find seeds where I - B is positive definite.
    let mut ba_ok = Vec::new();
    for s in 0..400u64 {
        let cfg_seed = s;
        let mut rng = seed::rng(cfg_seed, &[seed::STAGE_GRAPH]);
        let g = graph::barabasi_albert(100, 2, &mut rng).unwrap();
        if let Ok(m) = PrecisionModel::simple(g, 1.25, 1.0) {
            ba_ok.push((s, m.min_eigenvalue()));
            if ba_ok.len() >= 12 { break; }
        }
    }
    println!("BA q=1.25 PD seeds: {ba_ok:?}");

    // Geometric p=100 at q=1.25 (paper regime) and q=0.98 fallback:
    // ratio vs bound with S = dmax, n = 50.
    for q in [1.25, 0.98] {
        let mut found = Vec::new();
        for s in 0..300u64 {
            let mut rng = seed::rng(s, &[seed::STAGE_GRAPH]);
            let g = graph::geometric(100, &mut rng).unwrap();
            let dmax = g.degrees().max();
            if dmax == 0 || dmax >= 50 { continue; }
            if let Ok(m) = PrecisionModel::simple(g, q, 1.0) {
                let rep = theory::check_eigenvalue_ratio(&m, 50).unwrap();
                let gap = rep.lhs / rep.rhs;
                if gap >= 10.0 {
                    found.push((s, dmax, (rep.lhs * 10.0).round() / 10.0, (rep.rhs * 100.0).round() / 100.0, (gap * 10.0).round() / 10.0));
                }
                if found.len() >= 5 { break; }
            }
        }
        println!("geometric q={q}: (seed, dmax, ratio, bound, gap) {found:?}");
    }
    let _ = (ExperimentConfig {
        topology: Topology::Ba, p: 2, d_bar: 0.0, ba_m: None,
        weight_mode: WeightMode::Simple { q: 1.0 }, sigma2: 1.0, n: 2,
        snr_grid: vec![], replicates: 1, target_policy: TargetPolicy::Cycle,
        seed: 0, mu_grid_size: 1, mu_grid_min_ratio: 0.5, cv_folds: 2,
        global_mu: false, redraw_training: false, n_values: None,
    },);
}
