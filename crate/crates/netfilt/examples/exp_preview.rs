// Preview the main-experiment acceptance regime.
use netfilt::experiment::*;
use netfilt::filter::FilterMethod;
use std::time::Instant;

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let cfg = ExperimentConfig {
        topology: Topology::Ba,
        p: 100,
        d_bar: 4.0,
        ba_m: None,
        weight_mode: WeightMode::Simple { q: 1.25 },
        sigma2: 1.0,
        n: 50,
        snr_grid: (1..=20).map(|s| s as f64).collect(),
        replicates: 30,
        target_policy: TargetPolicy::Cycle,
        seed,
        mu_grid_size: 50,
        mu_grid_min_ratio: 1e-4,
        cv_folds: 5,
        global_mu: false,
        redraw_training: false,
        n_values: None,
    };
    let t0 = Instant::now();
    let out = run_experiment(&cfg).unwrap();
    println!("seed {seed}: elapsed {:?}, lambda_min {:.4}, unconverged {:?}",
        t0.elapsed(), out.model_min_eigenvalue, out.unconverged_rows.len());
    for m in [FilterMethod::Ideal, FilterMethod::Estimated, FilterMethod::Direct] {
        let rates: Vec<f64> = (1..=20)
            .map(|s| out.table.get(m, s as f64, 50).unwrap().misdetect_rate)
            .collect();
        println!("{:>6}: {:?}", method_label(m), rates.iter().map(|r| (r * 100.0).round() / 100.0).collect::<Vec<_>>());
    }
    // Criterion 8 checks
    let f = |m: FilterMethod, s: f64| out.table.get(m, s, 50).unwrap();
    let a_ok = (8..=20).all(|s| {
        f(FilterMethod::Estimated, s as f64).misdetect_rate <= f(FilterMethod::Direct, s as f64).misdetect_rate
    });
    let b = f(FilterMethod::Estimated, 20.0).misdetect_rate;
    let c_ok = (1..=20).all(|s| {
        let t = f(FilterMethod::Ideal, s as f64);
        let fl = f(FilterMethod::Estimated, s as f64);
        let pooled = (t.std_error.powi(2) + fl.std_error.powi(2)).sqrt();
        t.misdetect_rate <= fl.misdetect_rate + 2.0 * pooled
    });
    println!("(a) filter<=direct for snr>=8: {a_ok}   (b) filter@20 = {b}   (c) true<=filter+2se: {c_ok}");
}
