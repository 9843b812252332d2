//! Monte Carlo detection experiments.
//!
//! One run generates a network and model from the seed, fits the interaction
//! matrix on a single training draw, then sweeps (SNR x replicate) cells.
//! Every cell perturbs one unit, draws one test vector, and scores all three
//! detection methods on that same vector, so per-replicate outcomes are
//! paired. Cells are independent with their own derived sub-seeds and run in
//! parallel; re-running a configuration reproduces the result table byte for
//! byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{self, FilterMethod};
use crate::graph::{self, Graph};
use crate::lasso::{estimate_b, EstimateOptions, LassoEstimate, LassoOptions};
use crate::model::PrecisionModel;
use crate::parallel;
use crate::sampling;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Er,
    Ba,
    Geometric,
}

/// Edge-weight assignment for the generated model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// Degree-scaled fixed weights with strength `q`.
    Simple { q: f64 },
    /// Independent `Beta(a, b)` edge weights, rescaled for definiteness.
    Beta { a: f64, b: f64 },
}

/// How the perturbed unit is chosen per (SNR, replicate) cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetPolicy {
    /// Replicate `r` perturbs unit `r mod p` (same targets at every SNR).
    Cycle,
    /// Uniformly random unit per cell, from a derived sub-seed.
    Uniform,
}

fn default_sigma2() -> f64 {
    1.0
}
fn default_replicates() -> usize {
    30
}
fn default_target_policy() -> TargetPolicy {
    TargetPolicy::Cycle
}
fn default_grid_size() -> usize {
    50
}
fn default_grid_min_ratio() -> f64 {
    1e-4
}
fn default_folds() -> usize {
    5
}

/// Full experiment description; serializable as JSON for the CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub topology: Topology,
    pub p: usize,
    /// Target average degree (ER edge probability; BA attachment count is
    /// derived as `round(d_bar / 2)` unless `ba_m` is set; ignored by the
    /// geometric generator, whose kernel is fixed).
    pub d_bar: f64,
    #[serde(default)]
    pub ba_m: Option<usize>,
    pub weight_mode: WeightMode,
    #[serde(default = "default_sigma2")]
    pub sigma2: f64,
    pub n: usize,
    pub snr_grid: Vec<f64>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_target_policy")]
    pub target_policy: TargetPolicy,
    pub seed: u64,
    #[serde(default = "default_grid_size")]
    pub mu_grid_size: usize,
    #[serde(default = "default_grid_min_ratio")]
    pub mu_grid_min_ratio: f64,
    #[serde(default = "default_folds")]
    pub cv_folds: usize,
    /// Select one penalty shared by all rows instead of one per row.
    #[serde(default)]
    pub global_mu: bool,
    /// Redraw the training set (and refit) for every replicate index.
    #[serde(default)]
    pub redraw_training: bool,
    /// Optional sample-size sweep; when present the CLI runs one experiment
    /// per value with the same graph and model.
    #[serde(default)]
    pub n_values: Option<Vec<usize>>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::InvalidParameter("p must be >= 2".into()));
        }
        if self.replicates < 1 {
            return Err(Error::InvalidParameter("replicates must be >= 1".into()));
        }
        if self.snr_grid.is_empty() {
            return Err(Error::InvalidParameter("snr_grid must be nonempty".into()));
        }
        if self.snr_grid.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidParameter(
                "snr_grid values must be finite and >= 0".into(),
            ));
        }
        if let Some(values) = &self.n_values {
            if values.is_empty() {
                return Err(Error::InvalidParameter("n_values must be nonempty".into()));
            }
        }
        Ok(())
    }

    fn estimate_options(&self) -> EstimateOptions {
        EstimateOptions {
            mu_grid: None,
            grid_size: self.mu_grid_size,
            grid_min_ratio: self.mu_grid_min_ratio,
            folds: self.cv_folds,
            global_mu: self.global_mu,
            standardize: false,
            solver: LassoOptions::default(),
        }
    }
}

/// One scored detection: did `method` find the perturbed unit in this cell?
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub method: FilterMethod,
    pub snr: f64,
    pub n: usize,
    pub replicate: usize,
    pub target: usize,
    pub hit: bool,
}

/// Aggregated mis-detection proportions with standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: FilterMethod,
    pub snr: f64,
    pub n: usize,
    pub misdetect_rate: f64,
    pub std_error: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

/// Label used in result tables: the comparison names of the three methods.
pub fn method_label(method: FilterMethod) -> &'static str {
    match method {
        FilterMethod::Ideal => "true",
        FilterMethod::Estimated => "filter",
        FilterMethod::Direct => "direct",
    }
}

fn method_order(method: FilterMethod) -> usize {
    match method {
        FilterMethod::Ideal => 0,
        FilterMethod::Estimated => 1,
        FilterMethod::Direct => 2,
    }
}

/// Group outcomes by (method, snr, n) and compute the mis-detection rate and
/// its standard error (sample standard deviation of the 0/1 outcomes over
/// sqrt(replicates)).
pub fn aggregate(outcomes: &[Outcome]) -> ResultTable {
    let mut groups: BTreeMap<(usize, u64, usize), Vec<bool>> = BTreeMap::new();
    let mut snr_of: BTreeMap<u64, f64> = BTreeMap::new();
    for o in outcomes {
        let key = (method_order(o.method), o.snr.to_bits(), o.n);
        snr_of.insert(o.snr.to_bits(), o.snr);
        groups.entry(key).or_default().push(!o.hit);
    }
    let mut rows: Vec<ResultRow> = groups
        .into_iter()
        .map(|((m, snr_bits, n), misses)| {
            let reps = misses.len();
            let miss_count = misses.iter().filter(|&&x| x).count() as f64;
            let rate = miss_count / reps as f64;
            let std_error = if reps > 1 {
                let var = misses
                    .iter()
                    .map(|&x| {
                        let v = if x { 1.0 } else { 0.0 } - rate;
                        v * v
                    })
                    .sum::<f64>()
                    / (reps as f64 - 1.0);
                (var / reps as f64).sqrt()
            } else {
                0.0
            };
            let method = match m {
                0 => FilterMethod::Ideal,
                1 => FilterMethod::Estimated,
                _ => FilterMethod::Direct,
            };
            ResultRow {
                method,
                snr: snr_of[&snr_bits],
                n,
                misdetect_rate: rate,
                std_error,
                replicates: reps,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        method_order(a.method)
            .cmp(&method_order(b.method))
            .then(a.snr.partial_cmp(&b.snr).unwrap())
            .then(a.n.cmp(&b.n))
    });
    ResultTable { rows }
}

impl ResultTable {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("method,snr,n,misdetect_rate,std_error,replicates\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                method_label(r.method),
                r.snr,
                r.n,
                r.misdetect_rate,
                r.std_error,
                r.replicates
            )
            .unwrap();
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn get(&self, method: FilterMethod, snr: f64, n: usize) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.snr == snr && r.n == n)
    }
}

/// Everything a run produces: the aggregated table, the paired per-cell
/// outcomes, the generated network, and estimation diagnostics.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub table: ResultTable,
    pub outcomes: Vec<Outcome>,
    pub graph: Graph,
    pub model_min_eigenvalue: f64,
    pub mu_per_row: Vec<f64>,
    pub unconverged_rows: Vec<usize>,
}

/// Generate the graph and model for a configuration (deterministic in the
/// seed; shared by single runs and sample-size sweeps).
pub fn prepare_model(cfg: &ExperimentConfig) -> Result<(Graph, PrecisionModel)> {
    cfg.validate()?;
    let mut graph_rng = seed::rng(cfg.seed, &[seed::STAGE_GRAPH]);
    let graph = match cfg.topology {
        Topology::Er => graph::erdos_renyi(cfg.p, cfg.d_bar, &mut graph_rng)?,
        Topology::Ba => {
            let m = cfg
                .ba_m
                .unwrap_or_else(|| ((cfg.d_bar / 2.0).round() as usize).max(1));
            graph::barabasi_albert(cfg.p, m, &mut graph_rng)?
        }
        Topology::Geometric => graph::geometric(cfg.p, &mut graph_rng)?,
    };
    let model = match cfg.weight_mode {
        WeightMode::Simple { q } => PrecisionModel::simple(graph.clone(), q, cfg.sigma2)?,
        WeightMode::Beta { a, b } => {
            let mut weight_rng = seed::rng(cfg.seed, &[seed::STAGE_WEIGHTS]);
            PrecisionModel::weighted(graph.clone(), a, b, cfg.sigma2, &mut weight_rng)?
        }
    };
    Ok((graph, model))
}

struct Cell {
    snr_idx: usize,
    replicate: usize,
}

fn pick_target(cfg: &ExperimentConfig, cell: &Cell) -> usize {
    match cfg.target_policy {
        TargetPolicy::Cycle => cell.replicate % cfg.p,
        TargetPolicy::Uniform => {
            let mut rng = seed::rng(
                cfg.seed,
                &[seed::STAGE_TARGET, cell.snr_idx as u64, cell.replicate as u64],
            );
            rng.random_range(0..cfg.p)
        }
    }
}

fn fit_estimate(
    cfg: &ExperimentConfig,
    model: &PrecisionModel,
    n: usize,
    train_tags: &[u64],
) -> Result<LassoEstimate> {
    let mut train_rng = seed::rng(cfg.seed, train_tags);
    let training = sampling::sample_training(model, n, &mut train_rng)?;
    let mut cv_rng = seed::rng(cfg.seed, &[seed::STAGE_CV, n as u64]);
    estimate_b(&training, &cfg.estimate_options(), &mut cv_rng)
}

/// Run one experiment at sample size `n` against a prepared model.
pub fn run_with_model(
    cfg: &ExperimentConfig,
    n: usize,
    graph: &Graph,
    model: &PrecisionModel,
) -> Result<ExperimentOutput> {
    cfg.validate()?;

    // Fit once up front, or once per replicate when requested.
    let shared_estimate = if cfg.redraw_training {
        None
    } else {
        Some(fit_estimate(cfg, model, n, &[seed::STAGE_TRAIN, n as u64])?)
    };
    let per_replicate: Vec<LassoEstimate> = if cfg.redraw_training {
        let fits: Vec<Result<LassoEstimate>> = parallel::map_indices(cfg.replicates, |r| {
            fit_estimate(cfg, model, n, &[seed::STAGE_TRAIN, n as u64, r as u64])
        });
        fits.into_iter().collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };

    let ideal_matrix = model.identity_minus_b();
    let cells: Vec<Cell> = (0..cfg.snr_grid.len())
        .flat_map(|snr_idx| {
            (0..cfg.replicates).map(move |replicate| Cell {
                snr_idx,
                replicate,
            })
        })
        .collect();

    let cell_outcomes: Vec<Result<[Outcome; 3]>> = parallel::map_indices(cells.len(), |k| {
        let cell = &cells[k];
        let snr = cfg.snr_grid[cell.snr_idx];
        let target = pick_target(cfg, cell);
        let phi = sampling::single_unit_perturbation(cfg.p, target, snr)?;
        let mut test_rng = seed::rng(
            cfg.seed,
            &[seed::STAGE_TEST, cell.snr_idx as u64, cell.replicate as u64],
        );
        let y_test = sampling::sample_test(model, &phi, &mut test_rng)?;

        let estimate = shared_estimate
            .as_ref()
            .unwrap_or_else(|| &per_replicate[cell.replicate]);
        // The ideal transform is fixed across cells; reuse the matrix.
        let ideal = filter::detect(&ideal_matrix * &y_test, FilterMethod::Ideal);
        let estimated = filter::filter_estimated(estimate, &y_test)?;
        let direct = filter::detect_direct(&y_test);

        let outcome = |out: &crate::filter::FilterOutput| Outcome {
            method: out.method,
            snr,
            n,
            replicate: cell.replicate,
            target,
            hit: out.detected_index == target,
        };
        Ok([outcome(&ideal), outcome(&estimated), outcome(&direct)])
    });

    let mut outcomes = Vec::with_capacity(cells.len() * 3);
    for triple in cell_outcomes {
        outcomes.extend(triple?);
    }
    let table = aggregate(&outcomes);

    let (mu_per_row, unconverged_rows) = match &shared_estimate {
        Some(est) => (
            est.mu_per_row().to_vec(),
            est.converged()
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(i, _)| i)
                .collect(),
        ),
        None => {
            let mut unconverged: Vec<usize> = per_replicate
                .iter()
                .flat_map(|est| {
                    est.converged()
                        .iter()
                        .enumerate()
                        .filter(|(_, &c)| !c)
                        .map(|(i, _)| i)
                })
                .collect();
            unconverged.sort_unstable();
            unconverged.dedup();
            (
                per_replicate
                    .first()
                    .map(|e| e.mu_per_row().to_vec())
                    .unwrap_or_default(),
                unconverged,
            )
        }
    };

    Ok(ExperimentOutput {
        table,
        outcomes,
        graph: graph.clone(),
        model_min_eigenvalue: model.min_eigenvalue(),
        mu_per_row,
        unconverged_rows,
    })
}

/// Full run: generate, fit, sweep, aggregate.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let (graph, model) = prepare_model(cfg)?;
    run_with_model(cfg, cfg.n, &graph, &model)
}

/// Run one experiment per sample size against a shared graph and model.
/// Training sets are fresh per size; test draws reuse the same sub-seeds, so
/// method comparisons are paired across sizes.
pub fn run_sample_size_sweep(
    cfg: &ExperimentConfig,
    n_values: &[usize],
) -> Result<Vec<(usize, ExperimentOutput)>> {
    if n_values.is_empty() {
        return Err(Error::InvalidParameter("n_values must be nonempty".into()));
    }
    let (graph, model) = prepare_model(cfg)?;
    n_values
        .iter()
        .map(|&n| Ok((n, run_with_model(cfg, n, &graph, &model)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            topology: Topology::Ba,
            p: 20,
            d_bar: 4.0,
            ba_m: None,
            weight_mode: WeightMode::Simple { q: 0.8 },
            sigma2: 1.0,
            n: 25,
            snr_grid: vec![2.0, 8.0],
            replicates: 6,
            target_policy: TargetPolicy::Cycle,
            seed: 11,
            mu_grid_size: 15,
            mu_grid_min_ratio: 1e-3,
            cv_folds: 5,
            global_mu: false,
            redraw_training: false,
            n_values: None,
        }
    }

    #[test]
    fn aggregate_all_hits_and_half_misses() {
        let mk = |hit: bool, r: usize| Outcome {
            method: FilterMethod::Estimated,
            snr: 1.0,
            n: 10,
            replicate: r,
            target: 0,
            hit,
        };
        let all_hits: Vec<Outcome> = (0..30).map(|r| mk(true, r)).collect();
        let t = aggregate(&all_hits);
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].misdetect_rate, 0.0);
        assert_eq!(t.rows[0].std_error, 0.0);
        assert_eq!(t.rows[0].replicates, 30);

        // 15 misses out of 30: rate 0.5, standard error 0.5 / sqrt(29).
        let half: Vec<Outcome> = (0..30).map(|r| mk(r % 2 == 0, r)).collect();
        let t = aggregate(&half);
        assert_eq!(t.rows[0].misdetect_rate, 0.5);
        assert!((t.rows[0].std_error - 0.5 / 29f64.sqrt()).abs() < 1e-12);
        assert!((t.rows[0].std_error - 0.0928476690885259).abs() < 1e-10);
    }

    #[test]
    fn aggregate_is_permutation_invariant_and_keyed() {
        let mut outcomes = Vec::new();
        for (m, snr, n) in [
            (FilterMethod::Ideal, 1.0, 20),
            (FilterMethod::Estimated, 1.0, 20),
            (FilterMethod::Estimated, 2.0, 20),
            (FilterMethod::Direct, 2.0, 50),
        ] {
            for r in 0..4 {
                outcomes.push(Outcome {
                    method: m,
                    snr,
                    n,
                    replicate: r,
                    target: 0,
                    hit: r % 2 == 0,
                });
            }
        }
        let a = aggregate(&outcomes);
        let mut shuffled = outcomes.clone();
        shuffled.reverse();
        shuffled.swap(1, 9);
        let b = aggregate(&shuffled);
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 4);
        // Ordering: method, then snr, then n.
        assert_eq!(a.rows[0].method, FilterMethod::Ideal);
        assert_eq!(a.rows[1].method, FilterMethod::Estimated);
        assert!(a.rows[1].snr < a.rows[2].snr);
    }

    #[test]
    fn zero_snr_is_pure_guessing() {
        let mut cfg = tiny_config();
        cfg.p = 25;
        cfg.snr_grid = vec![0.0];
        cfg.replicates = 400;
        cfg.n = 30;
        cfg.mu_grid_size = 8;
        let out = run_experiment(&cfg).unwrap();
        // Expected miss rate (p-1)/p = 0.96; allow 3 binomial standard errors.
        let se = (0.96f64 * 0.04 / 400.0).sqrt();
        for row in &out.table.rows {
            assert!(
                (row.misdetect_rate - 0.96).abs() < 3.0 * se + 1e-9,
                "{:?} rate {} not near 0.96",
                row.method,
                row.misdetect_rate
            );
        }
    }

    #[test]
    fn near_noiseless_ideal_never_misses() {
        let mut cfg = tiny_config();
        cfg.sigma2 = 1e-9;
        cfg.snr_grid = vec![10.0];
        cfg.replicates = 10;
        let out = run_experiment(&cfg).unwrap();
        let row = out.table.get(FilterMethod::Ideal, 10.0, cfg.n).unwrap();
        assert_eq!(row.misdetect_rate, 0.0);
    }

    #[test]
    fn outcomes_are_paired_across_methods() {
        let cfg = tiny_config();
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(
            out.outcomes.len(),
            3 * cfg.snr_grid.len() * cfg.replicates
        );
        for chunk in out.outcomes.chunks(3) {
            assert_eq!(chunk[0].method, FilterMethod::Ideal);
            assert_eq!(chunk[1].method, FilterMethod::Estimated);
            assert_eq!(chunk[2].method, FilterMethod::Direct);
            assert_eq!(chunk[0].snr, chunk[1].snr);
            assert_eq!(chunk[0].replicate, chunk[2].replicate);
            assert_eq!(chunk[0].target, chunk[1].target);
            assert_eq!(chunk[0].target, chunk[2].target);
        }
    }

    #[test]
    fn rates_and_errors_within_bounds() {
        let cfg = tiny_config();
        let out = run_experiment(&cfg).unwrap();
        let reps = cfg.replicates as f64;
        let cap = 0.5 / reps.sqrt() * (reps / (reps - 1.0)).sqrt();
        for row in &out.table.rows {
            assert!((0.0..=1.0).contains(&row.misdetect_rate));
            assert!(row.std_error <= cap + 1e-12);
            assert_eq!(row.replicates, cfg.replicates);
        }
    }

    #[test]
    fn run_is_reproducible() {
        let cfg = tiny_config();
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.table.to_csv_string(), b.table.to_csv_string());
        assert_eq!(a.outcomes, b.outcomes);
        assert_eq!(a.graph, b.graph);
    }

    #[test]
    fn target_policies() {
        let mut cfg = tiny_config();
        cfg.target_policy = TargetPolicy::Cycle;
        let out = run_experiment(&cfg).unwrap();
        for o in &out.outcomes {
            assert_eq!(o.target, o.replicate % cfg.p);
        }
        cfg.target_policy = TargetPolicy::Uniform;
        let out = run_experiment(&cfg).unwrap();
        assert!(out.outcomes.iter().all(|o| o.target < cfg.p));
        // Deterministic under the same seed.
        let again = run_experiment(&cfg).unwrap();
        assert_eq!(out.outcomes, again.outcomes);
    }

    #[test]
    fn misdetection_declines_with_snr_on_average() {
        // Average rates over several seeds and fit an isotonic (decreasing)
        // sequence by pool-adjacent-violators; the residual must be small.
        let snrs = [2.0, 6.0, 10.0, 14.0, 18.0];
        let seeds = 10u64;
        let mut sums: BTreeMap<(usize, u64), f64> = BTreeMap::new();
        for s in 0..seeds {
            let mut cfg = tiny_config();
            cfg.seed = 100 + s;
            cfg.snr_grid = snrs.to_vec();
            cfg.replicates = 10;
            let out = run_experiment(&cfg).unwrap();
            for row in &out.table.rows {
                *sums.entry((method_order(row.method), row.snr.to_bits()))
                    .or_default() += row.misdetect_rate / seeds as f64;
            }
        }
        for m in 0..3usize {
            let series: Vec<f64> = snrs
                .iter()
                .map(|s| sums[&(m, s.to_bits())])
                .collect();
            // Pool-adjacent-violators for a non-increasing fit.
            let mut blocks: Vec<(f64, f64)> = Vec::new();
            for &v in &series {
                blocks.push((v, 1.0));
                while blocks.len() > 1 {
                    let last = blocks[blocks.len() - 1];
                    let prev = blocks[blocks.len() - 2];
                    if prev.0 / prev.1 >= last.0 / last.1 {
                        break;
                    }
                    blocks.pop();
                    let merged = (prev.0 + last.0, prev.1 + last.1);
                    let k = blocks.len() - 1;
                    blocks[k] = merged;
                }
            }
            let mut fitted = Vec::new();
            for (sum, count) in blocks {
                for _ in 0..count as usize {
                    fitted.push(sum / count);
                }
            }
            let resid = series
                .iter()
                .zip(&fitted)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(
                resid < 0.06,
                "method {m}: series {series:?} deviates from monotone by {resid}"
            );
        }
    }

    #[test]
    fn sample_size_sweep_shares_model_and_pairs_tests() {
        let mut cfg = tiny_config();
        cfg.snr_grid = vec![4.0];
        cfg.replicates = 5;
        let runs = run_sample_size_sweep(&cfg, &[15, 30]).unwrap();
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].1.graph, runs[1].1.graph);
        // The ideal method ignores training, and test draws share sub-seeds,
        // so its outcomes coincide across sample sizes.
        let ideal =
            |out: &ExperimentOutput| -> Vec<bool> {
                out.outcomes
                    .iter()
                    .filter(|o| o.method == FilterMethod::Ideal)
                    .map(|o| o.hit)
                    .collect()
            };
        assert_eq!(ideal(&runs[0].1), ideal(&runs[1].1));
        assert!(runs[0].1.table.rows.iter().all(|r| r.n == 15));
        assert!(runs[1].1.table.rows.iter().all(|r| r.n == 30));
    }

    #[test]
    fn redraw_training_changes_filter_not_ideal() {
        let mut cfg = tiny_config();
        cfg.snr_grid = vec![6.0];
        cfg.replicates = 4;
        let fixed = run_experiment(&cfg).unwrap();
        cfg.redraw_training = true;
        let redrawn = run_experiment(&cfg).unwrap();
        let ideal = |out: &ExperimentOutput| -> Vec<bool> {
            out.outcomes
                .iter()
                .filter(|o| o.method == FilterMethod::Ideal)
                .map(|o| o.hit)
                .collect()
        };
        assert_eq!(ideal(&fixed), ideal(&redrawn));
        assert_eq!(redrawn.outcomes.len(), fixed.outcomes.len());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = tiny_config();
        cfg.snr_grid.clear();
        assert!(run_experiment(&cfg).is_err());
        let mut cfg = tiny_config();
        cfg.p = 1;
        assert!(run_experiment(&cfg).is_err());
        let mut cfg = tiny_config();
        cfg.snr_grid = vec![-1.0];
        assert!(run_experiment(&cfg).is_err());
    }

    #[test]
    fn pd_violation_propagates() {
        // A 2-vertex graph with one edge cannot support q = 1.25.
        let mut cfg = tiny_config();
        cfg.p = 2;
        cfg.topology = Topology::Er;
        cfg.d_bar = 1.0;
        cfg.weight_mode = WeightMode::Simple { q: 1.25 };
        cfg.seed = 3; // seed with the single edge present
        let mut hit_error = false;
        for s in 0..50 {
            cfg.seed = s;
            match run_experiment(&cfg) {
                Err(Error::NotPositiveDefinite { .. }) => {
                    hit_error = true;
                    break;
                }
                _ => continue,
            }
        }
        assert!(hit_error, "no seed produced the PD violation");
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = tiny_config();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back.p, cfg.p);
        assert_eq!(back.weight_mode, cfg.weight_mode);
        // Defaults fill missing optional fields.
        let minimal = r#"{
            "topology": "er", "p": 10, "d_bar": 3.0,
            "weight_mode": {"simple": {"q": 0.5}},
            "n": 20, "snr_grid": [1.0], "seed": 1
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(minimal).unwrap();
        assert_eq!(cfg.replicates, 30);
        assert_eq!(cfg.sigma2, 1.0);
        assert_eq!(cfg.target_policy, TargetPolicy::Cycle);
        assert_eq!(cfg.cv_folds, 5);
    }
}
