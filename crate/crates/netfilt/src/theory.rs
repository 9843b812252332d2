//! Closed-form feasibility conditions, spectral bounds, and the brute-force
//! restricted-isometry estimator.
//!
//! Everything here is a pure function of small inputs; condition checks
//! return full [`ConditionReport`] records (operands, verdict, inputs) so
//! the CLI can emit sweep data rather than bare booleans.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::PrecisionModel;
use crate::parallel;

/// Outcome of one inequality check.
///
/// `satisfied` means `lhs <= rhs` (or `lhs < rhs` when `strict`). When the
/// premises of a condition do not hold, `applicable` is false and
/// `satisfied` is meaningless.
#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub strict: bool,
    pub applicable: bool,
    pub inputs: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

impl ConditionReport {
    fn new(name: &str, lhs: f64, rhs: f64, strict: bool) -> Self {
        let satisfied = if strict { lhs < rhs } else { lhs <= rhs };
        ConditionReport {
            name: name.to_string(),
            lhs,
            rhs,
            satisfied,
            strict,
            applicable: true,
            inputs: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    fn inapplicable(name: &str, reason: &str) -> Self {
        ConditionReport {
            name: name.to_string(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            satisfied: false,
            strict: false,
            applicable: false,
            inputs: BTreeMap::new(),
            warnings: vec![reason.to_string()],
        }
    }

    fn with_input(mut self, key: &str, value: f64) -> Self {
        self.inputs.insert(key.to_string(), value);
        self
    }
}

/// Render reports as `condition,lhs,rhs,satisfied` CSV; inapplicable rows
/// print `na` in the satisfied column.
pub fn reports_to_csv_string(reports: &[ConditionReport]) -> String {
    let mut out = String::from("condition,lhs,rhs,satisfied\n");
    for r in reports {
        let verdict = if r.applicable {
            if r.satisfied { "true" } else { "false" }
        } else {
            "na"
        };
        writeln!(out, "{},{},{},{}", r.name, r.lhs, r.rhs, verdict).unwrap();
    }
    out
}

/// JSON sidecar with every report's inputs and warnings.
pub fn reports_inputs_json(reports: &[ConditionReport]) -> Result<String> {
    let mut entries = Vec::new();
    for r in reports {
        entries.push(serde_json::json!({
            "condition": r.name,
            "applicable": r.applicable,
            "inputs": r.inputs,
            "warnings": r.warnings,
        }));
    }
    Ok(serde_json::to_string_pretty(&serde_json::Value::Array(
        entries,
    ))?)
}

/// Natural-log binary entropy `-r ln r - (1 - r) ln(1 - r)` on (0, 1).
pub fn entropy(r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::OutOfDomain(format!(
            "entropy needs r in (0, 1), got {r}"
        )));
    }
    Ok(-r * r.ln() - (1.0 - r) * (1.0 - r).ln())
}

/// Singular-value deviation scale `sqrt(p/n) (sqrt(r) + sqrt(2 H(r)))`.
pub fn deviation_term(r: f64, n: usize, p: usize) -> Result<f64> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidParameter("n and p must be >= 1".into()));
    }
    let h = entropy(r)?;
    Ok((p as f64 / n as f64).sqrt() * (r.sqrt() + (2.0 * h).sqrt()))
}

/// Sparsity feasibility function
/// `rho(r) = (1 + f(4r))^2 + 2 (1 + f(5r))^2 - 3`, defined for `0 < 5r < 1`.
pub fn sparsity_feasibility(r: f64, n: usize, p: usize) -> Result<f64> {
    if !(r > 0.0 && 5.0 * r < 1.0) {
        return Err(Error::OutOfDomain(format!(
            "sparsity_feasibility needs 0 < 5r < 1, got r = {r}"
        )));
    }
    let f4 = deviation_term(4.0 * r, n, p)?;
    let f5 = deviation_term(5.0 * r, n, p)?;
    Ok((1.0 + f4).powi(2) + 2.0 * (1.0 + f5).powi(2) - 3.0)
}

/// Bisection root of `sparsity_feasibility(r) = 1` in `r`.
pub fn sparsity_feasibility_root(n: usize, p: usize) -> Result<f64> {
    let (mut lo, mut hi) = (1e-12, 0.2 - 1e-12);
    let at = |r: f64| sparsity_feasibility(r, n, p).map(|v| v - 1.0);
    if at(lo)? > 0.0 {
        return Err(Error::OutOfDomain(
            "feasibility function exceeds 1 on the whole domain".into(),
        ));
    }
    if at(hi)? < 0.0 {
        return Err(Error::OutOfDomain(
            "feasibility function stays below 1 on the whole domain".into(),
        ));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Eigenvalue-ratio bound `((1 + sqrt(S/n)) / (1 - sqrt(S/n)))^2`, for
/// `0 < S < n`.
pub fn eigenvalue_ratio_bound(s: usize, n: usize) -> Result<f64> {
    if s == 0 || s >= n {
        return Err(Error::OutOfDomain(format!(
            "eigenvalue_ratio_bound needs 0 < S < n, got S = {s}, n = {n}"
        )));
    }
    let g = (s as f64 / n as f64).sqrt();
    Ok(((1.0 + g) / (1.0 - g)).powi(2))
}

/// Compare the achieved covariance eigenvalue ratio against
/// [`eigenvalue_ratio_bound`] with `S` the maximum degree of the model graph.
pub fn check_eigenvalue_ratio(model: &PrecisionModel, n: usize) -> Result<ConditionReport> {
    let name = "eigenvalue_ratio";
    let s = model.graph().degrees().max();
    let p = model.dimension() as f64;
    if s >= n {
        return Ok(ConditionReport::inapplicable(
            name,
            &format!("S = {s} >= n = {n}: bound undefined"),
        ));
    }
    // Ratio of extreme eigenvalues of the covariance = condition number of
    // I - B (the sigma^2 factor cancels).
    let ev = {
        let m = model.identity_minus_b();
        let mut e: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(|a, b| a.partial_cmp(b).unwrap());
        e
    };
    let (lam_min, lam_max) = (ev[0], ev[ev.len() - 1]);
    let ratio = lam_max / lam_min;
    if s == 0 {
        // Empty graph: the covariance is a multiple of the identity.
        return Ok(ConditionReport::new(name, ratio, 1.0, false)
            .with_input("p", p)
            .with_input("n", n as f64)
            .with_input("S", 0.0)
            .with_input("lambda_min", lam_min)
            .with_input("lambda_max", lam_max));
    }
    let bound = eigenvalue_ratio_bound(s, n)?;
    Ok(ConditionReport::new(name, ratio, bound, false)
        .with_input("p", p)
        .with_input("n", n as f64)
        .with_input("S", s as f64)
        .with_input("lambda_min", lam_min)
        .with_input("lambda_max", lam_max))
}

/// Degree-sequence sufficient condition for the eigenvalue-ratio bound under
/// the degree-scaled fixed-weight model:
/// `1/(1+q)^2 + (q/(1+q))^2 eta1 <= eta2` with
/// `eta1` the average over vertices of the mean reciprocal neighbor degree
/// scaled by own degree and
/// `eta2 = ((1 + sqrt(dmax/n)) / (1 - sqrt(dmax/n)) / sqrt(2))^(4/p)`.
///
/// Only stated for `0 < q < 1` (diagonal dominance); outside that range, or
/// when `dmax >= n`, the report is marked inapplicable. Isolated vertices
/// are excluded from the `eta1` average with a warning.
pub fn check_degree_condition(graph: &Graph, q: f64, n: usize) -> Result<ConditionReport> {
    let name = "degree_condition";
    if !(q > 0.0 && q < 1.0) {
        return Ok(ConditionReport::inapplicable(
            name,
            &format!("q = {q} outside (0, 1): diagonal dominance premise fails"),
        ));
    }
    let deg = graph.degrees();
    let dmax = deg.max();
    if dmax == 0 {
        return Ok(ConditionReport::inapplicable(name, "graph has no edges"));
    }
    if dmax >= n {
        return Ok(ConditionReport::inapplicable(
            name,
            &format!("dmax = {dmax} >= n = {n}"),
        ));
    }
    let p = graph.vertex_count();
    let neighbors = graph.neighbor_lists();
    let mut warnings = Vec::new();
    let isolated = deg.degrees().iter().filter(|&&d| d == 0).count();
    if isolated > 0 {
        warnings.push(format!(
            "{isolated} isolated vertices excluded from the degree average"
        ));
    }
    let mut eta1 = 0.0;
    for v in 0..p {
        let d_v = deg.degrees()[v];
        if d_v == 0 {
            continue;
        }
        let recip_sum: f64 = neighbors[v]
            .iter()
            .map(|&w| 1.0 / deg.degrees()[w] as f64)
            .sum();
        eta1 += recip_sum / d_v as f64;
    }
    eta1 /= p as f64;

    let gamma = (dmax as f64 / n as f64).sqrt();
    let eta2 = (((1.0 + gamma) / (1.0 - gamma)) / 2f64.sqrt()).powf(4.0 / p as f64);
    let lhs = 1.0 / (1.0 + q).powi(2) + (q / (1.0 + q)).powi(2) * eta1;

    let mut report = ConditionReport::new(name, lhs, eta2, false)
        .with_input("p", p as f64)
        .with_input("n", n as f64)
        .with_input("q", q)
        .with_input("dmax", dmax as f64)
        .with_input("eta1", eta1)
        .with_input("eta2", eta2);
    report.warnings = warnings;
    Ok(report)
}

/// Upper bound on the largest covariance eigenvalue (relative to sigma^2)
/// for the degree-scaled model:
/// `sqrt(dmax)/(q + sqrt(dmax)) * ((1 + sqrt(dmax/n)) / (1 - sqrt(dmax/n)))^2`.
pub fn covariance_spectral_bound(d_max: usize, n: usize, q: f64) -> Result<f64> {
    if d_max == 0 || d_max >= n {
        return Err(Error::OutOfDomain(format!(
            "covariance_spectral_bound needs 0 < dmax < n, got dmax = {d_max}, n = {n}"
        )));
    }
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "q must be positive, got {q}"
        )));
    }
    let root = (d_max as f64).sqrt();
    let gamma = (d_max as f64 / n as f64).sqrt();
    Ok(root / (q + root) * ((1.0 + gamma) / (1.0 - gamma)).powi(2))
}

/// Upper concentration envelope for the squared noise norm:
/// `n (1 + 4 sqrt(log2(n) / n))`.
pub fn noise_energy_upper(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter("n must be >= 2".into()));
    }
    let nf = n as f64;
    Ok(nf * (1.0 + 4.0 * (nf.log2() / nf).sqrt()))
}

/// Lower concentration envelope `n (1 - 4 sqrt(log2(n) / n))`; negative for
/// small `n`, in which case any condition built on it is vacuous.
pub fn noise_energy_lower(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter("n must be >= 2".into()));
    }
    let nf = n as f64;
    Ok(nf * (1.0 - 4.0 * (nf.log2() / nf).sqrt()))
}

/// Admissible range for the squared penalty: `mu^2 <= c0 sigma^2 envelope / S`.
#[derive(Debug, Clone, Copy)]
pub struct PenaltyBudget {
    /// Upper bound on `mu^2` (may be nonpositive, see `vacuous`).
    pub mu_squared_max: f64,
    /// True when the lower noise envelope is nonpositive, so no penalty
    /// satisfies the stated condition.
    pub vacuous: bool,
}

pub fn penalty_budget(sigma2: f64, s: usize, n: usize, c0: f64) -> Result<PenaltyBudget> {
    if s == 0 {
        return Err(Error::InvalidParameter("S must be >= 1".into()));
    }
    if !(sigma2 > 0.0) || !(c0 > 0.0) {
        return Err(Error::InvalidParameter(
            "sigma2 and c0 must be positive".into(),
        ));
    }
    let envelope = noise_energy_lower(n)?;
    let bound = c0 * sigma2 * envelope / s as f64;
    Ok(PenaltyBudget {
        mu_squared_max: bound,
        vacuous: envelope <= 0.0,
    })
}

/// Row-error magnitude scale `sigma^2 * envelope_upper / (1 - rho)^2`,
/// valid only while the sparsity feasibility value is below 1. This is an
/// up-to-constant scale, not a certified bound.
pub fn row_error_scale(r: f64, n: usize, p: usize, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidParameter("sigma2 must be positive".into()));
    }
    let rho = sparsity_feasibility(r, n, p)?;
    if rho >= 1.0 {
        return Err(Error::OutOfDomain(format!(
            "feasibility value {rho} >= 1: error scale undefined"
        )));
    }
    Ok(sigma2 * noise_energy_upper(n)? / (1.0 - rho).powi(2))
}

fn binomial(n: usize, k: usize) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u64)?;
        acc /= (i + 1) as u64;
    }
    Some(acc)
}

/// Maximum number of column subsets the brute-force estimator will visit.
pub const SUBSET_BUDGET: u64 = 1_000_000;

fn check_subset_budget(d: usize, s: usize) -> Result<()> {
    match binomial(d, s) {
        Some(c) if c <= SUBSET_BUDGET => Ok(()),
        Some(c) => Err(Error::BudgetExceeded(format!(
            "C({d}, {s}) = {c} subsets exceeds {SUBSET_BUDGET}"
        ))),
        None => Err(Error::BudgetExceeded(format!(
            "C({d}, {s}) overflows the subset budget"
        ))),
    }
}

/// Visit all k-subsets of `0..d` in lexicographic order.
fn for_each_subset(d: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        // Advance to the next combination.
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + d - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in (i + 1)..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn collect_subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut subsets = Vec::new();
    for_each_subset(d, k, |s| subsets.push(s.to_vec()));
    subsets
}

fn submatrix(x: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), cols.len(), |r, c| x[(r, cols[c])])
}

/// Restricted isometry constant by exhaustive search over all size-`S`
/// column subsets: the largest deviation of a subset singular value from 1.
///
/// Nesting of singular values over subsets makes size exactly `S`
/// sufficient. Guarded by [`SUBSET_BUDGET`].
pub fn restricted_isometry_constant(x: &DMatrix<f64>, s: usize) -> Result<f64> {
    ric_impl(x, s, false)
}

/// Second computation path for the restricted isometry constant, using
/// eigenvalues of the subset Gram matrices instead of singular values.
pub fn restricted_isometry_constant_gram(x: &DMatrix<f64>, s: usize) -> Result<f64> {
    ric_impl(x, s, true)
}

fn ric_impl(x: &DMatrix<f64>, s: usize, via_gram: bool) -> Result<f64> {
    let d = x.ncols();
    if s == 0 || s > d {
        return Err(Error::InvalidParameter(format!(
            "subset size {s} out of range for {d} columns"
        )));
    }
    check_subset_budget(d, s)?;
    let subsets = collect_subsets(d, s);
    let deltas = parallel::map_indices(subsets.len(), |k| {
        let xt = submatrix(x, &subsets[k]);
        let (smin, smax) = if via_gram {
            let gram = xt.transpose() * &xt;
            let mut ev: Vec<f64> = gram.symmetric_eigen().eigenvalues.iter().copied().collect();
            ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
            (ev[0].max(0.0).sqrt(), ev[ev.len() - 1].max(0.0).sqrt())
        } else {
            let sv = xt.svd(false, false).singular_values;
            let mut lo = f64::INFINITY;
            let mut hi: f64 = 0.0;
            for v in sv.iter() {
                lo = lo.min(*v);
                hi = hi.max(*v);
            }
            // A rank-deficient subset has fewer singular values than S.
            if sv.len() < s {
                lo = 0.0;
            }
            (lo, hi)
        };
        (smax - 1.0).max(1.0 - smin).max(0.0)
    });
    Ok(deltas.into_iter().fold(0.0, f64::max))
}

/// Sparse-recovery premise `delta_{4S} + 2 delta_{5S} < 1` from the
/// brute-force isometry constants.
pub fn check_sparse_recovery_condition(x: &DMatrix<f64>, s: usize) -> Result<ConditionReport> {
    let name = "sparse_recovery";
    let d = x.ncols();
    if 5 * s > d {
        return Ok(ConditionReport::inapplicable(
            name,
            &format!("5S = {} exceeds column count {d}", 5 * s),
        ));
    }
    let d4 = restricted_isometry_constant(x, 4 * s)?;
    let d5 = restricted_isometry_constant(x, 5 * s)?;
    Ok(ConditionReport::new(name, d4 + 2.0 * d5, 1.0, true)
        .with_input("S", s as f64)
        .with_input("delta_4S", d4)
        .with_input("delta_5S", d5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph;
    use crate::seed;
    use rand::Rng;

    #[test]
    fn entropy_values_and_symmetry() {
        assert!((entropy(0.5).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(entropy(1e-12).unwrap() < 1e-10);
        assert!((entropy(0.1).unwrap() - 0.3250829733914482).abs() < 1e-12);
        for k in 1..50 {
            let r = k as f64 / 50.0;
            assert!((entropy(r).unwrap() - entropy(1.0 - r).unwrap()).abs() < 1e-12);
        }
        assert!(entropy(0.0).is_err());
        assert!(entropy(1.0).is_err());
        assert!(entropy(-0.1).is_err());
    }

    #[test]
    fn deviation_term_values() {
        // At n = p, r = 0.5: sqrt(0.5) + sqrt(2 ln 2).
        let want = 0.5f64.sqrt() + (2.0 * std::f64::consts::LN_2).sqrt();
        assert!((deviation_term(0.5, 100, 100).unwrap() - want).abs() < 1e-12);
        assert!((want - 1.8845168037020223).abs() < 1e-12);
        // Depends on n and p only through their ratio.
        let a = deviation_term(0.3, 50, 200).unwrap();
        let b = deviation_term(0.3, 200, 800).unwrap();
        assert!((a - b).abs() < 1e-12);
        // Vanishes as r -> 0+.
        assert!(deviation_term(1e-12, 100, 100).unwrap() < 1e-4);
    }

    #[test]
    fn feasibility_domain_and_monotonicity() {
        assert!(sparsity_feasibility(0.2, 100, 100).is_err());
        assert!(sparsity_feasibility(0.0, 100, 100).is_err());
        assert!(sparsity_feasibility(1e-9, 100, 100).unwrap() < 1e-2);
        assert!(sparsity_feasibility(1e-13, 100, 100).unwrap() < 1e-4);
        // Strictly increasing while every entropy argument stays at or
        // below 1/2, i.e. r <= 0.1. (Past that point the entropy term turns
        // over and the function is no longer monotone.)
        for &(n, p) in &[(20usize, 100usize), (50, 100), (100, 100)] {
            let mut last = 0.0;
            for k in 1..=100 {
                let r = k as f64 * 0.001;
                let v = sparsity_feasibility(r, n, p).unwrap();
                assert!(v > last, "not increasing at r = {r} (n/p = {n}/{p})");
                last = v;
            }
        }
        // Increasing in p/n as well.
        let lo = sparsity_feasibility(0.01, 100, 50).unwrap();
        let hi = sparsity_feasibility(0.01, 50, 100).unwrap();
        assert!(hi > lo);
    }

    #[test]
    fn feasibility_root_near_1e4() {
        for &ratio in &[0.2f64, 0.5, 1.0] {
            let p = 1000usize;
            let n = (ratio * p as f64).round() as usize;
            let root = sparsity_feasibility_root(n, p).unwrap();
            assert!(
                (1e-5..=1e-3).contains(&root),
                "root {root:.2e} for n/p = {ratio}"
            );
            let v = sparsity_feasibility(root, n, p).unwrap();
            assert!((v - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ratio_bound_values() {
        assert!((eigenvalue_ratio_bound(9, 50).unwrap() - 6.12).abs() < 0.01);
        assert_eq!(eigenvalue_ratio_bound(25, 100).unwrap(), 9.0);
        assert!((eigenvalue_ratio_bound(1, 100_000_000).unwrap() - 1.0).abs() < 1e-3);
        assert!(eigenvalue_ratio_bound(50, 50).is_err());
        assert!(eigenvalue_ratio_bound(0, 50).is_err());
    }

    #[test]
    fn ratio_bound_monotonicity() {
        let mut prev = f64::INFINITY;
        for n in [10usize, 20, 50, 100, 1000] {
            let b = eigenvalue_ratio_bound(5, n).unwrap();
            assert!(b >= 1.0 && b < prev);
            prev = b;
        }
        let mut prev = 0.0;
        for s in 1..9 {
            let b = eigenvalue_ratio_bound(s, 10).unwrap();
            assert!(b > prev);
            prev = b;
        }
    }

    #[test]
    fn eigenvalue_ratio_check_identity_and_two_by_two() {
        let g = crate::graph::Graph::new(4, []).unwrap();
        let m = PrecisionModel::simple(g, 1.0, 1.0).unwrap();
        let rep = check_eigenvalue_ratio(&m, 50).unwrap();
        assert!(rep.applicable && rep.satisfied);
        assert!((rep.lhs - 1.0).abs() < 1e-10);

        // Single edge at q = 0.5: eigenvalues of I - B are 0.5 and 1.5, so
        // the achieved ratio is 3 against the bound at S = 1.
        let g = crate::graph::Graph::new(2, [(0, 1)]).unwrap();
        let m = PrecisionModel::simple(g, 0.5, 1.0).unwrap();
        let rep = check_eigenvalue_ratio(&m, 50).unwrap();
        assert!((rep.lhs - 3.0).abs() < 1e-10);
        let bound = eigenvalue_ratio_bound(1, 50).unwrap();
        assert!((rep.rhs - bound).abs() < 1e-12);
        assert_eq!(rep.satisfied, 3.0 <= bound);
    }

    #[test]
    fn eigenvalue_ratio_check_flags_large_s() {
        let g = graph::erdos_renyi(30, 6.0, &mut seed::rng(990, &[])).unwrap();
        let m = PrecisionModel::simple(g, 0.5, 1.0).unwrap();
        let s = m.graph().degrees().max();
        let rep = check_eigenvalue_ratio(&m, s).unwrap();
        assert!(!rep.applicable);
    }

    #[test]
    fn degree_condition_regular_graphs() {
        // Cycle: 2-regular, eta1 = 1/2.
        let p = 12usize;
        let cycle = crate::graph::Graph::new(p, (0..p).map(|i| (i, (i + 1) % p))).unwrap();
        let rep = check_degree_condition(&cycle, 0.3, 100).unwrap();
        assert!(rep.applicable);
        assert!((rep.inputs["eta1"] - 0.5).abs() < 1e-14);

        // Complete graph on 5 vertices: 4-regular, eta1 = 1/4.
        let mut edges = Vec::new();
        for i in 0..5 {
            for j in (i + 1)..5 {
                edges.push((i, j));
            }
        }
        let k5 = crate::graph::Graph::new(5, edges).unwrap();
        let rep = check_degree_condition(&k5, 0.3, 100).unwrap();
        assert!((rep.inputs["eta1"] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn degree_condition_q_limit_and_applicability() {
        let g = graph::erdos_renyi(40, 4.0, &mut seed::rng(991, &[])).unwrap();
        // q -> 0+: the left side approaches 1, so the verdict reduces to
        // eta2 >= 1.
        let rep = check_degree_condition(&g, 1e-9, 200).unwrap();
        assert!(rep.applicable);
        assert!((rep.lhs - 1.0).abs() < 1e-6);
        assert_eq!(rep.satisfied, rep.rhs >= rep.lhs);

        assert!(!check_degree_condition(&g, 1.25, 200).unwrap().applicable);
        assert!(!check_degree_condition(&g, 0.5, 3).unwrap().applicable);
        let empty = crate::graph::Graph::new(5, []).unwrap();
        assert!(!check_degree_condition(&empty, 0.5, 100).unwrap().applicable);
    }

    #[test]
    fn degree_condition_lhs_decreases_in_q() {
        // (1 + q^2 eta1) / (1 + q)^2 with eta1 <= 1 is strictly decreasing
        // on (0, 1), so the verdict can only flip from false to true as q
        // grows.
        let g = graph::erdos_renyi(60, 4.0, &mut seed::rng(992, &[3])).unwrap();
        let mut last = f64::INFINITY;
        for k in 1..20 {
            let q = k as f64 * 0.05;
            let rep = check_degree_condition(&g, q, 200).unwrap();
            assert!(rep.applicable);
            assert!(rep.lhs < last, "lhs not decreasing at q = {q}");
            assert!(rep.inputs["eta1"] <= 1.0 + 1e-12);
            last = rep.lhs;
        }
    }

    #[test]
    fn degree_condition_does_not_certify_ratio_bound() {
        // The stated inequality can hold while the achieved eigenvalue ratio
        // exceeds its bound: near q = 1 the smallest eigenvalue of I - B
        // collapses but the condition's left side keeps shrinking. Pin that
        // behavior so sweep consumers treat the verdicts independently.
        let n = 50;
        let mut found = false;
        'outer: for s in 0..20u64 {
            let g = graph::erdos_renyi(100, 4.0, &mut seed::rng(992, &[100 + s])).unwrap();
            for q in [0.9, 0.95, 0.99] {
                let cond = check_degree_condition(&g, q, n).unwrap();
                if !(cond.applicable && cond.satisfied) {
                    continue;
                }
                if let Ok(m) = PrecisionModel::simple(g.clone(), q, 1.0) {
                    let ratio = check_eigenvalue_ratio(&m, n).unwrap();
                    if ratio.applicable && !ratio.satisfied {
                        found = true;
                        break 'outer;
                    }
                }
            }
        }
        assert!(found, "no instance separated the two verdicts");
    }

    #[test]
    fn spectral_bound_values() {
        assert!((covariance_spectral_bound(4, 100, 0.5).unwrap() - 1.8).abs() < 1e-12);
        // q -> 0+ leaves only the ratio-bound factor.
        let want = eigenvalue_ratio_bound(4, 100).unwrap();
        let got = covariance_spectral_bound(4, 100, 1e-12).unwrap();
        assert!((got - want).abs() < 1e-6);
        assert!(covariance_spectral_bound(100, 100, 0.5).is_err());
    }

    #[test]
    fn spectral_bound_dominates_achieved_maximum() {
        // Wherever the eigenvalue-ratio condition holds, the achieved
        // lambda_max((I - B)^{-1}) must sit below the bound.
        for s in 0..20u64 {
            let g = graph::erdos_renyi(40, 3.0, &mut seed::rng(993, &[s])).unwrap();
            let dmax = g.degrees().max();
            let n = 400;
            if dmax == 0 || dmax >= n {
                continue;
            }
            let q = 0.2;
            let m = PrecisionModel::simple(g, q, 1.0).unwrap();
            let rep = check_eigenvalue_ratio(&m, n).unwrap();
            if !(rep.applicable && rep.satisfied) {
                continue;
            }
            let achieved = 1.0 / m.min_eigenvalue();
            let bound = covariance_spectral_bound(dmax, n, q).unwrap();
            assert!(
                achieved <= bound + 1e-9,
                "achieved {achieved} > bound {bound} (seed {s})"
            );
        }
    }

    #[test]
    fn noise_envelopes() {
        let upper2 = noise_energy_upper(2).unwrap();
        assert!((upper2 - (2.0 + 8.0 / 2f64.sqrt())).abs() < 1e-12);
        assert!((upper2 - 7.656854249492381).abs() < 1e-12);
        for n in [2usize, 10, 50, 150, 1000] {
            let up = noise_energy_upper(n).unwrap();
            let lo = noise_energy_lower(n).unwrap();
            assert!(up > n as f64 && (n as f64) > lo);
        }
        assert!(noise_energy_lower(150).unwrap() > 0.0);
        assert!(noise_energy_lower(50).unwrap() < 0.0);
        assert!(noise_energy_upper(1).is_err());
    }

    #[test]
    fn penalty_budget_behavior() {
        let b = penalty_budget(1.0, 4, 50, 1.0).unwrap();
        assert!(b.vacuous && b.mu_squared_max <= 0.0);

        let b200 = penalty_budget(0.01, 4, 200, 1.0).unwrap();
        assert!(!b200.vacuous);
        let envelope = 200.0 * (1.0 - 4.0 * (200f64.log2() / 200.0).sqrt());
        assert!((b200.mu_squared_max - 0.01 * envelope / 4.0).abs() < 1e-12);

        let half = penalty_budget(0.01, 8, 200, 1.0).unwrap();
        assert!((half.mu_squared_max - b200.mu_squared_max / 2.0).abs() < 1e-15);
        assert!(penalty_budget(1.0, 0, 50, 1.0).is_err());
    }

    #[test]
    fn row_error_scale_behavior() {
        // Tiny r: the feasibility value is near zero and the scale collapses
        // to sigma^2 * envelope.
        let scale = row_error_scale(1e-10, 100, 100, 2.0).unwrap();
        let want = 2.0 * noise_energy_upper(100).unwrap();
        assert!((scale - want).abs() / want < 1e-2);

        // Approaching the feasibility boundary the scale diverges.
        let root = sparsity_feasibility_root(100, 100).unwrap();
        let near = row_error_scale(root * 0.999, 100, 100, 1.0).unwrap();
        let far = row_error_scale(root * 0.5, 100, 100, 1.0).unwrap();
        assert!(near > 100.0 * far.min(1.0));
        assert!(row_error_scale(root * 1.01, 100, 100, 1.0).is_err());

        // sigma^2 = n^{-2}: scale * n * (1 - rho)^2 = 1 + o(1).
        for n in [1000usize, 10000] {
            let r = 1e-6;
            let rho = sparsity_feasibility(r, n, n).unwrap();
            let scale = row_error_scale(r, n, n, (n as f64).powi(-2)).unwrap();
            let normalized = scale * n as f64 * (1.0 - rho).powi(2);
            let slack = 4.0 * ((n as f64).log2() / n as f64).sqrt();
            assert!(
                (normalized - 1.0).abs() <= slack + 1e-9,
                "n = {n}: normalized {normalized}"
            );
        }
    }

    #[test]
    fn ric_orthonormal_and_scaled() {
        // Columns of the identity: exact isometry, delta = 0 exactly.
        let x = DMatrix::<f64>::identity(8, 5);
        for s in 1..=5 {
            assert_eq!(restricted_isometry_constant(&x, s).unwrap(), 0.0);
            assert_eq!(restricted_isometry_constant_gram(&x, s).unwrap(), 0.0);
        }
        // Doubling the columns makes every singular value 2.
        let x2 = &x * 2.0;
        assert!((restricted_isometry_constant(&x2, 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ric_paths_agree_and_grow_with_subset_size() {
        for tag in 0..20u64 {
            let mut rng = seed::rng(994, &[tag]);
            let x = DMatrix::from_fn(20, 8, |_, _| {
                rng.sample::<f64, _>(rand_distr::StandardNormal)
            }) / (20f64).sqrt();
            let mut prev = 0.0;
            for s in 1..=4 {
                let a = restricted_isometry_constant(&x, s).unwrap();
                let b = restricted_isometry_constant_gram(&x, s).unwrap();
                assert!((a - b).abs() < 1e-10, "paths disagree at S = {s}");
                assert!(a >= prev - 1e-12, "not monotone at S = {s}");
                prev = a;
            }
        }
    }

    #[test]
    fn ric_brute_force_matches_direct_enumeration() {
        // All 28 column pairs of a 20x8 matrix, checked against an
        // independently coded per-pair SVD loop.
        let mut rng = seed::rng(995, &[]);
        let x = DMatrix::from_fn(20, 8, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal))
            / (20f64).sqrt();
        let got = restricted_isometry_constant(&x, 2).unwrap();
        let mut want: f64 = 0.0;
        for i in 0..8 {
            for j in (i + 1)..8 {
                let sub = DMatrix::from_fn(20, 2, |r, c| x[(r, [i, j][c])]);
                let sv = sub.svd(false, false).singular_values;
                for v in sv.iter() {
                    want = want.max((v - 1.0).abs());
                }
            }
        }
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn ric_budget_guard() {
        let x = DMatrix::<f64>::identity(50, 40);
        assert!(matches!(
            restricted_isometry_constant(&x, 20),
            Err(Error::BudgetExceeded(_))
        ));
        assert!(restricted_isometry_constant(&x, 41).is_err());
    }

    #[test]
    fn sparse_recovery_condition_report() {
        let mut rng = seed::rng(996, &[]);
        let x = DMatrix::from_fn(30, 10, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal))
            / (30f64).sqrt();
        let rep = check_sparse_recovery_condition(&x, 2).unwrap();
        assert!(rep.applicable);
        assert!(rep.lhs >= 0.0);
        assert!(rep.strict);
        assert_eq!(
            rep.satisfied,
            rep.inputs["delta_4S"] + 2.0 * rep.inputs["delta_5S"] < 1.0
        );
        assert!(!check_sparse_recovery_condition(&x, 3).unwrap().applicable);
    }

    #[test]
    fn report_csv_format() {
        let reports = vec![
            ConditionReport::new("a", 1.0, 2.0, false),
            ConditionReport::inapplicable("b", "premise"),
        ];
        let csv = reports_to_csv_string(&reports);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("condition,lhs,rhs,satisfied"));
        assert_eq!(lines.next(), Some("a,1,2,true"));
        assert_eq!(lines.next(), Some("b,NaN,NaN,na"));
        let sidecar = reports_inputs_json(&reports).unwrap();
        assert!(sidecar.contains("premise"));
    }
}
