//! Network filtering of test data and perturbed-unit detection.
//!
//! Filtering multiplies a test vector by `I - B` (known network), `I - B_hat`
//! (estimated network), or leaves it untouched (no network information). The
//! perturbed unit is declared at the entry of largest magnitude, ties broken
//! toward the lowest index; the full magnitude ranking is kept for rank-based
//! analyses.

use nalgebra::{DMatrix, DVector};
use serde_json::json;

use crate::error::{Error, Result};
use crate::lasso::LassoEstimate;
use crate::model::PrecisionModel;
use crate::theory;

/// Which filtering transform produced an output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMethod {
    /// `(I - B) y` with the true interaction matrix.
    Ideal,
    /// `(I - B_hat) y` with the estimated interaction matrix.
    Estimated,
    /// The raw test vector.
    Direct,
}

impl FilterMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            FilterMethod::Ideal => "ideal",
            FilterMethod::Estimated => "estimated",
            FilterMethod::Direct => "direct",
        }
    }
}

/// A filtered test vector with its detection result.
#[derive(Debug, Clone)]
pub struct FilterOutput {
    pub phi_hat: DVector<f64>,
    pub method: FilterMethod,
    pub detected_index: usize,
    pub detected_value: f64,
    /// Indices sorted by decreasing `|phi_hat|`, ties toward lower index.
    pub ranking: Vec<usize>,
}

impl FilterOutput {
    /// JSON serialization; the (possibly long) filtered vector is included
    /// only on request.
    pub fn to_json_string(&self, include_phi_hat: bool) -> String {
        let mut value = json!({
            "method": self.method.as_str(),
            "detected_index": self.detected_index,
            "detected_value": self.detected_value,
        });
        if include_phi_hat {
            value["phi_hat"] = json!(self.phi_hat.as_slice());
        }
        serde_json::to_string_pretty(&value).expect("serializable")
    }
}

pub(crate) fn detect(phi_hat: DVector<f64>, method: FilterMethod) -> FilterOutput {
    let p = phi_hat.len();
    let mut ranking: Vec<usize> = (0..p).collect();
    ranking.sort_by(|&a, &b| {
        phi_hat[b]
            .abs()
            .partial_cmp(&phi_hat[a].abs())
            .unwrap()
            .then(a.cmp(&b))
    });
    let detected_index = ranking[0];
    FilterOutput {
        detected_value: phi_hat[detected_index],
        phi_hat,
        method,
        detected_index,
        ranking,
    }
}

fn check_len(len: usize, p: usize) -> Result<()> {
    if len != p {
        return Err(Error::DimensionMismatch(format!(
            "test vector has length {len}, expected {p}"
        )));
    }
    Ok(())
}

/// Filter with the true network: `phi_hat = (I - B) y`.
pub fn filter_ideal(model: &PrecisionModel, y_test: &DVector<f64>) -> Result<FilterOutput> {
    check_len(y_test.len(), model.dimension())?;
    Ok(detect(model.identity_minus_b() * y_test, FilterMethod::Ideal))
}

/// Filter with an estimated network: `phi_hat = (I - B_hat) y`.
pub fn filter_estimated(estimate: &LassoEstimate, y_test: &DVector<f64>) -> Result<FilterOutput> {
    check_len(y_test.len(), estimate.dimension())?;
    Ok(detect(estimate.identity_minus() * y_test, FilterMethod::Estimated))
}

/// No filtering: detection on the raw test vector.
pub fn detect_direct(y_test: &DVector<f64>) -> FilterOutput {
    detect(y_test.clone(), FilterMethod::Direct)
}

/// Conditional law of the estimated filter given the fitted network, plus
/// spectral error bounds.
///
/// Writing `D = B - B_hat`, the filtered vector is Gaussian with mean
/// `phi + D (I - B)^{-1} phi` and covariance
/// `(I - B) sigma^2 + [D (I - B)^{-1} D' + 2 D] sigma^2`.
#[derive(Debug, Clone)]
pub struct FilterDiagnostics {
    /// Exact conditional bias vector `D (I - B)^{-1} phi`.
    pub conditional_bias: DVector<f64>,
    /// Diagonal of the exact conditional covariance.
    pub conditional_var_diag: DVector<f64>,
    /// `||phi||_2 * sqrt(c * sigma^2 * envelope) * lambda_max((I - B)^{-1})`.
    pub bias_bound: f64,
    /// `sigma^2 * (1 + c * sigma^2 * envelope * lambda_max((I - B)^{-1}))`.
    pub var_bound: f64,
}

/// Compute [`FilterDiagnostics`] for a model/estimate pair.
///
/// `n_train` is the training sample size behind the estimate (it sets the
/// noise-energy envelope in the bounds) and `c_scale` stands in for the
/// unknown leading constant of the row-error bound; pass 1.0 to report the
/// bound shape.
pub fn filter_diagnostics(
    model: &PrecisionModel,
    estimate: &LassoEstimate,
    phi: &DVector<f64>,
    n_train: usize,
    c_scale: f64,
) -> Result<FilterDiagnostics> {
    let p = model.dimension();
    if estimate.dimension() != p {
        return Err(Error::DimensionMismatch(format!(
            "estimate dimension {} vs model {p}",
            estimate.dimension()
        )));
    }
    check_len(phi.len(), p)?;
    if n_train < 2 {
        return Err(Error::InvalidParameter("n_train must be >= 2".into()));
    }
    if !(c_scale > 0.0) {
        return Err(Error::InvalidParameter("c_scale must be positive".into()));
    }

    let sigma2 = model.sigma2();
    let imb = model.identity_minus_b();
    let delta = model.interactions() - estimate.coefficients();
    let inv = imb
        .clone()
        .cholesky()
        .expect("verified positive definite at construction")
        .inverse();
    let inv = (&inv + inv.transpose()) * 0.5;

    let conditional_bias = &delta * (&inv * phi);

    let var_matrix: DMatrix<f64> =
        (&imb + (&delta * &inv * delta.transpose()) + 2.0 * &delta) * sigma2;
    let conditional_var_diag = DVector::from_fn(p, |i, _| var_matrix[(i, i)]);

    // lambda_max((I - B)^{-1}) = 1 / lambda_min(I - B).
    let lambda_max_inv = 1.0 / model.min_eigenvalue();
    let envelope = theory::noise_energy_upper(n_train)?;
    let bias_bound = phi.norm() * (c_scale * sigma2 * envelope).sqrt() * lambda_max_inv;
    let var_bound = sigma2 * (1.0 + c_scale * sigma2 * envelope * lambda_max_inv);

    Ok(FilterDiagnostics {
        conditional_bias,
        conditional_var_diag,
        bias_bound,
        var_bound,
    })
}
