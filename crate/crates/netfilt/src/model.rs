//! Precision/covariance models on a concentration graph.
//!
//! A model is the symmetric interaction matrix `B` (zero diagonal, support
//! equal to the graph's edge set) together with the noise variance. The
//! implied covariance is `(I - B)^{-1} sigma^2`, so `I - B` must be positive
//! definite; every constructor verifies this with a dense symmetric
//! eigensolve and reports the offending smallest eigenvalue on failure.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Smallest eigenvalue accepted as "positive definite".
pub const PD_THRESHOLD: f64 = 1e-8;

/// Interaction matrix `B`, noise variance, and the graph carrying its
/// sparsity pattern. Immutable after construction.
#[derive(Debug, Clone)]
pub struct PrecisionModel {
    b: DMatrix<f64>,
    sigma2: f64,
    graph: Graph,
    lambda_min: f64,
}

/// Lower-triangular factor `L` with `L L^T` equal to the model covariance.
#[derive(Debug, Clone)]
pub struct CovarianceFactor {
    l: DMatrix<f64>,
}

impl CovarianceFactor {
    pub fn lower(&self) -> &DMatrix<f64> {
        &self.l
    }

    /// Draw one `L z` vector with `z` standard normal, coordinate order fixed.
    pub fn sample_centered<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let p = self.l.nrows();
        let z = DVector::from_fn(p, |_, _| rng.sample(rand_distr::StandardNormal));
        &self.l * z
    }
}

fn sorted_eigenvalues(sym: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = sym
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev
}

impl PrecisionModel {
    fn validate_common(q_or_scale: f64, sigma2: f64) -> Result<()> {
        if !(q_or_scale > 0.0) || !q_or_scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive, got {q_or_scale}"
            )));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma2 must be positive, got {sigma2}"
            )));
        }
        Ok(())
    }

    fn finish(b: DMatrix<f64>, sigma2: f64, graph: Graph) -> Result<Self> {
        let p = graph.vertex_count();
        let mut i_minus_b = -b.clone();
        for i in 0..p {
            i_minus_b[(i, i)] = 1.0;
        }
        let lambda_min = sorted_eigenvalues(&i_minus_b)[0];
        if lambda_min <= PD_THRESHOLD {
            return Err(Error::NotPositiveDefinite { lambda_min });
        }
        Ok(PrecisionModel {
            b,
            sigma2,
            graph,
            lambda_min,
        })
    }

    /// Degree-scaled fixed-weight model: `B = -q D^{-1/2} A D^{-1/2}`.
    ///
    /// Rows and columns of isolated vertices are left at zero (the unit is
    /// independent of the rest of the system); use [`PrecisionModel::simple_strict`]
    /// to reject such graphs instead.
    pub fn simple(graph: Graph, q: f64, sigma2: f64) -> Result<Self> {
        Self::validate_common(q, sigma2)?;
        let p = graph.vertex_count();
        let deg = graph.degrees();
        let inv_sqrt: Vec<f64> = deg
            .degrees()
            .iter()
            .map(|&d| if d == 0 { 0.0 } else { 1.0 / (d as f64).sqrt() })
            .collect();
        let mut b = DMatrix::zeros(p, p);
        for &(i, j) in graph.edges() {
            let w = -q * inv_sqrt[i] * inv_sqrt[j];
            b[(i, j)] = w;
            b[(j, i)] = w;
        }
        Self::finish(b, sigma2, graph)
    }

    /// Like [`PrecisionModel::simple`] but errors on isolated vertices.
    pub fn simple_strict(graph: Graph, q: f64, sigma2: f64) -> Result<Self> {
        if let Some(v) = graph.degrees().degrees().iter().position(|&d| d == 0) {
            return Err(Error::IsolatedVertex(v));
        }
        Self::simple(graph, q, sigma2)
    }

    /// Random-weight model: each edge weight is drawn from `Beta(a, b)` and
    /// the whole weight matrix is rescaled so that `I - B` stays safely
    /// positive definite (smallest eigenvalue at least 0.05).
    ///
    /// The rescale factor is `min(1, 0.95 * 0.95 / max(|lambda_min(W)|, lambda_max(W)))`
    /// where `W` is the raw symmetric weight matrix, which is deterministic
    /// given the draws and keeps weights proportional to the Beta values.
    pub fn weighted<R: Rng + ?Sized>(
        graph: Graph,
        a: f64,
        b: f64,
        sigma2: f64,
        rng: &mut R,
    ) -> Result<Self> {
        Self::validate_common(a, sigma2)?;
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta shape b must be positive, got {b}"
            )));
        }
        if graph.edge_count() == 0 {
            return Err(Error::EmptyGraph);
        }
        let beta = Beta::new(a, b)
            .map_err(|e| Error::InvalidParameter(format!("Beta({a}, {b}): {e}")))?;
        let p = graph.vertex_count();
        let mut w = DMatrix::zeros(p, p);
        for &(i, j) in graph.edges() {
            let draw = beta.sample(rng);
            w[(i, j)] = draw;
            w[(j, i)] = draw;
        }
        let ev = sorted_eigenvalues(&w);
        let denom = ev[0].abs().max(ev[p - 1]);
        if !(denom > 0.0) {
            return Err(Error::InvalidParameter(
                "degenerate weight matrix (all draws zero)".into(),
            ));
        }
        let scale = (0.95 * (1.0 - 0.05) / denom).min(1.0);
        let mut bmat = DMatrix::zeros(p, p);
        for &(i, j) in graph.edges() {
            let v = -scale * w[(i, j)];
            bmat[(i, j)] = v;
            bmat[(j, i)] = v;
        }
        Self::finish(bmat, sigma2, graph)
    }

    /// Rebuild a model from an explicit symmetric `B`; the sparsity pattern
    /// becomes the graph. Mainly used by deserialization.
    pub fn from_interactions(b: DMatrix<f64>, sigma2: f64) -> Result<Self> {
        let p = b.nrows();
        if b.ncols() != p {
            return Err(Error::DimensionMismatch(format!(
                "B is {}x{}",
                b.nrows(),
                b.ncols()
            )));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma2 must be positive, got {sigma2}"
            )));
        }
        let mut edges = Vec::new();
        for i in 0..p {
            if b[(i, i)] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "B has nonzero diagonal at {i}"
                )));
            }
            for j in (i + 1)..p {
                if b[(i, j)] != b[(j, i)] {
                    return Err(Error::InvalidParameter(format!(
                        "B is not symmetric at ({i}, {j})"
                    )));
                }
                if b[(i, j)] != 0.0 {
                    edges.push((i, j));
                }
            }
        }
        let graph = Graph::new(p, edges)?;
        Self::finish(b, sigma2, graph)
    }

    pub fn dimension(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn interactions(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Smallest eigenvalue of `I - B`, computed at construction.
    pub fn min_eigenvalue(&self) -> f64 {
        self.lambda_min
    }

    pub fn identity_minus_b(&self) -> DMatrix<f64> {
        let p = self.dimension();
        let mut m = -self.b.clone();
        for i in 0..p {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Covariance `(I - B)^{-1} sigma^2`, explicitly symmetrized.
    pub fn covariance(&self) -> DMatrix<f64> {
        let inv = self
            .identity_minus_b()
            .cholesky()
            .expect("verified positive definite at construction")
            .inverse();
        let sym = (&inv + inv.transpose()) * (0.5 * self.sigma2);
        sym
    }

    /// Cholesky factor of the covariance, with a reconstruction check.
    pub fn cholesky(&self) -> Result<CovarianceFactor> {
        let sigma = self.covariance();
        let l = sigma
            .clone()
            .cholesky()
            .ok_or_else(|| Error::CholeskyFailed("covariance not positive definite".into()))?
            .l();
        let resid = (&l * l.transpose() - &sigma).abs().max();
        let scale = sigma.abs().max();
        if resid >= 1e-8 * scale {
            return Err(Error::CholeskyFailed(format!(
                "reconstruction residual {resid:.3e} exceeds 1e-8 * {scale:.3e}"
            )));
        }
        Ok(CovarianceFactor { l })
    }

    pub fn to_json_string(&self) -> Result<String> {
        let record = ModelRecord {
            p: self.dimension(),
            sigma2: self.sigma2,
            edges: self
                .graph
                .edges()
                .iter()
                .map(|&(i, j)| (i, j, self.b[(i, j)]))
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&record)?)
    }

    pub fn from_json_string(text: &str) -> Result<Self> {
        let record: ModelRecord = serde_json::from_str(text)?;
        let mut b = DMatrix::zeros(record.p, record.p);
        for &(i, j, w) in &record.edges {
            if i >= record.p || j >= record.p {
                return Err(Error::Parse(format!("edge ({i}, {j}) out of range")));
            }
            b[(i, j)] = w;
            b[(j, i)] = w;
        }
        Self::from_interactions(b, record.sigma2)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_string(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    p: usize,
    sigma2: f64,
    edges: Vec<(usize, usize, f64)>,
}
