//! Draw training and test data from a precision model.
//!
//! Training rows are i.i.d. centered Gaussians with the model covariance;
//! test vectors add an external perturbation `phi` through the mean
//! `(I - B)^{-1} phi`. All draws go through the covariance Cholesky factor,
//! so sampling is exact, and the per-coordinate draw order is fixed: a test
//! draw with `phi = 0` consumes the generator exactly like one training row.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::PrecisionModel;

/// Sparse single-unit perturbation: `snr` at `target`, zero elsewhere.
pub fn single_unit_perturbation(p: usize, target: usize, snr: f64) -> Result<DVector<f64>> {
    if target >= p {
        return Err(Error::InvalidParameter(format!(
            "target {target} out of range for p = {p}"
        )));
    }
    let mut phi = DVector::zeros(p);
    phi[target] = snr;
    Ok(phi)
}

/// Draw `n` training rows, each `N(0, (I - B)^{-1} sigma^2)`.
pub fn sample_training<R: Rng + ?Sized>(
    model: &PrecisionModel,
    n: usize,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let factor = model.cholesky()?;
    let p = model.dimension();
    let mut out = DMatrix::zeros(n, p);
    for r in 0..n {
        let row = factor.sample_centered(rng);
        out.row_mut(r).copy_from(&row.transpose());
    }
    Ok(out)
}

/// Mean of the test distribution, `(I - B)^{-1} phi`.
pub fn test_mean(model: &PrecisionModel, phi: &DVector<f64>) -> Result<DVector<f64>> {
    if phi.len() != model.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "phi has length {}, model dimension {}",
            phi.len(),
            model.dimension()
        )));
    }
    let chol = model
        .identity_minus_b()
        .cholesky()
        .ok_or_else(|| Error::CholeskyFailed("I - B not positive definite".into()))?;
    Ok(chol.solve(phi))
}

/// Draw one test vector `N((I - B)^{-1} phi, (I - B)^{-1} sigma^2)`.
pub fn sample_test<R: Rng + ?Sized>(
    model: &PrecisionModel,
    phi: &DVector<f64>,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let mean = test_mean(model, phi)?;
    let factor = model.cholesky()?;
    Ok(mean + factor.sample_centered(rng))
}

/// Draw `n_test` test vectors as rows of a matrix.
pub fn sample_test_batch<R: Rng + ?Sized>(
    model: &PrecisionModel,
    phi: &DVector<f64>,
    n_test: usize,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if n_test == 0 {
        return Err(Error::InvalidParameter("n_test must be >= 1".into()));
    }
    let mean = test_mean(model, phi)?;
    let factor = model.cholesky()?;
    let p = model.dimension();
    let mut out = DMatrix::zeros(n_test, p);
    for r in 0..n_test {
        let row = &mean + factor.sample_centered(rng);
        out.row_mut(r).copy_from(&row.transpose());
    }
    Ok(out)
}

/// Write a data matrix as CSV: header `y1,...,yp`, one row per record,
/// 17-significant-digit decimals (lossless for f64).
pub fn matrix_to_csv_string(data: &DMatrix<f64>) -> String {
    let mut out = String::new();
    let p = data.ncols();
    for j in 0..p {
        if j > 0 {
            out.push(',');
        }
        write!(out, "y{}", j + 1).unwrap();
    }
    out.push('\n');
    for r in 0..data.nrows() {
        for j in 0..p {
            if j > 0 {
                out.push(',');
            }
            write!(out, "{:.16e}", data[(r, j)]).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parse the CSV format produced by [`matrix_to_csv_string`].
pub fn matrix_from_csv_string(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty CSV".into()))?;
    let p = header.split(',').count();
    for (j, name) in header.split(',').enumerate() {
        let want = format!("y{}", j + 1);
        if name.trim() != want {
            return Err(Error::Parse(format!(
                "unexpected header column {:?}, expected {want:?}",
                name.trim()
            )));
        }
    }
    let mut rows: Vec<f64> = Vec::new();
    let mut n = 0usize;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != p {
            return Err(Error::Parse(format!(
                "row {} has {} fields, expected {p}",
                n + 1,
                fields.len()
            )));
        }
        for f in fields {
            rows.push(
                f.trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad number {f:?}")))?,
            );
        }
        n += 1;
    }
    Ok(DMatrix::from_row_slice(n, p, &rows))
}

pub fn write_matrix_csv(data: &DMatrix<f64>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, matrix_to_csv_string(data))?;
    Ok(())
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    matrix_from_csv_string(&std::fs::read_to_string(path)?)
}
