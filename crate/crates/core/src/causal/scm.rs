//! Linear-Gaussian SCM algebra: covariance assembly, squared Mahalanobis
//! distance, its per-mechanism noise decomposition, and marginalization.
//!
//! For `X = A·X + N` with `A` strictly lower triangular and independent
//! noise variances `σ_i²`, the transformation `N = (I−A)·X` diagonalizes the
//! quadratic form: `xᵀ Σ_X⁻¹ x = Σ_i n_i²/σ_i²`. Marginalizing to a subset
//! of coordinates can only shrink the squared distance; the difference is
//! `xᵀ C x` for an explicitly assembled positive semi-definite correction
//! matrix `C`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use super::model::{CausalModel, MechanismSpec};

#[derive(Debug, Error, PartialEq)]
pub enum ScmError {
    #[error("coefficient matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("coefficient matrix must be strictly lower triangular (entry {row},{col} = {value})")]
    NotStrictlyLowerTriangular { row: usize, col: usize, value: f64 },
    #[error("noise variances must be positive and finite, got {0}")]
    BadVariance(f64),
    #[error("expected dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("covariance is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("covariance is not symmetric")]
    NotSymmetric,
    #[error("invalid subset: {0}")]
    BadSubset(String),
    #[error("node {node:?} is not linear-Gaussian ({kind})")]
    NotLinearGaussian { node: String, kind: &'static str },
}

/// Linear structural equations `X = A·X + N` in a fixed node order.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearScm {
    a: DMatrix<f64>,
    noise_variances: DVector<f64>,
}

impl LinearScm {
    pub fn new(a: DMatrix<f64>, noise_variances: Vec<f64>) -> Result<Self, ScmError> {
        if a.nrows() != a.ncols() {
            return Err(ScmError::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        for row in 0..a.nrows() {
            for col in row..a.ncols() {
                if a[(row, col)] != 0.0 {
                    return Err(ScmError::NotStrictlyLowerTriangular {
                        row,
                        col,
                        value: a[(row, col)],
                    });
                }
            }
        }
        if noise_variances.len() != a.nrows() {
            return Err(ScmError::DimensionMismatch {
                expected: a.nrows(),
                got: noise_variances.len(),
            });
        }
        for &v in &noise_variances {
            if !(v.is_finite() && v > 0.0) {
                return Err(ScmError::BadVariance(v));
            }
        }
        Ok(Self {
            a,
            noise_variances: DVector::from_vec(noise_variances),
        })
    }

    /// Build from a model whose nodes are all linear-Gaussian; the SCM's
    /// coordinate order is the model's topological order, returned alongside.
    pub fn from_model(model: &CausalModel) -> Result<(Self, Vec<String>), ScmError> {
        let order = model.topological_order();
        let pos: std::collections::HashMap<usize, usize> =
            order.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let n = model.len();
        let mut a = DMatrix::zeros(n, n);
        let mut variances = vec![0.0; n];
        for (row, &idx) in order.iter().enumerate() {
            let node = model.node(idx);
            match &node.mechanism {
                MechanismSpec::LinearGaussian {
                    coefficients,
                    noise_sd,
                } => {
                    variances[row] = noise_sd * noise_sd;
                    for (coef, &p) in coefficients.iter().zip(model.parent_indices(idx)) {
                        a[(row, pos[&p])] += coef;
                    }
                }
                other => {
                    return Err(ScmError::NotLinearGaussian {
                        node: node.id.clone(),
                        kind: other.kind_name(),
                    })
                }
            }
        }
        let ids = order.iter().map(|&i| model.node(i).id.clone()).collect();
        Ok((Self::new(a, variances)?, ids))
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn noise_variances(&self) -> &DVector<f64> {
        &self.noise_variances
    }

    /// `Σ_X = (I−A)⁻¹ · diag(σ²) · (I−A)⁻ᵀ`, with the unit lower-triangular
    /// inverse computed by forward substitution.
    pub fn covariance(&self) -> DMatrix<f64> {
        let n = self.dim();
        let l = DMatrix::identity(n, n) - &self.a;
        // Solve L·B = I column by column; L has a unit diagonal.
        let mut b = DMatrix::zeros(n, n);
        for col in 0..n {
            for row in 0..n {
                let mut s = if row == col { 1.0 } else { 0.0 };
                for k in 0..row {
                    s -= l[(row, k)] * b[(k, col)];
                }
                b[(row, col)] = s;
            }
        }
        let scaled = &b * DMatrix::from_diagonal(&self.noise_variances);
        let mut sigma = scaled * b.transpose();
        // The product is symmetric up to rounding; make it exactly so.
        for row in 0..n {
            for col in 0..row {
                let avg = 0.5 * (sigma[(row, col)] + sigma[(col, row)]);
                sigma[(row, col)] = avg;
                sigma[(col, row)] = avg;
            }
        }
        sigma
    }

    /// Per-node noise scores `n_i²/σ_i²` with `n = (I−A)·x`; they sum to the
    /// full squared Mahalanobis distance.
    pub fn noise_score_decomposition(&self, x: &DVector<f64>) -> Result<Vec<f64>, ScmError> {
        if x.len() != self.dim() {
            return Err(ScmError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let n = x - &self.a * x;
        Ok(n
            .iter()
            .zip(self.noise_variances.iter())
            .map(|(ni, var)| ni * ni / var)
            .collect())
    }

    /// Recover the noise vector `n = (I−A)·x`.
    pub fn noise_of(&self, x: &DVector<f64>) -> Result<DVector<f64>, ScmError> {
        if x.len() != self.dim() {
            return Err(ScmError::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(x - &self.a * x)
    }

    /// Observation `x = (I−A)⁻¹·n` from a noise vector.
    pub fn observation_from_noise(&self, noise: &[f64]) -> Result<DVector<f64>, ScmError> {
        if noise.len() != self.dim() {
            return Err(ScmError::DimensionMismatch {
                expected: self.dim(),
                got: noise.len(),
            });
        }
        let l = DMatrix::identity(self.dim(), self.dim()) - &self.a;
        let mut x = DVector::zeros(self.dim());
        for row in 0..self.dim() {
            let mut s = noise[row];
            for k in 0..row {
                s -= l[(row, k)] * x[k];
            }
            x[row] = s;
        }
        Ok(x)
    }
}

fn check_square_symmetric(sigma: &DMatrix<f64>) -> Result<(), ScmError> {
    if sigma.nrows() != sigma.ncols() {
        return Err(ScmError::NotSquare {
            rows: sigma.nrows(),
            cols: sigma.ncols(),
        });
    }
    let scale = sigma.amax().max(1.0);
    for row in 0..sigma.nrows() {
        for col in 0..row {
            if (sigma[(row, col)] - sigma[(col, row)]).abs() > 1e-9 * scale {
                return Err(ScmError::NotSymmetric);
            }
        }
    }
    Ok(())
}

/// Squared Mahalanobis distance `xᵀ Σ⁻¹ x` via a symmetric positive-definite
/// solve; fails rather than regularizing when `Σ` is not PD.
pub fn mahalanobis_sq(x: &DVector<f64>, sigma: &DMatrix<f64>) -> Result<f64, ScmError> {
    check_square_symmetric(sigma)?;
    if x.len() != sigma.nrows() {
        return Err(ScmError::DimensionMismatch {
            expected: sigma.nrows(),
            got: x.len(),
        });
    }
    let chol = nalgebra::Cholesky::new(sigma.clone()).ok_or(ScmError::NotPositiveDefinite)?;
    let y = chol.solve(x);
    Ok(x.dot(&y))
}

fn check_subset(subset: &[usize], dim: usize) -> Result<(), ScmError> {
    if subset.is_empty() {
        return Err(ScmError::BadSubset("subset is empty".into()));
    }
    let mut seen = vec![false; dim];
    for &i in subset {
        if i >= dim {
            return Err(ScmError::BadSubset(format!("index {i} out of range {dim}")));
        }
        if seen[i] {
            return Err(ScmError::BadSubset(format!("index {i} repeated")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Squared Mahalanobis distance of the subvector under the corresponding
/// principal submatrix of `Σ`. Never exceeds the full-vector distance.
pub fn marginal_mahalanobis_sq(
    x: &DVector<f64>,
    sigma: &DMatrix<f64>,
    subset: &[usize],
) -> Result<f64, ScmError> {
    check_square_symmetric(sigma)?;
    if x.len() != sigma.nrows() {
        return Err(ScmError::DimensionMismatch {
            expected: sigma.nrows(),
            got: x.len(),
        });
    }
    check_subset(subset, sigma.nrows())?;
    let sub_x = DVector::from_iterator(subset.len(), subset.iter().map(|&i| x[i]));
    let sub_sigma = sigma.select_rows(subset).select_columns(subset);
    mahalanobis_sq(&sub_x, &sub_sigma)
}

/// The correction matrix `C = Σ⁻¹ − lift(Σ_SS⁻¹)` whose quadratic form is the
/// gap between the full and marginal squared Mahalanobis distances; it is
/// positive semi-definite.
pub fn correction_matrix(sigma: &DMatrix<f64>, subset: &[usize]) -> Result<DMatrix<f64>, ScmError> {
    check_square_symmetric(sigma)?;
    check_subset(subset, sigma.nrows())?;
    let full_inv = nalgebra::Cholesky::new(sigma.clone())
        .ok_or(ScmError::NotPositiveDefinite)?
        .inverse();
    let sub_sigma = sigma.select_rows(subset).select_columns(subset);
    let sub_inv = nalgebra::Cholesky::new(sub_sigma)
        .ok_or(ScmError::NotPositiveDefinite)?
        .inverse();
    let mut c = full_inv;
    for (a, &i) in subset.iter().enumerate() {
        for (b, &j) in subset.iter().enumerate() {
            c[(i, j)] -= sub_inv[(a, b)];
        }
    }
    // Symmetrize rounding noise before any eigen analysis downstream.
    let ct = c.transpose();
    Ok(0.5 * (c + ct))
}
