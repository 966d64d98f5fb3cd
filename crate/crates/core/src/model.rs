//! Ridge regression on descriptors and PCA for descriptor-space maps.
//!
//! The descriptor grid is 128×128 = 16,384 features against at most a few
//! thousand samples, so the primal normal-equations matrix would be ~2 GB.
//! The solver therefore works in the dual (sample) space whenever
//! `n_samples <= n_features`: `w = Xcᵀ (Xc Xcᵀ + λI)⁻¹ yc` on centered data,
//! which also makes the stationarity condition hold to machine precision.
//! The primal normal equations remain the path for tall problems, and both
//! are exposed for cross-checking.
//!
//! The intercept is never penalized: fit on centered data, then
//! `b = ȳ − x̄·w`.
//!
//! Every inner product runs through the fixed pairwise trees in
//! [`crate::numeric`], so fits are identical to the last bit regardless of
//! thread count.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptor::{standardize, DescriptorError, DescriptorHistogram, GridSpec, StandardizationStats};
use crate::filtration::Convention;
use crate::numeric::{norm, pairwise_dot, pairwise_sum, tree_sum_by, tree_weighted_row_sum};
use crate::parallel::par_map;

/// Default L2 regularization strength.
pub const DEFAULT_LAMBDA: f64 = 200.0;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("row {row} has {got} entries, expected {expected}")]
    RaggedRows {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("sample {sample} contains a non-finite feature value")]
    NonFiniteFeature { sample: usize },
    #[error("label {index} is not finite")]
    NonFiniteLabel { index: usize },
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("ridge system is singular (duplicate samples at lambda = 0?); use lambda > 0")]
    SingularSystem,
    #[error("requested {k} components but the feature dimension is {dim}")]
    BadComponentCount { k: usize, dim: usize },
    #[error("lambda must be finite and >= 0, got {0}")]
    BadLambda(f64),
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ModelError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(ModelError::RaggedRows {
                    row: i,
                    got: row.len(),
                    expected: cols,
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, ModelError> {
        if data.len() != rows * cols {
            return Err(ModelError::ShapeMismatch(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn validate_finite(&self) -> Result<(), ModelError> {
        for i in 0..self.rows {
            if self.row(i).iter().any(|v| !v.is_finite()) {
                return Err(ModelError::NonFiniteFeature { sample: i });
            }
        }
        Ok(())
    }

    fn column_means(&self) -> Vec<f64> {
        let mut means = tree_sum_by(self.rows, &|i| self.row(i).to_vec());
        let n = self.rows as f64;
        for m in &mut means {
            *m /= n;
        }
        means
    }

    fn centered(&self, means: &[f64]) -> DenseMatrix {
        let mut data = self.data.clone();
        for i in 0..self.rows {
            for (v, m) in data[i * self.cols..(i + 1) * self.cols].iter_mut().zip(means) {
                *v -= m;
            }
        }
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }
}

/// Weights and unpenalized intercept of one ridge fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeSolution {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

fn validate_ridge_inputs(x: &DenseMatrix, y: &[f64], lambda: f64) -> Result<(), ModelError> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(ModelError::BadLambda(lambda));
    }
    if x.rows < 2 {
        return Err(ModelError::TooFewSamples {
            need: 2,
            got: x.rows,
        });
    }
    if y.len() != x.rows {
        return Err(ModelError::ShapeMismatch(format!(
            "{} labels for {} samples",
            y.len(),
            x.rows
        )));
    }
    x.validate_finite()?;
    for (index, v) in y.iter().enumerate() {
        if !v.is_finite() {
            return Err(ModelError::NonFiniteLabel { index });
        }
    }
    Ok(())
}

/// Minimize Σ(y − Xw − b)² + λ‖w‖², choosing the dual form when
/// `n_samples <= n_features`.
pub fn ridge_solve(x: &DenseMatrix, y: &[f64], lambda: f64) -> Result<RidgeSolution, ModelError> {
    if x.rows <= x.cols {
        ridge_solve_dual(x, y, lambda)
    } else {
        ridge_solve_primal(x, y, lambda)
    }
}

/// Dual/kernel form: α = (XcXcᵀ + λI)⁻¹ yc, w = Xcᵀα.
pub fn ridge_solve_dual(
    x: &DenseMatrix,
    y: &[f64],
    lambda: f64,
) -> Result<RidgeSolution, ModelError> {
    validate_ridge_inputs(x, y, lambda)?;
    let n = x.rows;
    let means = x.column_means();
    let xc = x.centered(&means);
    let y_mean = pairwise_sum(y) / n as f64;
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    // Gram entries are independent pairwise dots: safe to compute in parallel
    let idx: Vec<usize> = (0..n).collect();
    let gram_rows = par_map(&idx, |&i| {
        let mut row = vec![0.0; n];
        for j in i..n {
            row[j] = pairwise_dot(xc.row(i), xc.row(j));
        }
        row
    });
    // Centering puts the all-ones vector in the Gram kernel while yc stays
    // orthogonal to it, so a rank-one repair along 1 makes the system SPD
    // without moving the solution (alpha stays orthogonal to 1).
    let trace: f64 = (0..n).map(|i| gram_rows[i][i]).sum();
    let repair = (trace / n as f64 + lambda + 1e-12) / n as f64;
    let mut gram = vec![repair; n * n];
    for (i, row) in gram_rows.iter().enumerate() {
        for j in i..n {
            gram[i * n + j] += row[j];
            gram[j * n + i] += if i == j { lambda } else { row[j] };
        }
    }
    let alpha = cholesky_solve(&mut gram, n, &yc)?;
    let rows: Vec<&[f64]> = (0..n).map(|i| xc.row(i)).collect();
    let weights = tree_weighted_row_sum(&rows, &alpha);
    let intercept = y_mean - pairwise_dot(&means, &weights);
    Ok(RidgeSolution { weights, intercept })
}

/// Primal normal equations: w = (XcᵀXc + λI)⁻¹ Xcᵀ yc.
pub fn ridge_solve_primal(
    x: &DenseMatrix,
    y: &[f64],
    lambda: f64,
) -> Result<RidgeSolution, ModelError> {
    validate_ridge_inputs(x, y, lambda)?;
    let n = x.rows;
    let d = x.cols;
    let means = x.column_means();
    let xc = x.centered(&means);
    let y_mean = pairwise_sum(y) / n as f64;
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    // transpose once so every normal-equation entry is a contiguous dot
    let mut xt = vec![0.0; d * n];
    for i in 0..n {
        for (c, &v) in xc.row(i).iter().enumerate() {
            xt[c * n + i] = v;
        }
    }
    let col = |c: usize| &xt[c * n..(c + 1) * n];
    let idx: Vec<usize> = (0..d).collect();
    let a_rows = par_map(&idx, |&r| {
        let mut row = vec![0.0; d];
        for c in r..d {
            row[c] = pairwise_dot(col(r), col(c));
        }
        row
    });
    let mut a = vec![0.0; d * d];
    for (r, row) in a_rows.iter().enumerate() {
        for c in r..d {
            a[r * d + c] = row[c];
            a[c * d + r] = row[c];
        }
        a[r * d + r] += lambda;
    }
    let b: Vec<f64> = (0..d).map(|c| pairwise_dot(col(c), &yc)).collect();
    let weights = cholesky_solve(&mut a, d, &b)?;
    let intercept = y_mean - pairwise_dot(&means, &weights);
    Ok(RidgeSolution { weights, intercept })
}

/// In-place Cholesky factorization and solve for a symmetric positive
/// definite system. Fails on a non-positive pivot.
fn cholesky_solve(a: &mut [f64], n: usize, b: &[f64]) -> Result<Vec<f64>, ModelError> {
    let scale = (0..n)
        .map(|i| a[i * n + i].abs())
        .fold(0.0_f64, f64::max)
        .max(1.0);
    let tol = scale * 1e-13;
    for k in 0..n {
        let mut diag = a[k * n + k];
        for m in 0..k {
            diag -= a[k * n + m] * a[k * n + m];
        }
        if diag <= tol * 1e-2 {
            return Err(ModelError::SingularSystem);
        }
        let lkk = diag.sqrt();
        a[k * n + k] = lkk;
        for i in (k + 1)..n {
            let mut v = a[i * n + k];
            for m in 0..k {
                v -= a[i * n + m] * a[k * n + m];
            }
            a[i * n + k] = v / lkk;
        }
    }
    // forward then backward substitution
    let mut x = b.to_vec();
    for i in 0..n {
        for m in 0..i {
            x[i] -= a[i * n + m] * x[m];
        }
        x[i] /= a[i * n + i];
    }
    for i in (0..n).rev() {
        for m in (i + 1)..n {
            x[i] -= a[m * n + i] * x[m];
        }
        x[i] /= a[i * n + i];
    }
    Ok(x)
}

/// Max-norm of the ridge stationarity gradient 2Xcᵀ(Xcw − yc) + 2λw.
pub fn ridge_stationarity_residual(
    x: &DenseMatrix,
    y: &[f64],
    lambda: f64,
    solution: &RidgeSolution,
) -> f64 {
    let n = x.rows;
    let means = x.column_means();
    let xc = x.centered(&means);
    let y_mean = pairwise_sum(y) / n as f64;
    let residuals: Vec<f64> = (0..n)
        .map(|i| pairwise_dot(xc.row(i), &solution.weights) - (y[i] - y_mean))
        .collect();
    let rows: Vec<&[f64]> = (0..n).map(|i| xc.row(i)).collect();
    let mut grad = tree_weighted_row_sum(&rows, &residuals);
    for (g, w) in grad.iter_mut().zip(&solution.weights) {
        *g = 2.0 * (*g + lambda * w);
    }
    grad.iter().fold(0.0_f64, |m, g| m.max(g.abs()))
}

/// Fit ridge weights from standardized descriptor histograms.
pub fn fit_ridge(
    features: &[DescriptorHistogram],
    labels: &[f64],
    lambda: f64,
) -> Result<RidgeSolution, ModelError> {
    if features.len() < 2 {
        return Err(ModelError::TooFewSamples {
            need: 2,
            got: features.len(),
        });
    }
    let spec = features[0].spec();
    for (i, h) in features.iter().enumerate() {
        if h.spec() != spec {
            return Err(ModelError::ShapeMismatch(format!(
                "histogram {i} has a different grid spec"
            )));
        }
        if !h.is_standardized() {
            return Err(ModelError::ShapeMismatch(format!(
                "histogram {i} is not standardized"
            )));
        }
    }
    let rows: Vec<Vec<f64>> = features.iter().map(|h| h.values().to_vec()).collect();
    let x = DenseMatrix::from_rows(&rows)?;
    ridge_solve(&x, labels, lambda)
}

/// Root mean squared error. Lengths must match and be nonzero.
pub fn rmse(predictions: &[f64], labels: &[f64]) -> f64 {
    assert_eq!(
        predictions.len(),
        labels.len(),
        "rmse needs equal-length inputs"
    );
    assert!(!predictions.is_empty(), "rmse of empty inputs");
    let sq: Vec<f64> = predictions
        .iter()
        .zip(labels)
        .map(|(p, y)| (p - y) * (p - y))
        .collect();
    (pairwise_sum(&sq) / sq.len() as f64).sqrt()
}

/// Trained energy model: ridge weights over the descriptor grid plus the
/// training-set standardization baked in, so prediction takes a *normalized*
/// histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub spec: GridSpec,
    pub convention: Convention,
    pub cutoff: f64,
    pub lambda: f64,
    pub seed: u64,
    pub split: f64,
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub stats: StandardizationStats,
}

impl RidgeModel {
    /// Predict energy per atom from a normalized histogram; standardization
    /// is applied internally from the stored stats.
    pub fn predict(&self, histogram: &DescriptorHistogram) -> Result<f64, ModelError> {
        if histogram.spec() != self.spec {
            return Err(ModelError::ShapeMismatch(format!(
                "histogram spec {:?} does not match model spec {:?}",
                histogram.spec(),
                self.spec
            )));
        }
        let z = standardize(histogram, &self.stats)?;
        Ok(pairwise_dot(&self.weights, z.values()) + self.intercept)
    }
}

/// Principal components of a sample set: orthonormal directions, explained
/// variance fractions, and per-sample projected coordinates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcaProjection {
    pub mean: Vec<f64>,
    pub components: Vec<Vec<f64>>,
    pub explained: Vec<f64>,
    pub coords: Vec<Vec<f64>>,
}

/// Top-k PCA via deflated power iteration on the covariance operator,
/// applied matrix-free as Xcᵀ(Xc v)/n (or the dual XcXcᵀ form when
/// samples < features).
pub fn fit_pca(x: &DenseMatrix, k: usize) -> Result<PcaProjection, ModelError> {
    if k < 1 || k > x.cols {
        return Err(ModelError::BadComponentCount { k, dim: x.cols });
    }
    if x.rows < k + 1 {
        return Err(ModelError::TooFewSamples {
            need: k + 1,
            got: x.rows,
        });
    }
    x.validate_finite()?;
    let n = x.rows;
    let means = x.column_means();
    let xc = x.centered(&means);
    let rows: Vec<&[f64]> = (0..n).map(|i| xc.row(i)).collect();
    let nf = n as f64;
    let total_variance: f64 = {
        let sq: Vec<f64> = (0..n).map(|i| pairwise_dot(xc.row(i), xc.row(i))).collect();
        pairwise_sum(&sq) / nf
    };

    let dual = n < x.cols;
    let dim = if dual { n } else { x.cols };
    // dual:  q -> Xc (Xcᵀ q) / n   (eigenvectors of the Gram/n)
    // primal: v -> Xcᵀ (Xc v) / n  (eigenvectors of the covariance)
    let apply = |v: &[f64]| -> Vec<f64> {
        if dual {
            let lifted = tree_weighted_row_sum(&rows, v);
            let mut out: Vec<f64> = (0..n).map(|i| pairwise_dot(rows[i], &lifted)).collect();
            for o in &mut out {
                *o /= nf;
            }
            out
        } else {
            let projected: Vec<f64> = (0..n).map(|i| pairwise_dot(rows[i], v)).collect();
            let mut out = tree_weighted_row_sum(&rows, &projected);
            for o in &mut out {
                *o /= nf;
            }
            out
        }
    };

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut eigenvalues = Vec::with_capacity(k);
    for component in 0..k {
        let (vector, value) = power_iteration(&apply, dim, &basis, component);
        basis.push(vector);
        eigenvalues.push(value.max(0.0));
    }

    let mut components: Vec<Vec<f64>> = if dual {
        basis
            .iter()
            .map(|q| {
                let mut u = tree_weighted_row_sum(&rows, q);
                let len = norm(&u);
                if len > 0.0 {
                    for v in &mut u {
                        *v /= len;
                    }
                }
                u
            })
            .collect()
    } else {
        basis
    };

    // order by eigenvalue (descending), then fix signs
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eigenvalues[i]).collect();
    components = order
        .iter()
        .map(|&i| std::mem::take(&mut components[i]))
        .collect();
    for u in &mut components {
        let argmax = u
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| a.abs().total_cmp(&b.abs()))
            .map(|(i, _)| i)
            .unwrap_or(0);
        if u[argmax] < 0.0 {
            for v in u.iter_mut() {
                *v = -*v;
            }
        }
    }

    let explained = eigenvalues
        .iter()
        .map(|&l| {
            if total_variance > 0.0 {
                (l / total_variance).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect();
    let coords = (0..n)
        .map(|i| {
            components
                .iter()
                .map(|u| pairwise_dot(xc.row(i), u))
                .collect()
        })
        .collect();
    Ok(PcaProjection {
        mean: means,
        components,
        explained,
        coords,
    })
}

fn power_iteration<F>(apply: &F, dim: usize, deflate: &[Vec<f64>], salt: usize) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    const MAX_ITER: usize = 1000;
    const TOL: f64 = 1e-13;
    // deterministic start vector, generically non-orthogonal to the target
    let mut v: Vec<f64> = (0..dim)
        .map(|i| ((i + 1) as f64 * 0.7391 + salt as f64 * 0.1313).sin() + 0.01)
        .collect();
    orthogonalize(&mut v, deflate);
    normalize(&mut v);
    for _ in 0..MAX_ITER {
        let mut w = apply(&v);
        orthogonalize(&mut w, deflate);
        let len = norm(&w);
        if len < 1e-300 {
            return (v, 0.0);
        }
        for x in &mut w {
            *x /= len;
        }
        let aligned = pairwise_dot(&w, &v) >= 0.0;
        let delta: f64 = w
            .iter()
            .zip(&v)
            .map(|(a, b)| if aligned { (a - b).abs() } else { (a + b).abs() })
            .fold(0.0, f64::max);
        v = w;
        if delta < TOL {
            break;
        }
    }
    let av = apply(&v);
    let eigenvalue = pairwise_dot(&v, &av);
    (v, eigenvalue)
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let proj = pairwise_dot(v, b);
        for (x, y) in v.iter_mut().zip(b) {
            *x -= proj * y;
        }
    }
}

fn normalize(v: &mut [f64]) {
    let len = norm(v);
    if len > 0.0 {
        for x in v.iter_mut() {
            *x /= len;
        }
    }
}
