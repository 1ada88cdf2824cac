//! Ordinary least squares through a Householder QR factorization.

use thiserror::Error;

/// Relative size below which a QR pivot marks a dependent column.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OlsError {
    #[error("design has {rows} rows but needs more than {cols}")]
    InsufficientRows { rows: usize, cols: usize },
    #[error("design matrix is rank deficient at column {column}")]
    RankDeficient { column: usize },
    #[error("response has {got} values, design has {rows} rows")]
    LengthMismatch { rows: usize, got: usize },
    #[error("non-finite value in regression input")]
    NonFinite,
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// Builds a matrix whose columns are the given equal-length vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        let rows = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "ragged columns");
            for (i, v) in c.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
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
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Residual sum of squares.
    pub rss: f64,
    pub df_resid: usize,
}

impl OlsFit {
    pub fn sigma2(&self) -> f64 {
        self.rss / self.df_resid as f64
    }

    pub fn t_stat(&self, j: usize) -> f64 {
        self.coefficients[j] / self.std_errors[j]
    }
}

/// Least-squares fit of `y` on the columns of `x`.
///
/// Standard errors are `sqrt(diag(σ̂² (XᵀX)⁻¹))` with `σ̂² = RSS / (n − k)`,
/// evaluated as `R⁻¹R⁻ᵀ` from the QR factors.
pub fn ols_fit(x: &Matrix, y: &[f64]) -> Result<OlsFit, OlsError> {
    let (n, k) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(OlsError::LengthMismatch {
            rows: n,
            got: y.len(),
        });
    }
    if n <= k {
        return Err(OlsError::InsufficientRows { rows: n, cols: k });
    }
    if x.data.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(OlsError::NonFinite);
    }

    // Column-major working copy: a[j] is column j.
    let mut a: Vec<Vec<f64>> = (0..k)
        .map(|j| (0..n).map(|i| x[(i, j)]).collect())
        .collect();
    let mut qty = y.to_vec();
    let col_norms: Vec<f64> = a.iter().map(|c| norm(c)).collect();

    for j in 0..k {
        let alpha = norm(&a[j][j..]);
        if col_norms[j] == 0.0 || alpha <= RANK_TOLERANCE * col_norms[j] {
            return Err(OlsError::RankDeficient { column: j });
        }
        let alpha = if a[j][j] > 0.0 { -alpha } else { alpha };
        // v = x - alpha e1, stored in place of the sub-column
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        let reflect = |col: &mut [f64]| {
            let dot: f64 = v.iter().zip(col.iter()).map(|(p, q)| p * q).sum();
            let s = 2.0 * dot / vnorm2;
            for (c, vi) in col.iter_mut().zip(&v) {
                *c -= s * vi;
            }
        };
        for col in a.iter_mut().skip(j + 1) {
            reflect(&mut col[j..]);
        }
        reflect(&mut qty[j..]);
        a[j][j] = alpha;
        for t in a[j][j + 1..].iter_mut() {
            *t = 0.0;
        }
    }

    // Back substitution R b = (Qᵀy)[..k]
    let r = |i: usize, j: usize| a[j][i];
    let mut beta = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = qty[i];
        for j in i + 1..k {
            s -= r(i, j) * beta[j];
        }
        beta[i] = s / r(i, i);
    }

    let residuals: Vec<f64> = (0..n)
        .map(|i| y[i] - x.row(i).iter().zip(&beta).map(|(p, b)| p * b).sum::<f64>())
        .collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let df_resid = n - k;
    let sigma2 = rss / df_resid as f64;

    // R⁻¹ (upper triangular), row i of R⁻¹ gives diag entry Σ_j rinv[i][j]².
    let mut rinv = vec![vec![0.0; k]; k];
    for c in 0..k {
        for i in (0..=c).rev() {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for j in i + 1..=c {
                s -= r(i, j) * rinv[j][c];
            }
            rinv[i][c] = s / r(i, i);
        }
    }
    let std_errors = (0..k)
        .map(|i| (sigma2 * rinv[i].iter().map(|v| v * v).sum::<f64>()).sqrt())
        .collect();

    Ok(OlsFit {
        coefficients: beta,
        std_errors,
        residuals,
        rss,
        df_resid,
    })
}

fn norm(v: &[f64]) -> f64 {
    // scaled to avoid overflow on large regressors
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::rng::SynthRng;

    /// Independent route: form XᵀX and Xᵀy, solve by Gauss-Jordan with
    /// partial pivoting and invert for the covariance diagonal.
    fn normal_equations(x: &Matrix, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (n, k) = (x.rows(), x.cols());
        let mut aug = vec![vec![0.0; 2 * k + 1]; k];
        for i in 0..k {
            for j in 0..k {
                aug[i][j] = (0..n).map(|t| x[(t, i)] * x[(t, j)]).sum();
            }
            aug[i][k + i] = 1.0;
            aug[i][2 * k] = (0..n).map(|t| x[(t, i)] * y[t]).sum();
        }
        for c in 0..k {
            let p = (c..k)
                .max_by(|&a, &b| aug[a][c].abs().total_cmp(&aug[b][c].abs()))
                .unwrap();
            aug.swap(c, p);
            let piv = aug[c][c];
            for v in aug[c].iter_mut() {
                *v /= piv;
            }
            for r in 0..k {
                if r != c {
                    let f = aug[r][c];
                    let row_c = aug[c].clone();
                    for (v, w) in aug[r].iter_mut().zip(row_c) {
                        *v -= f * w;
                    }
                }
            }
        }
        let beta: Vec<f64> = (0..k).map(|i| aug[i][2 * k]).collect();
        let rss: f64 = (0..n)
            .map(|t| {
                let fit: f64 = (0..k).map(|j| x[(t, j)] * beta[j]).sum();
                (y[t] - fit).powi(2)
            })
            .sum();
        let s2 = rss / (n - k) as f64;
        let se = (0..k).map(|i| (s2 * aug[i][k + i]).sqrt()).collect();
        (beta, se)
    }

    #[test]
    fn exact_line() {
        let t: Vec<f64> = (0..6).map(f64::from).collect();
        let y: Vec<f64> = t.iter().map(|v| 2.0 * v).collect();
        let x = Matrix::from_columns(&[vec![1.0; 6], t]);
        let fit = ols_fit(&x, &y).unwrap();
        assert!(fit.coefficients[0].abs() < 1e-12);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-12);
        assert!(fit.rss < 1e-20);
    }

    #[test]
    fn orthogonal_response() {
        let x = Matrix::from_columns(&[vec![1.0, 1.0, 1.0, 1.0], vec![1.0, -1.0, 1.0, -1.0]]);
        let y = [1.0, 1.0, -1.0, -1.0];
        let fit = ols_fit(&x, &y).unwrap();
        assert!(fit.coefficients.iter().all(|c| c.abs() < 1e-12));
        assert!((fit.rss - 4.0).abs() < 1e-12);
    }

    #[test]
    fn matches_normal_equations() {
        let mut rng = SynthRng::new(11);
        for _ in 0..20 {
            let rows: Vec<Vec<f64>> = (0..8).map(|_| vec![rng.normal(), rng.normal()]).collect();
            let y: Vec<f64> = (0..8).map(|_| rng.normal()).collect();
            let x = Matrix::from_rows(&rows);
            let fit = ols_fit(&x, &y).unwrap();
            let (beta, se) = normal_equations(&x, &y);
            for j in 0..2 {
                assert!((fit.coefficients[j] - beta[j]).abs() < 1e-10);
                assert!((fit.std_errors[j] - se[j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn errors() {
        let x = Matrix::from_columns(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        assert!(matches!(
            ols_fit(&x, &[1.0, 2.0]),
            Err(OlsError::InsufficientRows { .. })
        ));
        let x = Matrix::from_columns(&[vec![1.0; 4], vec![2.0; 4]]);
        assert!(matches!(
            ols_fit(&x, &[1.0, 2.0, 3.0, 4.0]),
            Err(OlsError::RankDeficient { column: 1 })
        ));
        let x = Matrix::from_columns(&[vec![1.0; 4], vec![0.0; 4]]);
        assert!(matches!(
            ols_fit(&x, &[1.0, 2.0, 3.0, 4.0]),
            Err(OlsError::RankDeficient { column: 1 })
        ));
        let x = Matrix::from_columns(&[vec![1.0; 4]]);
        assert!(matches!(
            ols_fit(&x, &[1.0, 2.0]),
            Err(OlsError::LengthMismatch { .. })
        ));
    }
}
