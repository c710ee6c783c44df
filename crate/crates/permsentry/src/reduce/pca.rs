//! Principal component analysis via covariance eigendecomposition.
//!
//! The covariance matrix is symmetric, so a cyclic Jacobi sweep
//! diagonalizes it to machine precision. Components are ranked by
//! eigenvalue and the smallest prefix reaching the requested explained
//! variance is retained.

use ndarray::Array2;

use super::ReduceError;

#[derive(Debug, Clone, PartialEq)]
pub struct PcaTransform {
    /// Per-feature means of the fitting data.
    pub mean: Vec<f64>,
    /// Retained principal axes, one per row, orthonormal.
    pub components: Array2<f64>,
    /// Fraction of total variance along each retained axis,
    /// non-increasing.
    pub explained_variance_ratio: Vec<f64>,
}

impl PcaTransform {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.components.nrows()
    }
}

/// Fit PCA retaining the smallest k whose cumulative explained
/// variance reaches `variance_target`.
pub fn fit_pca(rows: &[Vec<f64>], variance_target: f64) -> Result<PcaTransform, ReduceError> {
    assert!(rows.len() >= 2, "PCA needs at least 2 rows");
    assert!(
        variance_target > 0.0 && variance_target <= 1.0,
        "variance target must be in (0, 1]"
    );
    let n = rows.len();
    let d = rows[0].len();

    let mut mean = vec![0.0; d];
    for row in rows {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }

    // covariance with the unbiased (n-1) denominator
    let mut cov = Array2::<f64>::zeros((d, d));
    for row in rows {
        let centered: Vec<f64> = row.iter().zip(&mean).map(|(v, m)| v - m).collect();
        for i in 0..d {
            if centered[i] == 0.0 {
                continue;
            }
            for j in i..d {
                cov[[i, j]] += centered[i] * centered[j];
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..d {
        for j in i..d {
            cov[[i, j]] /= denom;
            cov[[j, i]] = cov[[i, j]];
        }
    }

    let total_variance: f64 = (0..d).map(|i| cov[[i, i]]).sum();
    if total_variance <= f64::EPSILON {
        return Err(ReduceError::ZeroVariance);
    }

    let (eigenvalues, eigenvectors) = jacobi_eigen(&cov);

    // sort descending by eigenvalue
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));

    let mut components_rows: Vec<Vec<f64>> = Vec::new();
    let mut ratios = Vec::new();
    let mut cumulative = 0.0;
    for &idx in &order {
        let ratio = (eigenvalues[idx].max(0.0)) / total_variance;
        let mut axis: Vec<f64> = (0..d).map(|r| eigenvectors[[r, idx]]).collect();
        // sign convention: largest-magnitude entry positive
        let dominant =
            axis.iter()
                .cloned()
                .fold(0.0_f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        if dominant < 0.0 {
            for v in &mut axis {
                *v = -*v;
            }
        }
        components_rows.push(axis);
        ratios.push(ratio);
        cumulative += ratio;
        if cumulative >= variance_target {
            break;
        }
    }

    let k = components_rows.len();
    let mut components = Array2::<f64>::zeros((k, d));
    for (i, row) in components_rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            components[[i, j]] = *v;
        }
    }
    Ok(PcaTransform {
        mean,
        components,
        explained_variance_ratio: ratios,
    })
}

/// Project rows: (x - mean) · componentsᵀ.
pub fn pca_transform(t: &PcaTransform, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, ReduceError> {
    let d = t.input_dim();
    let k = t.output_dim();
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        if row.len() != d {
            return Err(ReduceError::DimensionMismatch {
                expected: d,
                got: row.len(),
            });
        }
        let centered: Vec<f64> = row.iter().zip(&t.mean).map(|(v, m)| v - m).collect();
        let mut reduced = vec![0.0; k];
        for (i, r) in reduced.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, c) in centered.iter().enumerate() {
                acc += c * t.components[[i, j]];
            }
            *r = acc;
        }
        out.push(reduced);
    }
    Ok(out)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns (eigenvalues, eigenvector columns).
pub fn jacobi_eigen(matrix: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let d = matrix.nrows();
    let mut a = matrix.clone();
    let mut v = Array2::<f64>::eye(d);

    let off_norm = |a: &Array2<f64>| -> f64 {
        let mut s = 0.0;
        for i in 0..d {
            for j in i + 1..d {
                s += a[[i, j]] * a[[i, j]];
            }
        }
        s.sqrt()
    };
    let scale: f64 = (0..d)
        .map(|i| matrix[[i, i]].abs())
        .sum::<f64>()
        .max(1e-300);

    for _sweep in 0..64 {
        if off_norm(&a) <= 1e-14 * scale {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[[p, q]];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigenvalues: Vec<f64> = (0..d).map(|i| a[[i, i]]).collect();
    (eigenvalues, v)
}
