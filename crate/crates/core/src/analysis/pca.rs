//! Principal component analysis of standardized variables via
//! eigendecomposition of the correlation matrix.

use serde::Serialize;

use super::stats::Standardized;
use super::AnalysisError;

/// Result of a correlation-matrix PCA.
///
/// `loadings[i][j]` is the weight of variable `i` in component `j`; the
/// columns form an orthonormal basis. Components are ordered by
/// descending eigenvalue, and each loading column is oriented so that its
/// largest-magnitude entry is positive (ties resolved toward the lowest
/// variable index), which pins the otherwise arbitrary eigenvector signs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaResult {
    /// Per-variable means removed by standardization.
    pub center: Vec<f64>,
    /// Per-variable sample standard deviations divided out.
    pub scale: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// `eigenvalue / p`: the share of total variance per component.
    pub explained_ratio: Vec<f64>,
    pub loadings: Vec<Vec<f64>>,
    /// Session coordinates in component space, one row per session.
    pub scores: Vec<Vec<f64>>,
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns the
/// eigenvalues and the matching eigenvector columns, unsorted.
#[allow(clippy::needless_range_loop)] // row/column index juggling reads clearer here
pub(crate) fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0_f64; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    if n < 2 {
        return (a.iter().enumerate().map(|(i, r)| r[i]).collect(), v);
    }

    let fro_sq: f64 = a
        .iter()
        .flat_map(|row| row.iter().map(|x| x * x))
        .sum::<f64>()
        .max(1.0);
    let tol = f64::EPSILON * f64::EPSILON * fro_sq;

    for _sweep in 0..100 {
        let off_sq: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        if off_sq <= tol {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                let app = a[p][p];
                let aqq = a[q][q];
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[r][p];
                        let arq = a[r][q];
                        a[r][p] = c * arp - s * arq;
                        a[p][r] = a[r][p];
                        a[r][q] = s * arp + c * arq;
                        a[q][r] = a[r][q];
                    }
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let eigenvalues = (0..n).map(|i| a[i][i]).collect();
    (eigenvalues, v)
}

/// PCA of an already-standardized matrix.
///
/// The correlation matrix `R = Z'Z / (n-1)` is diagonalized; scores are
/// `Z` expressed in the eigenvector basis. Each component explains
/// `eigenvalue / p` of the total variance.
#[allow(clippy::needless_range_loop)]
pub fn pca(standardized: &Standardized) -> Result<PcaResult, AnalysisError> {
    let z = &standardized.z;
    let n = z.len();
    if n < 2 {
        return Err(AnalysisError::NotEnoughData { needed: 2, got: n });
    }
    let p = z[0].len();
    if z.iter().any(|row| row.len() != p) {
        return Err(AnalysisError::DimensionMismatch);
    }

    let mut correlation = vec![vec![0.0_f64; p]; p];
    for row in z {
        for i in 0..p {
            for j in i..p {
                correlation[i][j] += row[i] * row[j];
            }
        }
    }
    let denom = (n - 1) as f64;
    for i in 0..p {
        for j in i..p {
            correlation[i][j] /= denom;
            correlation[j][i] = correlation[i][j];
        }
    }

    let (raw_values, raw_vectors) = jacobi_eigen(correlation);

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| raw_values[j].total_cmp(&raw_values[i]));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| raw_values[i].max(0.0)).collect();
    let mut loadings = vec![vec![0.0_f64; p]; p];
    for (col, &src) in order.iter().enumerate() {
        // orient the column: largest-magnitude entry positive
        let mut pivot = 0;
        for i in 1..p {
            if raw_vectors[i][src].abs() > raw_vectors[pivot][src].abs() {
                pivot = i;
            }
        }
        let flip = raw_vectors[pivot][src] < 0.0;
        for i in 0..p {
            let value = raw_vectors[i][src];
            loadings[i][col] = if flip { -value } else { value };
        }
    }

    let scores = z
        .iter()
        .map(|row| {
            (0..p)
                .map(|c| (0..p).map(|j| row[j] * loadings[j][c]).sum())
                .collect()
        })
        .collect();

    let explained_ratio = eigenvalues.iter().map(|&l| l / p as f64).collect();

    Ok(PcaResult {
        center: standardized.center.clone(),
        scale: standardized.scale.clone(),
        eigenvalues,
        explained_ratio,
        loadings,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standardized(z: Vec<Vec<f64>>) -> Standardized {
        let p = z[0].len();
        Standardized {
            z,
            center: vec![0.0; p],
            scale: vec![1.0; p],
        }
    }

    /// z-scores a raw column: helper for building exact test inputs.
    fn zscore(raw: &[f64]) -> Vec<f64> {
        let mean = super::super::stats::mean_of(raw);
        let sd = super::super::stats::sample_sd(raw, mean);
        raw.iter().map(|v| (v - mean) / sd).collect()
    }

    #[test]
    fn two_identical_columns_are_rank_one() {
        let col = zscore(&[1.0, 2.0, 3.0, 5.0, 8.0]);
        let z: Vec<Vec<f64>> = col.iter().map(|&v| vec![v, v]).collect();
        let result = pca(&standardized(z)).unwrap();

        assert!((result.explained_ratio[0] - 1.0).abs() < 1e-9);
        assert!(result.explained_ratio[1].abs() < 1e-9);
        let expected = 1.0 / 2.0_f64.sqrt();
        assert!((result.loadings[0][0] - expected).abs() < 1e-9);
        assert!((result.loadings[1][0] - expected).abs() < 1e-9);
    }

    #[test]
    fn independent_columns_share_variance_evenly() {
        // 8 independent uniform columns, 10k rows, fixed seed
        let mut state = 0x1234_5678_9abc_def0_u64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let n = 10_000;
        let mut columns: Vec<Vec<f64>> = Vec::new();
        for _ in 0..8 {
            columns.push((0..n).map(|_| next()).collect());
        }
        let z_cols: Vec<Vec<f64>> = columns.iter().map(|c| zscore(c)).collect();
        let z: Vec<Vec<f64>> = (0..n)
            .map(|i| z_cols.iter().map(|c| c[i]).collect())
            .collect();

        let result = pca(&standardized(z)).unwrap();
        for (i, ratio) in result.explained_ratio.iter().enumerate() {
            assert!(
                (ratio - 0.125).abs() < 0.02,
                "component {i} explains {ratio}"
            );
        }
    }

    #[test]
    fn ratios_descend_and_sum_to_one() {
        let z = sample_z();
        let result = pca(&standardized(z)).unwrap();
        let total: f64 = result.explained_ratio.iter().sum();
        assert!((total - 1.0).abs() < 1e-9, "sum = {total}");
        for pair in result.explained_ratio.windows(2) {
            assert!(pair[0] >= pair[1]);
        }
        for value in &result.eigenvalues {
            assert!(*value >= 0.0);
        }
    }

    #[test]
    fn loadings_are_orthonormal() {
        let z = sample_z();
        let result = pca(&standardized(z)).unwrap();
        let p = result.loadings.len();
        for a in 0..p {
            for b in 0..p {
                let dot: f64 = (0..p)
                    .map(|i| result.loadings[i][a] * result.loadings[i][b])
                    .sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-8, "col {a} . col {b} = {dot}");
            }
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn loadings_reconstruct_the_correlation_matrix() {
        let z = sample_z();
        let n = z.len();
        let p = z[0].len();
        let mut r = vec![vec![0.0_f64; p]; p];
        for row in &z {
            for i in 0..p {
                for j in 0..p {
                    r[i][j] += row[i] * row[j] / (n as f64 - 1.0);
                }
            }
        }
        let result = pca(&standardized(z)).unwrap();
        for i in 0..p {
            for j in 0..p {
                let rebuilt: f64 = (0..p)
                    .map(|c| result.loadings[i][c] * result.eigenvalues[c] * result.loadings[j][c])
                    .sum();
                assert!(
                    (rebuilt - r[i][j]).abs() < 1e-8,
                    "R[{i}][{j}]: {rebuilt} vs {}",
                    r[i][j]
                );
            }
        }
    }

    #[test]
    fn score_covariance_is_the_eigenvalue_diagonal() {
        let z = sample_z();
        let result = pca(&standardized(z)).unwrap();
        let n = result.scores.len();
        let p = result.scores[0].len();
        for a in 0..p {
            for b in 0..p {
                let cov: f64 =
                    result.scores.iter().map(|row| row[a] * row[b]).sum::<f64>() / (n as f64 - 1.0);
                let expected = if a == b { result.eigenvalues[a] } else { 0.0 };
                assert!((cov - expected).abs() < 1e-8, "cov[{a}][{b}] = {cov}");
            }
        }
    }

    #[test]
    fn sign_convention_fixes_the_largest_entry_positive() {
        let z = sample_z();
        let result = pca(&standardized(z)).unwrap();
        let p = result.loadings.len();
        for c in 0..p {
            let mut pivot = 0;
            for i in 1..p {
                if result.loadings[i][c].abs() > result.loadings[pivot][c].abs() {
                    pivot = i;
                }
            }
            assert!(
                result.loadings[pivot][c] >= 0.0,
                "component {c} pivot entry negative"
            );
        }
    }

    /// A fixed 12x4 standardized matrix with generic correlation structure.
    fn sample_z() -> Vec<Vec<f64>> {
        let raw: Vec<[f64; 4]> = vec![
            [1.0, 2.0, 0.5, 9.0],
            [2.0, 1.5, 1.0, 7.5],
            [3.0, 4.0, 0.0, 6.0],
            [4.0, 3.5, 2.5, 5.5],
            [5.0, 6.5, 1.5, 5.0],
            [6.0, 5.0, 3.5, 4.0],
            [7.0, 8.5, 2.0, 3.5],
            [8.0, 7.0, 4.0, 3.0],
            [9.0, 10.5, 3.0, 2.0],
            [10.0, 9.0, 5.5, 1.5],
            [11.0, 12.0, 4.5, 1.0],
            [12.0, 11.0, 6.0, 0.5],
        ];
        let columns: Vec<Vec<f64>> = (0..4).map(|j| raw.iter().map(|r| r[j]).collect()).collect();
        let z_cols: Vec<Vec<f64>> = columns.iter().map(|c| zscore(c)).collect();
        (0..raw.len())
            .map(|i| z_cols.iter().map(|c| c[i]).collect())
            .collect()
    }
}
