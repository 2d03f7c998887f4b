//! Adjusted Rand index between two partitions.

use std::collections::HashMap;

use super::AnalysisError;

fn comb2(n: u64) -> u128 {
    (n as u128) * (n as u128 - 1) / 2
}

/// Chance-corrected similarity of two labelings of the same items.
///
/// 1 means the partitions are identical up to relabeling; independent
/// random partitions score near 0. Cluster ids are opaque: any bijective
/// relabeling of either side leaves the index unchanged. Both trivial
/// cases (everything in one cluster, or all singletons, on both sides)
/// make the correction degenerate and score 1 by convention.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64, AnalysisError> {
    if a.len() != b.len() {
        return Err(AnalysisError::LengthMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(AnalysisError::NotEnoughData {
            needed: 2,
            got: a.len(),
        });
    }

    let mut cells: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&la, &lb) in a.iter().zip(b) {
        *cells.entry((la, lb)).or_insert(0) += 1;
        *rows.entry(la).or_insert(0) += 1;
        *cols.entry(lb).or_insert(0) += 1;
    }

    // integer pair counts, so accumulation order cannot perturb the result
    let index: u128 = cells.values().map(|&n| comb2(n)).sum();
    let sum_rows: u128 = rows.values().map(|&n| comb2(n)).sum();
    let sum_cols: u128 = cols.values().map(|&n| comb2(n)).sum();
    let total = comb2(a.len() as u64);

    let expected = sum_rows as f64 * sum_cols as f64 / total as f64;
    let max_index = (sum_rows as f64 + sum_cols as f64) / 2.0;
    let denom = max_index - expected;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((index as f64 - expected) / denom)
}
