//! Agglomerative clustering under the Ward criterion, and dendrogram cuts.
//!
//! Each merge joins the pair of clusters whose fusion least increases the
//! total within-cluster sum of squared Euclidean deviations (ESS); the
//! merge height is exactly that ESS increase, so heights are directly
//! checkable against a recompute-from-points oracle. Pairwise merge costs
//! start at `||x_a - x_b||^2 / 2` for singletons and are maintained with
//! the Lance-Williams update, which is algebraically the same quantity.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// One agglomerative merge. Nodes `0..n` are the input points; merge `i`
/// creates node `n + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    /// Smaller node id of the merged pair.
    pub left: usize,
    /// Larger node id of the merged pair.
    pub right: usize,
    /// ESS increase caused by this merge.
    pub height: f64,
    /// Number of points in the new cluster.
    pub size: usize,
}

/// A stepwise dendrogram: `n_leaves - 1` merges with non-decreasing
/// heights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dendrogram {
    pub n_leaves: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// Total ESS of the one-cluster partition (sum of merge heights).
    pub fn total_ess(&self) -> f64 {
        self.merges.iter().map(|m| m.height).sum()
    }
}

/// Clusters points agglomeratively under the Ward criterion.
///
/// Ties in the minimal merge cost are broken toward the lowest `(left,
/// right)` node-index pair, making the merge sequence reproducible across
/// runs and platforms.
pub fn ward_cluster(points: &[Vec<f64>]) -> Result<Dendrogram, AnalysisError> {
    let n = points.len();
    if n < 2 {
        return Err(AnalysisError::NotEnoughData { needed: 2, got: n });
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(AnalysisError::DimensionMismatch);
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFiniteInput);
    }

    // singleton merge costs: half the squared Euclidean distance
    let mut costs: HashMap<(usize, usize), f64> = HashMap::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let d_sq: f64 = points[a]
                .iter()
                .zip(&points[b])
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            costs.insert((a, b), 0.5 * d_sq);
        }
    }

    // active node ids stay sorted: merged pairs are removed and the new
    // node id (always the largest so far) is pushed at the end
    let mut active: Vec<usize> = (0..n).collect();
    let mut sizes: HashMap<usize, usize> = (0..n).map(|i| (i, 1)).collect();
    let mut merges = Vec::with_capacity(n - 1);

    while active.len() > 1 {
        let mut best: Option<((usize, usize), f64)> = None;
        for (ai, &u) in active.iter().enumerate() {
            for &v in &active[ai + 1..] {
                let cost = costs[&(u, v)];
                // scanning in lexicographic (u, v) order makes strict
                // comparison implement the tie-break
                if best.is_none_or(|(_, c)| cost < c) {
                    best = Some(((u, v), cost));
                }
            }
        }
        let ((u, v), height) = best.expect("at least one active pair");

        let new_id = n + merges.len();
        let size_u = sizes[&u];
        let size_v = sizes[&v];
        let merged_size = size_u + size_v;

        active.retain(|&x| x != u && x != v);
        for &k in &active {
            let size_k = sizes[&k] as f64;
            let d_uk = costs.remove(&key(u, k)).expect("cost (u,k)");
            let d_vk = costs.remove(&key(v, k)).expect("cost (v,k)");
            let updated = ((size_u as f64 + size_k) * d_uk + (size_v as f64 + size_k) * d_vk
                - size_k * height)
                / (merged_size as f64 + size_k);
            costs.insert((k, new_id), updated);
        }
        costs.remove(&(u, v));
        active.push(new_id);
        sizes.insert(new_id, merged_size);

        merges.push(Merge {
            left: u,
            right: v,
            height,
            size: merged_size,
        });
    }

    Ok(Dendrogram {
        n_leaves: n,
        merges,
    })
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Cuts a dendrogram into `k` clusters by undoing the last `k - 1` merges.
///
/// Returns one label per leaf in `1..=k`; clusters are numbered by their
/// smallest member index, so the labeling is canonical.
pub fn cut(dendrogram: &Dendrogram, k: usize) -> Result<Vec<usize>, AnalysisError> {
    let n = dendrogram.n_leaves;
    if k < 1 || k > n {
        return Err(AnalysisError::InvalidK { k, n });
    }

    // apply the first n - k merges through a parent forest
    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    for (i, merge) in dendrogram.merges.iter().take(n - k).enumerate() {
        let node = n + i;
        parent[merge.left] = node;
        parent[merge.right] = node;
    }
    let root_of = |mut x: usize| {
        while parent[x] != x {
            x = parent[x];
        }
        x
    };

    let mut cluster_of_root: HashMap<usize, usize> = HashMap::new();
    let mut labels = Vec::with_capacity(n);
    for leaf in 0..n {
        let root = root_of(leaf);
        let next = cluster_of_root.len() + 1;
        let label = *cluster_of_root.entry(root).or_insert(next);
        labels.push(label);
    }
    debug_assert_eq!(cluster_of_root.len(), k);
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn points_1d(values: &[f64]) -> Vec<Vec<f64>> {
        values.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn two_points_merge_at_their_ess() {
        let d = ward_cluster(&points_1d(&[0.0, 2.0])).unwrap();
        assert_eq!(d.merges.len(), 1);
        let m = d.merges[0];
        assert_eq!((m.left, m.right, m.size), (0, 1, 2));
        assert!((m.height - 2.0).abs() < 1e-12);
    }

    #[test]
    fn three_points_follow_the_hand_computation() {
        let d = ward_cluster(&points_1d(&[0.0, 1.0, 5.0])).unwrap();
        assert_eq!(d.merges.len(), 2);
        assert_eq!((d.merges[0].left, d.merges[0].right), (0, 1));
        assert!((d.merges[0].height - 0.5).abs() < 1e-12);
        assert_eq!((d.merges[1].left, d.merges[1].right), (2, 3));
        assert!((d.merges[1].height - 13.5).abs() < 1e-12);
        assert!((d.total_ess() - 14.0).abs() < 1e-12);
    }

    #[test]
    fn identical_points_merge_at_zero() {
        let d = ward_cluster(&points_1d(&[3.0; 6])).unwrap();
        for m in &d.merges {
            assert_eq!(m.height, 0.0);
        }
        // ties resolve toward the lowest pair first
        assert_eq!((d.merges[0].left, d.merges[0].right), (0, 1));
        assert_eq!((d.merges[1].left, d.merges[1].right), (2, 3));
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(matches!(
            ward_cluster(&points_1d(&[1.0])),
            Err(AnalysisError::NotEnoughData { .. })
        ));
        assert!(matches!(
            ward_cluster(&[vec![0.0], vec![f64::NAN]]),
            Err(AnalysisError::NonFiniteInput)
        ));
        assert!(matches!(
            ward_cluster(&[vec![0.0], vec![0.0, 1.0]]),
            Err(AnalysisError::DimensionMismatch)
        ));
    }

    #[test]
    fn cut_extremes_and_hand_case() {
        let d = ward_cluster(&points_1d(&[0.0, 1.0, 5.0])).unwrap();
        assert_eq!(cut(&d, 1).unwrap(), [1, 1, 1]);
        assert_eq!(cut(&d, 3).unwrap(), [1, 2, 3]);
        assert_eq!(cut(&d, 2).unwrap(), [1, 1, 2]);
        assert!(matches!(cut(&d, 0), Err(AnalysisError::InvalidK { .. })));
        assert!(matches!(cut(&d, 4), Err(AnalysisError::InvalidK { .. })));
    }

    // --- oracle: recompute ESS increases from raw points at every step ---

    fn ess(points: &[Vec<f64>], members: &[usize]) -> f64 {
        let dim = points[0].len();
        let mut centroid = vec![0.0_f64; dim];
        for &m in members {
            for (c, x) in centroid.iter_mut().zip(&points[m]) {
                *c += x;
            }
        }
        for c in &mut centroid {
            *c /= members.len() as f64;
        }
        members
            .iter()
            .map(|&m| {
                points[m]
                    .iter()
                    .zip(&centroid)
                    .map(|(x, c)| (x - c) * (x - c))
                    .sum::<f64>()
            })
            .sum()
    }

    /// Naive Ward: clusters as explicit member lists, merge costs
    /// recomputed from the raw points at every step.
    fn oracle_ward(points: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
        let n = points.len();
        let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
        let mut merges = Vec::new();
        let mut next_id = n;
        while clusters.len() > 1 {
            let mut best: Option<(usize, usize, f64)> = None;
            for i in 0..clusters.len() {
                for j in (i + 1)..clusters.len() {
                    let (id_a, members_a) = &clusters[i];
                    let (id_b, members_b) = &clusters[j];
                    let mut union = members_a.clone();
                    union.extend(members_b);
                    let delta =
                        ess(points, &union) - ess(points, members_a) - ess(points, members_b);
                    let (lo, hi) = if id_a < id_b {
                        (*id_a, *id_b)
                    } else {
                        (*id_b, *id_a)
                    };
                    let better = match best {
                        None => true,
                        Some((bl, bh, bc)) => delta < bc || (delta == bc && (lo, hi) < (bl, bh)),
                    };
                    if better {
                        best = Some((lo, hi, delta));
                    }
                }
            }
            let (lo, hi, delta) = best.unwrap();
            let pos_a = clusters.iter().position(|(id, _)| *id == lo).unwrap();
            let pos_b = clusters.iter().position(|(id, _)| *id == hi).unwrap();
            let mut merged = clusters[pos_a].1.clone();
            merged.extend(clusters[pos_b].1.clone());
            clusters.retain(|(id, _)| *id != lo && *id != hi);
            clusters.push((next_id, merged));
            merges.push((lo, hi, delta));
            next_id += 1;
        }
        merges
    }

    struct XorShift(u64);

    impl XorShift {
        fn next_f64(&mut self) -> f64 {
            self.0 ^= self.0 << 13;
            self.0 ^= self.0 >> 7;
            self.0 ^= self.0 << 17;
            (self.0 >> 11) as f64 / (1u64 << 53) as f64
        }
    }

    #[test]
    fn merge_sequence_matches_the_recompute_oracle() {
        let mut rng = XorShift(0xda7a_5eed);
        for trial in 0..100 {
            let n = 3 + (trial % 10); // 3..=12
            let d = 1 + (trial % 4); // 1..=4
            let points: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..d).map(|_| rng.next_f64() * 10.0).collect())
                .collect();
            let fast = ward_cluster(&points).unwrap();
            let slow = oracle_ward(&points);
            for (m, (lo, hi, delta)) in fast.merges.iter().zip(&slow) {
                assert_eq!((m.left, m.right), (*lo, *hi), "trial {trial}");
                let tol = 1e-9 * delta.abs().max(1.0);
                assert!(
                    (m.height - delta).abs() <= tol,
                    "trial {trial}: height {} vs oracle {delta}",
                    m.height
                );
            }
        }
    }

    #[test]
    fn heights_are_non_decreasing() {
        let mut rng = XorShift(0x0c0ffee);
        for trial in 0..100 {
            let n = 2 + (trial % 49); // 2..=50
            let points: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..8).map(|_| rng.next_f64() * 4.0).collect())
                .collect();
            let d = ward_cluster(&points).unwrap();
            for pair in d.merges.windows(2) {
                assert!(
                    pair[1].height >= pair[0].height,
                    "trial {trial}: {} then {}",
                    pair[0].height,
                    pair[1].height
                );
            }
        }
    }
}
