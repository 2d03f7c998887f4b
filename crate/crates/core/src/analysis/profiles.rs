//! Per-cluster summaries: sizes, means and standardized gaps.

use serde::{Deserialize, Serialize};

use crate::features::{FeatureMatrix, VARIABLE_NAMES};

use super::stats::{mean_of, sample_sd};
use super::AnalysisError;

/// How one cluster deviates from the corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    /// Cluster id in `1..=k`.
    pub cluster: usize,
    pub size: usize,
    /// Per-variable cluster means, in canonical variable order.
    pub means: Vec<f64>,
    /// `(cluster mean - global mean) / global sd` per variable; 0 when the
    /// global sd is 0.
    pub gaps: Vec<f64>,
    /// Variable names ranked by decreasing |gap|: the cluster's
    /// distinguishing variables first.
    pub ranked_variables: Vec<String>,
}

/// Profiles every cluster of a labeling against the whole feature matrix.
///
/// `labels` must assign one cluster id in `1..=k` per session, with every
/// cluster non-empty (the shape produced by a dendrogram cut).
pub fn cluster_profiles(
    fm: &FeatureMatrix,
    labels: &[usize],
) -> Result<Vec<ClusterProfile>, AnalysisError> {
    if labels.len() != fm.n_rows() {
        return Err(AnalysisError::LengthMismatch {
            a: labels.len(),
            b: fm.n_rows(),
        });
    }
    let k = labels.iter().copied().max().unwrap_or(0);
    if k == 0 {
        return Err(AnalysisError::EmptyCluster(1));
    }

    let p = fm.n_variables();
    let global_means: Vec<f64> = (0..p).map(|j| mean_of(&fm.column(j))).collect();
    let global_sds: Vec<f64> = (0..p)
        .map(|j| sample_sd(&fm.column(j), global_means[j]))
        .collect();

    let mut profiles = Vec::with_capacity(k);
    for cluster in 1..=k {
        let members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == cluster).then_some(i))
            .collect();
        if members.is_empty() {
            return Err(AnalysisError::EmptyCluster(cluster));
        }
        let means: Vec<f64> = (0..p)
            .map(|j| members.iter().map(|&i| fm.rows[i][j]).sum::<f64>() / members.len() as f64)
            .collect();
        let gaps: Vec<f64> = (0..p)
            .map(|j| {
                if global_sds[j] == 0.0 {
                    0.0
                } else {
                    (means[j] - global_means[j]) / global_sds[j]
                }
            })
            .collect();
        let mut ranked: Vec<usize> = (0..p).collect();
        // stable sort: ties keep canonical variable order
        ranked.sort_by(|&a, &b| gaps[b].abs().total_cmp(&gaps[a].abs()));
        profiles.push(ClusterProfile {
            cluster,
            size: members.len(),
            means,
            gaps,
            ranked_variables: ranked
                .into_iter()
                .map(|j| VARIABLE_NAMES[j].to_string())
                .collect(),
        });
    }
    Ok(profiles)
}
