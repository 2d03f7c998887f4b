//! The typology pipeline: standardization, PCA, Ward clustering, cluster
//! profiles and per-cluster concentration ellipses.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{FeatureMatrix, VARIABLE_NAMES};

pub mod ari;
pub mod ellipse;
pub mod pca;
pub mod profiles;
pub mod stats;
pub mod ward;

pub use ari::adjusted_rand_index;
pub use ellipse::{chi_square_quantile_2dof, confidence_ellipse, Ellipse};
pub use pca::{pca, PcaResult};
pub use profiles::{cluster_profiles, ClusterProfile};
pub use stats::{describe, standardize, DescriptiveTable, Standardized, VariableSummary};
pub use ward::{cut, ward_cluster, Dendrogram, Merge};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("not enough data: need at least {needed} rows, got {got}")]
    NotEnoughData { needed: usize, got: usize },
    #[error("variable '{0}' is constant; cannot standardize a zero-variance column")]
    ZeroVariance(String),
    #[error("input contains non-finite values")]
    NonFiniteInput,
    #[error("rows have inconsistent dimensions")]
    DimensionMismatch,
    #[error("cannot cut {n} observations into {k} clusters")]
    InvalidK { k: usize, n: usize },
    #[error("cannot keep {requested} components out of {available}")]
    InvalidComponents { requested: usize, available: usize },
    #[error("length mismatch: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("cluster covariance has rank 0; no ellipse exists")]
    DegenerateCluster,
    #[error("confidence level {0} is outside (0, 1)")]
    InvalidLevel(f64),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl AnalysisError {
    /// Stable machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            AnalysisError::NotEnoughData { .. } => "NotEnoughData",
            AnalysisError::ZeroVariance(_) => "ZeroVariance",
            AnalysisError::NonFiniteInput => "NonFiniteInput",
            AnalysisError::DimensionMismatch => "DimensionMismatch",
            AnalysisError::InvalidK { .. } => "InvalidK",
            AnalysisError::InvalidComponents { .. } => "InvalidComponents",
            AnalysisError::LengthMismatch { .. } => "LengthMismatch",
            AnalysisError::EmptyCluster(_) => "EmptyCluster",
            AnalysisError::DegenerateCluster => "DegenerateCluster",
            AnalysisError::InvalidLevel(_) => "InvalidLevel",
            AnalysisError::Io(_) => "IoError",
            AnalysisError::Json(_) => "JsonError",
        }
    }
}

/// How many PCA score columns the clustering step sees.
///
/// Keeping all components is the default: an orthonormal change of basis
/// preserves Euclidean distances, so clustering all score columns is
/// equivalent to clustering the standardized variables directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ComponentSelection {
    #[default]
    All,
    First(usize),
}

/// Everything the typology pipeline produces for one corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypologyReport {
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub explained_ratio: Vec<f64>,
    /// `loadings[i][j]`: weight of variable `i` in component `j`.
    pub loadings: Vec<Vec<f64>>,
    /// One row of component coordinates per session.
    pub scores: Vec<Vec<f64>>,
    pub merges: Vec<Merge>,
    pub k: usize,
    /// Cluster id in `1..=k` per session, in input order.
    pub labels: Vec<usize>,
    pub profiles: Vec<ClusterProfile>,
    /// Per cluster, `None` when the cluster has fewer than 3 points or a
    /// rank-0 covariance.
    pub ellipses: Vec<Option<Ellipse>>,
    /// Probability mass of the concentration ellipses.
    pub level: f64,
    pub variables: Vec<String>,
    pub session_ids: Vec<String>,
}

/// Runs the full pipeline: standardize, PCA, Ward on the selected score
/// columns, cut into `k` clusters, profile each cluster and fit the
/// concentration ellipses on the first two components.
pub fn analyze(
    fm: &FeatureMatrix,
    k: usize,
    components: ComponentSelection,
    level: f64,
) -> Result<TypologyReport, AnalysisError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(AnalysisError::InvalidLevel(level));
    }
    let standardized = stats::standardize(fm)?;
    let pca_result = pca::pca(&standardized)?;

    let p = fm.n_variables();
    let n_components = match components {
        ComponentSelection::All => p,
        ComponentSelection::First(c) => {
            if c < 1 || c > p {
                return Err(AnalysisError::InvalidComponents {
                    requested: c,
                    available: p,
                });
            }
            c
        }
    };
    let points: Vec<Vec<f64>> = pca_result
        .scores
        .iter()
        .map(|row| row[..n_components].to_vec())
        .collect();

    let dendrogram = ward::ward_cluster(&points)?;
    let labels = ward::cut(&dendrogram, k)?;
    let profiles = profiles::cluster_profiles(fm, &labels)?;

    let mut ellipses = Vec::with_capacity(k);
    for cluster in 1..=k {
        let members: Vec<[f64; 2]> = pca_result
            .scores
            .iter()
            .zip(&labels)
            .filter(|(_, &l)| l == cluster)
            .map(|(row, _)| [row[0], row[1]])
            .collect();
        match ellipse::confidence_ellipse(&members, level) {
            Ok(e) => ellipses.push(Some(e)),
            Err(AnalysisError::NotEnoughData { .. }) | Err(AnalysisError::DegenerateCluster) => {
                ellipses.push(None)
            }
            Err(other) => return Err(other),
        }
    }

    Ok(TypologyReport {
        center: pca_result.center.clone(),
        scale: pca_result.scale.clone(),
        eigenvalues: pca_result.eigenvalues.clone(),
        explained_ratio: pca_result.explained_ratio.clone(),
        loadings: pca_result.loadings.clone(),
        scores: pca_result.scores.clone(),
        merges: dendrogram.merges,
        k,
        labels,
        profiles,
        ellipses,
        level,
        variables: VARIABLE_NAMES.iter().map(|s| s.to_string()).collect(),
        session_ids: fm.session_ids.clone(),
    })
}

/// Writes a report as pretty-printed JSON. Output bytes are a pure
/// function of the report contents.
pub fn save_report(report: &TypologyReport, path: impl AsRef<Path>) -> Result<(), AnalysisError> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, report)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Reads a report written by [`save_report`].
pub fn load_report(path: impl AsRef<Path>) -> Result<TypologyReport, AnalysisError> {
    let file = File::open(path)?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}
