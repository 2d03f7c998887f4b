//! Descriptive statistics and z-score standardization.

use serde::Serialize;

use crate::features::{FeatureMatrix, VARIABLE_NAMES};

use super::AnalysisError;

/// Five-number description of one variable. The standard deviation is the
/// sample (n-1) one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableSummary {
    pub variable: String,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
}

/// Per-variable summaries in canonical variable order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescriptiveTable {
    pub n_sessions: usize,
    pub variables: Vec<VariableSummary>,
}

pub(crate) fn mean_of(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample (n-1) standard deviation.
pub(crate) fn sample_sd(values: &[f64], mean: f64) -> f64 {
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (values.len() as f64 - 1.0)).sqrt()
}

fn median_of(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

/// Min/max/mean/sample-sd/median for each variable.
pub fn describe(fm: &FeatureMatrix) -> Result<DescriptiveTable, AnalysisError> {
    if fm.n_rows() < 2 {
        return Err(AnalysisError::NotEnoughData {
            needed: 2,
            got: fm.n_rows(),
        });
    }
    let variables = VARIABLE_NAMES
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let column = fm.column(j);
            let mean = mean_of(&column);
            VariableSummary {
                variable: name.to_string(),
                min: column.iter().copied().fold(f64::INFINITY, f64::min),
                max: column.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean,
                sd: sample_sd(&column, mean),
                median: median_of(&column),
            }
        })
        .collect();
    Ok(DescriptiveTable {
        n_sessions: fm.n_rows(),
        variables,
    })
}

/// A centered-and-reduced feature matrix together with the parameters that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardized {
    /// One row per session; each column has mean 0 and sample sd 1.
    pub z: Vec<Vec<f64>>,
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

/// Centers each variable on its mean and divides by its sample standard
/// deviation. A constant variable makes standardization impossible and is
/// reported as such.
pub fn standardize(fm: &FeatureMatrix) -> Result<Standardized, AnalysisError> {
    if fm.n_rows() < 2 {
        return Err(AnalysisError::NotEnoughData {
            needed: 2,
            got: fm.n_rows(),
        });
    }
    let p = fm.n_variables();
    let mut center = Vec::with_capacity(p);
    let mut scale = Vec::with_capacity(p);
    for (j, name) in VARIABLE_NAMES.iter().enumerate() {
        let column = fm.column(j);
        let mean = mean_of(&column);
        let sd = sample_sd(&column, mean);
        if sd == 0.0 {
            return Err(AnalysisError::ZeroVariance(name.to_string()));
        }
        center.push(mean);
        scale.push(sd);
    }
    let z = fm
        .rows
        .iter()
        .map(|row| {
            (0..p)
                .map(|j| (row[j] - center[j]) / scale[j])
                .collect::<Vec<f64>>()
        })
        .collect();
    Ok(Standardized { z, center, scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fm_from_column(values: &[f64]) -> FeatureMatrix {
        FeatureMatrix {
            session_ids: (0..values.len()).map(|i| format!("s{i}")).collect(),
            rows: values
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let mut row = [0.0; 8];
                    row[0] = v;
                    row[1] = i as f64; // keep the other columns non-constant
                    for (j, slot) in row.iter_mut().enumerate().skip(2) {
                        *slot = (i as f64 + 1.0) * (j as f64 + 1.0);
                    }
                    row
                })
                .collect(),
        }
    }

    #[test]
    fn describe_matches_hand_arithmetic() {
        let fm = fm_from_column(&[1.0, 2.0, 3.0, 4.0]);
        let table = describe(&fm).unwrap();
        let nb_req = &table.variables[0];
        assert_eq!(nb_req.variable, "NbReq");
        assert_eq!(nb_req.min, 1.0);
        assert_eq!(nb_req.max, 4.0);
        assert_eq!(nb_req.mean, 2.5);
        assert_eq!(nb_req.median, 2.5);
        assert!((nb_req.sd - (5.0_f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((nb_req.sd - 1.290994).abs() < 1e-6);
    }

    #[test]
    fn describe_handles_constant_and_odd_columns() {
        let fm = fm_from_column(&[5.0, 5.0, 5.0]);
        let table = describe(&fm).unwrap();
        let nb_req = &table.variables[0];
        assert_eq!(nb_req.sd, 0.0);
        assert_eq!(nb_req.min, 5.0);
        assert_eq!(nb_req.max, 5.0);
        assert_eq!(nb_req.mean, 5.0);
        assert_eq!(nb_req.median, 5.0);

        let odd = fm_from_column(&[3.0, 1.0, 2.0]);
        assert_eq!(describe(&odd).unwrap().variables[0].median, 2.0);
    }

    #[test]
    fn describe_needs_two_rows() {
        let fm = fm_from_column(&[1.0]);
        assert!(matches!(
            describe(&fm),
            Err(AnalysisError::NotEnoughData { .. })
        ));
    }

    #[test]
    fn standardize_matches_hand_computation() {
        let fm = fm_from_column(&[1.0, 2.0, 3.0]);
        let std = standardize(&fm).unwrap();
        let col: Vec<f64> = std.z.iter().map(|r| r[0]).collect();
        assert_eq!(col, [-1.0, 0.0, 1.0]);
        assert_eq!(std.center[0], 2.0);
        assert_eq!(std.scale[0], 1.0);
    }

    #[test]
    fn standardized_columns_have_zero_mean_unit_sd() {
        let fm = fm_from_column(&[2.0, 7.0, 11.0, 13.0, 21.0]);
        let std = standardize(&fm).unwrap();
        for j in 0..8 {
            let col: Vec<f64> = std.z.iter().map(|r| r[j]).collect();
            let mean = mean_of(&col);
            let sd = sample_sd(&col, mean);
            assert!(mean.abs() < 1e-10, "column {j} mean {mean}");
            assert!((sd - 1.0).abs() < 1e-10, "column {j} sd {sd}");
        }
    }

    #[test]
    fn standardize_is_idempotent_within_tolerance() {
        let fm = fm_from_column(&[2.0, 7.0, 11.0, 13.0]);
        let once = standardize(&fm).unwrap();
        let as_matrix = FeatureMatrix {
            session_ids: fm.session_ids.clone(),
            rows: once
                .z
                .iter()
                .map(|r| {
                    let mut row = [0.0; 8];
                    row.copy_from_slice(r);
                    row
                })
                .collect(),
        };
        let twice = standardize(&as_matrix).unwrap();
        for (a, b) in once.z.iter().flatten().zip(twice.z.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_column_raises_zero_variance() {
        let mut fm = fm_from_column(&[1.0, 2.0, 3.0]);
        for row in &mut fm.rows {
            row[3] = 42.0;
        }
        assert!(matches!(
            standardize(&fm),
            Err(AnalysisError::ZeroVariance(v)) if v == "PmoyReq"
        ));
    }
}
