//! Session-level behavioral variables.
//!
//! Eight variables describe one session: query count (`NbReq`), mean query
//! length in tokens (`LongReq`), distinct propositions used (`NbPSession`),
//! mean propositions per query (`PmoyReq`), the intermittence and
//! persistence flags, click count (`NbClics`) and duration in seconds
//! (`Duree`). The catch-all column counts as a proposition throughout and
//! participates in the flags by default.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use thiserror::Error;

use crate::annotation::AnnotationMatrix;
use crate::corpus::{PropositionScheme, Session};
use crate::text::normalize_tokens;

/// Variable names in canonical column order.
pub const VARIABLE_NAMES: [&str; 8] = [
    "NbReq",
    "LongReq",
    "NbPSession",
    "PmoyReq",
    "IntermittenceP",
    "PersistanceP",
    "NbClics",
    "Duree",
];

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("annotation matrix '{0}' has no rows")]
    EmptyMatrix(String),
    #[error("session '{0}' has no query event")]
    NoQueries(String),
    #[error("session '{0}' has no events")]
    NoEvents(String),
    #[error("session '{session_id}' has {queries} queries but {rows} annotation rows")]
    RowCountMismatch {
        session_id: String,
        rows: usize,
        queries: usize,
    },
    #[error("inconsistent ids: {0}")]
    IdMismatch(String),
    #[error("annotation columns do not match the scheme: {0}")]
    SchemeMismatch(String),
    #[error("session '{0}' has no annotation matrix")]
    MissingAnnotation(String),
    #[error("session '{0}' has more than one annotation matrix")]
    DuplicateAnnotation(String),
    #[error("malformed feature file: {0}")]
    MalformedFeatures(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl FeatureError {
    /// Stable machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            FeatureError::EmptyMatrix(_) => "EmptyMatrix",
            FeatureError::NoQueries(_) => "NoQueries",
            FeatureError::NoEvents(_) => "NoEvents",
            FeatureError::RowCountMismatch { .. } => "RowCountMismatch",
            FeatureError::IdMismatch(_) => "IdMismatch",
            FeatureError::SchemeMismatch(_) => "SchemeMismatch",
            FeatureError::MissingAnnotation(_) => "MissingAnnotation",
            FeatureError::DuplicateAnnotation(_) => "DuplicateAnnotation",
            FeatureError::MalformedFeatures(_) => "MalformedFeatures",
            FeatureError::Io(_) => "IoError",
            FeatureError::Csv(_) => "CsvError",
        }
    }
}

/// The eight behavioral variables of one session.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub session_id: String,
    pub nb_req: usize,
    pub long_req: f64,
    pub nb_p_session: usize,
    pub pmoy_req: f64,
    pub intermittence: bool,
    pub persistence: bool,
    pub nb_clics: usize,
    pub duree: f64,
}

impl FeatureVector {
    /// The variables as reals, in [`VARIABLE_NAMES`] order.
    pub fn values(&self) -> [f64; 8] {
        [
            self.nb_req as f64,
            self.long_req,
            self.nb_p_session as f64,
            self.pmoy_req,
            f64::from(self.intermittence),
            f64::from(self.persistence),
            self.nb_clics as f64,
            self.duree,
        ]
    }
}

/// Feature vectors for a whole corpus, in input session order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub session_ids: Vec<String>,
    /// One row per session, columns in [`VARIABLE_NAMES`] order.
    pub rows: Vec<[f64; 8]>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_variables(&self) -> usize {
        VARIABLE_NAMES.len()
    }

    pub fn column(&self, var: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[var]).collect()
    }
}

/// Which columns the run/gap detectors look at.
#[derive(Debug, Clone, Copy)]
pub struct FlagOptions {
    /// Include the catch-all column in persistence/intermittence detection.
    /// On by default; turning it off ignores the heterogeneous catch-all
    /// themes when looking for runs and gaps.
    pub include_autre_column: bool,
}

impl Default for FlagOptions {
    fn default() -> Self {
        FlagOptions {
            include_autre_column: true,
        }
    }
}

/// A maximal run of consecutive queries all marking the same proposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropositionRun {
    pub label: String,
    pub start_index: usize,
    /// Run length in queries, always >= 2.
    pub length: usize,
}

/// A return to a proposition after one or more queries without it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropositionGap {
    pub label: String,
    /// Row index of the first query of the gap.
    pub gap_start: usize,
    /// Number of consecutive unmarked queries, always >= 1.
    pub gap_length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersistenceResult {
    pub flag: bool,
    pub runs: Vec<PropositionRun>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntermittenceResult {
    pub flag: bool,
    pub gaps: Vec<PropositionGap>,
}

fn considered_columns(m: &AnnotationMatrix, options: FlagOptions) -> Vec<usize> {
    let skip = if options.include_autre_column {
        None
    } else {
        m.autre_index()
    };
    (0..m.n_columns()).filter(|&c| Some(c) != skip).collect()
}

/// Number of distinct propositions the session's queries touch (columns
/// with at least one mark, catch-all included).
pub fn coverage(m: &AnnotationMatrix) -> usize {
    (0..m.n_columns())
        .filter(|&c| m.rows.iter().any(|r| r.marks[c]))
        .count()
}

/// Mean number of marked propositions per query. Unmarked queries count
/// as zero; the mean runs over all queries.
pub fn props_per_query(m: &AnnotationMatrix) -> Result<f64, FeatureError> {
    if m.rows.is_empty() {
        return Err(FeatureError::EmptyMatrix(m.session_id.clone()));
    }
    let total: usize = m.rows.iter().map(|r| r.mark_count()).sum();
    Ok(total as f64 / m.rows.len() as f64)
}

/// Detects runs of >= 2 consecutive queries marking the same proposition.
/// The flag is set when any considered column has such a run; every
/// maximal run is returned.
pub fn persistence_flag(m: &AnnotationMatrix, options: FlagOptions) -> PersistenceResult {
    let mut runs = Vec::new();
    for col in considered_columns(m, options) {
        let marks = m.column(col);
        let mut start = None;
        for (i, &on) in marks.iter().chain(std::iter::once(&false)).enumerate() {
            match (on, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    if i - s >= 2 {
                        runs.push(PropositionRun {
                            label: m.labels[col].clone(),
                            start_index: s,
                            length: i - s,
                        });
                    }
                    start = None;
                }
                _ => {}
            }
        }
    }
    PersistenceResult {
        flag: !runs.is_empty(),
        runs,
    }
}

/// Detects gap-and-return patterns: a proposition marked, then absent for
/// one or more queries, then marked again. The flag is set when any
/// considered column shows the pattern; every bounded gap is returned.
pub fn intermittence_flag(m: &AnnotationMatrix, options: FlagOptions) -> IntermittenceResult {
    let mut gaps = Vec::new();
    for col in considered_columns(m, options) {
        let marks = m.column(col);
        let mut last_marked: Option<usize> = None;
        for (i, &on) in marks.iter().enumerate() {
            if !on {
                continue;
            }
            if let Some(prev) = last_marked {
                if i - prev > 1 {
                    gaps.push(PropositionGap {
                        label: m.labels[col].clone(),
                        gap_start: prev + 1,
                        gap_length: i - prev - 1,
                    });
                }
            }
            last_marked = Some(i);
        }
    }
    IntermittenceResult {
        flag: !gaps.is_empty(),
        gaps,
    }
}

/// Mean token count over the session's queries; operators count as words.
pub fn query_length_mean(session: &Session) -> Result<f64, FeatureError> {
    let queries = session.query_texts();
    if queries.is_empty() {
        return Err(FeatureError::NoQueries(session.session_id.clone()));
    }
    let total: usize = queries.iter().map(|q| normalize_tokens(q).len()).sum();
    Ok(total as f64 / queries.len() as f64)
}

/// Session duration: the timestamp of the last event. Timestamps are
/// session-relative, so the first event sits at t = 0.
pub fn session_duration(session: &Session) -> Result<f64, FeatureError> {
    session
        .events
        .last()
        .map(crate::corpus::SessionEvent::t)
        .ok_or_else(|| FeatureError::NoEvents(session.session_id.clone()))
}

/// Computes the eight variables for one session and its annotation matrix.
pub fn extract(
    session: &Session,
    m: &AnnotationMatrix,
    scheme: &PropositionScheme,
    options: FlagOptions,
) -> Result<FeatureVector, FeatureError> {
    if m.session_id != session.session_id {
        return Err(FeatureError::IdMismatch(format!(
            "annotation matrix is for '{}' but session is '{}'",
            m.session_id, session.session_id
        )));
    }
    if m.scheme_ref != scheme.task_id {
        return Err(FeatureError::IdMismatch(format!(
            "annotation matrix references task '{}' but scheme is '{}'",
            m.scheme_ref, scheme.task_id
        )));
    }
    if m.labels != scheme.column_labels() {
        return Err(FeatureError::SchemeMismatch(format!(
            "matrix columns {:?} vs scheme columns {:?}",
            m.labels,
            scheme.column_labels()
        )));
    }
    let n_queries = session.n_queries();
    if m.n_rows() != n_queries {
        return Err(FeatureError::RowCountMismatch {
            session_id: session.session_id.clone(),
            rows: m.n_rows(),
            queries: n_queries,
        });
    }

    Ok(FeatureVector {
        session_id: session.session_id.clone(),
        nb_req: n_queries,
        long_req: query_length_mean(session)?,
        nb_p_session: coverage(m),
        pmoy_req: props_per_query(m)?,
        intermittence: intermittence_flag(m, options).flag,
        persistence: persistence_flag(m, options).flag,
        nb_clics: session.n_clicks(),
        duree: session_duration(session)?,
    })
}

/// Extracts features for a whole corpus, one row per session in input
/// order. Fails atomically: any per-session error aborts the extraction.
pub fn extract_all(
    sessions: &[Session],
    annotations: &[AnnotationMatrix],
    scheme: &PropositionScheme,
    options: FlagOptions,
) -> Result<FeatureMatrix, FeatureError> {
    let mut by_id: HashMap<&str, &AnnotationMatrix> = HashMap::new();
    for m in annotations {
        if by_id.insert(m.session_id.as_str(), m).is_some() {
            return Err(FeatureError::DuplicateAnnotation(m.session_id.clone()));
        }
    }

    let mut session_ids = Vec::with_capacity(sessions.len());
    let mut rows = Vec::with_capacity(sessions.len());
    for session in sessions {
        let m = by_id
            .get(session.session_id.as_str())
            .ok_or_else(|| FeatureError::MissingAnnotation(session.session_id.clone()))?;
        let vector = extract(session, m, scheme, options)?;
        session_ids.push(vector.session_id.clone());
        rows.push(vector.values());
    }
    Ok(FeatureMatrix { session_ids, rows })
}

/// Formats a real with up to `digits` significant digits, trailing zeros
/// trimmed, '.' decimal separator.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn features_header() -> Vec<String> {
    let mut header = vec!["session_id".to_string()];
    header.extend(VARIABLE_NAMES.iter().map(|s| s.to_string()));
    header
}

/// Writes a `features.csv` file (reals with up to 12 significant digits).
pub fn save_features(fm: &FeatureMatrix, path: impl AsRef<Path>) -> Result<(), FeatureError> {
    let file = File::create(path)?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    writer.write_record(features_header())?;
    for (id, row) in fm.session_ids.iter().zip(&fm.rows) {
        let mut record = vec![id.clone()];
        record.extend(row.iter().map(|&v| format_significant(v, 12)));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads a `features.csv` file, checking the exact header.
pub fn load_features(path: impl AsRef<Path>) -> Result<FeatureMatrix, FeatureError> {
    let file = File::open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(BufReader::new(file));
    let expected = features_header();
    let found: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if found != expected {
        return Err(FeatureError::MalformedFeatures(format!(
            "header [{}] does not match [{}]",
            found.join(", "),
            expected.join(", ")
        )));
    }
    let mut session_ids = Vec::new();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        session_ids.push(record[0].to_string());
        let mut row = [0.0_f64; 8];
        for (i, slot) in row.iter_mut().enumerate() {
            *slot = record[i + 1].parse().map_err(|_| {
                FeatureError::MalformedFeatures(format!(
                    "'{}' is not a number (column {})",
                    &record[i + 1],
                    VARIABLE_NAMES[i]
                ))
            })?;
        }
        rows.push(row);
    }
    Ok(FeatureMatrix { session_ids, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{load_annotations, AnnotationRow};
    use crate::corpus::{load_scheme, load_sessions, SessionEvent};

    fn demo() -> (PropositionScheme, Session, AnnotationMatrix) {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
        let scheme = load_scheme(dir.join("../../demo/scheme.json")).unwrap();
        let sessions = load_sessions(dir.join("../../demo/sessions.jsonl")).unwrap();
        let matrices = load_annotations(dir.join("../../demo/annotations.csv"), &scheme).unwrap();
        (scheme, sessions[0].clone(), matrices[0].clone())
    }

    fn matrix(labels: &[&str], rows: &[&[u8]]) -> AnnotationMatrix {
        AnnotationMatrix {
            session_id: "s".into(),
            scheme_ref: "task".into(),
            labels: labels.iter().map(|s| s.to_string()).collect(),
            rows: rows
                .iter()
                .enumerate()
                .map(|(i, bits)| AnnotationRow {
                    query_index: i,
                    query_text: format!("q{i}"),
                    marks: bits.iter().map(|&b| b == 1).collect(),
                    autre_terms: vec![],
                })
                .collect(),
        }
    }

    #[test]
    fn coverage_of_the_demo_matrix_is_five() {
        let (_, _, m) = demo();
        assert_eq!(coverage(&m), 5);
    }

    #[test]
    fn coverage_edge_cases() {
        let labels = ["P1", "P2", "P3", "P4", "P5", "PAutre"];
        let zeros = matrix(&labels, &[&[0; 6], &[0; 6], &[0; 6]]);
        assert_eq!(coverage(&zeros), 0);
        let only_p1 = matrix(&["P1", "P2"], &[&[1, 0], &[1, 0]]);
        assert_eq!(coverage(&only_p1), 1);
    }

    #[test]
    fn props_per_query_matches_the_worked_mean() {
        let (_, _, m) = demo();
        let mean = props_per_query(&m).unwrap();
        assert!((mean - 1.6).abs() < 1e-12, "mean = {mean}");
    }

    #[test]
    fn props_per_query_counts_unmarked_rows() {
        let single = matrix(&["P1"], &[&[1]]);
        assert_eq!(props_per_query(&single).unwrap(), 1.0);
        let with_zero_row = matrix(&["P1", "P2"], &[&[1, 1], &[0, 0]]);
        assert_eq!(props_per_query(&with_zero_row).unwrap(), 1.0);
        let empty = matrix(&["P1"], &[]);
        assert!(matches!(
            props_per_query(&empty),
            Err(FeatureError::EmptyMatrix(_))
        ));
    }

    #[test]
    fn persistence_finds_the_p1_run() {
        let (_, _, m) = demo();
        let result = persistence_flag(&m, FlagOptions::default());
        assert!(result.flag);
        assert_eq!(
            result.runs,
            [PropositionRun {
                label: "P1".into(),
                start_index: 0,
                length: 3
            }]
        );
    }

    #[test]
    fn persistence_needs_two_consecutive_marks() {
        let single = matrix(&["P1"], &[&[1]]);
        assert!(!persistence_flag(&single, FlagOptions::default()).flag);
        let alternating = matrix(&["P1", "P2"], &[&[1, 0], &[0, 1], &[1, 0]]);
        assert!(!persistence_flag(&alternating, FlagOptions::default()).flag);
    }

    #[test]
    fn intermittence_finds_the_p1_gap() {
        let (_, _, m) = demo();
        let result = intermittence_flag(&m, FlagOptions::default());
        assert!(result.flag);
        assert_eq!(
            result.gaps,
            [PropositionGap {
                label: "P1".into(),
                gap_start: 3,
                gap_length: 1
            }]
        );
    }

    #[test]
    fn intermittence_requires_a_return() {
        let trailing = matrix(&["P1"], &[&[1], &[1], &[1], &[0], &[0]]);
        assert!(!intermittence_flag(&trailing, FlagOptions::default()).flag);
        let forced = matrix(&["P1"], &[&[1], &[0], &[1]]);
        assert!(intermittence_flag(&forced, FlagOptions::default()).flag);
    }

    #[test]
    fn flags_can_ignore_the_autre_column() {
        let labels = ["P1", "PAutre"];
        let m = matrix(&labels, &[&[1, 1], &[0, 1], &[1, 0]]);
        let all = FlagOptions::default();
        let no_autre = FlagOptions {
            include_autre_column: false,
        };
        assert!(persistence_flag(&m, all).flag);
        assert!(!persistence_flag(&m, no_autre).flag);
        assert!(intermittence_flag(&m, all).flag);
        assert!(intermittence_flag(&m, no_autre).flag); // P1 still gaps
    }

    #[test]
    fn query_length_counts_operators_and_strips_quotes() {
        let (_, session, _) = demo();
        let mean = query_length_mean(&session).unwrap();
        // token counts per query: 7, 4, 3, 1, 3
        assert!((mean - 3.6).abs() < 1e-12, "mean = {mean}");
    }

    #[test]
    fn duration_is_the_last_event_timestamp() {
        let (_, session, _) = demo();
        assert_eq!(session_duration(&session).unwrap(), 238.6);
        let single = Session {
            session_id: "s".into(),
            user_id: "u".into(),
            task_id: "t".into(),
            events: vec![SessionEvent::Query {
                t: 0.0,
                text: "q".into(),
            }],
        };
        assert_eq!(session_duration(&single).unwrap(), 0.0);
        let tie = Session {
            events: vec![
                SessionEvent::Query {
                    t: 1.0,
                    text: "a".into(),
                },
                SessionEvent::Click { t: 5.5, url: None },
                SessionEvent::Click { t: 5.5, url: None },
            ],
            ..single.clone()
        };
        assert_eq!(session_duration(&tie).unwrap(), 5.5);
    }

    #[test]
    fn extract_reproduces_the_worked_example() {
        let (scheme, session, m) = demo();
        let v = extract(&session, &m, &scheme, FlagOptions::default()).unwrap();
        assert_eq!(v.nb_req, 5);
        assert_eq!(v.nb_p_session, 5);
        assert!((v.pmoy_req - 1.6).abs() < 1e-12);
        assert!(v.persistence);
        assert!(v.intermittence);
        assert_eq!(v.nb_clics, 2);
        assert_eq!(v.duree, 238.6);
    }

    #[test]
    fn extract_on_a_minimal_session() {
        let (scheme, _, _) = demo();
        let session = Session {
            session_id: "tiny".into(),
            user_id: "u".into(),
            task_id: scheme.task_id.clone(),
            events: vec![SessionEvent::Query {
                t: 0.0,
                text: "plagiat".into(),
            }],
        };
        let m = AnnotationMatrix {
            session_id: "tiny".into(),
            scheme_ref: scheme.task_id.clone(),
            labels: scheme.column_labels(),
            rows: vec![AnnotationRow {
                query_index: 0,
                query_text: "plagiat".into(),
                marks: vec![true, false, false, false, false, false],
                autre_terms: vec![],
            }],
        };
        let v = extract(&session, &m, &scheme, FlagOptions::default()).unwrap();
        assert_eq!(v.nb_req, 1);
        assert_eq!(v.nb_p_session, 1);
        assert_eq!(v.pmoy_req, 1.0);
        assert!(!v.persistence);
        assert!(!v.intermittence);
        assert_eq!(v.nb_clics, 0);
    }

    #[test]
    fn extract_checks_row_count_and_ids() {
        let (scheme, session, mut m) = demo();
        m.rows.pop();
        let err = extract(&session, &m, &scheme, FlagOptions::default()).unwrap_err();
        assert_eq!(err.code(), "RowCountMismatch");

        let (_, _, mut m) = demo();
        m.session_id = "someone-else".into();
        let err = extract(&session, &m, &scheme, FlagOptions::default()).unwrap_err();
        assert_eq!(err.code(), "IdMismatch");
    }

    #[test]
    fn extract_all_preserves_order_and_reports_missing() {
        let (scheme, session, m) = demo();
        let mut s2 = session.clone();
        s2.session_id = "demo-02".into();
        let mut m2 = m.clone();
        m2.session_id = "demo-02".into();

        let fm = extract_all(
            &[session.clone(), s2.clone()],
            &[m2.clone(), m.clone()],
            &scheme,
            FlagOptions::default(),
        )
        .unwrap();
        assert_eq!(fm.session_ids, ["demo-01", "demo-02"]);

        let permuted = extract_all(
            &[s2.clone(), session.clone()],
            &[m.clone(), m2.clone()],
            &scheme,
            FlagOptions::default(),
        )
        .unwrap();
        assert_eq!(permuted.session_ids, ["demo-02", "demo-01"]);
        assert_eq!(permuted.rows[0], fm.rows[1]);
        assert_eq!(permuted.rows[1], fm.rows[0]);

        let err = extract_all(&[session, s2], &[m], &scheme, FlagOptions::default()).unwrap_err();
        assert_eq!(err.code(), "MissingAnnotation");
    }

    #[test]
    fn feature_csv_round_trips() {
        let (scheme, session, m) = demo();
        let fm = extract_all(&[session], &[m], &scheme, FlagOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        save_features(&fm, &path).unwrap();
        let reloaded = load_features(&path).unwrap();
        assert_eq!(fm, reloaded);
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(0.0, 12), "0");
        assert_eq!(format_significant(5.0, 12), "5");
        assert_eq!(format_significant(1.6, 12), "1.6");
        assert_eq!(format_significant(-3402.04, 12), "-3402.04");
        assert_eq!(format_significant(2.0 / 3.0, 12), "0.666666666667");
        assert_eq!(format_significant(1000.0, 12), "1000");
    }

    // deterministic xorshift for the oracle trials
    struct XorShift(u64);

    impl XorShift {
        fn next(&mut self) -> u64 {
            self.0 ^= self.0 << 13;
            self.0 ^= self.0 >> 7;
            self.0 ^= self.0 << 17;
            self.0
        }

        fn below(&mut self, n: u64) -> u64 {
            (((self.next() >> 11) as u128 * n as u128) >> 53) as u64
        }
    }

    fn random_matrix(rng: &mut XorShift, max_rows: usize, max_cols: usize) -> AnnotationMatrix {
        let n_rows = 1 + rng.below(max_rows as u64) as usize;
        let n_cols = 1 + rng.below(max_cols as u64) as usize;
        let labels: Vec<&str> = ["P1", "P2", "P3", "P4", "P5", "P6", "PAutre"][..n_cols].to_vec();
        let rows: Vec<Vec<u8>> = (0..n_rows)
            .map(|_| (0..n_cols).map(|_| (rng.next() & 1) as u8).collect())
            .collect();
        let row_refs: Vec<&[u8]> = rows.iter().map(|r| r.as_slice()).collect();
        matrix(&labels, &row_refs)
    }

    fn oracle_persistence(m: &AnnotationMatrix) -> bool {
        (0..m.n_columns()).any(|c| {
            let col = m.column(c);
            (0..col.len())
                .any(|start| (start + 1..col.len()).any(|end| (start..=end).all(|r| col[r])))
        })
    }

    fn oracle_intermittence(m: &AnnotationMatrix) -> bool {
        (0..m.n_columns()).any(|c| {
            let col = m.column(c);
            (0..col.len()).any(|i| {
                (i + 2..col.len()).any(|j| col[i] && col[j] && (i + 1..j).all(|r| !col[r]))
            })
        })
    }

    #[test]
    fn flags_agree_with_the_pattern_enumeration_oracle() {
        let mut rng = XorShift(0x5eed_0001);
        for _ in 0..1000 {
            let m = random_matrix(&mut rng, 30, 7);
            let opts = FlagOptions::default();
            assert_eq!(
                persistence_flag(&m, opts).flag,
                oracle_persistence(&m),
                "persistence disagrees on {m:?}"
            );
            assert_eq!(
                intermittence_flag(&m, opts).flag,
                oracle_intermittence(&m),
                "intermittence disagrees on {m:?}"
            );
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_matrix() -> impl Strategy<Value = AnnotationMatrix> {
            (1usize..8, 1usize..15).prop_flat_map(|(n_cols, n_rows)| {
                proptest::collection::vec(proptest::collection::vec(any::<bool>(), n_cols), n_rows)
                    .prop_map(move |rows| AnnotationMatrix {
                        session_id: "s".into(),
                        scheme_ref: "task".into(),
                        labels: (0..n_cols).map(|i| format!("P{}", i + 1)).collect(),
                        rows: rows
                            .into_iter()
                            .enumerate()
                            .map(|(i, marks)| AnnotationRow {
                                query_index: i,
                                query_text: format!("q{i}"),
                                marks,
                                autre_terms: vec![],
                            })
                            .collect(),
                    })
            })
        }

        proptest! {
            #[test]
            fn mean_marks_never_exceed_coverage(m in arb_matrix()) {
                let mean = props_per_query(&m).unwrap();
                prop_assert!(mean <= coverage(&m) as f64 + 1e-12);
            }

            #[test]
            fn flags_imply_minimum_row_counts(m in arb_matrix()) {
                let opts = FlagOptions::default();
                if persistence_flag(&m, opts).flag {
                    prop_assert!(m.n_rows() >= 2);
                }
                if intermittence_flag(&m, opts).flag {
                    prop_assert!(m.n_rows() >= 3);
                }
            }

            #[test]
            fn appending_a_blank_row_is_monotone(m in arb_matrix()) {
                let opts = FlagOptions::default();
                let before_coverage = coverage(&m);
                let before_p = persistence_flag(&m, opts).flag;
                let before_i = intermittence_flag(&m, opts).flag;

                let mut extended = m.clone();
                extended.rows.push(AnnotationRow {
                    query_index: extended.rows.len(),
                    query_text: "blank".into(),
                    marks: vec![false; extended.n_columns()],
                    autre_terms: vec![],
                });
                prop_assert_eq!(coverage(&extended), before_coverage);
                prop_assert!(persistence_flag(&extended, opts).flag == before_p);
                prop_assert!(!before_i || intermittence_flag(&extended, opts).flag);
            }

            #[test]
            fn coverage_and_mean_are_column_permutation_invariant(m in arb_matrix(), seed in any::<u64>()) {
                let n = m.n_columns();
                // deterministic permutation from the seed
                let mut order: Vec<usize> = (0..n).collect();
                let mut state = seed | 1;
                for i in (1..n).rev() {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    order.swap(i, (state % (i as u64 + 1)) as usize);
                }
                let permuted = AnnotationMatrix {
                    session_id: m.session_id.clone(),
                    scheme_ref: m.scheme_ref.clone(),
                    labels: order.iter().map(|&j| m.labels[j].clone()).collect(),
                    rows: m
                        .rows
                        .iter()
                        .map(|r| AnnotationRow {
                            query_index: r.query_index,
                            query_text: r.query_text.clone(),
                            marks: order.iter().map(|&j| r.marks[j]).collect(),
                            autre_terms: r.autre_terms.clone(),
                        })
                        .collect(),
                };
                prop_assert_eq!(coverage(&permuted), coverage(&m));
                prop_assert_eq!(props_per_query(&permuted).unwrap(), props_per_query(&m).unwrap());
            }
        }
    }
}
