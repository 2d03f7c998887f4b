//! Proposition-annotation matrices, their CSV round-trip, inter-annotator
//! agreement and the lexicon-based baseline auto-annotator.
//!
//! A matrix holds one binary row per query of a session: mark `1` in a
//! proposition column when the query touches that proposition, and `1` in
//! the catch-all column when some query term refers to none of them (those
//! terms are recorded alongside).

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use thiserror::Error;

use crate::corpus::{PropositionScheme, Session, AUTRE_LABEL};
use crate::text::{damerau_levenshtein, normalize_tokens, Token};

#[derive(Debug, Error)]
pub enum AnnotationError {
    #[error("column mismatch: expected [{}], found [{}]", .expected.join(", "), .found.join(", "))]
    ColumnMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("non-binary mark '{value}' in column {column} (session '{session_id}', query {query_index})")]
    NonBinaryMark {
        session_id: String,
        query_index: String,
        column: String,
        value: String,
    },
    #[error("query indices of session '{session_id}' are not consecutive from 0: {found:?}")]
    GapInIndices {
        session_id: String,
        found: Vec<usize>,
    },
    #[error("invalid annotation row (session '{session_id}', query {query_index}): {reason}")]
    MalformedAnnotation {
        session_id: String,
        query_index: usize,
        reason: String,
    },
    #[error("no rows in common between the two annotation sets")]
    EmptyIntersection,
    #[error("agreement requires at least one paired row")]
    NoItems,
    #[error("every proposition of scheme '{0}' has an empty lexicon")]
    EmptyLexicons(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl AnnotationError {
    /// Stable machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            AnnotationError::ColumnMismatch { .. } => "ColumnMismatch",
            AnnotationError::NonBinaryMark { .. } => "NonBinaryMark",
            AnnotationError::GapInIndices { .. } => "GapInIndices",
            AnnotationError::MalformedAnnotation { .. } => "MalformedAnnotation",
            AnnotationError::EmptyIntersection => "EmptyIntersection",
            AnnotationError::NoItems => "NoItems",
            AnnotationError::EmptyLexicons(_) => "EmptyLexicons",
            AnnotationError::Io(_) => "IoError",
            AnnotationError::Csv(_) => "CsvError",
        }
    }
}

/// One annotated query: binary marks over the scheme columns plus the
/// query terms that fell outside the scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationRow {
    /// 0-based position among the session's query events.
    pub query_index: usize,
    pub query_text: String,
    /// One mark per scheme column, catch-all last when present.
    pub marks: Vec<bool>,
    /// Normalized terms that triggered the catch-all mark.
    pub autre_terms: Vec<String>,
}

impl AnnotationRow {
    /// Number of propositions this query touches (catch-all counts as one).
    pub fn mark_count(&self) -> usize {
        self.marks.iter().filter(|&&m| m).count()
    }
}

/// The queries × propositions binary matrix of one session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationMatrix {
    pub session_id: String,
    /// `task_id` of the scheme the columns refer to.
    pub scheme_ref: String,
    /// Column labels in order, catch-all last when present.
    pub labels: Vec<String>,
    /// Rows sorted by `query_index`, one per query event.
    pub rows: Vec<AnnotationRow>,
}

impl AnnotationMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_columns(&self) -> usize {
        self.labels.len()
    }

    /// Index of the catch-all column, when present.
    pub fn autre_index(&self) -> Option<usize> {
        self.labels.iter().position(|l| l == AUTRE_LABEL)
    }

    /// The marks of column `col` in row order.
    pub fn column(&self, col: usize) -> Vec<bool> {
        self.rows.iter().map(|r| r.marks[col]).collect()
    }

    /// Checks row shape, index contiguity and catch-all consistency.
    pub fn validate(&self) -> Result<(), AnnotationError> {
        let indices: Vec<usize> = self.rows.iter().map(|r| r.query_index).collect();
        if indices.iter().enumerate().any(|(i, &idx)| i != idx) {
            return Err(AnnotationError::GapInIndices {
                session_id: self.session_id.clone(),
                found: indices,
            });
        }
        let autre = self.autre_index();
        for row in &self.rows {
            if row.marks.len() != self.labels.len() {
                return Err(AnnotationError::MalformedAnnotation {
                    session_id: self.session_id.clone(),
                    query_index: row.query_index,
                    reason: format!(
                        "row has {} marks for {} columns",
                        row.marks.len(),
                        self.labels.len()
                    ),
                });
            }
            let autre_marked = autre.map(|i| row.marks[i]).unwrap_or(false);
            if autre_marked && row.autre_terms.is_empty() {
                return Err(AnnotationError::MalformedAnnotation {
                    session_id: self.session_id.clone(),
                    query_index: row.query_index,
                    reason: format!("{AUTRE_LABEL} is marked but no terms are recorded"),
                });
            }
            if !autre_marked && !row.autre_terms.is_empty() {
                return Err(AnnotationError::MalformedAnnotation {
                    session_id: self.session_id.clone(),
                    query_index: row.query_index,
                    reason: format!("terms recorded without a {AUTRE_LABEL} mark"),
                });
            }
        }
        Ok(())
    }
}

fn expected_header(scheme: &PropositionScheme) -> Vec<String> {
    let mut header = vec![
        "session_id".to_string(),
        "query_index".to_string(),
        "query_text".to_string(),
    ];
    header.extend(scheme.column_labels());
    header.push("autre_terms".to_string());
    header
}

/// Reads an `annotations.csv` file against a scheme. Rows are grouped by
/// `session_id` (in first-appearance order) and sorted by `query_index`
/// within each matrix.
pub fn load_annotations(
    path: impl AsRef<Path>,
    scheme: &PropositionScheme,
) -> Result<Vec<AnnotationMatrix>, AnnotationError> {
    let file = File::open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(BufReader::new(file));

    let expected = expected_header(scheme);
    let found: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if found != expected {
        return Err(AnnotationError::ColumnMismatch { expected, found });
    }

    let labels = scheme.column_labels();
    let n_cols = labels.len();
    let mut matrices: Vec<AnnotationMatrix> = Vec::new();
    let mut by_id: HashMap<String, usize> = HashMap::new();

    for record in reader.records() {
        let record = record?;
        let session_id = record[0].to_string();
        let query_index: usize = record[1]
            .parse()
            .map_err(|_| AnnotationError::NonBinaryMark {
                session_id: session_id.clone(),
                query_index: record[1].to_string(),
                column: "query_index".into(),
                value: record[1].to_string(),
            })?;
        let query_text = record[2].to_string();
        let mut marks = Vec::with_capacity(n_cols);
        for (col, label) in labels.iter().enumerate() {
            let raw = &record[3 + col];
            marks.push(match raw {
                "0" => false,
                "1" => true,
                other => {
                    return Err(AnnotationError::NonBinaryMark {
                        session_id,
                        query_index: record[1].to_string(),
                        column: label.clone(),
                        value: other.to_string(),
                    })
                }
            });
        }
        let autre_terms: Vec<String> = record[3 + n_cols]
            .split(';')
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect();

        let slot = *by_id.entry(session_id.clone()).or_insert_with(|| {
            matrices.push(AnnotationMatrix {
                session_id: session_id.clone(),
                scheme_ref: scheme.task_id.clone(),
                labels: labels.clone(),
                rows: Vec::new(),
            });
            matrices.len() - 1
        });
        matrices[slot].rows.push(AnnotationRow {
            query_index,
            query_text,
            marks,
            autre_terms,
        });
    }

    for matrix in &mut matrices {
        matrix.rows.sort_by_key(|r| r.query_index);
        matrix.validate()?;
    }
    Ok(matrices)
}

/// Writes matrices to CSV so that [`load_annotations`] recovers them
/// losslessly. An empty list produces a header-only file.
pub fn save_annotations(
    matrices: &[AnnotationMatrix],
    scheme: &PropositionScheme,
    path: impl AsRef<Path>,
) -> Result<(), AnnotationError> {
    let expected_labels = scheme.column_labels();
    let file = File::create(path)?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    writer.write_record(expected_header(scheme))?;
    for matrix in matrices {
        if matrix.labels != expected_labels {
            return Err(AnnotationError::ColumnMismatch {
                expected: expected_labels,
                found: matrix.labels.clone(),
            });
        }
        matrix.validate()?;
        for row in &matrix.rows {
            let mut record = vec![
                matrix.session_id.clone(),
                row.query_index.to_string(),
                row.query_text.clone(),
            ];
            record.extend(
                row.marks
                    .iter()
                    .map(|&m| if m { "1" } else { "0" }.to_string()),
            );
            record.push(row.autre_terms.join(";"));
            writer.write_record(&record)?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// One row annotated by both annotators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairedMarks {
    pub session_id: String,
    pub query_index: usize,
    pub a: Vec<bool>,
    pub b: Vec<bool>,
}

/// Result of matching two annotation sets on `(session_id, query_index)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub pairs: Vec<PairedMarks>,
    /// Keys present only on the first side.
    pub unmatched_a: Vec<(String, usize)>,
    /// Keys present only on the second side.
    pub unmatched_b: Vec<(String, usize)>,
}

/// Pairs the rows of two annotation sets for agreement measurement.
/// Rows follow the first set's order; rows present on one side only are
/// reported, not dropped silently.
pub fn align(a: &[AnnotationMatrix], b: &[AnnotationMatrix]) -> Result<Alignment, AnnotationError> {
    let mut b_rows: HashMap<(&str, usize), &AnnotationRow> = HashMap::new();
    for matrix in b {
        for row in &matrix.rows {
            b_rows.insert((matrix.session_id.as_str(), row.query_index), row);
        }
    }

    let mut pairs = Vec::new();
    let mut matched: BTreeSet<(String, usize)> = BTreeSet::new();
    let mut unmatched_a = Vec::new();
    for matrix in a {
        for row in &matrix.rows {
            let key = (matrix.session_id.as_str(), row.query_index);
            match b_rows.get(&key) {
                Some(b_row) => {
                    if b_row.marks.len() != row.marks.len() {
                        return Err(AnnotationError::MalformedAnnotation {
                            session_id: matrix.session_id.clone(),
                            query_index: row.query_index,
                            reason: format!(
                                "mark vectors differ in length ({} vs {})",
                                row.marks.len(),
                                b_row.marks.len()
                            ),
                        });
                    }
                    matched.insert((matrix.session_id.clone(), row.query_index));
                    pairs.push(PairedMarks {
                        session_id: matrix.session_id.clone(),
                        query_index: row.query_index,
                        a: row.marks.clone(),
                        b: b_row.marks.clone(),
                    });
                }
                None => unmatched_a.push((matrix.session_id.clone(), row.query_index)),
            }
        }
    }
    let mut unmatched_b = Vec::new();
    for matrix in b {
        for row in &matrix.rows {
            if !matched.contains(&(matrix.session_id.clone(), row.query_index)) {
                unmatched_b.push((matrix.session_id.clone(), row.query_index));
            }
        }
    }

    if pairs.is_empty() {
        return Err(AnnotationError::EmptyIntersection);
    }
    Ok(Alignment {
        pairs,
        unmatched_a,
        unmatched_b,
    })
}

/// Agreement of one proposition column between two annotators.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ColumnAgreement {
    pub label: String,
    /// Cohen's kappa, in [-1, 1].
    pub kappa: f64,
    /// Raw fraction of rows where the two marks are equal.
    pub observed_agreement: f64,
}

/// Per-proposition inter-annotator agreement over aligned rows.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct AgreementReport {
    pub n_items: usize,
    pub per_proposition: Vec<ColumnAgreement>,
}

impl AgreementReport {
    pub fn min_kappa(&self) -> Option<f64> {
        self.per_proposition
            .iter()
            .map(|c| c.kappa)
            .min_by(|x, y| x.total_cmp(y))
    }
}

/// Cohen's kappa per proposition column over aligned rows.
///
/// For each column, `kappa = (p_o - p_e) / (1 - p_e)` where `p_o` is the
/// fraction of rows with equal marks and `p_e` the chance agreement from
/// the two marginal mark rates. When both annotators are constant and
/// identical (`p_e = 1`, which forces `p_o = 1`) the column's kappa is 1.
pub fn cohen_kappa(
    alignment: &Alignment,
    scheme: &PropositionScheme,
) -> Result<AgreementReport, AnnotationError> {
    if alignment.pairs.is_empty() {
        return Err(AnnotationError::NoItems);
    }
    let labels = scheme.column_labels();
    let n_cols = labels.len();
    for pair in &alignment.pairs {
        if pair.a.len() != n_cols {
            return Err(AnnotationError::ColumnMismatch {
                expected: labels,
                found: vec![format!("{}-column marks", pair.a.len())],
            });
        }
    }

    let n = alignment.pairs.len() as f64;
    let per_proposition = labels
        .into_iter()
        .enumerate()
        .map(|(col, label)| {
            let mut equal = 0usize;
            let mut a_ones = 0usize;
            let mut b_ones = 0usize;
            for pair in &alignment.pairs {
                let (a, b) = (pair.a[col], pair.b[col]);
                equal += usize::from(a == b);
                a_ones += usize::from(a);
                b_ones += usize::from(b);
            }
            let p_o = equal as f64 / n;
            let p_a1 = a_ones as f64 / n;
            let p_b1 = b_ones as f64 / n;
            let p_e = p_a1 * p_b1 + (1.0 - p_a1) * (1.0 - p_b1);
            let kappa = if p_e == 1.0 {
                1.0
            } else {
                (p_o - p_e) / (1.0 - p_e)
            };
            ColumnAgreement {
                label,
                kappa,
                observed_agreement: p_o,
            }
        })
        .collect();

    Ok(AgreementReport {
        n_items: alignment.pairs.len(),
        per_proposition,
    })
}

/// Options for the lexical auto-annotator.
#[derive(Debug, Clone)]
pub struct AutolabelOptions {
    /// Maximum Damerau-Levenshtein distance for single-word lexicon entries
    /// of at least [`FUZZY_MIN_ENTRY_CHARS`] characters. 0 disables fuzzy
    /// matching.
    pub fuzzy_distance: usize,
    /// Normalized tokens that never count as catch-all terms.
    pub stopwords: BTreeSet<String>,
}

/// Fuzzy matching only applies to lexicon entries at least this long, so
/// short words cannot be absorbed by distance-1 lookalikes.
pub const FUZZY_MIN_ENTRY_CHARS: usize = 5;

impl Default for AutolabelOptions {
    fn default() -> Self {
        AutolabelOptions {
            fuzzy_distance: 1,
            stopwords: BTreeSet::new(),
        }
    }
}

/// Annotates one query against the scheme lexicons.
///
/// A proposition is marked when one of its lexicon entries matches the
/// normalized word tokens: single-word entries match a token exactly, or
/// within `fuzzy_distance` edits when the entry has at least
/// [`FUZZY_MIN_ENTRY_CHARS`] characters; multi-word entries match a
/// contiguous token run exactly. Word tokens matched by no proposition
/// and absent from the stopword set become catch-all terms (first
/// occurrence order, deduplicated) and set the catch-all mark. Operator
/// tokens never match and never become catch-all terms.
///
/// The returned row carries `query_index` 0; [`autolabel_session`] fills
/// in real positions.
pub fn autolabel(
    query_text: &str,
    scheme: &PropositionScheme,
    options: &AutolabelOptions,
) -> Result<AnnotationRow, AnnotationError> {
    if scheme.propositions.iter().all(|p| p.lexicon.is_empty()) {
        return Err(AnnotationError::EmptyLexicons(scheme.task_id.clone()));
    }

    let tokens: Vec<Token> = normalize_tokens(query_text);
    let mut covered = vec![false; tokens.len()];
    let mut marks = vec![false; scheme.n_columns()];

    for (prop_idx, prop) in scheme.propositions.iter().enumerate() {
        for entry in &prop.lexicon {
            let entry_tokens: Vec<String> = normalize_tokens(entry)
                .into_iter()
                .map(|t| t.text)
                .collect();
            match entry_tokens.as_slice() {
                [] => {}
                [word] => {
                    let fuzzy_ok =
                        options.fuzzy_distance > 0 && word.chars().count() >= FUZZY_MIN_ENTRY_CHARS;
                    for (i, token) in tokens.iter().enumerate() {
                        if !token.is_word() {
                            continue;
                        }
                        let hit = token.text == *word
                            || (fuzzy_ok
                                && damerau_levenshtein(&token.text, word)
                                    <= options.fuzzy_distance);
                        if hit {
                            marks[prop_idx] = true;
                            covered[i] = true;
                        }
                    }
                }
                phrase => {
                    let k = phrase.len();
                    for start in 0..tokens.len().saturating_sub(k - 1) {
                        let run = &tokens[start..start + k];
                        if run
                            .iter()
                            .zip(phrase)
                            .all(|(t, w)| t.is_word() && t.text == *w)
                        {
                            marks[prop_idx] = true;
                            covered[start..start + k].iter_mut().for_each(|c| *c = true);
                        }
                    }
                }
            }
        }
    }

    let mut autre_terms: Vec<String> = Vec::new();
    if let Some(autre_col) = scheme.autre_index() {
        for (i, token) in tokens.iter().enumerate() {
            if token.is_word()
                && !covered[i]
                && !options.stopwords.contains(&token.text)
                && !autre_terms.contains(&token.text)
            {
                autre_terms.push(token.text.clone());
            }
        }
        marks[autre_col] = !autre_terms.is_empty();
    }

    Ok(AnnotationRow {
        query_index: 0,
        query_text: query_text.to_string(),
        marks,
        autre_terms,
    })
}

/// Annotates every query event of a session, in order.
pub fn autolabel_session(
    session: &Session,
    scheme: &PropositionScheme,
    options: &AutolabelOptions,
) -> Result<AnnotationMatrix, AnnotationError> {
    let mut rows = Vec::new();
    for (idx, text) in session.query_texts().into_iter().enumerate() {
        let mut row = autolabel(text, scheme, options)?;
        row.query_index = idx;
        rows.push(row);
    }
    Ok(AnnotationMatrix {
        session_id: session.session_id.clone(),
        scheme_ref: scheme.task_id.clone(),
        labels: scheme.column_labels(),
        rows,
    })
}
