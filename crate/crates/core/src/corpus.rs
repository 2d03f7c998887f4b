//! Canonical data model for tasks, proposition schemes and search sessions,
//! plus file ingestion and corpus-level validation.
//!
//! Timestamps are session-relative seconds: `t = 0` at the first event, and
//! a session's duration is the `t` of its last event. Query text is stored
//! verbatim (typos, operators and quotes included); normalization happens
//! downstream.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Reserved column label for the catch-all proposition.
pub const AUTRE_LABEL: &str = "PAutre";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed scheme: {0}")]
    MalformedScheme(String),
    #[error("malformed session{}: {reason}", fmt_loc(.line, .session_id))]
    MalformedSession {
        line: Option<usize>,
        session_id: String,
        reason: String,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

fn fmt_loc(line: &Option<usize>, session_id: &str) -> String {
    match line {
        Some(n) => format!(" '{session_id}' (line {n})"),
        None => format!(" '{session_id}'"),
    }
}

impl CorpusError {
    /// Stable machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            CorpusError::MalformedScheme(_) => "MalformedScheme",
            CorpusError::MalformedSession { .. } => "MalformedSession",
            CorpusError::Io(_) => "IoError",
        }
    }
}

/// One thematic proposition decomposed from a task statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Proposition {
    /// Short unique column label, e.g. `P1`.
    pub label: String,
    /// Human-readable description of the sub-topic.
    pub description: String,
    /// Normalized keyword/phrase strings used by the lexical auto-annotator.
    /// May be empty for manually-annotated corpora.
    #[serde(default)]
    pub lexicon: Vec<String>,
}

/// Ordered thematic propositions for one task, plus the reserved catch-all
/// column. The k-th proposition owns annotation column k; when
/// `include_autre` is set, the last column is labeled [`AUTRE_LABEL`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropositionScheme {
    pub task_id: String,
    /// Full task statement the propositions were decomposed from.
    pub statement: String,
    pub propositions: Vec<Proposition>,
    #[serde(default = "default_true")]
    pub include_autre: bool,
}

fn default_true() -> bool {
    true
}

impl PropositionScheme {
    /// Checks label uniqueness, non-emptiness and the reserved-label rule.
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.propositions.is_empty() && !self.include_autre {
            return Err(CorpusError::MalformedScheme(
                "scheme has no propositions and no catch-all column".into(),
            ));
        }
        for (i, prop) in self.propositions.iter().enumerate() {
            if prop.label.trim().is_empty() {
                return Err(CorpusError::MalformedScheme(format!(
                    "proposition {i} has an empty label"
                )));
            }
            if self.include_autre && prop.label == AUTRE_LABEL {
                return Err(CorpusError::MalformedScheme(format!(
                    "label '{AUTRE_LABEL}' is reserved for the catch-all column"
                )));
            }
        }
        for (i, a) in self.propositions.iter().enumerate() {
            if self.propositions[i + 1..]
                .iter()
                .any(|b| b.label == a.label)
            {
                return Err(CorpusError::MalformedScheme(format!(
                    "duplicate proposition label '{}'",
                    a.label
                )));
            }
        }
        Ok(())
    }

    /// Annotation column labels in order: propositions, then the catch-all.
    pub fn column_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self.propositions.iter().map(|p| p.label.clone()).collect();
        if self.include_autre {
            labels.push(AUTRE_LABEL.to_string());
        }
        labels
    }

    /// Number of annotation columns (catch-all included).
    pub fn n_columns(&self) -> usize {
        self.propositions.len() + usize::from(self.include_autre)
    }

    /// Index of the catch-all column, when present.
    pub fn autre_index(&self) -> Option<usize> {
        self.include_autre.then_some(self.propositions.len())
    }
}

/// One timestamped action of a search session. `t` is in seconds relative
/// to the session start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SessionEvent {
    /// A query submitted to the engine.
    Query { t: f64, text: String },
    /// A result-page click opening a web page.
    Click {
        t: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        url: Option<String>,
    },
}

impl SessionEvent {
    pub fn t(&self) -> f64 {
        match self {
            SessionEvent::Query { t, .. } | SessionEvent::Click { t, .. } => *t,
        }
    }

    pub fn is_query(&self) -> bool {
        matches!(self, SessionEvent::Query { .. })
    }
}

/// The ordered event log of one user working on one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Session {
    pub session_id: String,
    pub user_id: String,
    pub task_id: String,
    pub events: Vec<SessionEvent>,
}

impl Session {
    /// Checks the session invariants: at least one query event, timestamps
    /// non-negative and non-decreasing, query text non-blank.
    pub fn validate(&self) -> Result<(), CorpusError> {
        let fail = |reason: String| CorpusError::MalformedSession {
            line: None,
            session_id: self.session_id.clone(),
            reason,
        };
        if !self.events.iter().any(SessionEvent::is_query) {
            return Err(fail("session has no query event".into()));
        }
        let mut prev_t = 0.0_f64;
        for (i, event) in self.events.iter().enumerate() {
            let t = event.t();
            if !t.is_finite() || t < 0.0 {
                return Err(fail(format!("event {i} has invalid timestamp {t}")));
            }
            if t < prev_t {
                return Err(fail(format!(
                    "event {i} timestamp {t} decreases from {prev_t}"
                )));
            }
            prev_t = t;
            if let SessionEvent::Query { text, .. } = event {
                if text.trim().is_empty() {
                    return Err(fail(format!("query event {i} has empty text")));
                }
            }
        }
        Ok(())
    }

    /// Query texts in session order.
    pub fn query_texts(&self) -> Vec<&str> {
        self.events
            .iter()
            .filter_map(|e| match e {
                SessionEvent::Query { text, .. } => Some(text.as_str()),
                SessionEvent::Click { .. } => None,
            })
            .collect()
    }

    pub fn n_queries(&self) -> usize {
        self.events.iter().filter(|e| e.is_query()).count()
    }

    pub fn n_clicks(&self) -> usize {
        self.events.iter().filter(|e| !e.is_query()).count()
    }
}

/// Reads and validates a `scheme.json` file.
pub fn load_scheme(path: impl AsRef<Path>) -> Result<PropositionScheme, CorpusError> {
    let file = File::open(path)?;
    let scheme: PropositionScheme = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| CorpusError::MalformedScheme(e.to_string()))?;
    scheme.validate()?;
    Ok(scheme)
}

/// Reads a `sessions.jsonl` file (one session object per line, blank lines
/// ignored). Sessions are returned in file order, each validated.
pub fn load_sessions(path: impl AsRef<Path>) -> Result<Vec<Session>, CorpusError> {
    let file = File::open(path)?;
    let mut sessions = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let session: Session =
            serde_json::from_str(&line).map_err(|e| CorpusError::MalformedSession {
                line: Some(idx + 1),
                session_id: String::new(),
                reason: e.to_string(),
            })?;
        session.validate().map_err(|e| match e {
            CorpusError::MalformedSession {
                session_id, reason, ..
            } => CorpusError::MalformedSession {
                line: Some(idx + 1),
                session_id,
                reason,
            },
            other => other,
        })?;
        sessions.push(session);
    }
    Ok(sessions)
}

/// Writes sessions as JSONL, one object per line, in input order.
pub fn save_sessions(sessions: &[Session], path: impl AsRef<Path>) -> Result<(), CorpusError> {
    let mut out = BufWriter::new(File::create(path)?);
    for session in sessions {
        serde_json::to_writer(&mut out, session)
            .map_err(|e| CorpusError::Io(std::io::Error::other(e)))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// A non-fatal corpus issue reported by [`validate_corpus`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub session_id: String,
    pub issue: CorpusIssue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusIssue {
    DuplicateSessionId,
    TaskMismatch {
        session_task: String,
        scheme_task: String,
    },
}

impl std::fmt::Display for CorpusIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CorpusIssue::DuplicateSessionId => write!(f, "duplicate session_id"),
            CorpusIssue::TaskMismatch {
                session_task,
                scheme_task,
            } => write!(
                f,
                "session task_id '{session_task}' does not match scheme task_id '{scheme_task}'"
            ),
        }
    }
}

/// Cross-checks sessions against a scheme. Issues are warnings, not
/// failures, so partial corpora stay inspectable. An empty list means the
/// corpus is clean.
pub fn validate_corpus(sessions: &[Session], scheme: &PropositionScheme) -> Vec<Diagnostic> {
    let mut diagnostics = Vec::new();
    for (i, session) in sessions.iter().enumerate() {
        if sessions[..i]
            .iter()
            .any(|s| s.session_id == session.session_id)
        {
            diagnostics.push(Diagnostic {
                session_id: session.session_id.clone(),
                issue: CorpusIssue::DuplicateSessionId,
            });
        }
        if session.task_id != scheme.task_id {
            diagnostics.push(Diagnostic {
                session_id: session.session_id.clone(),
                issue: CorpusIssue::TaskMismatch {
                    session_task: session.task_id.clone(),
                    scheme_task: scheme.task_id.clone(),
                },
            });
        }
    }
    diagnostics
}
