//! Seeded synthetic corpora built from archetype specifications.
//!
//! Sessions are constructed, not sampled: the persistence and
//! intermittence flags are inserted or forbidden outright, so probability
//! 0 and 1 edges hold for every seed, and query text is assembled from
//! proposition lexicon entries so the lexical auto-annotator recovers the
//! planted marks. All randomness comes from a self-contained SplitMix64
//! stream seeded by the caller; output is a pure function of
//! `(specs, scheme, seed)`.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::{autolabel, AnnotationMatrix, AnnotationRow, AutolabelOptions};
use crate::corpus::{PropositionScheme, Session, SessionEvent};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid archetype spec: {0}")]
    InvalidSpec(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl SynthError {
    /// Stable machine-readable error code.
    pub fn code(&self) -> &'static str {
        match self {
            SynthError::InvalidSpec(_) => "InvalidSpec",
            SynthError::Io(_) => "IoError",
        }
    }
}

/// Inclusive integer range, serialized as `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[u32; 2]", into = "[u32; 2]")]
pub struct IntRange {
    pub lo: u32,
    pub hi: u32,
}

impl IntRange {
    pub fn new(lo: u32, hi: u32) -> IntRange {
        assert!(lo <= hi, "empty range [{lo}, {hi}]");
        IntRange { lo, hi }
    }
}

impl TryFrom<[u32; 2]> for IntRange {
    type Error = String;

    fn try_from([lo, hi]: [u32; 2]) -> Result<Self, Self::Error> {
        if lo > hi {
            return Err(format!("empty range [{lo}, {hi}]"));
        }
        Ok(IntRange { lo, hi })
    }
}

impl From<IntRange> for [u32; 2] {
    fn from(r: IntRange) -> [u32; 2] {
        [r.lo, r.hi]
    }
}

/// Inclusive real range, serialized as `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct RealRange {
    pub lo: f64,
    pub hi: f64,
}

impl RealRange {
    pub fn new(lo: f64, hi: f64) -> RealRange {
        assert!(lo <= hi && lo.is_finite() && hi.is_finite());
        RealRange { lo, hi }
    }
}

impl TryFrom<[f64; 2]> for RealRange {
    type Error = String;

    fn try_from([lo, hi]: [f64; 2]) -> Result<Self, Self::Error> {
        if !(lo <= hi && lo.is_finite() && hi.is_finite()) {
            return Err(format!("invalid range [{lo}, {hi}]"));
        }
        Ok(RealRange { lo, hi })
    }
}

impl From<RealRange> for [f64; 2] {
    fn from(r: RealRange) -> [f64; 2] {
        [r.lo, r.hi]
    }
}

/// Behavioral parameters of one synthetic user archetype.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchetypeSpec {
    pub name: String,
    /// Queries per session.
    pub n_queries: IntRange,
    /// Soft target for marks per query.
    pub props_per_query: IntRange,
    /// Soft target for distinct propositions per session.
    pub distinct_props_target: IntRange,
    /// Probability that a session (of >= 2 queries) carries a persistence
    /// run. 0 and 1 are exact by construction.
    pub persistence_prob: f64,
    /// Probability that a session (of >= 3 queries) carries a
    /// gap-and-return. 0 and 1 are exact by construction.
    pub intermittence_prob: f64,
    /// Expected page-opening clicks per query.
    pub clicks_per_query: f64,
    /// Seconds between consecutive queries.
    pub inter_event_seconds: RealRange,
    /// Tokens per query (soft target; marked propositions may force more).
    pub tokens_per_query: IntRange,
}

impl ArchetypeSpec {
    fn validate(&self) -> Result<(), SynthError> {
        let fail = |msg: String| Err(SynthError::InvalidSpec(msg));
        if self.name.trim().is_empty() {
            return fail("archetype name is empty".into());
        }
        if self.n_queries.lo < 1 {
            return fail(format!("'{}': n_queries must start at 1", self.name));
        }
        if self.props_per_query.lo < 1 {
            return fail(format!("'{}': props_per_query must start at 1", self.name));
        }
        if self.distinct_props_target.lo < 1 {
            return fail(format!(
                "'{}': distinct_props_target must start at 1",
                self.name
            ));
        }
        if self.tokens_per_query.lo < 1 {
            return fail(format!("'{}': tokens_per_query must start at 1", self.name));
        }
        for (value, what) in [
            (self.persistence_prob, "persistence_prob"),
            (self.intermittence_prob, "intermittence_prob"),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return fail(format!(
                    "'{}': {what} = {value} is outside [0, 1]",
                    self.name
                ));
            }
        }
        if !(self.clicks_per_query >= 0.0 && self.clicks_per_query.is_finite()) {
            return fail(format!("'{}': clicks_per_query must be >= 0", self.name));
        }
        if self.inter_event_seconds.lo < 0.0 {
            return fail(format!("'{}': inter_event_seconds must be >= 0", self.name));
        }
        Ok(())
    }
}

/// A generated session's archetype assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedLabel {
    pub session_id: String,
    pub archetype: String,
}

/// Output of [`generate`]: a corpus, its annotations and the planted
/// archetype of every session.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub sessions: Vec<Session>,
    pub annotations: Vec<AnnotationMatrix>,
    pub planted: Vec<PlantedLabel>,
}

/// SplitMix64: tiny, portable, and stable given a seed.
#[derive(Debug, Clone)]
struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53 random bits.
    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform integer below `n` (widening-multiply reduction).
    fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    fn int_in(&mut self, range: IntRange) -> usize {
        range.lo as usize + self.below(u64::from(range.hi - range.lo) + 1) as usize
    }

    fn real_in(&mut self, range: RealRange) -> f64 {
        range.lo + self.next_f64() * (range.hi - range.lo)
    }

    /// Exact at 0 and 1.
    fn bernoulli(&mut self, p: f64) -> bool {
        if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            self.next_f64() < p
        }
    }

    fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }

    fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len() as u64) as usize]
    }
}

/// A proposition whose lexicon can unambiguously encode it in query text.
struct UsableProp {
    column: usize,
    /// Lexicon entries that the auto-annotator maps back to exactly this
    /// proposition.
    safe_entries: Vec<String>,
}

fn usable_props(scheme: &PropositionScheme) -> Result<Vec<UsableProp>, SynthError> {
    let options = AutolabelOptions::default();
    let mut usable = Vec::new();
    for (column, prop) in scheme.propositions.iter().enumerate() {
        let mut safe_entries = Vec::new();
        for entry in &prop.lexicon {
            let row = autolabel(entry, scheme, &options).map_err(|e| {
                SynthError::InvalidSpec(format!("scheme is unusable for generation: {e}"))
            })?;
            let marks_only_this = row
                .marks
                .iter()
                .enumerate()
                .all(|(i, &m)| m == (i == column));
            if marks_only_this {
                safe_entries.push(entry.clone());
            }
        }
        if !safe_entries.is_empty() {
            usable.push(UsableProp {
                column,
                safe_entries,
            });
        }
    }
    if usable.is_empty() {
        return Err(SynthError::InvalidSpec(
            "no proposition has a lexicon entry that round-trips through the auto-annotator".into(),
        ));
    }
    Ok(usable)
}

/// Per-row proposition assignments for one session, as sets of usable-prop
/// indices. Construction invariants: when `want_persist` is false no
/// proposition occupies two consecutive rows; when `want_inter` is false
/// every proposition's rows are consecutive; the wanted patterns are
/// inserted explicitly.
fn build_marks(
    rng: &mut SplitMix64,
    spec: &ArchetypeSpec,
    n_queries: usize,
    n_usable: usize,
    want_persist: bool,
    want_inter: bool,
) -> Vec<Vec<usize>> {
    let ppq_lo = spec.props_per_query.lo as usize;
    let ppq_hi = (spec.props_per_query.hi as usize).max(ppq_lo);
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n_queries];

    let mut order: Vec<usize> = (0..n_usable).collect();
    rng.shuffle(&mut order);
    let mut fresh = order.into_iter();

    let distinct_goal = rng
        .int_in(spec.distinct_props_target)
        .clamp(1, n_usable)
        .max(if want_inter { 2 } else { 1 });

    if !want_persist {
        // every proposition is confined to a single row (two non-adjacent
        // rows for the dedicated gap proposition), so no run can appear
        if want_inter {
            let p = fresh.next().expect("capacity validated");
            let first = rng.below((n_queries - 2) as u64) as usize;
            let second = first + 2 + rng.below((n_queries - first - 2) as u64) as usize;
            rows[first].push(p);
            rows[second].push(p);
        }
        for row in rows.iter_mut() {
            while row.len() < ppq_lo {
                let Some(p) = fresh.next() else { break };
                row.push(p);
            }
        }
        let mut distinct = rows.iter().map(Vec::len).sum::<usize>() - usize::from(want_inter);
        while distinct < distinct_goal {
            let open: Vec<usize> = (0..n_queries).filter(|&r| rows[r].len() < ppq_hi).collect();
            if open.is_empty() {
                break;
            }
            let r = *rng.pick(&open);
            let Some(p) = fresh.next() else { break };
            rows[r].push(p);
            distinct += 1;
        }
        return rows;
    }

    // persistence allowed: propositions own contiguous row intervals
    let gap_prop = want_inter.then(|| fresh.next().expect("validated capacity"));
    let tiling_count = (distinct_goal - usize::from(want_inter))
        .clamp(1, n_queries)
        .min(n_usable - usize::from(want_inter));
    let tiling_props: Vec<usize> = (&mut fresh).take(tiling_count).collect();

    // tile the rows: each tiling proposition gets a contiguous segment
    let mut cuts: Vec<usize> = (1..n_queries).collect();
    rng.shuffle(&mut cuts);
    let mut boundaries: Vec<usize> = cuts.into_iter().take(tiling_count - 1).collect();
    boundaries.sort_unstable();
    boundaries.insert(0, 0);
    boundaries.push(n_queries);
    let mut intervals: Vec<(usize, usize, usize)> = Vec::new(); // (prop, start, end)
    for (i, &prop) in tiling_props.iter().enumerate() {
        intervals.push((prop, boundaries[i], boundaries[i + 1] - 1));
    }

    // leftover distinct propositions stack as short extra intervals
    let leftover = distinct_goal
        .saturating_sub(usize::from(want_inter))
        .saturating_sub(tiling_count);
    for _ in 0..leftover {
        let Some(prop) = fresh.next() else { break };
        let len = 1 + rng.below(2) as usize; // 1 or 2 rows
        let len = len.min(n_queries);
        let start = rng.below((n_queries - len + 1) as u64) as usize;
        intervals.push((prop, start, start + len - 1));
    }

    // widen intervals toward the per-row coverage targets
    let coverage_of = |intervals: &[(usize, usize, usize)], r: usize| {
        intervals
            .iter()
            .filter(|&&(_, s, e)| s <= r && r <= e)
            .count()
    };
    for r in 0..n_queries {
        let target = rng.int_in(spec.props_per_query).min(intervals.len());
        while coverage_of(&intervals, r) < target {
            let candidates: Vec<usize> = intervals
                .iter()
                .enumerate()
                .filter(|&(_, &(_, s, e))| (e + 1 == r) || (r + 1 == s))
                .map(|(i, _)| i)
                .collect();
            if candidates.is_empty() {
                break;
            }
            let chosen = *rng.pick(&candidates);
            if intervals[chosen].2 + 1 == r {
                intervals[chosen].2 = r;
            } else {
                intervals[chosen].1 = r;
            }
        }
    }

    // guarantee the run when the session is long enough for one
    if n_queries >= 2 && !intervals.iter().any(|&(_, s, e)| e > s) {
        let first = intervals
            .iter()
            .position(|&(_, s, _)| s == 0)
            .expect("row 0 is tiled");
        intervals[first].2 = intervals[first].2.max(1);
    }

    // dedicated gap proposition: two single-row visits, >= 1 row apart
    if let Some(p) = gap_prop {
        let first = rng.below((n_queries - 2) as u64) as usize;
        let second = first + 2 + rng.below((n_queries - first - 2) as u64) as usize;
        intervals.push((p, first, first));
        intervals.push((p, second, second));
    }

    for &(prop, s, e) in &intervals {
        for row in rows.iter_mut().take(e + 1).skip(s) {
            if !row.contains(&prop) {
                row.push(prop);
            }
        }
    }
    rows
}

fn synthesize_query_text(
    rng: &mut SplitMix64,
    spec: &ArchetypeSpec,
    usable: &[UsableProp],
    row_props: &[usize],
) -> String {
    fn push_entry(parts: &mut Vec<String>, count: &mut usize, entry: &str) {
        *count += entry.split_whitespace().count();
        parts.push(entry.to_string());
    }

    let token_target = rng.int_in(spec.tokens_per_query);
    let mut parts: Vec<String> = Vec::new();
    let mut token_count = 0usize;

    for &prop in row_props {
        let entry = rng.pick(&usable[prop].safe_entries).clone();
        push_entry(&mut parts, &mut token_count, &entry);
    }
    while token_count < token_target {
        let prop = *rng.pick(row_props);
        let entry = rng.pick(&usable[prop].safe_entries).clone();
        if rng.bernoulli(0.15) {
            parts.push("AND".to_string());
            token_count += 1;
        }
        push_entry(&mut parts, &mut token_count, &entry);
    }
    parts.join(" ")
}

/// Generates a deterministic corpus from archetype specs.
///
/// Each spec contributes `count` sessions. The construction guarantees,
/// for every seed: sessions and annotations satisfy their invariants; a
/// session drawn with persistence gets a run and one drawn without gets
/// none (same for intermittence and gaps, on sessions long enough to
/// express them); and [`autolabel_session`](crate::annotation::autolabel_session)
/// applied to the generated text recovers exactly the planted marks.
pub fn generate(
    specs: &[(ArchetypeSpec, usize)],
    scheme: &PropositionScheme,
    seed: u64,
) -> Result<SynthCorpus, SynthError> {
    if specs.is_empty() {
        return Err(SynthError::InvalidSpec("no archetypes given".into()));
    }
    for (spec, count) in specs {
        spec.validate()?;
        if *count < 1 {
            return Err(SynthError::InvalidSpec(format!(
                "'{}': count must be >= 1",
                spec.name
            )));
        }
    }
    scheme
        .validate()
        .map_err(|e| SynthError::InvalidSpec(format!("scheme invalid: {e}")))?;

    let usable = usable_props(scheme)?;
    for (spec, _) in specs {
        // sessions that must avoid persistence cannot reuse propositions,
        // so the scheme has to offer one distinct proposition per mark
        if spec.persistence_prob < 1.0 {
            let worst = spec.n_queries.hi as usize * spec.props_per_query.lo as usize;
            if worst > usable.len() {
                return Err(SynthError::InvalidSpec(format!(
                    "'{}': up to {worst} marks without proposition reuse, but only {} usable propositions",
                    spec.name,
                    usable.len()
                )));
            }
        }
        if spec.intermittence_prob > 0.0 && usable.len() < 2 {
            return Err(SynthError::InvalidSpec(format!(
                "'{}': intermittence needs at least 2 usable propositions",
                spec.name
            )));
        }
    }

    let mut rng = SplitMix64::new(seed);
    let n_columns = scheme.n_columns();
    let labels = scheme.column_labels();

    let mut corpus = SynthCorpus {
        sessions: Vec::new(),
        annotations: Vec::new(),
        planted: Vec::new(),
    };
    let mut user_counter = 0usize;

    for (spec, count) in specs {
        let slug: String = spec
            .name
            .to_lowercase()
            .chars()
            .map(|c| if c.is_alphanumeric() { c } else { '-' })
            .collect();
        for i in 0..*count {
            let session_id = format!("{slug}-{i:03}");
            let n_queries = rng.int_in(spec.n_queries);
            let want_persist = n_queries >= 2 && rng.bernoulli(spec.persistence_prob);
            let want_inter = n_queries >= 3 && rng.bernoulli(spec.intermittence_prob);

            let row_props = build_marks(
                &mut rng,
                spec,
                n_queries,
                usable.len(),
                want_persist,
                want_inter,
            );

            let mut events = Vec::new();
            let mut annotation_rows = Vec::new();
            let mut t = 0.0_f64;
            for (r, props) in row_props.iter().enumerate() {
                let text = synthesize_query_text(&mut rng, spec, &usable, props);
                events.push(SessionEvent::Query {
                    t,
                    text: text.clone(),
                });

                let whole = spec.clicks_per_query.floor();
                let n_clicks =
                    whole as usize + usize::from(rng.bernoulli(spec.clicks_per_query - whole));
                let gap = rng.real_in(spec.inter_event_seconds);
                for j in 0..n_clicks {
                    events.push(SessionEvent::Click {
                        t: t + gap * (j + 1) as f64 / (n_clicks + 1) as f64,
                        url: Some(format!("https://example.org/{session_id}/q{r}/c{j}")),
                    });
                }
                t += gap;

                let mut marks = vec![false; n_columns];
                for &p in props {
                    marks[usable[p].column] = true;
                }
                annotation_rows.push(AnnotationRow {
                    query_index: r,
                    query_text: text,
                    marks,
                    autre_terms: Vec::new(),
                });
            }

            corpus.sessions.push(Session {
                session_id: session_id.clone(),
                user_id: format!("u{user_counter:03}"),
                task_id: scheme.task_id.clone(),
                events,
            });
            corpus.annotations.push(AnnotationMatrix {
                session_id: session_id.clone(),
                scheme_ref: scheme.task_id.clone(),
                labels: labels.clone(),
                rows: annotation_rows,
            });
            corpus.planted.push(PlantedLabel {
                session_id,
                archetype: spec.name.clone(),
            });
            user_counter += 1;
        }
    }
    Ok(corpus)
}

/// The five bundled archetypes, qualitatively mirroring the observed
/// groups: (1) revisits propositions across many queries with few clicks,
/// (2) minimal one-or-two-query effort, (3) exhaustive long sessions with
/// heavy clicking, (4) long multi-proposition queries without revisits,
/// (5) longer low-vocabulary sessions around few propositions.
pub fn default_archetypes(scheme: &PropositionScheme) -> Vec<ArchetypeSpec> {
    let n_props = scheme.propositions.len().max(1) as u32;
    let cap = |range: IntRange| IntRange::new(range.lo.min(n_props), range.hi.min(n_props));
    vec![
        ArchetypeSpec {
            name: "revisiting-light-clicker".into(),
            n_queries: IntRange::new(8, 14),
            props_per_query: IntRange::new(1, 2),
            distinct_props_target: cap(IntRange::new(3, 5)),
            persistence_prob: 1.0,
            intermittence_prob: 1.0,
            clicks_per_query: 0.25,
            inter_event_seconds: RealRange::new(8.0, 20.0),
            tokens_per_query: IntRange::new(2, 4),
        },
        ArchetypeSpec {
            name: "minimal-effort".into(),
            n_queries: IntRange::new(1, 2),
            props_per_query: IntRange::new(1, 2),
            distinct_props_target: cap(IntRange::new(1, 2)),
            persistence_prob: 0.0,
            intermittence_prob: 0.0,
            clicks_per_query: 0.5,
            inter_event_seconds: RealRange::new(20.0, 60.0),
            tokens_per_query: IntRange::new(2, 5),
        },
        ArchetypeSpec {
            name: "exhaustive-investigator".into(),
            n_queries: IntRange::new(14, 26),
            props_per_query: IntRange::new(1, 2),
            distinct_props_target: cap(IntRange::new(4, 5)),
            persistence_prob: 1.0,
            intermittence_prob: 1.0,
            clicks_per_query: 1.2,
            inter_event_seconds: RealRange::new(60.0, 150.0),
            tokens_per_query: IntRange::new(2, 4),
        },
        ArchetypeSpec {
            name: "multi-proposition-formulator".into(),
            n_queries: IntRange::new(3, 6),
            props_per_query: IntRange::new(2, 3),
            distinct_props_target: cap(IntRange::new(3, 5)),
            persistence_prob: 1.0,
            intermittence_prob: 0.0,
            clicks_per_query: 0.7,
            inter_event_seconds: RealRange::new(15.0, 45.0),
            tokens_per_query: IntRange::new(6, 9),
        },
        ArchetypeSpec {
            name: "narrow-plodder".into(),
            n_queries: IntRange::new(5, 9),
            props_per_query: IntRange::new(1, 1),
            distinct_props_target: cap(IntRange::new(1, 2)),
            persistence_prob: 1.0,
            intermittence_prob: 0.0,
            clicks_per_query: 0.8,
            inter_event_seconds: RealRange::new(30.0, 80.0),
            tokens_per_query: IntRange::new(1, 3),
        },
    ]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArchetypeFileEntry {
    name: String,
    count: usize,
    n_queries: IntRange,
    props_per_query: IntRange,
    distinct_props_target: IntRange,
    persistence_prob: f64,
    intermittence_prob: f64,
    clicks_per_query: f64,
    inter_event_seconds: RealRange,
    tokens_per_query: IntRange,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArchetypeFile {
    archetypes: Vec<ArchetypeFileEntry>,
}

/// Reads an archetype spec file: `{"archetypes": [{"name", "count",
/// "n_queries": [lo, hi], ...}]}`.
pub fn load_archetypes(path: impl AsRef<Path>) -> Result<Vec<(ArchetypeSpec, usize)>, SynthError> {
    let file = File::open(path)?;
    let parsed: ArchetypeFile = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
    Ok(parsed
        .archetypes
        .into_iter()
        .map(|entry| {
            (
                ArchetypeSpec {
                    name: entry.name,
                    n_queries: entry.n_queries,
                    props_per_query: entry.props_per_query,
                    distinct_props_target: entry.distinct_props_target,
                    persistence_prob: entry.persistence_prob,
                    intermittence_prob: entry.intermittence_prob,
                    clicks_per_query: entry.clicks_per_query,
                    inter_event_seconds: entry.inter_event_seconds,
                    tokens_per_query: entry.tokens_per_query,
                },
                entry.count,
            )
        })
        .collect())
}
