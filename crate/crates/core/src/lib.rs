//! Behavioral analysis of web-search sessions.
//!
//! `sillage` turns raw search sessions and thematic-proposition
//! annotations into eight session-level behavioral variables, checks
//! annotation reliability with Cohen's kappa, and derives a user typology
//! through z-score standardization, correlation PCA and Ward hierarchical
//! clustering, down to cluster profiles and a principal-plane figure.
//!
//! The pipeline, end to end:
//!
//! 1. [`corpus`] loads the proposition scheme (`scheme.json`) and the
//!    session log (`sessions.jsonl`).
//! 2. [`annotation`] loads or produces the queries-by-propositions binary
//!    matrices (`annotations.csv`), measures inter-annotator agreement,
//!    and offers a fuzzy lexicon-based auto-annotator.
//! 3. [`features`] computes the eight variables per session
//!    (`features.csv`).
//! 4. [`analysis`] standardizes, runs PCA, clusters with the Ward
//!    criterion, cuts the dendrogram and profiles the clusters
//!    (`report.json`).
//! 5. [`plot`] renders the report as a standalone SVG scatter of the
//!    first principal plane with per-cluster concentration ellipses.
//! 6. [`synth`] generates seeded synthetic corpora from behavioral
//!    archetypes, for demos and end-to-end testing.
//!
//! Every step is deterministic: fixed inputs (and, for generation, a
//! fixed seed) produce byte-identical outputs.

pub mod analysis;
pub mod annotation;
pub mod corpus;
pub mod features;
pub mod plot;
pub mod synth;
pub mod text;

pub use analysis::{
    adjusted_rand_index, analyze, cluster_profiles, confidence_ellipse, cut, describe, pca,
    standardize, ward_cluster, AnalysisError, ComponentSelection, Dendrogram, TypologyReport,
};
pub use annotation::{
    align, autolabel, autolabel_session, cohen_kappa, load_annotations, save_annotations,
    AgreementReport, AnnotationError, AnnotationMatrix, AutolabelOptions,
};
pub use corpus::{
    load_scheme, load_sessions, save_sessions, validate_corpus, CorpusError, PropositionScheme,
    Session, SessionEvent,
};
pub use features::{
    extract, extract_all, load_features, save_features, FeatureError, FeatureMatrix, FeatureVector,
    FlagOptions, VARIABLE_NAMES,
};
pub use plot::render_svg;
pub use synth::{default_archetypes, generate, load_archetypes, ArchetypeSpec, SynthError};
