//! Shared fixtures for the pipeline benchmarks.

use sillage::corpus::{Proposition, PropositionScheme};
use sillage::features::FeatureMatrix;

/// A five-proposition scheme with lexicons, equivalent in shape to the
/// bundled demo task.
pub fn bench_scheme() -> PropositionScheme {
    let lexicons: [&[&str]; 5] = [
        &[
            "programme",
            "plagiat",
            "detecteur",
            "detection",
            "plagiarism",
            "program",
        ],
        &["methodologie", "methode", "analyse", "texte", "textes"],
        &["morphologie", "n-grammes", "ngrammes", "mots", "phrases"],
        &[
            "ressources",
            "externes",
            "dictionnaire",
            "thesaurus",
            "word embeddings",
            "embeddings",
        ],
        &[
            "avantages",
            "avantage",
            "inconvenients",
            "inconvenient",
            "comparaison",
            "meilleure",
        ],
    ];
    PropositionScheme {
        task_id: "bench-task".into(),
        statement: "benchmark scheme".into(),
        propositions: lexicons
            .iter()
            .enumerate()
            .map(|(i, words)| Proposition {
                label: format!("P{}", i + 1),
                description: format!("proposition {}", i + 1),
                lexicon: words.iter().map(|w| w.to_string()).collect(),
            })
            .collect(),
        include_autre: true,
    }
}

/// Deterministic feature matrix of `n` rows with generic correlations.
pub fn bench_features(n: usize) -> FeatureMatrix {
    let mut state = 0xbe_0001_u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let rows: Vec<[f64; 8]> = (0..n)
        .map(|_| {
            let base = next() * 10.0;
            std::array::from_fn(|j| base * (1.0 + j as f64 * 0.25) + next() * 3.0)
        })
        .collect();
    FeatureMatrix {
        session_ids: (0..n).map(|i| format!("s{i:04}")).collect(),
        rows,
    }
}
