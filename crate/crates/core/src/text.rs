//! Query-text normalization and fuzzy string matching.
//!
//! Raw query strings are kept verbatim in the corpus; everything downstream
//! (query length, lexicon matching) goes through [`normalize_tokens`] so that
//! the two sides agree on what a "word" is.

use std::collections::HashMap;

/// Lexical class of a normalized token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenClass {
    /// An ordinary search term.
    Word,
    /// A boolean search operator (`AND`, `OR`, `NOT`).
    Operator,
}

/// One normalized token of a query string.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    /// Lowercased, diacritics-folded text with surrounding punctuation removed.
    pub text: String,
    pub class: TokenClass,
}

impl Token {
    pub fn word(text: &str) -> Token {
        Token {
            text: text.to_string(),
            class: TokenClass::Word,
        }
    }

    pub fn is_word(&self) -> bool {
        self.class == TokenClass::Word
    }
}

/// Splits a query string into normalized tokens.
///
/// Tokens are split on whitespace, stripped of surrounding punctuation
/// (straight and typographic quotes included), lowercased and
/// diacritics-folded (`é` → `e`). Tokens equal to `AND`, `OR` or `NOT`
/// (any case) are classed [`TokenClass::Operator`]; everything else is a
/// [`TokenClass::Word`]. Tokens that end up empty are dropped.
///
/// The function is idempotent: normalizing the space-joined output is a
/// no-op.
pub fn normalize_tokens(text: &str) -> Vec<Token> {
    text.split_whitespace()
        .filter_map(|raw| {
            let trimmed = raw.trim_matches(|c: char| !c.is_alphanumeric());
            if trimmed.is_empty() {
                return None;
            }
            let folded = fold_diacritics(&trimmed.to_lowercase());
            // classified on the folded text so renormalizing is a no-op
            let class = match folded.as_str() {
                "and" | "or" | "not" => TokenClass::Operator,
                _ => TokenClass::Word,
            };
            Some(Token {
                text: folded,
                class,
            })
        })
        .collect()
}

/// Replaces accented Latin letters by their base letter and expands the
/// `œ`/`æ` ligatures. Combining marks of already-decomposed input are
/// dropped. Characters outside the table pass through unchanged.
pub fn fold_diacritics(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            'à' | 'á' | 'â' | 'ã' | 'ä' | 'å' | 'ā' | 'ă' | 'ą' => out.push('a'),
            'ç' | 'ć' | 'ĉ' | 'ċ' | 'č' => out.push('c'),
            'ď' | 'đ' => out.push('d'),
            'è' | 'é' | 'ê' | 'ë' | 'ē' | 'ĕ' | 'ė' | 'ę' | 'ě' => out.push('e'),
            'ĝ' | 'ğ' | 'ġ' | 'ģ' => out.push('g'),
            'ĥ' | 'ħ' => out.push('h'),
            'ì' | 'í' | 'î' | 'ï' | 'ĩ' | 'ī' | 'ĭ' | 'į' | 'ı' => out.push('i'),
            'ĵ' => out.push('j'),
            'ķ' => out.push('k'),
            'ĺ' | 'ļ' | 'ľ' | 'ł' => out.push('l'),
            'ñ' | 'ń' | 'ņ' | 'ň' => out.push('n'),
            'ò' | 'ó' | 'ô' | 'õ' | 'ö' | 'ø' | 'ō' | 'ŏ' | 'ő' => out.push('o'),
            'ŕ' | 'ŗ' | 'ř' => out.push('r'),
            'ś' | 'ŝ' | 'ş' | 'š' => out.push('s'),
            'ţ' | 'ť' | 'ŧ' => out.push('t'),
            'ù' | 'ú' | 'û' | 'ü' | 'ũ' | 'ū' | 'ŭ' | 'ů' | 'ű' | 'ų' => out.push('u'),
            'ŵ' => out.push('w'),
            'ý' | 'ÿ' | 'ŷ' => out.push('y'),
            'ź' | 'ż' | 'ž' => out.push('z'),
            'œ' => out.push_str("oe"),
            'æ' => out.push_str("ae"),
            'ß' => out.push_str("ss"),
            // combining diacritical marks (input already in decomposed form)
            '\u{0300}'..='\u{036F}' => {}
            _ => out.push(c),
        }
    }
    out
}

/// Unrestricted Damerau–Levenshtein distance between two strings, counted
/// in Unicode scalar values.
///
/// Edits are insertion, deletion, substitution and transposition of two
/// adjacent characters; unlike the optimal-string-alignment variant, a
/// transposed pair may be edited again (`ca` → `abc` is distance 2).
pub fn damerau_levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (la, lb) = (a.len(), b.len());
    if la == 0 {
        return lb;
    }
    if lb == 0 {
        return la;
    }

    let max_dist = la + lb;
    let mut d = vec![vec![0usize; lb + 2]; la + 2];
    d[0][0] = max_dist;
    for i in 0..=la {
        d[i + 1][0] = max_dist;
        d[i + 1][1] = i;
    }
    for j in 0..=lb {
        d[0][j + 1] = max_dist;
        d[1][j + 1] = j;
    }

    // row index of the most recent occurrence of each character of `a`
    let mut last_row: HashMap<char, usize> = HashMap::new();
    for i in 1..=la {
        let mut last_match_col = 0usize;
        for j in 1..=lb {
            let i1 = *last_row.get(&b[j - 1]).unwrap_or(&0);
            let j1 = last_match_col;
            let cost = if a[i - 1] == b[j - 1] {
                last_match_col = j;
                0
            } else {
                1
            };
            let substitution = d[i][j] + cost;
            let insertion = d[i + 1][j] + 1;
            let deletion = d[i][j + 1] + 1;
            let transposition = d[i1][j1] + (i - i1 - 1) + 1 + (j - j1 - 1);
            d[i + 1][j + 1] = substitution.min(insertion).min(deletion).min(transposition);
        }
        last_row.insert(a[i - 1], i);
    }
    d[la + 1][lb + 1]
}
