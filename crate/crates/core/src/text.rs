//! Label canonicalization shared by ontology matching and SBVR span checks.

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Lowercases, folds accents, turns punctuation into word breaks and
/// collapses whitespace: `"Joint d'Étanchéité"` becomes
/// `"joint d etancheite"`.
pub fn canonical_label(label: &str) -> String {
    let mut folded = String::with_capacity(label.len());
    for c in label.nfd().filter(|c| !is_combining_mark(*c)) {
        match c {
            'œ' | 'Œ' => folded.push_str("oe"),
            'æ' | 'Æ' => folded.push_str("ae"),
            'ß' => folded.push_str("ss"),
            c if c.is_alphanumeric() => folded.extend(c.to_lowercase()),
            _ => folded.push(' '),
        }
    }
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// CamelCase local name minted from a label: `"étanchéité à l'air"` becomes
/// `"EtancheiteALAir"`.
pub fn camel_case(label: &str) -> String {
    canonical_label(label)
        .split(' ')
        .filter(|w| !w.is_empty())
        .map(|word| {
            let mut chars = word.chars();
            let first = chars.next().map(|c| c.to_uppercase().collect::<String>());
            first.unwrap_or_default() + chars.as_str()
        })
        .collect()
}

/// Matching key for property phrases: the canonical label without a leading
/// `has`/`have` auxiliary, so "has recovery" and "must have recovery" both
/// key to "recovery".
pub fn property_key(label: &str) -> String {
    let canonical = canonical_label(label);
    let words: Vec<&str> = canonical.split(' ').collect();
    match words.iter().position(|w| *w == "has" || *w == "have") {
        Some(pos) if pos + 1 < words.len() => words[pos + 1..].join(" "),
        _ => canonical,
    }
}

/// Splits a camelCase local name into words: `"hasRecovery"` becomes
/// `"has recovery"`, `"Zone1"` becomes `"zone 1"`.
pub fn split_camel(name: &str) -> String {
    let mut out = String::with_capacity(name.len() + 4);
    let mut prev: Option<char> = None;
    for c in name.chars() {
        if let Some(p) = prev {
            let boundary = (c.is_uppercase() && p.is_lowercase())
                || (c.is_ascii_digit() && p.is_alphabetic())
                || (c.is_alphabetic() && p.is_ascii_digit());
            if boundary {
                out.push(' ');
            }
        }
        out.extend(c.to_lowercase());
        prev = Some(c);
    }
    canonical_label(&out)
}
