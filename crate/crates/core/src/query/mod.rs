//! Query modification: language selection, tokenization, spelling
//! correction, synonym expansion, stopword filtering and classification,
//! composed by [`annotate`] into an [`AnnotatedQuery`].

mod dictionary;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use dictionary::{
    fixture_dictionary, Dictionary, DictionaryEntry, DictionaryError, TermKind, DEFAULT_MAX_EDIT_DISTANCE,
};

use crate::personalization::UserProfile;
use crate::taxonomy::Category;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("empty query after stopword removal")]
    EmptyQuery,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedTerm {
    pub surface: String,
    pub corrected: String,
    pub synonyms: Vec<String>,
    pub categories: BTreeSet<Category>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TermRelation {
    pub from: String,
    pub to: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedQuery {
    pub raw: String,
    pub language: String,
    pub terms: Vec<AnnotatedTerm>,
    pub relations: Vec<TermRelation>,
    pub removed_stopwords: Vec<String>,
    pub target_categories: BTreeSet<Category>,
    /// Set when the terms came from the profile after the raw text matched
    /// nothing in the dictionary.
    #[serde(default)]
    pub profile_fallback: bool,
    /// Per-category weights set by profile enrichment; absent means 1.0.
    #[serde(default)]
    pub category_weights: BTreeMap<Category, f64>,
    /// Low-weight context terms from the profile. They inform ranking and
    /// are never sent to sites.
    #[serde(default)]
    pub context_terms: Vec<String>,
}

impl AnnotatedQuery {
    pub fn category_weight(&self, c: Category) -> f64 {
        self.category_weights.get(&c).copied().unwrap_or(1.0)
    }

    /// Corrected terms in order, followed by their synonyms; no duplicates.
    pub fn search_terms(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for t in &self.terms {
            if seen.insert(t.corrected.clone()) {
                out.push(t.corrected.clone());
            }
        }
        for t in &self.terms {
            for s in &t.synonyms {
                if seen.insert(s.clone()) {
                    out.push(s.clone());
                }
            }
        }
        out
    }

    /// Canonical byte form used for determinism checks.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("annotated query serializes")
    }
}

pub fn tokenize(raw: &str) -> Vec<String> {
    raw.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub fn detect_language(raw: &str, dict: &Dictionary) -> String {
    let tokens = tokenize(raw);
    let default = dict.default_language();
    let mut best: Option<(usize, &str)> = None;
    for lang in dict.languages() {
        let hits = tokens.iter().filter(|t| dict.contains(lang, t)).count();
        let better = match best {
            None => true,
            Some((n, cur)) => hits > n || (hits == n && lang == default && cur != default),
        };
        if better {
            best = Some((hits, lang));
        }
    }
    match best {
        Some((n, lang)) if n > 0 => lang.to_string(),
        _ => default.to_string(),
    }
}

/// Levenshtein distance with unit costs, abandoning once every cell of a row
/// exceeds `bound`; returns `bound + 1` in that case.
pub fn edit_distance_bounded(a: &str, b: &str, bound: usize) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.len().abs_diff(b.len()) > bound {
        return bound + 1;
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        let mut row_min = cur[0];
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
            row_min = row_min.min(cur[j]);
        }
        if row_min > bound {
            return bound + 1;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()].min(bound + 1)
}

pub fn spellcheck(term: &str, dict: &Dictionary, language: &str) -> String {
    spellcheck_within(term, dict, language, DEFAULT_MAX_EDIT_DISTANCE)
}

pub fn spellcheck_within(term: &str, dict: &Dictionary, language: &str, max_edits: usize) -> String {
    if dict.contains(language, term) {
        return term.to_string();
    }
    let Some(index) = dict.spell_index(language) else {
        return term.to_string();
    };
    let k = max_edits.min(index.max_edits);
    let mut candidates = BTreeSet::new();
    for v in dictionary::delete_variants(term, k) {
        if let Some(ids) = index.deletes.get(&v) {
            candidates.extend(ids.iter().copied());
        }
    }
    let mut best: Option<(usize, &str)> = None;
    for id in candidates {
        let cand = index.terms[id as usize].as_str();
        let d = edit_distance_bounded(term, cand, k);
        if d > k {
            continue;
        }
        if best.is_none_or(|(bd, bt)| d < bd || (d == bd && cand < bt)) {
            best = Some((d, cand));
        }
    }
    best.map_or_else(|| term.to_string(), |(_, t)| t.to_string())
}

pub fn expand_synonyms(term: &str, dict: &Dictionary, language: &str) -> Vec<String> {
    dict.get(language, term).map(|e| e.synonyms.clone()).unwrap_or_default()
}

pub fn filter_stopwords(terms: &[String], dict: &Dictionary, language: &str) -> (Vec<String>, Vec<String>) {
    terms
        .iter()
        .cloned()
        .partition(|t| dict.get(language, t).is_none_or(|e| e.kind != TermKind::Stopword))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub categories: Vec<BTreeSet<Category>>,
    pub relations: Vec<TermRelation>,
}

pub fn classify_terms(terms: &[String], dict: &Dictionary, language: &str) -> Classification {
    let present: BTreeSet<&str> = terms.iter().map(String::as_str).collect();
    let mut relations = Vec::new();
    let mut categories = Vec::with_capacity(terms.len());
    for t in terms {
        let entry = dict.get(language, t);
        categories.push(entry.map(|e| e.categories.clone()).unwrap_or_default());
        for (other, label) in entry.map(|e| e.related.as_slice()).unwrap_or_default() {
            let rel = TermRelation {
                from: t.clone(),
                to: other.clone(),
                label: label.clone(),
            };
            if other != t && present.contains(other.as_str()) && !relations.contains(&rel) {
                relations.push(rel);
            }
        }
    }
    Classification { categories, relations }
}

pub fn annotate(raw: &str, dict: &Dictionary, profile: Option<&UserProfile>) -> Result<AnnotatedQuery, QueryError> {
    let first = annotate_text(raw, raw, dict);
    let matched = first
        .terms
        .iter()
        .any(|t| dict.get(&first.language, &t.corrected).is_some_and(|e| e.kind == TermKind::Term));
    let conditions: Vec<&str> = profile
        .map(|p| p.health_conditions.iter().map(String::as_str).filter(|c| !c.trim().is_empty()).collect())
        .unwrap_or_default();
    if !matched && !conditions.is_empty() {
        // Unmatched words are dropped: the profile's conditions stand in for
        // the request.
        let mut retry = annotate_text(raw, &conditions.join(" "), dict);
        retry.removed_stopwords.splice(0..0, first.removed_stopwords.iter().cloned());
        retry.profile_fallback = true;
        if !retry.terms.is_empty() {
            return Ok(retry);
        }
    }
    if first.terms.is_empty() {
        return Err(QueryError::EmptyQuery);
    }
    Ok(first)
}

fn annotate_text(raw: &str, text: &str, dict: &Dictionary) -> AnnotatedQuery {
    let language = detect_language(text, dict);
    let mut kept_surface = Vec::new();
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for surface in tokenize(text) {
        let corrected = spellcheck(&surface, dict, &language);
        let (k, _) = filter_stopwords(std::slice::from_ref(&corrected), dict, &language);
        if k.is_empty() {
            removed.push(surface);
        } else {
            kept_surface.push(surface);
            kept.push(corrected);
        }
    }
    let class = classify_terms(&kept, dict, &language);
    let terms: Vec<AnnotatedTerm> = kept_surface
        .into_iter()
        .zip(kept)
        .zip(class.categories)
        .map(|((surface, corrected), categories)| AnnotatedTerm {
            synonyms: expand_synonyms(&corrected, dict, &language),
            surface,
            corrected,
            categories,
        })
        .collect();
    let target_categories = terms.iter().flat_map(|t| t.categories.iter().copied()).collect();
    AnnotatedQuery {
        raw: raw.to_string(),
        language,
        terms,
        relations: class.relations,
        removed_stopwords: removed,
        target_categories,
        profile_fallback: false,
        category_weights: BTreeMap::new(),
        context_terms: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Dictionary {
        Dictionary::parse(
            "fever\ten\tTERM\t\t\t\ncough\ten\tTERM\t\t\t\nand\ten\tSTOPWORD\t\t\t\n",
            "en",
        )
        .unwrap()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Chest pain"), ["chest", "pain"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("pain, between ribs!"), ["pain", "between", "ribs"]);
        assert_eq!(tokenize("Болка в гърдите"), ["болка", "в", "гърдите"]);
    }

    #[test]
    fn spellcheck_examples() {
        let d = small();
        assert_eq!(spellcheck("fever", &d, "en"), "fever");
        assert_eq!(spellcheck("fevr", &d, "en"), "fever");
        assert_eq!(spellcheck("xqzt", &d, "en"), "xqzt");
        assert_eq!(spellcheck("fevr", &d, "bg"), "fevr");
    }

    #[test]
    fn bounded_distance_matches_known_values() {
        assert_eq!(edit_distance_bounded("kitten", "sitting", 5), 3);
        assert_eq!(edit_distance_bounded("kitten", "sitting", 2), 3);
        assert_eq!(edit_distance_bounded("", "ab", 2), 2);
        assert_eq!(edit_distance_bounded("abc", "abc", 0), 0);
    }

    #[test]
    fn language_detection() {
        let d = fixture_dictionary();
        assert_eq!(detect_language("chest pain", &d), "en");
        assert_eq!(detect_language("", &d), "en");
        assert_eq!(detect_language("qqq zzz", &d), "en");
        assert_eq!(detect_language("болка в гърдите", &d), "bg");
    }

    #[test]
    fn annotate_examples() {
        let d = fixture_dictionary();
        let a = annotate("fevr and cough", &d, None).unwrap();
        let corrected: Vec<&str> = a.terms.iter().map(|t| t.corrected.as_str()).collect();
        assert_eq!(corrected, ["fever", "cough"]);
        assert_eq!(a.removed_stopwords, ["and"]);
        assert_eq!(a.relations.len(), 1);
        assert_eq!(annotate("do on between", &d, None), Err(QueryError::EmptyQuery));

        let profile = UserProfile {
            health_conditions: vec!["asthma".into()],
            ..UserProfile::new("u1")
        };
        let a = annotate("xqzt", &d, Some(&profile)).unwrap();
        let corrected: Vec<&str> = a.terms.iter().map(|t| t.corrected.as_str()).collect();
        assert_eq!(corrected, ["asthma"]);
        assert!(a.profile_fallback);
        assert_eq!(a.raw, "xqzt");
    }
}
