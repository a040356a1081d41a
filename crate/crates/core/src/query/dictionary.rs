//! Multilingual term store: tab-separated file format, lookup by
//! `(language, term)`, and the built-in bilingual fixture.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::taxonomy::Category;
use crate::vocab::{
    CategoryVocab, GENERAL_SYMPTOMS, RELATIONS_EN, STOPWORDS_BG, STOPWORDS_EN, SYNONYMS_EN, TERMS_BG, VOCAB,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    Term,
    Stopword,
}

impl TermKind {
    fn as_str(self) -> &'static str {
        match self {
            TermKind::Term => "TERM",
            TermKind::Stopword => "STOPWORD",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DictionaryEntry {
    pub term: String,
    pub language: String,
    pub kind: TermKind,
    pub synonyms: Vec<String>,
    pub related: Vec<(String, String)>,
    pub categories: BTreeSet<Category>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DictionaryError {
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("dictionary has no entries")]
    Empty,
}

/// Deletion-neighbourhood index: every term is stored under each string
/// reachable from it by at most `max_edits` character deletions.
#[derive(Debug, Clone, Default)]
pub(crate) struct SpellIndex {
    pub max_edits: usize,
    pub deletes: HashMap<String, Vec<u32>>,
    pub terms: Vec<String>,
}

impl SpellIndex {
    fn build(terms: Vec<String>, max_edits: usize) -> Self {
        let mut deletes: HashMap<String, Vec<u32>> = HashMap::new();
        for (i, t) in terms.iter().enumerate() {
            for v in delete_variants(t, max_edits) {
                deletes.entry(v).or_default().push(i as u32);
            }
        }
        SpellIndex {
            max_edits,
            deletes,
            terms,
        }
    }
}

/// All strings obtained from `s` by deleting up to `k` characters,
/// including `s` itself.
pub(crate) fn delete_variants(s: &str, k: usize) -> BTreeSet<String> {
    let mut out = BTreeSet::from([s.to_string()]);
    let mut frontier = vec![s.chars().collect::<Vec<char>>()];
    for _ in 0..k {
        let mut next = Vec::new();
        for w in &frontier {
            for i in 0..w.len() {
                let mut v = w.clone();
                v.remove(i);
                if out.insert(v.iter().collect()) {
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    out
}

#[derive(Debug, Clone)]
pub struct Dictionary {
    entries: BTreeMap<(String, String), DictionaryEntry>,
    default_language: String,
    spell: HashMap<String, SpellIndex>,
}

pub const DEFAULT_MAX_EDIT_DISTANCE: usize = 2;

impl PartialEq for Dictionary {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries && self.default_language == other.default_language
    }
}

impl Dictionary {
    pub fn new(entries: Vec<DictionaryEntry>, default_language: &str) -> Result<Self, DictionaryError> {
        if entries.is_empty() {
            return Err(DictionaryError::Empty);
        }
        let mut map = BTreeMap::new();
        for e in entries {
            map.insert((e.language.clone(), e.term.clone()), e);
        }
        let mut by_lang: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (lang, term) in map.keys() {
            by_lang.entry(lang.clone()).or_default().push(term.clone());
        }
        let spell = by_lang
            .into_iter()
            .map(|(lang, terms)| (lang, SpellIndex::build(terms, DEFAULT_MAX_EDIT_DISTANCE)))
            .collect();
        Ok(Dictionary {
            entries: map,
            default_language: default_language.to_string(),
            spell,
        })
    }

    pub fn default_language(&self) -> &str {
        &self.default_language
    }

    pub fn languages(&self) -> BTreeSet<&str> {
        self.entries.keys().map(|(l, _)| l.as_str()).collect()
    }

    pub fn get(&self, language: &str, term: &str) -> Option<&DictionaryEntry> {
        self.entries.get(&(language.to_string(), term.to_string()))
    }

    pub fn contains(&self, language: &str, term: &str) -> bool {
        self.get(language, term).is_some()
    }

    pub fn entries(&self) -> impl Iterator<Item = &DictionaryEntry> {
        self.entries.values()
    }

    pub fn terms<'a>(&'a self, language: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.entries
            .keys()
            .filter(move |(l, _)| l == language)
            .map(|(_, t)| t.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn spell_index(&self, language: &str) -> Option<&SpellIndex> {
        self.spell.get(language)
    }

    /// Parses the tab-separated format:
    /// `term  language  kind  synonyms  related(term:label)  categories`.
    pub fn parse(text: &str, default_language: &str) -> Result<Self, DictionaryError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let fail = |reason: String| DictionaryError::Format { line, reason };
            if raw.trim().is_empty() || raw.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = raw.split('\t').collect();
            if cols.len() != 6 {
                return Err(fail(format!("expected 6 tab-separated columns, found {}", cols.len())));
            }
            let term = cols[0].trim().to_string();
            if term.is_empty() || term != term.to_lowercase() {
                return Err(fail(format!("term `{term}` must be nonempty lowercase")));
            }
            let kind = match cols[2].trim() {
                "TERM" => TermKind::Term,
                "STOPWORD" => TermKind::Stopword,
                other => return Err(fail(format!("unknown kind `{other}`"))),
            };
            let synonyms: Vec<String> = split_list(cols[3]).map(str::to_string).collect();
            if synonyms.contains(&term) {
                return Err(fail(format!("`{term}` lists itself as a synonym")));
            }
            let related = split_list(cols[4])
                .map(|r| {
                    r.split_once(':')
                        .map(|(t, l)| (t.trim().to_string(), l.trim().to_string()))
                        .ok_or_else(|| fail(format!("related item `{r}` lacks `:label`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let categories = split_list(cols[5])
                .map(|c| c.parse::<Category>().map_err(|e| fail(e.to_string())))
                .collect::<Result<BTreeSet<_>, _>>()?;
            if kind == TermKind::Stopword && !(synonyms.is_empty() && related.is_empty() && categories.is_empty()) {
                return Err(fail(format!("stopword `{term}` carries annotations")));
            }
            entries.push(DictionaryEntry {
                term,
                language: cols[1].trim().to_string(),
                kind,
                synonyms,
                related,
                categories,
            });
        }
        Dictionary::new(entries, default_language)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# term\tlanguage\tkind\tsynonyms\trelated\tcategories\n");
        for e in self.entries.values() {
            let related: Vec<String> = e.related.iter().map(|(t, l)| format!("{t}:{l}")).collect();
            let cats: Vec<&str> = e.categories.iter().map(|c| c.slug()).collect();
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                e.term,
                e.language,
                e.kind.as_str(),
                e.synonyms.join(","),
                related.join(","),
                cats.join(",")
            );
        }
        out
    }
}

fn split_list(col: &str) -> impl Iterator<Item = &str> {
    col.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// The bundled English/Bulgarian dictionary built from the medical
/// vocabulary.
pub fn fixture_dictionary() -> Dictionary {
    let mut en: BTreeMap<String, DictionaryEntry> = BTreeMap::new();
    fn add(en: &mut BTreeMap<String, DictionaryEntry>, t: &str, cats: &[Category]) {
        let e = en.entry(t.to_string()).or_insert_with(|| DictionaryEntry {
            term: t.to_string(),
            language: "en".into(),
            kind: TermKind::Term,
            synonyms: Vec::new(),
            related: Vec::new(),
            categories: BTreeSet::new(),
        });
        e.categories.extend(cats.iter().copied());
    }
    for CategoryVocab {
        category,
        diseases,
        symptoms,
        ..
    } in VOCAB.iter()
    {
        for d in diseases.iter() {
            for w in d.split_whitespace() {
                add(&mut en, w, &[*category]);
            }
        }
        for s in symptoms.iter() {
            add(&mut en, s, &[*category]);
        }
    }
    for (t, cats) in GENERAL_SYMPTOMS {
        add(&mut en, t, cats);
    }
    for (a, b) in SYNONYMS_EN {
        let cats: Vec<Category> = en
            .get(*a)
            .map(|e| e.categories.iter().copied().collect())
            .unwrap_or_default();
        add(&mut en, a, &cats);
        add(&mut en, b, &cats);
        en.get_mut(*a).unwrap().synonyms.push(b.to_string());
        en.get_mut(*b).unwrap().synonyms.push(a.to_string());
    }
    for (a, b, label) in RELATIONS_EN {
        add(&mut en, a, &[]);
        add(&mut en, b, &[]);
        en.get_mut(*a).unwrap().related.push((b.to_string(), label.to_string()));
    }
    let mut entries: Vec<DictionaryEntry> = en.into_values().collect();
    for w in STOPWORDS_EN {
        entries.retain(|e| e.term != *w);
        entries.push(stopword(w, "en"));
    }
    for (t, cats, syns) in TERMS_BG {
        entries.push(DictionaryEntry {
            term: t.to_string(),
            language: "bg".into(),
            kind: TermKind::Term,
            synonyms: syns.iter().map(|s| s.to_string()).collect(),
            related: Vec::new(),
            categories: cats.iter().copied().collect(),
        });
    }
    for w in STOPWORDS_BG {
        entries.push(stopword(w, "bg"));
    }
    Dictionary::new(entries, "en").expect("fixture is nonempty")
}

fn stopword(w: &str, lang: &str) -> DictionaryEntry {
    DictionaryEntry {
        term: w.to_string(),
        language: lang.to_string(),
        kind: TermKind::Stopword,
        synonyms: Vec::new(),
        related: Vec::new(),
        categories: BTreeSet::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_is_large_bilingual_and_covers_taxonomy() {
        let d = fixture_dictionary();
        assert!(d.len() >= 200, "only {} entries", d.len());
        assert_eq!(d.languages(), BTreeSet::from(["bg", "en"]));
        let covered: BTreeSet<Category> = d.entries().flat_map(|e| e.categories.iter().copied()).collect();
        assert_eq!(covered.len(), 13);
        for w in ["between", "do", "on"] {
            assert_eq!(d.get("en", w).unwrap().kind, TermKind::Stopword);
        }
        for e in d.entries() {
            assert!(!e.synonyms.contains(&e.term));
            assert_eq!(e.term, e.term.to_lowercase());
            if e.kind == TermKind::Stopword {
                assert!(e.synonyms.is_empty() && e.related.is_empty() && e.categories.is_empty());
            }
        }
    }

    #[test]
    fn fixture_synonyms_are_symmetric() {
        let d = fixture_dictionary();
        assert_eq!(d.get("en", "fever").unwrap().synonyms, ["pyrexia"]);
        assert_eq!(d.get("en", "pyrexia").unwrap().synonyms, ["fever"]);
        for e in d.entries() {
            for s in &e.synonyms {
                let back = d.get(&e.language, s).expect("synonym is an entry");
                assert!(back.synonyms.contains(&e.term), "{} -> {}", e.term, s);
            }
        }
    }

    #[test]
    fn tsv_round_trip() {
        let d = fixture_dictionary();
        let text = d.to_tsv();
        assert_eq!(Dictionary::parse(&text, "en").unwrap(), d);
    }

    #[test]
    fn parse_rejects_bad_lines() {
        assert!(matches!(Dictionary::parse("Fever\ten\tTERM\t\t\t", "en"), Err(DictionaryError::Format { line: 1, .. })));
        assert!(Dictionary::parse("fever\ten\tNOUN\t\t\t", "en").is_err());
        assert!(Dictionary::parse("fever\ten\tTERM\tfever\t\t", "en").is_err());
        assert!(Dictionary::parse("on\ten\tSTOPWORD\t\t\turinary", "en").is_err());
        assert!(Dictionary::parse("fever\ten\tTERM\t\tcough\t", "en").is_err());
        assert!(Dictionary::parse("fever\ten\tTERM\t\t\telbow", "en").is_err());
        assert_eq!(Dictionary::parse("# only a comment\n", "en"), Err(DictionaryError::Empty));
        let d = Dictionary::parse("# c\nfever\ten\tTERM\tpyrexia\tcough:co-symptom\trespiratory-chest\n", "en").unwrap();
        let e = d.get("en", "fever").unwrap();
        assert_eq!(e.related, [("cough".to_string(), "co-symptom".to_string())]);
        assert_eq!(e.categories, BTreeSet::from([Category::RespiratoryChest]));
    }

    #[test]
    fn delete_variants_of_short_word() {
        let v = delete_variants("abc", 2);
        let expected: BTreeSet<String> = ["abc", "ab", "ac", "bc", "a", "b", "c"].iter().map(|s| s.to_string()).collect();
        assert_eq!(v, expected);
    }
}
