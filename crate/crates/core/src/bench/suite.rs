use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{MetricsReport, QueryOutcome};
use crate::corpus::{generate_corpus, Corpus};
use crate::personalization::UserProfile;
use crate::platform::Location;
use crate::query::{annotate, Dictionary, QueryError};
use crate::security::AssuranceLevel;
use crate::taxonomy::Category;
use crate::topology::{filter_locations, SearchError, SearchSystem};
use crate::vocab::vocab_for;

pub const SUITE_SIZE: usize = 225;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub query_id: String,
    pub category: Category,
    pub raw: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySuite {
    pub queries: Vec<Query>,
}

impl QuerySuite {
    pub fn len(&self) -> usize {
        self.queries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queries.is_empty()
    }

    pub fn per_category(&self) -> BTreeMap<Category, usize> {
        let mut m = BTreeMap::new();
        for q in &self.queries {
            *m.entry(q.category).or_default() += 1;
        }
        m
    }
}

/// `(query_id, record_id) -> relevance`. A query with no entries at all is
/// not covered.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgments {
    pub entries: BTreeMap<String, BTreeMap<String, u8>>,
}

impl Judgments {
    pub fn set(&mut self, query_id: &str, record_id: &str, relevance: u8) {
        self.entries
            .entry(query_id.to_string())
            .or_default()
            .insert(record_id.to_string(), relevance);
    }

    pub fn covers(&self, query_id: &str) -> bool {
        self.entries.get(query_id).is_some_and(|m| !m.is_empty())
    }

    pub fn relevant(&self, query_id: &str) -> Option<BTreeSet<String>> {
        let m = self.entries.get(query_id).filter(|m| !m.is_empty())?;
        Some(m.iter().filter(|(_, r)| **r == 1).map(|(id, _)| id.clone()).collect())
    }

    /// Every referenced query exists in `suite` and every record in `corpus`.
    pub fn validate(&self, suite: &QuerySuite, corpus: &Corpus) -> Result<(), SuiteError> {
        let queries: BTreeSet<&str> = suite.queries.iter().map(|q| q.query_id.as_str()).collect();
        let records: BTreeSet<&str> = corpus
            .sites
            .iter()
            .flat_map(|s| s.records.iter().map(|r| r.record_id.as_str()))
            .collect();
        for (q, m) in &self.entries {
            if !queries.contains(q.as_str()) {
                return Err(SuiteError::UnknownId(format!("query {q}")));
            }
            if let Some(r) = m.keys().find(|r| !records.contains(r.as_str())) {
                return Err(SuiteError::UnknownId(format!("record {r}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("duplicate query id {0}")]
    DuplicateQuery(String),
    #[error("unknown {0}")]
    UnknownId(String),
    #[error("query {query_id}: {source}")]
    Search {
        query_id: String,
        #[source]
        source: SearchError,
    },
}

pub fn suite_to_tsv(suite: &QuerySuite) -> String {
    suite
        .queries
        .iter()
        .map(|q| format!("{}\t{}\t{}\n", q.query_id, q.category.slug(), q.raw))
        .collect()
}

pub fn parse_suite(text: &str) -> Result<QuerySuite, SuiteError> {
    let mut seen = BTreeSet::new();
    let mut queries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let parse = |reason: String| SuiteError::Parse { line: i + 1, reason };
        let cols: Vec<&str> = line.splitn(3, '\t').collect();
        let [id, cat, raw] = cols[..] else {
            return Err(parse("expected query_id, category and query text".into()));
        };
        let category: Category = cat.parse().map_err(|e: crate::taxonomy::UnknownCategory| parse(e.to_string()))?;
        if !seen.insert(id.to_string()) {
            return Err(SuiteError::DuplicateQuery(id.to_string()));
        }
        queries.push(Query {
            query_id: id.to_string(),
            category,
            raw: raw.to_string(),
        });
    }
    Ok(QuerySuite { queries })
}

pub fn judgments_to_tsv(j: &Judgments) -> String {
    let mut out = String::new();
    for (q, m) in &j.entries {
        for (r, rel) in m {
            out.push_str(&format!("{q}\t{r}\t{rel}\n"));
        }
    }
    out
}

pub fn parse_judgments(text: &str) -> Result<Judgments, SuiteError> {
    let mut j = Judgments::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let parse = |reason: &str| SuiteError::Parse {
            line: i + 1,
            reason: reason.to_string(),
        };
        let cols: Vec<&str> = line.split('\t').collect();
        let [q, r, rel] = cols[..] else {
            return Err(parse("expected query_id, record_id and relevance"));
        };
        let rel = match rel.trim() {
            "0" => 0,
            "1" => 1,
            _ => return Err(parse("relevance must be 0 or 1")),
        };
        j.set(q, r, rel);
    }
    Ok(j)
}

const PHRASINGS: &[&str] = &["{d}", "{m}", "what is {d}", "do i have {d}", "{d} and {s}", "pain between {d}"];

/// Generates `SUITE_SIZE` queries spread over the thirteen categories, and
/// judges as relevant every record of `corpus` whose disease contains the
/// disease the query was written about.
pub fn generate_suite(seed: u64, corpus: &Corpus) -> (QuerySuite, Judgments) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = SUITE_SIZE / Category::ALL.len();
    let extra = SUITE_SIZE % Category::ALL.len();
    let mut queries = Vec::with_capacity(SUITE_SIZE);
    let mut judgments = Judgments::default();
    for (ci, category) in Category::ALL.into_iter().enumerate() {
        let vocab = vocab_for(category);
        let count = base + usize::from(ci < extra);
        for i in 0..count {
            let disease = vocab.diseases[i % vocab.diseases.len()];
            let phrasing = PHRASINGS[(i + i / vocab.diseases.len()) % PHRASINGS.len()];
            let symptom = vocab.symptoms.choose(&mut rng).copied().unwrap_or("pain");
            let raw = phrasing
                .replace("{d}", disease)
                .replace("{m}", &misspell(&mut rng, disease))
                .replace("{s}", symptom);
            let query_id = format!("q{:03}", queries.len() + 1);
            for site in &corpus.sites {
                for r in site.records.iter().filter(|r| r.disease.to_lowercase().contains(disease)) {
                    judgments.set(&query_id, &r.record_id, 1);
                }
            }
            queries.push(Query { query_id, category, raw });
        }
    }
    (QuerySuite { queries }, judgments)
}

/// One substitution in the middle of the longest word, when it has at least
/// five letters.
fn misspell(rng: &mut ChaCha8Rng, phrase: &str) -> String {
    let longest = phrase.split(' ').max_by_key(|w| w.len()).unwrap_or(phrase);
    if longest.chars().count() < 5 {
        return phrase.to_string();
    }
    let mut chars: Vec<char> = longest.chars().collect();
    let at = chars.len() / 2;
    let original = chars[at];
    let mut c = original;
    while c == original {
        c = rng.gen_range(b'a'..=b'z') as char;
    }
    chars[at] = c;
    phrase.replacen(longest, &chars.into_iter().collect::<String>(), 1)
}

/// A corpus on which the collection pipeline loses nothing: every site
/// meets any assurance requirement and records of the same disease list the
/// same drugs, so conflict resolution never drops a record.
pub fn perfect_oracle_corpus(seed: u64) -> Corpus {
    let mut corpus = generate_corpus(seed, 1, 8);
    for site in &mut corpus.sites {
        site.assurance_level = 3;
        for r in &mut site.records {
            r.drugs = vec![format!("{}-regimen", r.disease.replace(' ', "-"))];
        }
    }
    corpus
}

/// Judges relevant exactly the records the collection stage can reach:
/// records at the filtered sites whose disease contains a search term of
/// the annotated query.
pub fn oracle_judgments(
    suite: &QuerySuite,
    corpus: &Corpus,
    dict: &Dictionary,
    profile: Option<&UserProfile>,
    required: AssuranceLevel,
) -> Judgments {
    let locations: Vec<Location> = corpus.sites.iter().cloned().map(Location::for_site).collect();
    let mut j = Judgments::default();
    for q in &suite.queries {
        let Ok(annotated) = annotate(&q.raw, dict, profile) else {
            continue;
        };
        let terms = annotated.search_terms();
        for loc in filter_locations(&locations, &annotated.target_categories, required) {
            for r in &loc.site.records {
                let disease = r.disease.to_lowercase();
                if terms.iter().any(|t| disease.contains(t.as_str())) {
                    j.set(&q.query_id, &r.record_id, 1);
                }
            }
        }
    }
    j
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRun {
    pub report: MetricsReport,
    pub outcomes: Vec<QueryOutcome>,
    /// The sanitized request of every query that reached collection.
    pub outbound: Vec<serde_json::Value>,
}

/// Runs every covered query through the end-to-end search as the holder of
/// `token`. Queries without judgments are skipped and listed as coverage
/// gaps; a query emptied by stopword removal retrieves nothing.
pub fn run_suite(
    suite: &QuerySuite,
    judgments: &Judgments,
    system: &SearchSystem,
    token: &str,
) -> Result<SuiteRun, SuiteError> {
    let mut outcomes = Vec::new();
    let mut gaps = Vec::new();
    let mut outbound = Vec::new();
    for q in &suite.queries {
        let Some(relevant) = judgments.relevant(&q.query_id) else {
            gaps.push(q.query_id.clone());
            continue;
        };
        let retrieved = match system.end_to_end_search(token, &q.raw) {
            Ok(resp) => {
                outbound.push(resp.outbound);
                resp.results
                    .iter()
                    .flat_map(|item| item.sources.iter().map(|s| s.record_id.clone()))
                    .collect()
            }
            Err(SearchError::Query(QueryError::EmptyQuery)) => BTreeSet::new(),
            Err(source) => {
                return Err(SuiteError::Search {
                    query_id: q.query_id.clone(),
                    source,
                })
            }
        };
        outcomes.push(QueryOutcome {
            query_id: q.query_id.clone(),
            category: q.category,
            retrieved,
            relevant,
        });
    }
    Ok(SuiteRun {
        report: MetricsReport::from_outcomes(&outcomes, gaps),
        outcomes,
        outbound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_shape() {
        let corpus = generate_corpus(5, 1, 8);
        let (suite, judgments) = generate_suite(5, &corpus);
        assert_eq!(suite.len(), SUITE_SIZE);
        let per = suite.per_category();
        assert_eq!(per.len(), 13);
        assert!(per.values().all(|n| (17..=18).contains(n)));
        let ids: BTreeSet<&str> = suite.queries.iter().map(|q| q.query_id.as_str()).collect();
        assert_eq!(ids.len(), SUITE_SIZE);
        judgments.validate(&suite, &corpus).unwrap();
        assert_eq!(generate_suite(5, &corpus), (suite, judgments));
    }

    #[test]
    fn tsv_round_trips() {
        let corpus = generate_corpus(2, 1, 6);
        let (suite, judgments) = generate_suite(2, &corpus);
        assert_eq!(parse_suite(&suite_to_tsv(&suite)).unwrap(), suite);
        assert_eq!(parse_judgments(&judgments_to_tsv(&judgments)).unwrap(), judgments);
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(matches!(parse_suite("q1\tnowhere\tfever"), Err(SuiteError::Parse { line: 1, .. })));
        assert!(matches!(
            parse_suite("q1\turinary\ta\nq1\turinary\tb"),
            Err(SuiteError::DuplicateQuery(_))
        ));
        assert!(matches!(parse_judgments("q1\tr1\t2"), Err(SuiteError::Parse { .. })));
    }

    #[test]
    fn misspelling_changes_one_letter() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = misspell(&mut rng, "heart failure");
        assert_ne!(m, "heart failure");
        assert_eq!(m.len(), "heart failure".len());
        assert!(m.starts_with("heart "));
        assert_eq!(misspell(&mut rng, "flu"), "flu");
    }
}
