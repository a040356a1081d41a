//! Synthetic medical sites: generation, persistence, serving and scraping.

mod generate;
pub mod html;
mod model;
mod pages;
mod scrape;
mod serve;
mod store;
mod transport;

use std::collections::BTreeSet;

pub use generate::{generate_corpus, known_diseases};
pub use model::{Corpus, SearchFormSpec, SiteManifest, SiteRecord};
pub use pages::{results_page, search_page, SiteResponse, SiteService, RECORD_ID_ATTR};
pub use scrape::{collect_terms, fill_and_submit, get_results, parse_results, ScrapeError};
pub use serve::{serve, serve_router, site_router, RunningServer, ServeError};
pub use store::{load_corpus, save_corpus, CorpusStoreError, INDEX_FILE};
pub use transport::{
    FetchError, HttpTransport, InProcessTransport, Pacer, RecordingTransport, SleepPacer, TallyPacer, Transport,
};

/// Drugs listed by every record whose disease equals `disease`
/// (case-insensitive), deduplicated and sorted.
pub fn drug_lookup(disease: &str, corpus: &Corpus) -> Vec<String> {
    let wanted = disease.trim().to_lowercase();
    corpus
        .sites
        .iter()
        .flat_map(|s| s.records.iter())
        .filter(|r| r.disease.to_lowercase() == wanted)
        .flat_map(|r| r.drugs.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}
