use serde::{Deserialize, Serialize};

use crate::taxonomy::Category;

/// One disease description held by a synthetic site.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteRecord {
    pub record_id: String,
    pub disease: String,
    pub description: String,
    #[serde(default)]
    pub drugs: Vec<String>,
}

/// A synthetic medical web site: its category, identification assurance,
/// simulated per-request latency and the records it can return.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteManifest {
    pub site_id: String,
    pub category: Category,
    pub assurance_level: u8,
    pub collect_latency_ms: u64,
    #[serde(default)]
    pub records: Vec<SiteRecord>,
}

impl SiteManifest {
    /// Case-insensitive substring match on the disease field, the matching
    /// rule every site applies to a submitted search term.
    pub fn matching<'a>(&'a self, term: &str) -> impl Iterator<Item = &'a SiteRecord> + 'a {
        let needle = term.trim().to_lowercase();
        self.records
            .iter()
            .filter(move |r| !needle.is_empty() && r.disease.to_lowercase().contains(&needle))
    }
}

/// Element ids a scraper needs to drive a site's search form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchFormSpec {
    pub form_element_id: String,
    pub query_attribute_name: String,
    pub submit_button_id: String,
}

impl Default for SearchFormSpec {
    fn default() -> Self {
        SearchFormSpec {
            form_element_id: "disease-search".into(),
            query_attribute_name: "q".into(),
            submit_button_id: "disease-submit".into(),
        }
    }
}

/// An immutable set of sites.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Corpus {
    pub sites: Vec<SiteManifest>,
}

impl Corpus {
    pub fn new(sites: Vec<SiteManifest>) -> Self {
        Corpus { sites }
    }

    pub fn site(&self, site_id: &str) -> Option<&SiteManifest> {
        self.sites.iter().find(|s| s.site_id == site_id)
    }

    pub fn record_count(&self) -> usize {
        self.sites.iter().map(|s| s.records.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }
}
