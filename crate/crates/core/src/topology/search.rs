use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{CollectionOutcome, OutboundRequest, Topology, TopologyError, TopologyKind};
use crate::corpus::{Corpus, Transport};
use crate::personalization::{enrich_query, post_process, ProfileError, ProfileStore, ResultItem, UserProfile};
use crate::platform::PlatformConfig;
use crate::query::{annotate, AnnotatedQuery, Dictionary, QueryError};
use crate::security::{
    derive_record_key, pseudonymize_outbound, AssuranceLevel, PlatformSecret, SearchNonce, SecurityError,
    SensitiveValues, SessionStore,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    pub topology: TopologyKind,
    pub required_assurance: AssuranceLevel,
    pub platform: PlatformConfig,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            topology: TopologyKind::Static,
            required_assurance: AssuranceLevel::default(),
            platform: PlatformConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Security(#[from] SecurityError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

impl SearchError {
    /// The security error behind this failure, if any.
    pub fn security(&self) -> Option<&SecurityError> {
        match self {
            SearchError::Security(e) | SearchError::Profile(ProfileError::Auth(e)) => Some(e),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub annotated: AnnotatedQuery,
    /// The sanitized payload that left the query side.
    pub outbound: Value,
    pub outcome: CollectionOutcome,
    pub results: Vec<ResultItem>,
}

/// Login authority, profiles, query pipeline and one booted topology.
pub struct SearchSystem {
    pub dictionary: Arc<Dictionary>,
    pub sessions: Arc<SessionStore>,
    pub profiles: Arc<ProfileStore>,
    secret: PlatformSecret,
    config: SystemConfig,
    topology: Topology,
}

impl SearchSystem {
    pub fn new(
        corpus: &Corpus,
        dictionary: Arc<Dictionary>,
        transport: Arc<dyn Transport>,
        sessions: Arc<SessionStore>,
        profiles: Arc<ProfileStore>,
        secret: PlatformSecret,
        config: SystemConfig,
    ) -> Result<Self, TopologyError> {
        let topology = Topology::boot(config.topology, corpus, transport, config.platform)?;
        Ok(SearchSystem {
            dictionary,
            sessions,
            profiles,
            secret,
            config,
            topology,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    /// Authenticates, annotates and enriches the query, sanitizes the
    /// outbound request, collects, then resolves, merges and ranks.
    pub fn end_to_end_search(&self, token: &str, raw: &str) -> Result<SearchResponse, SearchError> {
        let session = self.sessions.validate(token)?;
        let profile = self.profiles.load_or_new(&session.user_id)?;
        let annotated = annotate(raw, &self.dictionary, Some(&profile))?;
        let enriched = enrich_query(&annotated, &profile);

        let mut search_id = [0u8; 16];
        rand::thread_rng().fill_bytes(&mut search_id);
        let draft = json!({
            "search_id": hex::encode(search_id),
            "user_id": session.user_id,
            "terms": enriched.search_terms(),
            "categories": enriched.target_categories,
            "required_assurance": self.config.required_assurance.level(),
        });
        let sensitive = SensitiveValues::for_session(&session, profile.private_values());
        let key = derive_record_key(&self.secret, &session.user_id, SearchNonce::fresh());
        let outbound = pseudonymize_outbound(&draft, &sensitive, &key)?;
        let request: OutboundRequest =
            serde_json::from_value(outbound.clone()).map_err(|_| SecurityError::SanitizationFailure)?;

        let outcome = self.topology.collect(&request)?;
        let results = build_results(&outcome, &profile);
        Ok(SearchResponse {
            annotated: enriched,
            outbound,
            outcome,
            results,
        })
    }
}

/// Turns collected records into ranked result items for `profile`.
pub fn build_results(outcome: &CollectionOutcome, profile: &UserProfile) -> Vec<ResultItem> {
    let items = outcome
        .records
        .iter()
        .map(|c| {
            ResultItem::new(
                c.record.clone(),
                &c.location_id,
                c.assurance_level,
                c.categories.clone(),
                c.matched_terms.clone(),
            )
        })
        .collect();
    post_process(items, profile)
}
