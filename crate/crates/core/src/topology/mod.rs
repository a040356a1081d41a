//! The two collection topologies and the end-to-end search that drives
//! them.
//!
//! A static deployment runs a coordinator plus one web agent per place,
//! and the web agents collect in parallel. A mobile deployment runs a
//! single coordinator that migrates through the filtered places and
//! collects at each stop. Each [`Topology`] owns its own platform, so
//! contention only reflects the agents that topology actually runs.

pub mod agents;
mod search;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use agents::{CollectionReport, COORDINATION_SERVICE, COORDINATOR, QUERY_MOD, WEB_PREFIX};
pub use search::{build_results, SearchError, SearchResponse, SearchSystem, SystemConfig};

use crate::corpus::{collect_terms, Corpus, Pacer, ScrapeError, SearchFormSpec, SiteRecord, Transport};
use crate::platform::{
    Location, Performative, Platform, PlatformConfig, PlatformError, ServiceDescription, SpawnOptions, TraceEvent,
};
use crate::security::{check_assurance, AssuranceLevel};
use crate::taxonomy::Category;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TopologyKind {
    Static,
    Mobile,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 2] = [TopologyKind::Static, TopologyKind::Mobile];

    pub fn as_str(self) -> &'static str {
        match self {
            TopologyKind::Static => "STATIC",
            TopologyKind::Mobile => "MOBILE",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TopologyKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "static" => Ok(TopologyKind::Static),
            "mobile" => Ok(TopologyKind::Mobile),
            other => Err(format!("unknown topology `{other}` (expected static or mobile)")),
        }
    }
}

/// The request that crosses from the query side to a coordinator. It is
/// built only from sanitized content.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutboundRequest {
    pub search_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record_key: Option<String>,
    pub terms: Vec<String>,
    pub categories: BTreeSet<Category>,
    pub required_assurance: u8,
}

/// One record as found at one place, with the search terms that hit it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectedRecord {
    pub location_id: String,
    pub assurance_level: u8,
    pub categories: BTreeSet<Category>,
    pub record: SiteRecord,
    pub matched_terms: BTreeSet<String>,
}

/// Runs every term against one place and folds hits on the same record.
pub fn collect_at(
    location: &Location,
    terms: &[String],
    form: &SearchFormSpec,
    transport: &dyn Transport,
    pacer: &mut dyn Pacer,
) -> Result<Vec<CollectedRecord>, ScrapeError> {
    let mut out: Vec<CollectedRecord> = Vec::new();
    for (term, hits) in collect_terms(location, terms, form, transport, pacer)? {
        for record in hits {
            match out.iter_mut().find(|c| c.record.record_id == record.record_id) {
                Some(c) => {
                    c.matched_terms.insert(term.clone());
                }
                None => out.push(CollectedRecord {
                    location_id: location.location_id.clone(),
                    assurance_level: location.assurance_level(),
                    categories: location.categories.clone(),
                    record,
                    matched_terms: BTreeSet::from([term.clone()]),
                }),
            }
        }
    }
    Ok(out)
}

/// Places serving one of `categories` whose site meets `required`, in the
/// given order.
pub fn filter_locations(all: &[Location], categories: &BTreeSet<Category>, required: AssuranceLevel) -> Vec<Location> {
    all.iter()
        .filter(|l| !l.categories.is_disjoint(categories) && check_assurance(&l.site, required))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionOutcome {
    pub topology: TopologyKind,
    pub conversation_id: String,
    pub records: Vec<CollectedRecord>,
    pub per_location_ms: BTreeMap<String, f64>,
    pub itinerary: Vec<String>,
    pub failures: Vec<String>,
    pub messages_sent: usize,
    pub total_ms: f64,
}

impl CollectionOutcome {
    /// `(location_id, record_id)` pairs, for content comparisons.
    pub fn record_keys(&self) -> BTreeSet<(String, String)> {
        self.records
            .iter()
            .map(|r| (r.location_id.clone(), r.record.record_id.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopologyError {
    #[error(transparent)]
    Platform(#[from] PlatformError),
    #[error("coordinator failed: {0}")]
    Coordinator(String),
    #[error("no coordinator is registered")]
    NoCoordinator,
}

/// Keeps only messages among the query-modification agent, the
/// coordinator and the web agents.
pub fn choreography(trace: &[TraceEvent], conversation: &str) -> Vec<TraceEvent> {
    let role = |name: &str| name == QUERY_MOD || name == COORDINATOR || name.starts_with(WEB_PREFIX);
    trace
        .iter()
        .filter(|e| e.conversation == conversation && role(&e.from) && role(&e.to))
        .cloned()
        .collect()
}

/// Whether a projected static trace reads REQUEST, REQUEST+, CONFIRM+,
/// CONFIRM.
pub fn matches_static_pattern(events: &[TraceEvent]) -> bool {
    let p: Vec<Performative> = events.iter().map(|e| e.performative).collect();
    if p.len() < 4 || p[0] != Performative::Request || p[p.len() - 1] != Performative::Confirm {
        return false;
    }
    let middle = &p[1..p.len() - 1];
    let requests = middle.iter().take_while(|x| **x == Performative::Request).count();
    let confirms = middle[requests..].iter().take_while(|x| **x == Performative::Confirm).count();
    requests >= 1 && confirms >= 1 && requests + confirms == middle.len()
}

pub const REPLY_TIMEOUT: Duration = Duration::from_secs(120);

/// A booted platform running one topology over a fixed set of places.
pub struct Topology {
    kind: TopologyKind,
    platform: Platform,
    replies: agents::Replies,
    web_agents: usize,
    next_conv: AtomicU64,
    run_lock: Mutex<()>,
}

impl Topology {
    pub fn boot(
        kind: TopologyKind,
        corpus: &Corpus,
        transport: Arc<dyn Transport>,
        config: PlatformConfig,
    ) -> Result<Self, TopologyError> {
        let locations: Vec<Location> = corpus.sites.iter().cloned().map(Location::for_site).collect();
        let platform = Platform::new(config, locations);
        platform.set_tracing(true);
        let replies: agents::Replies = Arc::new(Mutex::new(HashMap::new()));
        platform.spawn(
            QUERY_MOD,
            Box::new(agents::QueryModAgent {
                replies: replies.clone(),
            }),
            SpawnOptions::default(),
        )?;
        let form = SearchFormSpec::default();
        let coordinator: Box<dyn crate::platform::Behavior> = match kind {
            TopologyKind::Static => Box::<agents::StaticCoordinator>::default(),
            TopologyKind::Mobile => Box::new(agents::MobileCoordinator::new(transport.clone(), form.clone())),
        };
        let coord = platform.spawn(COORDINATOR, coordinator, SpawnOptions::default())?;
        platform.register_service(&coord, ServiceDescription::new(COORDINATION_SERVICE, COORDINATOR))?;
        let mut web_agents = 0;
        if kind == TopologyKind::Static {
            for loc in platform.get_available_locations() {
                let name = format!("{WEB_PREFIX}{}", loc.site.site_id);
                let id = platform.spawn(
                    &name,
                    Box::new(agents::WebAgent {
                        location: loc.clone(),
                        transport: transport.clone(),
                        form: form.clone(),
                    }),
                    SpawnOptions {
                        home: Some(loc.location_id.clone()),
                        contending: true,
                    },
                )?;
                for c in &loc.categories {
                    platform.register_service(&id, ServiceDescription::new(c.name(), &loc.location_id))?;
                }
                web_agents += 1;
            }
        }
        platform.run_until_idle();
        Ok(Topology {
            kind,
            platform,
            replies,
            web_agents,
            next_conv: AtomicU64::new(1),
            run_lock: Mutex::new(()),
        })
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn platform(&self) -> &Platform {
        &self.platform
    }

    pub fn web_agent_count(&self) -> usize {
        self.web_agents
    }

    /// Sends `request` from the query-modification agent to the
    /// coordinator found in the directory and waits for the answer.
    pub fn collect(&self, request: &OutboundRequest) -> Result<CollectionOutcome, TopologyError> {
        // The deterministic scheduler is driven by the caller's thread, so
        // runs on one platform take turns.
        let _turn = self.run_lock.lock().unwrap();
        let conv = format!(
            "{}-{}-{}",
            self.kind.as_str().to_lowercase(),
            self.next_conv.fetch_add(1, Ordering::Relaxed),
            request.search_id
        );
        let coordinator = self
            .platform
            .search_service(COORDINATION_SERVICE)
            .into_iter()
            .next()
            .ok_or(TopologyError::NoCoordinator)?;
        let (tx, rx) = crossbeam_channel::bounded(1);
        self.replies.lock().unwrap().insert(conv.clone(), tx);
        let content = serde_json::to_value(request).expect("request serializes");
        let started = self.platform.now_ms();
        let sent = self
            .platform
            .send(QUERY_MOD, &coordinator.name, Performative::Request, &conv, content);
        if let Err(e) = sent {
            self.replies.lock().unwrap().remove(&conv);
            return Err(e.into());
        }
        let reply = match self.platform.wait_for(&rx, REPLY_TIMEOUT) {
            Ok(m) => m,
            Err(e) => {
                self.replies.lock().unwrap().remove(&conv);
                return Err(e.into());
            }
        };
        let finished = self.platform.now_ms();
        self.platform.run_until_idle();
        let expected = match self.kind {
            TopologyKind::Static => Performative::Confirm,
            TopologyKind::Mobile => Performative::Inform,
        };
        if reply.performative != expected {
            return Err(TopologyError::Coordinator(reply.content.to_string()));
        }
        let report: CollectionReport =
            serde_json::from_value(reply.content).map_err(|e| TopologyError::Coordinator(e.to_string()))?;
        let messages_sent = self
            .platform
            .sniffer_trace()
            .iter()
            .filter(|e| e.conversation == conv)
            .count();
        Ok(CollectionOutcome {
            topology: self.kind,
            conversation_id: conv,
            records: report.records,
            per_location_ms: report.per_location_ms,
            itinerary: report.itinerary,
            failures: report.failures,
            messages_sent,
            total_ms: finished - started,
        })
    }

    pub fn sniffer_trace(&self) -> Vec<TraceEvent> {
        self.platform.sniffer_trace()
    }

    pub fn clear_trace(&self) {
        self.platform.clear_trace();
    }
}

/// Collects with the static topology.
pub fn run_static(topology: &Topology, request: &OutboundRequest) -> Result<CollectionOutcome, TopologyError> {
    debug_assert_eq!(topology.kind(), TopologyKind::Static);
    topology.collect(request)
}

/// Collects with the mobile topology.
pub fn run_mobile(topology: &Topology, request: &OutboundRequest) -> Result<CollectionOutcome, TopologyError> {
    debug_assert_eq!(topology.kind(), TopologyKind::Mobile);
    topology.collect(request)
}
