#![allow(dead_code)]

use std::net::IpAddr;
use std::sync::Arc;

use medagent::corpus::{Corpus, InProcessTransport, RecordingTransport, SiteManifest, SiteRecord, SiteService, Transport};
use medagent::personalization::ProfileStore;
use medagent::platform::PlatformConfig;
use medagent::query::fixture_dictionary;
use medagent::security::{AssuranceLevel, Credential, PlatformSecret, Session, SessionStore};
use medagent::topology::{SearchSystem, SystemConfig, TopologyKind};
use medagent::Category;

pub fn record(site: &str, n: usize, disease: &str, drugs: &[&str]) -> SiteRecord {
    SiteRecord {
        record_id: format!("{site}-r{n:03}"),
        disease: disease.to_string(),
        description: format!("{disease} presents with pain; usually self-limiting."),
        drugs: drugs.iter().map(|d| d.to_string()).collect(),
    }
}

pub fn site(id: &str, category: Category, assurance: u8, latency: u64, diseases: &[&str]) -> SiteManifest {
    SiteManifest {
        site_id: id.to_string(),
        category,
        assurance_level: assurance,
        collect_latency_ms: latency,
        records: diseases
            .iter()
            .enumerate()
            .map(|(i, d)| record(id, i + 1, d, &["aspirin"]))
            .collect(),
    }
}

pub fn in_process(corpus: &Arc<Corpus>) -> Arc<dyn Transport> {
    Arc::new(InProcessTransport::new(SiteService::new(corpus.clone())))
}

pub fn recording(corpus: &Arc<Corpus>) -> Arc<RecordingTransport> {
    Arc::new(RecordingTransport::new(in_process(corpus)))
}

pub fn localhost() -> IpAddr {
    "127.0.0.1".parse().unwrap()
}

pub fn login(sessions: &SessionStore, user: &str) -> Session {
    sessions.register_user(user, localhost());
    sessions
        .login(&Credential {
            user_id: user.to_string(),
            source_ip: localhost(),
        })
        .unwrap()
}

pub fn system(
    corpus: &Arc<Corpus>,
    transport: Arc<dyn Transport>,
    topology: TopologyKind,
    required: u8,
    platform: PlatformConfig,
) -> SearchSystem {
    SearchSystem::new(
        corpus,
        Arc::new(fixture_dictionary()),
        transport,
        Arc::new(SessionStore::default()),
        Arc::new(ProfileStore::in_memory()),
        PlatformSecret::generate(),
        SystemConfig {
            topology,
            required_assurance: AssuranceLevel::new(required).unwrap(),
            platform,
        },
    )
    .unwrap()
}
