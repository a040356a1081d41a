use std::sync::{Arc, Mutex};
use std::time::Duration;

use super::pages::SiteService;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FetchError {
    #[error("request for {path} failed with status {status}")]
    Status { path: String, status: u16 },
    #[error("transport error for {path}: {reason}")]
    Io { path: String, reason: String },
}

/// Something that charges simulated processing time to whoever performs a
/// fetch: an agent's clock, a sleeping thread, or nothing.
pub trait Pacer {
    fn charge(&mut self, ms: f64);
}

/// Sleeps the calling thread.
#[derive(Debug, Default)]
pub struct SleepPacer;

impl Pacer for SleepPacer {
    fn charge(&mut self, ms: f64) {
        if ms > 0.0 {
            std::thread::sleep(Duration::from_secs_f64(ms / 1000.0));
        }
    }
}

/// Only adds the charged time up.
#[derive(Debug, Default)]
pub struct TallyPacer {
    pub total_ms: f64,
}

impl Pacer for TallyPacer {
    fn charge(&mut self, ms: f64) {
        self.total_ms += ms;
    }
}

/// A way of issuing `GET path` against the site service.
pub trait Transport: Send + Sync {
    fn get(&self, path_and_query: &str, pacer: &mut dyn Pacer) -> Result<String, FetchError>;
}

/// Calls the site service directly and charges its latency to the pacer.
#[derive(Debug, Clone)]
pub struct InProcessTransport {
    service: SiteService,
}

impl InProcessTransport {
    pub fn new(service: SiteService) -> Self {
        InProcessTransport { service }
    }
}

impl Transport for InProcessTransport {
    fn get(&self, path_and_query: &str, pacer: &mut dyn Pacer) -> Result<String, FetchError> {
        let resp = self.service.respond(path_and_query);
        pacer.charge(resp.latency_ms as f64);
        if resp.status == 200 {
            Ok(resp.body)
        } else {
            Err(FetchError::Status {
                path: path_and_query.to_string(),
                status: resp.status,
            })
        }
    }
}

/// Blocking HTTP client against a served corpus. Latency is incurred by
/// the server, so nothing is charged to the pacer.
#[derive(Debug, Clone)]
pub struct HttpTransport {
    base: String,
    agent: ureq::Agent,
}

impl HttpTransport {
    /// `base` is e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        let config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(30)))
            .build();
        HttpTransport {
            base: base.into().trim_end_matches('/').to_string(),
            agent: config.into(),
        }
    }
}

impl Transport for HttpTransport {
    fn get(&self, path_and_query: &str, _pacer: &mut dyn Pacer) -> Result<String, FetchError> {
        let url = format!("{}{}", self.base, path_and_query);
        let io = |e: ureq::Error| FetchError::Io {
            path: path_and_query.to_string(),
            reason: e.to_string(),
        };
        let mut resp = self.agent.get(&url).call().map_err(io)?;
        let status = resp.status().as_u16();
        if status != 200 {
            return Err(FetchError::Status {
                path: path_and_query.to_string(),
                status,
            });
        }
        resp.body_mut().read_to_string().map_err(io)
    }
}

/// Wraps a transport and keeps every requested path, for auditing what left
/// the platform.
pub struct RecordingTransport {
    inner: Arc<dyn Transport>,
    log: Mutex<Vec<String>>,
}

impl RecordingTransport {
    pub fn new(inner: Arc<dyn Transport>) -> Self {
        RecordingTransport {
            inner,
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn requests(&self) -> Vec<String> {
        self.log.lock().unwrap().clone()
    }

    pub fn clear(&self) {
        self.log.lock().unwrap().clear();
    }
}

impl Transport for RecordingTransport {
    fn get(&self, path_and_query: &str, pacer: &mut dyn Pacer) -> Result<String, FetchError> {
        self.log.lock().unwrap().push(path_and_query.to_string());
        self.inner.get(path_and_query, pacer)
    }
}
