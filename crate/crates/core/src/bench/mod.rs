//! Timing models and measured runs of both topologies, and the retrieval
//! quality harness.

mod metrics;
mod suite;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use metrics::{f_measure, precision, recall, CategoryMetrics, MetricsReport, QueryOutcome};
pub use suite::{
    generate_suite, oracle_judgments, parse_judgments, parse_suite, perfect_oracle_corpus, run_suite,
    suite_to_tsv, judgments_to_tsv, Judgments, Query, QuerySuite, SuiteError, SuiteRun, SUITE_SIZE,
};

use crate::corpus::{Corpus, Transport};
use crate::platform::{Location, PlatformConfig, SchedulerMode};
use crate::security::AssuranceLevel;
use crate::topology::{filter_locations, OutboundRequest, Topology, TopologyError, TopologyKind};

/// Reference response times for the two topologies; the calibration target
/// is their mobile-over-static ratio.
pub const REFERENCE_STATIC_MS: f64 = 80524.0;
pub const REFERENCE_MOBILE_MS: f64 = 75123.0;
pub const REFERENCE_RATIO: f64 = REFERENCE_MOBILE_MS / REFERENCE_STATIC_MS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub c_msg: f64,
    pub c_move: f64,
    pub kappa: f64,
    pub repetitions: usize,
    pub mode: SchedulerModeName,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchedulerModeName {
    Deterministic,
    Threaded,
}

impl From<SchedulerModeName> for SchedulerMode {
    fn from(m: SchedulerModeName) -> Self {
        match m {
            SchedulerModeName::Deterministic => SchedulerMode::Deterministic,
            SchedulerModeName::Threaded => SchedulerMode::Threaded,
        }
    }
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            c_msg: 0.0,
            c_move: 0.0,
            kappa: 0.0,
            repetitions: 10,
            mode: SchedulerModeName::Deterministic,
        }
    }
}

impl BenchmarkConfig {
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("c_msg", self.c_msg), ("c_move", self.c_move), ("kappa", self.kappa)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(format!("{name} must be a finite value >= 0, got {v}"));
            }
        }
        if self.repetitions == 0 {
            return Err("repetitions must be >= 1".into());
        }
        Ok(())
    }

    pub fn platform(&self) -> PlatformConfig {
        PlatformConfig {
            mode: self.mode.into(),
            c_msg: self.c_msg,
            c_move: self.c_move,
            kappa: self.kappa,
        }
    }
}

/// `max_i(collect_i * (1 + kappa * n_agents)) + c_msg * m_static`.
pub fn model_static_time(cfg: &BenchmarkConfig, collects: &[f64], n_agents: usize, m_static: usize) -> f64 {
    let slow = 1.0 + cfg.kappa * n_agents as f64;
    collects.iter().map(|c| c * slow).fold(0.0, f64::max) + cfg.c_msg * m_static as f64
}

/// `sum_i collect_i + c_msg * m_mobile + c_move * n_moves`.
pub fn model_mobile_time(cfg: &BenchmarkConfig, collects: &[f64], m_mobile: usize, n_moves: usize) -> f64 {
    collects.iter().sum::<f64>() + cfg.c_msg * m_mobile as f64 + cfg.c_move * n_moves as f64
}

/// Closed-form inputs for one request against one corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelInputs {
    pub collects: Vec<f64>,
    pub n_agents: usize,
    pub m_static: usize,
    pub m_mobile: usize,
    pub n_moves: usize,
}

impl ModelInputs {
    /// Each filtered site costs one search submission per term.
    pub fn for_request(corpus: &Corpus, request: &OutboundRequest) -> Self {
        let locations: Vec<Location> = corpus.sites.iter().cloned().map(Location::for_site).collect();
        let required = AssuranceLevel::new(request.required_assurance).unwrap_or_default();
        let mut targets = filter_locations(&locations, &request.categories, required);
        targets.sort_by(|a, b| a.location_id.cmp(&b.location_id));
        let terms = request.terms.len() as f64;
        let collects: Vec<f64> = targets.iter().map(|l| l.site.collect_latency_ms as f64 * terms).collect();
        let k = collects.len();
        ModelInputs {
            collects,
            n_agents: corpus.sites.len(),
            m_static: 2 + 2 * k,
            m_mobile: 2,
            n_moves: k,
        }
    }

    pub fn model(&self, cfg: &BenchmarkConfig, kind: TopologyKind) -> f64 {
        match kind {
            TopologyKind::Static => model_static_time(cfg, &self.collects, self.n_agents, self.m_static),
            TopologyKind::Mobile => model_mobile_time(cfg, &self.collects, self.m_mobile, self.n_moves),
        }
    }

    pub fn model_ratio(&self, cfg: &BenchmarkConfig) -> f64 {
        self.model(cfg, TopologyKind::Mobile) / self.model(cfg, TopologyKind::Static)
    }
}

/// Solves the static model for the contention coefficient that makes
/// modeled mobile / modeled static equal `target`. `None` when even
/// `kappa = 0` leaves static slower than the target allows.
pub fn calibrate_kappa(cfg: &BenchmarkConfig, inputs: &ModelInputs, target: f64) -> Option<f64> {
    let max = inputs.collects.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 || inputs.n_agents == 0 || target <= 0.0 {
        return None;
    }
    let mobile = model_mobile_time(cfg, &inputs.collects, inputs.m_mobile, inputs.n_moves);
    let wanted_static = mobile / target;
    let kappa = ((wanted_static - cfg.c_msg * inputs.m_static as f64) / max - 1.0) / inputs.n_agents as f64;
    (kappa >= 0.0).then_some(kappa)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub topology: TopologyKind,
    pub modeled_ms: f64,
    pub measured_ms: Vec<f64>,
    pub messages_sent: usize,
}

impl BenchmarkReport {
    pub fn median_ms(&self) -> f64 {
        median(&self.measured_ms)
    }

    pub fn to_machine(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    pub fn from_machine(line: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(line)
    }
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Boots `kind` once and collects `request` `cfg.repetitions` times back to
/// back, timing each run on the platform clock.
pub fn run_benchmark(
    kind: TopologyKind,
    cfg: &BenchmarkConfig,
    corpus: &Corpus,
    transport: Arc<dyn Transport>,
    request: &OutboundRequest,
) -> Result<BenchmarkReport, TopologyError> {
    let topology = Topology::boot(kind, corpus, transport, cfg.platform())?;
    let inputs = ModelInputs::for_request(corpus, request);
    let mut measured = Vec::with_capacity(cfg.repetitions);
    let mut messages_sent = 0;
    for _ in 0..cfg.repetitions.max(1) {
        let out = topology.collect(request)?;
        measured.push(out.total_ms);
        messages_sent = out.messages_sent;
    }
    Ok(BenchmarkReport {
        topology: kind,
        modeled_ms: inputs.model(cfg, kind),
        measured_ms: measured,
        messages_sent,
    })
}

/// Renders reports as an aligned table.
pub fn reports_table(reports: &[BenchmarkReport]) -> String {
    let mut out = format!(
        "{:<8} {:>12} {:>12} {:>10} {:>5}\n",
        "TOPOLOGY", "MODELED_MS", "MEDIAN_MS", "MESSAGES", "REPS"
    );
    for r in reports {
        out.push_str(&format!(
            "{:<8} {:>12.3} {:>12.3} {:>10} {:>5}\n",
            r.topology.as_str(),
            r.modeled_ms,
            r.median_ms(),
            r.messages_sent,
            r.measured_ms.len()
        ));
    }
    out
}
