//! Agent runtime: lifecycle, white/yellow pages, mailbox messaging,
//! logical migration between locations and a sniffer trace.
//!
//! Two schedulers share one API. [`SchedulerMode::Deterministic`] runs every
//! agent on the caller's thread against a virtual millisecond clock, which
//! makes traces and timings reproducible. [`SchedulerMode::Threaded`] gives
//! each agent its own thread and a real clock.

mod context;
mod deterministic;
mod message;
mod registry;
mod threaded;
mod trace;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use crossbeam_channel::{Receiver, RecvTimeoutError};
use serde_json::Value;

use crate::corpus::SiteManifest;
use crate::taxonomy::Category;

pub use context::Context;
pub use message::{AgentId, Message, MessageId, Performative};
pub use registry::ServiceDescription;
pub use trace::{export_trace, import_trace, LifecycleEvent, LifecycleKind, TraceEvent};

use deterministic::DetRuntime;
use threaded::{Envelope, ThreadedRuntime};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlatformError {
    #[error("agent name `{0}` is already taken")]
    NameTaken(String),
    #[error("agent `{agent}` already registered service type `{service_type}`")]
    AlreadyRegistered { agent: String, service_type: String },
    #[error("no live agent named `{0}`")]
    NoSuchAgent(String),
    #[error("no location `{0}`")]
    NoSuchLocation(String),
    #[error("agent `{0}` cannot message itself")]
    SelfSend(String),
    #[error("migration of `{agent}` to `{dest}` aborted")]
    MigrationAborted { agent: String, dest: String },
    #[error("timed out waiting for the platform")]
    Timeout,
}

/// A place hosting one site.
#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub location_id: String,
    pub site: Arc<SiteManifest>,
    pub categories: BTreeSet<Category>,
}

impl Location {
    pub fn for_site(site: SiteManifest) -> Self {
        Location {
            location_id: format!("loc-{}", site.site_id),
            categories: BTreeSet::from([site.category]),
            site: Arc::new(site),
        }
    }

    pub fn assurance_level(&self) -> u8 {
        self.site.assurance_level
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchedulerMode {
    #[default]
    Deterministic,
    Threaded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatformConfig {
    pub mode: SchedulerMode,
    /// Cost charged to the sender for each message, in milliseconds.
    pub c_msg: f64,
    /// Transfer time of one migration hop, in milliseconds.
    pub c_move: f64,
    /// Fractional slowdown of all agent work per live contending agent.
    pub kappa: f64,
}

impl Default for PlatformConfig {
    fn default() -> Self {
        PlatformConfig {
            mode: SchedulerMode::Deterministic,
            c_msg: 0.0,
            c_move: 0.0,
            kappa: 0.0,
        }
    }
}

/// Agent code. Handlers run one at a time per agent.
pub trait Behavior: Send + 'static {
    fn handle(&mut self, ctx: &mut Context<'_>, msg: Message);

    /// Runs exactly once after each completed migration, at the destination.
    fn after_move(&mut self, _ctx: &mut Context<'_>, _dest: &Location) {}

    /// Runs when a migration was aborted; the agent is still at its origin.
    fn on_move_failed(&mut self, _ctx: &mut Context<'_>, _dest: &Location) {}

    /// Migratable state. Everything not captured here is treated as local
    /// to the hosting place and survives only because migration is logical.
    fn save_state(&self) -> Vec<u8> {
        Vec::new()
    }

    fn restore_state(&mut self, _state: &[u8]) {}
}

#[derive(Debug, Clone, Default)]
pub struct SpawnOptions {
    pub home: Option<String>,
    /// Whether the agent counts towards the contention factor.
    pub contending: bool,
}

pub(crate) struct Shared {
    pub config: PlatformConfig,
    pub locations: Vec<Location>,
    pub registry: RwLock<registry::Registry>,
    pub trace: Mutex<trace::TraceLog>,
    pub mailboxes: RwLock<HashMap<String, crossbeam_channel::Sender<Envelope>>>,
    next_msg_id: AtomicU64,
    faults: Mutex<HashSet<String>>,
    pub epoch: Instant,
}

impl Shared {
    pub fn location(&self, id: &str) -> Option<&Location> {
        self.locations.iter().find(|l| l.location_id == id)
    }

    pub fn contention_factor(&self) -> f64 {
        let n = self.registry.read().unwrap().contending_count();
        1.0 + self.config.kappa * n as f64
    }

    pub fn next_message_id(&self) -> MessageId {
        self.next_msg_id.fetch_add(1, Ordering::Relaxed)
    }

    pub fn take_fault(&self, agent: &str) -> bool {
        self.faults.lock().unwrap().remove(agent)
    }

    pub fn real_now_ms(&self) -> f64 {
        self.epoch.elapsed().as_secs_f64() * 1000.0
    }

    pub fn lifecycle(&self, agent: &str, incarnation: u32, t_ms: f64, kind: LifecycleKind) {
        self.trace.lock().unwrap().lifecycle(agent, incarnation, t_ms, kind);
    }

    pub fn build_message(
        &self,
        sender: AgentId,
        to: &str,
        performative: Performative,
        conversation: &str,
        content: Value,
    ) -> Message {
        let receiver = self
            .registry
            .read()
            .unwrap()
            .entry(to)
            .map(|e| e.id.clone())
            .unwrap_or_else(|| AgentId::new(to, 0));
        Message {
            id: self.next_message_id(),
            performative,
            sender,
            receiver,
            conversation_id: conversation.to_string(),
            content,
            seq: 0,
        }
    }
}

enum Runtime {
    Deterministic(DetRuntime),
    Threaded(ThreadedRuntime),
}

pub struct Platform {
    shared: Arc<Shared>,
    runtime: Runtime,
}

impl Platform {
    /// Boots a platform whose places are `locations`, kept sorted by id.
    pub fn new(config: PlatformConfig, mut locations: Vec<Location>) -> Self {
        locations.sort_by(|a, b| a.location_id.cmp(&b.location_id));
        locations.dedup_by(|a, b| a.location_id == b.location_id);
        let shared = Arc::new(Shared {
            config,
            locations,
            registry: RwLock::new(registry::Registry::default()),
            trace: Mutex::new(trace::TraceLog::default()),
            mailboxes: RwLock::new(HashMap::new()),
            next_msg_id: AtomicU64::new(1),
            faults: Mutex::new(HashSet::new()),
            epoch: Instant::now(),
        });
        let runtime = match config.mode {
            SchedulerMode::Deterministic => Runtime::Deterministic(DetRuntime::new()),
            SchedulerMode::Threaded => Runtime::Threaded(ThreadedRuntime::new()),
        };
        Platform { shared, runtime }
    }

    pub fn config(&self) -> &PlatformConfig {
        &self.shared.config
    }

    pub fn spawn(
        &self,
        name: &str,
        behavior: Box<dyn Behavior>,
        opts: SpawnOptions,
    ) -> Result<AgentId, PlatformError> {
        if let Some(home) = &opts.home {
            if self.shared.location(home).is_none() {
                return Err(PlatformError::NoSuchLocation(home.clone()));
            }
        }
        let id = self
            .shared
            .registry
            .write()
            .unwrap()
            .add_agent(name, opts.home.clone(), opts.contending)?;
        self.shared
            .lifecycle(name, id.incarnation, self.now_ms(), LifecycleKind::Spawned);
        match &self.runtime {
            Runtime::Deterministic(rt) => rt.spawn(name, behavior),
            Runtime::Threaded(rt) => rt.spawn(&self.shared, name, behavior),
        }
        Ok(id)
    }

    /// Terminates an agent. Its services disappear from the yellow pages and
    /// later messages addressed to it bounce as FAILURE.
    pub fn kill(&self, name: &str) -> bool {
        let (dead, incarnation) = {
            let mut reg = self.shared.registry.write().unwrap();
            let inc = reg.entry(name).map_or(0, |e| e.id.incarnation);
            (reg.mark_dead(name), inc)
        };
        if dead {
            self.shared
                .lifecycle(name, incarnation, self.now_ms(), LifecycleKind::Died);
            match &self.runtime {
                Runtime::Deterministic(rt) => rt.remove(name),
                Runtime::Threaded(rt) => rt.stop(&self.shared, name),
            }
        }
        dead
    }

    pub fn agent(&self, name: &str) -> Option<AgentId> {
        let reg = self.shared.registry.read().unwrap();
        reg.entry(name).filter(|e| e.alive).map(|e| e.id.clone())
    }

    pub fn live_agents(&self) -> Vec<AgentId> {
        self.shared.registry.read().unwrap().live_agents()
    }

    pub fn location_of(&self, name: &str) -> Option<String> {
        let reg = self.shared.registry.read().unwrap();
        reg.entry(name).and_then(|e| e.location.clone())
    }

    pub fn register_service(&self, agent: &AgentId, svc: ServiceDescription) -> Result<(), PlatformError> {
        self.shared.registry.write().unwrap().register(&agent.name, svc)
    }

    pub fn deregister_service(&self, agent: &AgentId, service_type: &str) -> bool {
        self.shared
            .registry
            .write()
            .unwrap()
            .deregister(&agent.name, service_type)
    }

    pub fn search_service(&self, service_type: &str) -> Vec<AgentId> {
        self.shared.registry.read().unwrap().search(service_type)
    }

    pub fn get_available_locations(&self) -> Vec<Location> {
        self.shared.locations.clone()
    }

    pub fn contention_factor(&self) -> f64 {
        self.shared.contention_factor()
    }

    /// Sends a message on behalf of the live agent `from`.
    pub fn send(
        &self,
        from: &str,
        to: &str,
        performative: Performative,
        conversation: &str,
        content: Value,
    ) -> Result<MessageId, PlatformError> {
        let sender = self
            .agent(from)
            .ok_or_else(|| PlatformError::NoSuchAgent(from.to_string()))?;
        if from == to {
            return Err(PlatformError::SelfSend(to.to_string()));
        }
        let msg = self
            .shared
            .build_message(sender, to, performative, conversation, content);
        let id = msg.id;
        match &self.runtime {
            Runtime::Deterministic(rt) => rt.post(&self.shared, msg),
            Runtime::Threaded(_) => {
                threaded::pay_message_cost(&self.shared);
                threaded::deliver(&self.shared, msg);
            }
        }
        Ok(id)
    }

    /// Migrates `name` to `dest` and returns once the after-move hook ran.
    pub fn move_agent(&self, name: &str, dest: &str) -> Result<(), PlatformError> {
        if self.shared.location(dest).is_none() {
            return Err(PlatformError::NoSuchLocation(dest.to_string()));
        }
        if self.agent(name).is_none() {
            return Err(PlatformError::NoSuchAgent(name.to_string()));
        }
        match &self.runtime {
            Runtime::Deterministic(rt) => rt.move_agent(&self.shared, name, dest),
            Runtime::Threaded(rt) => rt.move_agent(&self.shared, name, dest),
        }
    }

    /// Makes the next migration attempted by `name` fail in transit.
    pub fn inject_migration_fault(&self, name: &str) {
        self.shared.faults.lock().unwrap().insert(name.to_string());
    }

    /// Deterministic mode: processes events until none remain. Threaded mode:
    /// no-op.
    pub fn run_until_idle(&self) {
        if let Runtime::Deterministic(rt) = &self.runtime {
            rt.run_until_idle(&self.shared);
        }
    }

    /// Waits for a value an agent pushes into `rx`, driving the
    /// deterministic scheduler if needed.
    pub fn wait_for<T>(&self, rx: &Receiver<T>, timeout: Duration) -> Result<T, PlatformError> {
        match &self.runtime {
            Runtime::Deterministic(rt) => {
                if let Ok(v) = rx.try_recv() {
                    return Ok(v);
                }
                rt.run_until(&self.shared, || !rx.is_empty());
                rx.try_recv().map_err(|_| PlatformError::Timeout)
            }
            Runtime::Threaded(_) => rx.recv_timeout(timeout).map_err(|e| match e {
                RecvTimeoutError::Timeout | RecvTimeoutError::Disconnected => PlatformError::Timeout,
            }),
        }
    }

    /// Current time on the scheduler's clock, milliseconds.
    pub fn now_ms(&self) -> f64 {
        match &self.runtime {
            Runtime::Deterministic(rt) => rt.now(),
            Runtime::Threaded(_) => self.shared.real_now_ms(),
        }
    }

    pub fn set_tracing(&self, enabled: bool) {
        self.shared.trace.lock().unwrap().enabled = enabled;
    }

    pub fn clear_trace(&self) {
        self.shared.trace.lock().unwrap().clear();
    }

    pub fn sniffer_trace(&self) -> Vec<TraceEvent> {
        self.shared.trace.lock().unwrap().events.clone()
    }

    pub fn lifecycle(&self) -> Vec<LifecycleEvent> {
        self.shared.trace.lock().unwrap().lifecycle.clone()
    }
}

impl Drop for Platform {
    fn drop(&mut self) {
        if let Runtime::Threaded(rt) = &self.runtime {
            rt.shutdown(&self.shared);
        }
    }
}
