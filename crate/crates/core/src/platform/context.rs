use std::time::Duration;

use serde_json::Value;

use super::message::{AgentId, Message, Performative};
use super::registry::ServiceDescription;
use super::{Location, PlatformError, Shared};
use crate::corpus::Pacer;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Clock {
    /// Virtual milliseconds; advanced by `work` and by message costs.
    Virtual(f64),
    Real,
}

#[derive(Debug)]
pub(crate) struct Outgoing {
    pub performative: Performative,
    pub to: String,
    pub conversation: String,
    pub content: Value,
}

/// Everything an agent may do while one of its handlers runs.
///
/// Outgoing messages and migration requests are buffered and acted upon
/// once the handler returns.
pub struct Context<'a> {
    pub(crate) shared: &'a Shared,
    pub(crate) me: AgentId,
    pub(crate) location: Option<String>,
    pub(crate) clock: Clock,
    pub(crate) outbox: Vec<Outgoing>,
    pub(crate) pending_move: Option<String>,
}

impl<'a> Context<'a> {
    pub(crate) fn new(shared: &'a Shared, me: AgentId, location: Option<String>, clock: Clock) -> Self {
        Context {
            shared,
            me,
            location,
            clock,
            outbox: Vec::new(),
            pending_move: None,
        }
    }

    pub fn me(&self) -> &AgentId {
        &self.me
    }

    /// The place the agent currently occupies, if any.
    pub fn location(&self) -> Option<&Location> {
        self.location.as_deref().and_then(|id| self.shared.location(id))
    }

    pub fn now_ms(&self) -> f64 {
        match self.clock {
            Clock::Virtual(t) => t,
            Clock::Real => self.shared.epoch.elapsed().as_secs_f64() * 1000.0,
        }
    }

    /// Consumes `ms` of processing time, stretched by the platform's
    /// contention factor.
    pub fn work(&mut self, ms: f64) {
        let scaled = ms.max(0.0) * self.shared.contention_factor();
        match &mut self.clock {
            Clock::Virtual(t) => *t += scaled,
            Clock::Real => std::thread::sleep(Duration::from_secs_f64(scaled / 1000.0)),
        }
    }

    pub fn contention_factor(&self) -> f64 {
        self.shared.contention_factor()
    }

    pub fn send(
        &mut self,
        to: &str,
        performative: Performative,
        conversation: &str,
        content: Value,
    ) -> Result<(), PlatformError> {
        if to == self.me.name {
            return Err(PlatformError::SelfSend(to.to_string()));
        }
        self.outbox.push(Outgoing {
            performative,
            to: to.to_string(),
            conversation: conversation.to_string(),
            content,
        });
        Ok(())
    }

    pub fn reply(&mut self, to: &Message, performative: Performative, content: Value) -> Result<(), PlatformError> {
        let conv = to.conversation_id.clone();
        self.send(&to.sender.name, performative, &conv, content)
    }

    pub fn register_service(&self, svc: ServiceDescription) -> Result<(), PlatformError> {
        self.shared.registry.write().unwrap().register(&self.me.name, svc)
    }

    pub fn deregister_service(&self, service_type: &str) -> bool {
        self.shared.registry.write().unwrap().deregister(&self.me.name, service_type)
    }

    pub fn search_service(&self, service_type: &str) -> Vec<AgentId> {
        self.shared.registry.read().unwrap().search(service_type)
    }

    pub fn available_locations(&self) -> &[Location] {
        &self.shared.locations
    }

    /// Current place of another agent according to the white pages.
    pub fn location_of(&self, agent: &str) -> Option<String> {
        self.shared
            .registry
            .read()
            .unwrap()
            .entry(agent)
            .filter(|e| e.alive)
            .and_then(|e| e.location.clone())
    }

    /// Requests migration to `dest` once the current handler returns.
    pub fn move_to(&mut self, dest: &str) -> Result<(), PlatformError> {
        if self.shared.location(dest).is_none() {
            return Err(PlatformError::NoSuchLocation(dest.to_string()));
        }
        self.pending_move = Some(dest.to_string());
        Ok(())
    }
}

impl Pacer for Context<'_> {
    fn charge(&mut self, ms: f64) {
        self.work(ms);
    }
}
