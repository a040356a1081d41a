//! White pages (live agents and where they are) and yellow pages (service
//! descriptions) kept as two indexes of one component.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::message::AgentId;
use super::PlatformError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ServiceDescription {
    pub service_type: String,
    pub service_name: String,
}

impl ServiceDescription {
    pub fn new(service_type: impl Into<String>, service_name: impl Into<String>) -> Self {
        ServiceDescription {
            service_type: service_type.into(),
            service_name: service_name.into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct AgentEntry {
    pub id: AgentId,
    pub alive: bool,
    pub location: Option<String>,
    pub contending: bool,
}

#[derive(Debug, Clone)]
struct Registration {
    owner: String,
    service: ServiceDescription,
}

#[derive(Debug, Default)]
pub(crate) struct Registry {
    agents: BTreeMap<String, AgentEntry>,
    services: Vec<Registration>,
}

impl Registry {
    pub fn add_agent(
        &mut self,
        name: &str,
        location: Option<String>,
        contending: bool,
    ) -> Result<AgentId, PlatformError> {
        if let Some(e) = self.agents.get(name) {
            if e.alive {
                return Err(PlatformError::NameTaken(name.to_string()));
            }
        }
        // A name may be reused after the previous holder died; continue its
        // incarnation counter so identities never repeat.
        let incarnation = self.agents.get(name).map_or(1, |e| e.id.incarnation + 1);
        let id = AgentId::new(name, incarnation);
        self.agents.insert(
            name.to_string(),
            AgentEntry {
                id: id.clone(),
                alive: true,
                location,
                contending,
            },
        );
        Ok(id)
    }

    pub fn entry(&self, name: &str) -> Option<&AgentEntry> {
        self.agents.get(name)
    }

    pub fn entry_mut(&mut self, name: &str) -> Option<&mut AgentEntry> {
        self.agents.get_mut(name)
    }

    pub fn is_alive(&self, name: &str) -> bool {
        self.agents.get(name).is_some_and(|e| e.alive)
    }

    pub fn mark_dead(&mut self, name: &str) -> bool {
        match self.agents.get_mut(name) {
            Some(e) if e.alive => {
                e.alive = false;
                self.services.retain(|r| r.owner != name);
                true
            }
            _ => false,
        }
    }

    pub fn live_agents(&self) -> Vec<AgentId> {
        self.agents
            .values()
            .filter(|e| e.alive)
            .map(|e| e.id.clone())
            .collect()
    }

    pub fn contending_count(&self) -> usize {
        self.agents.values().filter(|e| e.alive && e.contending).count()
    }

    pub fn register(&mut self, owner: &str, svc: ServiceDescription) -> Result<(), PlatformError> {
        if !self.is_alive(owner) {
            return Err(PlatformError::NoSuchAgent(owner.to_string()));
        }
        if self
            .services
            .iter()
            .any(|r| r.owner == owner && r.service.service_type == svc.service_type)
        {
            return Err(PlatformError::AlreadyRegistered {
                agent: owner.to_string(),
                service_type: svc.service_type,
            });
        }
        self.services.push(Registration {
            owner: owner.to_string(),
            service: svc,
        });
        Ok(())
    }

    pub fn deregister(&mut self, owner: &str, service_type: &str) -> bool {
        let before = self.services.len();
        self.services
            .retain(|r| !(r.owner == owner && r.service.service_type == service_type));
        before != self.services.len()
    }

    /// Live owners of `service_type`, in registration order.
    pub fn search(&self, service_type: &str) -> Vec<AgentId> {
        self.services
            .iter()
            .filter(|r| r.service.service_type == service_type)
            .filter_map(|r| self.agents.get(&r.owner))
            .filter(|e| e.alive)
            .map(|e| e.id.clone())
            .collect()
    }
}
