use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Identity of an agent. The incarnation is bumped every time the agent
/// completes a migration, so messages can be attributed to the hop that
/// produced them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AgentId {
    pub name: String,
    pub incarnation: u32,
}

impl AgentId {
    pub fn new(name: impl Into<String>, incarnation: u32) -> Self {
        AgentId {
            name: name.into(),
            incarnation,
        }
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.name, self.incarnation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Performative {
    Request,
    Inform,
    Confirm,
    Failure,
}

impl Performative {
    pub fn as_str(self) -> &'static str {
        match self {
            Performative::Request => "REQUEST",
            Performative::Inform => "INFORM",
            Performative::Confirm => "CONFIRM",
            Performative::Failure => "FAILURE",
        }
    }
}

impl fmt::Display for Performative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Performative {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "REQUEST" => Ok(Performative::Request),
            "INFORM" => Ok(Performative::Inform),
            "CONFIRM" => Ok(Performative::Confirm),
            "FAILURE" => Ok(Performative::Failure),
            other => Err(format!("unknown performative `{other}`")),
        }
    }
}

/// Platform-wide identifier assigned when a message is sent. Unlike `seq`
/// it exists for messages that are never delivered.
pub type MessageId = u64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub id: MessageId,
    pub performative: Performative,
    pub sender: AgentId,
    pub receiver: AgentId,
    pub conversation_id: String,
    pub content: Value,
    /// Assigned at delivery; zero until then.
    pub seq: u64,
}

impl Message {
    /// Content of the FAILURE returned to `self.sender` when `self` cannot
    /// be delivered.
    pub(crate) fn failure_for(&self, reason: &str) -> Value {
        serde_json::json!({
            "undeliverable": self.id,
            "performative": self.performative.as_str(),
            "reason": reason,
        })
    }
}
