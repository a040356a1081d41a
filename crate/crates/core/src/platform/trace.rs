//! Sniffer-style record of every delivered message plus a lifecycle log of
//! spawns, deaths and migrations sharing one logical clock.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::message::{Message, Performative};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub seq: u64,
    pub t_ms: f64,
    pub performative: Performative,
    pub from: String,
    pub to: String,
    pub conversation: String,
    /// Sender and receiver incarnations at delivery time.
    #[serde(skip)]
    pub from_incarnation: u32,
    #[serde(skip)]
    pub to_incarnation: u32,
    /// Position on the logical clock shared with [`LifecycleEvent`].
    #[serde(skip)]
    pub tick: u64,
    #[serde(skip)]
    pub message_id: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LifecycleKind {
    Spawned,
    Died,
    MigrationStarted { dest: String },
    Arrived { dest: String },
    HookCompleted { dest: String },
    MigrationAborted { dest: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LifecycleEvent {
    pub tick: u64,
    pub t_ms: f64,
    pub agent: String,
    pub incarnation: u32,
    pub kind: LifecycleKind,
}

#[derive(Debug)]
pub(crate) struct TraceLog {
    pub enabled: bool,
    pub events: Vec<TraceEvent>,
    pub lifecycle: Vec<LifecycleEvent>,
    next_seq: u64,
    tick: u64,
}

impl Default for TraceLog {
    fn default() -> Self {
        TraceLog {
            enabled: true,
            events: Vec::new(),
            lifecycle: Vec::new(),
            next_seq: 1,
            tick: 0,
        }
    }
}

impl TraceLog {
    /// Stamps `msg` with the next delivery sequence number.
    pub fn deliver(&mut self, msg: &mut Message, t_ms: f64) {
        msg.seq = self.next_seq;
        self.next_seq += 1;
        self.tick += 1;
        if self.enabled {
            self.events.push(TraceEvent {
                seq: msg.seq,
                t_ms,
                performative: msg.performative,
                from: msg.sender.name.clone(),
                to: msg.receiver.name.clone(),
                conversation: msg.conversation_id.clone(),
                from_incarnation: msg.sender.incarnation,
                to_incarnation: msg.receiver.incarnation,
                tick: self.tick,
                message_id: msg.id,
            });
        }
    }

    pub fn lifecycle(&mut self, agent: &str, incarnation: u32, t_ms: f64, kind: LifecycleKind) {
        self.tick += 1;
        self.lifecycle.push(LifecycleEvent {
            tick: self.tick,
            t_ms,
            agent: agent.to_string(),
            incarnation,
            kind,
        });
    }

    pub fn clear(&mut self) {
        self.events.clear();
        self.lifecycle.clear();
    }
}

/// Writes one JSON object per line with keys `seq`, `t_ms`, `performative`,
/// `from`, `to`, `conversation`.
pub fn export_trace<W: Write>(events: &[TraceEvent], mut out: W) -> io::Result<()> {
    for ev in events {
        serde_json::to_writer(&mut out, ev)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn import_trace<R: BufRead>(input: R) -> io::Result<Vec<TraceEvent>> {
    let mut events = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(serde_json::from_str(&line).map_err(io::Error::other)?);
    }
    Ok(events)
}
