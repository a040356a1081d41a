//! One OS thread per agent, crossbeam channels as mailboxes, real clock.

use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use crossbeam_channel::{unbounded, Receiver, Sender};

use super::context::{Clock, Context};
use super::message::{Message, Performative};
use super::trace::LifecycleKind;
use super::{Behavior, PlatformError, Shared};

pub(crate) enum Envelope {
    Deliver(Message),
    Move(String, Sender<Result<(), PlatformError>>),
    Stop,
}

pub(crate) struct ThreadedRuntime {
    handles: Mutex<Vec<JoinHandle<()>>>,
}

impl ThreadedRuntime {
    pub fn new() -> Self {
        ThreadedRuntime {
            handles: Mutex::new(Vec::new()),
        }
    }

    pub fn spawn(&self, shared: &Arc<Shared>, name: &str, behavior: Box<dyn Behavior>) {
        let (tx, rx) = unbounded();
        shared.mailboxes.write().unwrap().insert(name.to_string(), tx);
        let shared = shared.clone();
        let agent = name.to_string();
        let handle = std::thread::Builder::new()
            .name(format!("agent-{name}"))
            .spawn(move || agent_loop(shared, agent, behavior, rx))
            .expect("spawn agent thread");
        self.handles.lock().unwrap().push(handle);
    }

    pub fn stop(&self, shared: &Shared, name: &str) {
        if let Some(tx) = shared.mailboxes.write().unwrap().remove(name) {
            let _ = tx.send(Envelope::Stop);
        }
    }

    pub fn move_agent(&self, shared: &Shared, name: &str, dest: &str) -> Result<(), PlatformError> {
        let (ack_tx, ack_rx) = unbounded();
        let tx = shared
            .mailboxes
            .read()
            .unwrap()
            .get(name)
            .cloned()
            .ok_or_else(|| PlatformError::NoSuchAgent(name.to_string()))?;
        tx.send(Envelope::Move(dest.to_string(), ack_tx))
            .map_err(|_| PlatformError::NoSuchAgent(name.to_string()))?;
        ack_rx
            .recv_timeout(Duration::from_secs(60))
            .map_err(|_| PlatformError::Timeout)?
    }

    pub fn shutdown(&self, shared: &Shared) {
        let senders: Vec<_> = shared.mailboxes.write().unwrap().drain().collect();
        for (_, tx) in senders {
            let _ = tx.send(Envelope::Stop);
        }
        for h in self.handles.lock().unwrap().drain(..) {
            let _ = h.join();
        }
    }
}

pub(crate) fn pay_message_cost(shared: &Shared) {
    if shared.config.c_msg > 0.0 {
        std::thread::sleep(Duration::from_secs_f64(shared.config.c_msg / 1000.0));
    }
}

/// Enqueues `msg` in the receiver's mailbox and stamps it in the trace as a
/// single step, or bounces a FAILURE back to the sender.
pub(crate) fn deliver(shared: &Shared, mut msg: Message) {
    let boxes = shared.mailboxes.read().unwrap();
    let receiver = {
        let reg = shared.registry.read().unwrap();
        reg.entry(&msg.receiver.name).filter(|e| e.alive).map(|e| e.id.clone())
    };
    let now = shared.real_now_ms();
    if let (Some(id), Some(tx)) = (receiver, boxes.get(&msg.receiver.name)) {
        msg.receiver = id;
        let mut trace = shared.trace.lock().unwrap();
        trace.deliver(&mut msg, now);
        // A receiver stopped between lookup and send keeps the stamp: the
        // message reached its mailbox, which is never drained again.
        let _ = tx.send(Envelope::Deliver(msg));
        return;
    }
    if msg.performative == Performative::Failure {
        return;
    }
    let sender = {
        let reg = shared.registry.read().unwrap();
        reg.entry(&msg.sender.name).filter(|e| e.alive).map(|e| e.id.clone())
    };
    let (Some(sender_id), Some(tx)) = (sender, boxes.get(&msg.sender.name)) else {
        return;
    };
    let mut failure = Message {
        id: shared.next_message_id(),
        performative: Performative::Failure,
        sender: msg.receiver.clone(),
        receiver: sender_id,
        conversation_id: msg.conversation_id.clone(),
        content: msg.failure_for("receiver is not alive"),
        seq: 0,
    };
    let mut trace = shared.trace.lock().unwrap();
    trace.deliver(&mut failure, now);
    let _ = tx.send(Envelope::Deliver(failure));
}

fn agent_loop(shared: Arc<Shared>, name: String, mut behavior: Box<dyn Behavior>, rx: Receiver<Envelope>) {
    while let Ok(env) = rx.recv() {
        match env {
            Envelope::Stop => break,
            Envelope::Deliver(msg) => {
                let Some(entry) = current_entry(&shared, &name) else {
                    break;
                };
                let mut ctx = Context::new(&shared, entry.0, entry.1, Clock::Real);
                behavior.handle(&mut ctx, msg);
                if let Some(dest) = flush(&shared, ctx) {
                    // Aborts reach the agent through on_move_failed.
                    let _ = migrate(&shared, &name, behavior.as_mut(), dest);
                }
            }
            Envelope::Move(dest, ack) => {
                let r = migrate(&shared, &name, behavior.as_mut(), dest);
                let _ = ack.send(r);
            }
        }
    }
}

fn current_entry(shared: &Shared, name: &str) -> Option<(super::AgentId, Option<String>)> {
    let reg = shared.registry.read().unwrap();
    reg.entry(name)
        .filter(|e| e.alive)
        .map(|e| (e.id.clone(), e.location.clone()))
}

fn flush(shared: &Shared, ctx: Context<'_>) -> Option<String> {
    for out in ctx.outbox {
        pay_message_cost(shared);
        let msg = shared.build_message(ctx.me.clone(), &out.to, out.performative, &out.conversation, out.content);
        deliver(shared, msg);
    }
    ctx.pending_move
}

/// Runs a migration and any migrations chained from its hooks. Returns the
/// outcome of the first hop.
fn migrate(shared: &Shared, name: &str, behavior: &mut dyn Behavior, dest: String) -> Result<(), PlatformError> {
    let mut first: Option<Result<(), PlatformError>> = None;
    let mut next = Some(dest);
    while let Some(dest) = next.take() {
        let Some((id, _)) = current_entry(shared, name) else {
            return first.unwrap_or(Err(PlatformError::NoSuchAgent(name.to_string())));
        };
        let dest_loc = shared.location(&dest).expect("validated before migration").clone();
        shared.lifecycle(
            name,
            id.incarnation,
            shared.real_now_ms(),
            LifecycleKind::MigrationStarted { dest: dest.clone() },
        );
        let state = behavior.save_state();
        if shared.config.c_move > 0.0 {
            std::thread::sleep(Duration::from_secs_f64(shared.config.c_move / 1000.0));
        }
        if shared.take_fault(name) {
            behavior.restore_state(&state);
            shared.lifecycle(
                name,
                id.incarnation,
                shared.real_now_ms(),
                LifecycleKind::MigrationAborted { dest: dest.clone() },
            );
            first.get_or_insert(Err(PlatformError::MigrationAborted {
                agent: name.to_string(),
                dest: dest.clone(),
            }));
            let Some((id, loc)) = current_entry(shared, name) else {
                break;
            };
            let mut ctx = Context::new(shared, id, loc, Clock::Real);
            behavior.on_move_failed(&mut ctx, &dest_loc);
            next = flush(shared, ctx);
            continue;
        }
        behavior.restore_state(&state);
        let id = {
            let mut reg = shared.registry.write().unwrap();
            let Some(entry) = reg.entry_mut(name).filter(|e| e.alive) else {
                return first.unwrap_or(Err(PlatformError::NoSuchAgent(name.to_string())));
            };
            entry.id.incarnation += 1;
            entry.location = Some(dest.clone());
            entry.id.clone()
        };
        shared.lifecycle(name, id.incarnation, shared.real_now_ms(), LifecycleKind::Arrived { dest: dest.clone() });
        let mut ctx = Context::new(shared, id.clone(), Some(dest.clone()), Clock::Real);
        behavior.after_move(&mut ctx, &dest_loc);
        shared.lifecycle(
            name,
            id.incarnation,
            shared.real_now_ms(),
            LifecycleKind::HookCompleted { dest: dest.clone() },
        );
        first.get_or_insert(Ok(()));
        next = flush(shared, ctx);
    }
    first.unwrap_or(Ok(()))
}
