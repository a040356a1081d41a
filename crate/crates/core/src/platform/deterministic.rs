//! Single-threaded discrete-event scheduler over a virtual clock.
//!
//! Every agent owns a local cursor (`busy_until`). A handler starts at
//! `max(arrival, busy_until)`, advances the cursor through `Context::work`
//! and message costs, and its outgoing messages arrive at the cursor value
//! reached when each one was paid for. Concurrency between agents therefore
//! shows up as overlapping virtual intervals.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::sync::Mutex;

use super::context::{Clock, Context};
use super::message::{Message, Performative};
use super::trace::LifecycleKind;
use super::{Behavior, PlatformError, Shared};

const PRIO_ARRIVE: u8 = 0;
const PRIO_MOVE: u8 = 1;
const PRIO_DELIVER: u8 = 2;

enum Event {
    Deliver(Message),
    Arrive { agent: String, dest: String, state: Vec<u8> },
    Move { agent: String, dest: String },
}

struct Scheduled {
    at: f64,
    prio: u8,
    order: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Scheduled {}
impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        self.at
            .total_cmp(&other.at)
            .then(self.prio.cmp(&other.prio))
            .then(self.order.cmp(&other.order))
    }
}

struct Slot {
    behavior: Option<Box<dyn Behavior>>,
    busy_until: f64,
    in_transit_until: Option<f64>,
}

#[derive(Default)]
struct State {
    now: f64,
    order: u64,
    queue: BinaryHeap<Reverse<Scheduled>>,
    slots: HashMap<String, Slot>,
}

impl State {
    fn push(&mut self, at: f64, prio: u8, event: Event) {
        self.order += 1;
        let order = self.order;
        self.push_with_order(at, prio, order, event);
    }

    fn push_with_order(&mut self, at: f64, prio: u8, order: u64, event: Event) {
        self.queue.push(Reverse(Scheduled {
            at,
            prio,
            order,
            event,
        }));
    }

    /// Earliest time the agent can start something new, if later than now.
    fn blocked_until(&self, name: &str) -> Option<f64> {
        let slot = self.slots.get(name)?;
        if let Some(t) = slot.in_transit_until {
            return Some(t.max(self.now));
        }
        (slot.busy_until > self.now).then_some(slot.busy_until)
    }
}

pub(crate) struct DetRuntime {
    state: Mutex<State>,
}

impl DetRuntime {
    pub fn new() -> Self {
        DetRuntime {
            state: Mutex::new(State::default()),
        }
    }

    pub fn now(&self) -> f64 {
        self.state.lock().unwrap().now
    }

    pub fn spawn(&self, name: &str, behavior: Box<dyn Behavior>) {
        let mut st = self.state.lock().unwrap();
        let now = st.now;
        st.slots.insert(
            name.to_string(),
            Slot {
                behavior: Some(behavior),
                busy_until: now,
                in_transit_until: None,
            },
        );
    }

    pub fn remove(&self, name: &str) {
        self.state.lock().unwrap().slots.remove(name);
    }

    pub fn post(&self, shared: &Shared, msg: Message) {
        let mut st = self.state.lock().unwrap();
        let at = st.now + shared.config.c_msg;
        st.push(at, PRIO_DELIVER, Event::Deliver(msg));
    }

    pub fn move_agent(&self, shared: &Shared, name: &str, dest: &str) -> Result<(), PlatformError> {
        let mark = shared.trace.lock().unwrap().lifecycle.len();
        {
            let mut st = self.state.lock().unwrap();
            let now = st.now;
            st.push(
                now,
                PRIO_MOVE,
                Event::Move {
                    agent: name.to_string(),
                    dest: dest.to_string(),
                },
            );
        }
        self.run_until_idle(shared);
        let trace = shared.trace.lock().unwrap();
        let aborted = trace.lifecycle[mark..].iter().any(|e| {
            e.agent == name && matches!(&e.kind, LifecycleKind::MigrationAborted { dest: d } if d == dest)
        });
        if aborted {
            Err(PlatformError::MigrationAborted {
                agent: name.to_string(),
                dest: dest.to_string(),
            })
        } else {
            Ok(())
        }
    }

    pub fn run_until_idle(&self, shared: &Shared) {
        self.run_until(shared, || false);
    }

    pub fn run_until(&self, shared: &Shared, mut stop: impl FnMut() -> bool) {
        let mut st = self.state.lock().unwrap();
        while !stop() {
            let Some(Reverse(next)) = st.queue.pop() else {
                break;
            };
            if next.at > st.now {
                st.now = next.at;
            }
            match next.event {
                Event::Deliver(msg) => deliver(&mut st, shared, msg, next.order),
                Event::Arrive { agent, dest, state } => arrive(&mut st, shared, &agent, &dest, state),
                Event::Move { agent, dest } => {
                    if let Some(t) = st.blocked_until(&agent) {
                        st.push_with_order(t, PRIO_MOVE, next.order, Event::Move { agent, dest });
                    } else if st.slots.contains_key(&agent) {
                        let now = st.now;
                        start_migration(&mut st, shared, &agent, &dest, now);
                    }
                }
            }
        }
    }
}

fn deliver(st: &mut State, shared: &Shared, mut msg: Message, order: u64) {
    let name = msg.receiver.name.clone();
    let entry = {
        let reg = shared.registry.read().unwrap();
        reg.entry(&name).filter(|e| e.alive).cloned()
    };
    let Some(entry) = entry.filter(|_| st.slots.contains_key(&name)) else {
        bounce(st, shared, msg);
        return;
    };
    if let Some(t) = st.blocked_until(&name) {
        st.push_with_order(t, PRIO_DELIVER, order, Event::Deliver(msg));
        return;
    }
    let now = st.now;
    msg.receiver = entry.id.clone();
    shared.trace.lock().unwrap().deliver(&mut msg, now);
    let mut behavior = st
        .slots
        .get_mut(&name)
        .and_then(|s| s.behavior.take())
        .expect("idle agent has its behavior");
    let mut ctx = Context::new(shared, entry.id, entry.location, Clock::Virtual(now));
    behavior.handle(&mut ctx, msg);
    finish(st, shared, &name, behavior, ctx);
}

/// Returns one FAILURE to the sender of an undeliverable message.
fn bounce(st: &mut State, shared: &Shared, msg: Message) {
    if msg.performative == Performative::Failure {
        return;
    }
    let sender_alive = shared.registry.read().unwrap().is_alive(&msg.sender.name);
    if !sender_alive {
        return;
    }
    let failure = shared.build_message(
        msg.receiver.clone(),
        &msg.sender.name,
        Performative::Failure,
        &msg.conversation_id,
        msg.failure_for("receiver is not alive"),
    );
    let at = st.now + shared.config.c_msg;
    st.push(at, PRIO_DELIVER, Event::Deliver(failure));
}

/// Flushes the outbox, stores the behavior back and starts a requested
/// migration.
fn finish(st: &mut State, shared: &Shared, name: &str, behavior: Box<dyn Behavior>, ctx: Context<'_>) {
    let Clock::Virtual(mut cursor) = ctx.clock else {
        unreachable!("deterministic contexts use the virtual clock")
    };
    let me = ctx.me.clone();
    for out in ctx.outbox {
        cursor += shared.config.c_msg;
        let msg = shared.build_message(me.clone(), &out.to, out.performative, &out.conversation, out.content);
        st.push(cursor, PRIO_DELIVER, Event::Deliver(msg));
    }
    if let Some(slot) = st.slots.get_mut(name) {
        slot.behavior = Some(behavior);
        slot.busy_until = cursor;
    }
    if let Some(dest) = ctx.pending_move {
        start_migration(st, shared, name, &dest, cursor);
    }
}

fn start_migration(st: &mut State, shared: &Shared, name: &str, dest: &str, at: f64) {
    let Some(slot) = st.slots.get_mut(name) else {
        return;
    };
    let Some(behavior) = slot.behavior.as_ref() else {
        return;
    };
    let state = behavior.save_state();
    let arrive_at = at + shared.config.c_move;
    slot.in_transit_until = Some(arrive_at);
    let incarnation = shared
        .registry
        .read()
        .unwrap()
        .entry(name)
        .map_or(0, |e| e.id.incarnation);
    shared.lifecycle(
        name,
        incarnation,
        at,
        LifecycleKind::MigrationStarted {
            dest: dest.to_string(),
        },
    );
    st.push(
        arrive_at,
        PRIO_ARRIVE,
        Event::Arrive {
            agent: name.to_string(),
            dest: dest.to_string(),
            state,
        },
    );
}

fn arrive(st: &mut State, shared: &Shared, name: &str, dest: &str, state: Vec<u8>) {
    let now = st.now;
    let Some(slot) = st.slots.get_mut(name) else {
        return;
    };
    slot.in_transit_until = None;
    slot.busy_until = now;
    let Some(mut behavior) = slot.behavior.take() else {
        return;
    };
    let dest_loc = shared.location(dest).expect("validated before migration").clone();
    if shared.take_fault(name) {
        behavior.restore_state(&state);
        let entry = shared.registry.read().unwrap().entry(name).cloned().expect("live agent");
        shared.lifecycle(
            name,
            entry.id.incarnation,
            now,
            LifecycleKind::MigrationAborted { dest: dest.to_string() },
        );
        let mut ctx = Context::new(shared, entry.id, entry.location, Clock::Virtual(now));
        behavior.on_move_failed(&mut ctx, &dest_loc);
        finish(st, shared, name, behavior, ctx);
        return;
    }
    behavior.restore_state(&state);
    let id = {
        let mut reg = shared.registry.write().unwrap();
        let entry = reg.entry_mut(name).expect("live agent");
        entry.id.incarnation += 1;
        entry.location = Some(dest.to_string());
        entry.id.clone()
    };
    shared.lifecycle(name, id.incarnation, now, LifecycleKind::Arrived { dest: dest.to_string() });
    let mut ctx = Context::new(shared, id.clone(), Some(dest.to_string()), Clock::Virtual(now));
    behavior.after_move(&mut ctx, &dest_loc);
    let Clock::Virtual(done) = ctx.clock else { unreachable!() };
    shared.lifecycle(name, id.incarnation, done, LifecycleKind::HookCompleted { dest: dest.to_string() });
    finish(st, shared, name, behavior, ctx);
}
